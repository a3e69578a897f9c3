#include "defiperf/certs.hpp"

#include <fstream>
#include <sstream>

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

struct Node {
  std::string atom;  // empty for lists
  std::vector<Node> items;
  std::size_t column = 0;

  bool is_list() const { return atom.empty(); }
  const std::string& head() const { return items.front().atom; }
};

[[noreturn]] void fail(const std::string& msg, std::size_t column) { throw ParseError(msg, 0, column); }

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  Node read_all() {
    Node n = read();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input", pos_ + 1);
    return n;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  Node read() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression", pos_ + 1);
    Node n;
    n.column = pos_ + 1;
    if (s_[pos_] == '(') {
      ++pos_;
      for (;;) {
        skip_ws();
        if (pos_ >= s_.size()) fail("unbalanced '('", n.column);
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        n.items.push_back(read());
      }
      if (n.items.empty() || n.items.front().is_list()) fail("expected an operator after '('", n.column);
      return n;
    }
    if (s_[pos_] == ')') fail("unexpected ')'", pos_ + 1);
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != ' ' && s_[pos_] != '\t') ++pos_;
    n.atom = std::string(s_.substr(start, pos_ - start));
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

Node parse_expr(std::string_view s) { return Reader(s).read_all(); }

Integer parse_int_atom(const Node& n) {
  if (n.is_list()) fail("expected an integer", n.column);
  std::string_view t = n.atom;
  const bool neg = !t.empty() && t.front() == '-';
  if (neg) t.remove_prefix(1);
  try {
    Integer v = parse_natural(t);
    return neg ? Integer(-v) : v;
  } catch (const DomainError&) {
    fail("malformed integer '" + n.atom + "'", n.column);
  }
}

constexpr unsigned long kMaxExactExponent = 1'000'000;

unsigned long small_exponent(const Node& n) {
  const Integer e = parse_int_atom(n);
  if (e < 0 || e > kMaxExactExponent) fail("exponent out of range", n.column);
  return e.get_ui();
}

void want_arity(const Node& n, std::size_t k) {
  if (n.items.size() != k + 1) {
    fail("'" + n.head() + "' takes " + std::to_string(k) + " argument(s)", n.column);
  }
}

void want_at_least(const Node& n, std::size_t k) {
  if (n.items.size() < k + 1) fail("'" + n.head() + "' needs arguments", n.column);
}

Natural prime_arg(const Node& n) {
  const Integer p = parse_int_atom(n);
  if (p < 2 || !is_prime(p)) throw DomainError(p.get_str() + " is not prime");
  return p;
}

bool is_integer_form(const Node& n) {
  if (!n.is_list()) return true;
  const auto& h = n.head();
  return h == "pow" || h == "powm1" || h == "sigma" || h == "mul" || h == "add" || h == "sub";
}

// Sum of p^i for i = 0..a by explicit enumeration of the divisors of p^a.
Natural sigma_by_divisors(const Natural& p, unsigned long a) {
  Natural s(0), t(1);
  for (unsigned long i = 0; i <= a; ++i) {
    s += t;
    t *= p;
  }
  return s;
}

Integer eval_int(const Node& n, bool second_path = false) {
  if (!n.is_list()) return parse_int_atom(n);
  const auto& h = n.head();
  if (h == "pow" || h == "powm1") {
    want_arity(n, 2);
    Integer v = pow(parse_int_atom(n.items[1]), small_exponent(n.items[2]));
    return h == "powm1" ? Integer(v - 1) : v;
  }
  if (h == "sigma") {
    want_arity(n, 2);
    const Natural p = prime_arg(n.items[1]);
    const auto a = small_exponent(n.items[2]);
    return second_path ? sigma_by_divisors(p, a) : sigma_prime_power(p, static_cast<unsigned>(a));
  }
  if (h == "mul" || h == "add") {
    want_at_least(n, 1);
    Integer acc = h == "mul" ? 1 : 0;
    for (std::size_t i = 1; i < n.items.size(); ++i) {
      const Integer v = eval_int(n.items[i], second_path);
      if (h == "mul") acc *= v; else acc += v;
    }
    return acc;
  }
  if (h == "sub") {
    want_arity(n, 2);
    return eval_int(n.items[1], second_path) - eval_int(n.items[2], second_path);
  }
  fail("unknown integer form '" + h + "'", n.column);
}

// Residue of an integer form modulo q, without expanding large powers.
Natural eval_mod(const Node& n, const Natural& q) {
  if (!n.is_list()) return mod(parse_int_atom(n), q);
  const auto& h = n.head();
  if (h == "pow" || h == "powm1") {
    want_arity(n, 2);
    const Integer e = parse_int_atom(n.items[2]);
    if (e < 0) fail("negative exponent", n.items[2].column);
    Natural v = powmod(parse_int_atom(n.items[1]), e, q);
    return h == "powm1" ? mod(v - 1, q) : v;
  }
  if (h == "sigma") {
    want_arity(n, 2);
    const Natural p = prime_arg(n.items[1]);
    const Integer a = parse_int_atom(n.items[2]);
    if (a < 0) fail("negative exponent", n.items[2].column);
    // (p^(a+1) - 1) / (p - 1) reduced mod q via arithmetic mod q(p - 1).
    const Natural m = q * (p - 1);
    const Natural top = mod(powmod(p, a + 1, m) - 1, m);
    Natural r;
    mpz_divexact(r.get_mpz_t(), top.get_mpz_t(), Natural(p - 1).get_mpz_t());
    return mod(r, q);
  }
  if (h == "mul" || h == "add") {
    want_at_least(n, 1);
    Natural acc = h == "mul" ? 1 : 0;
    for (std::size_t i = 1; i < n.items.size(); ++i) {
      const Natural v = eval_mod(n.items[i], q);
      acc = h == "mul" ? mod(acc * v, q) : mod(acc + v, q);
    }
    return acc;
  }
  if (h == "sub") {
    want_arity(n, 2);
    return mod(eval_mod(n.items[1], q) - eval_mod(n.items[2], q), q);
  }
  fail("unknown integer form '" + h + "'", n.column);
}

Rational eval_rat(const Node& n, bool second_path = false) {
  if (is_integer_form(n)) return Rational(eval_int(n, second_path));
  const auto& h = n.head();
  if (h == "sr") {
    want_arity(n, 2);
    const Natural p = prime_arg(n.items[1]);
    const auto a = small_exponent(n.items[2]);
    const Natural s = second_path ? sigma_by_divisors(p, a) : sigma_prime_power(p, static_cast<unsigned>(a));
    return Rational(s, pow(p, a));
  }
  if (h == "sup") {
    want_arity(n, 1);
    const Natural p = prime_arg(n.items[1]);
    return Rational(p, p - 1);
  }
  if (h == "ratio") {
    want_arity(n, 2);
    const Rational den = eval_rat(n.items[2], second_path);
    if (den == Rational(0)) throw DomainError("division by zero");
    return eval_rat(n.items[1], second_path) / den;
  }
  if (h == "inv") {
    want_arity(n, 1);
    const Rational v = eval_rat(n.items[1], second_path);
    if (v == Rational(0)) throw DomainError("division by zero");
    return v.reciprocal();
  }
  if (h == "prod" || h == "sum") {
    want_at_least(n, 1);
    Rational acc = h == "prod" ? 1 : 0;
    for (std::size_t i = 1; i < n.items.size(); ++i) {
      const Rational v = eval_rat(n.items[i], second_path);
      if (h == "prod") acc *= v; else acc += v;
    }
    return acc;
  }
  fail("unknown form '" + h + "'", n.column);
}

Integer expected_int(const std::string& text) {
  Node n;
  n.atom = text;
  n.column = 1;
  if (text.empty()) fail("empty expected value", 1);
  return parse_int_atom(n);
}

void check_head(const Node& n, const char* head, std::size_t arity) {
  if (!n.is_list() || n.head() != head) fail(std::string("expected (") + head + " ...)", n.column);
  want_arity(n, arity);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto t = line.find('\t', pos);
    out.push_back(line.substr(pos, t == std::string_view::npos ? std::string_view::npos : t - pos));
    if (t == std::string_view::npos) break;
    pos = t + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(FactKind kind) {
  switch (kind) {
    case FactKind::Order: return "ORDER";
    case FactKind::Divides: return "DIVIDES";
    case FactKind::NotDivides: return "NOTDIVIDES";
    case FactKind::Legendre: return "LEGENDRE";
    case FactKind::Inequality: return "INEQUALITY";
  }
  return "?";
}

std::string_view to_string(FactStatus status) {
  switch (status) {
    case FactStatus::Unchecked: return "Unchecked";
    case FactStatus::Confirmed: return "Confirmed";
    case FactStatus::Refuted: return "Refuted";
  }
  return "?";
}

FactKind parse_fact_kind(std::string_view text) {
  for (auto k : {FactKind::Order, FactKind::Divides, FactKind::NotDivides, FactKind::Legendre, FactKind::Inequality}) {
    if (to_string(k) == text) return k;
  }
  throw DomainError("unknown fact kind '" + std::string(text) + "'");
}

FactStatus parse_fact_status(std::string_view text) {
  for (auto s : {FactStatus::Unchecked, FactStatus::Confirmed, FactStatus::Refuted}) {
    if (to_string(s) == text) return s;
  }
  throw DomainError("unknown fact status '" + std::string(text) + "'");
}

Rational evaluate_rational(std::string_view expr) { return eval_rat(parse_expr(expr)); }

FactRecord verify_fact(FactRecord f) {
  const Node n = parse_expr(f.expr);
  bool holds = false;
  try {
    switch (f.kind) {
      case FactKind::Order: {
        check_head(n, "ord", 2);
        const Integer want = expected_int(f.expected);
        const Natural h = mult_order(mod(parse_int_atom(n.items[1]), parse_int_atom(n.items[2])),
                                     parse_int_atom(n.items[2]));
        f.actual = h.get_str();
        holds = h == want;
        break;
      }
      case FactKind::Divides:
      case FactKind::NotDivides: {
        const Integer q = expected_int(f.expected);
        if (q < 1) throw DomainError("divisor must be positive");
        const Natural r = eval_mod(n, q);
        f.actual = "residue " + r.get_str();
        holds = (r == 0) == (f.kind == FactKind::Divides);
        break;
      }
      case FactKind::Legendre: {
        check_head(n, "legendre", 2);
        const Integer want = expected_int(f.expected);
        const Integer a = parse_int_atom(n.items[1]);
        const Natural q = prime_arg(n.items[2]);
        if (q == 2) throw DomainError("legendre modulus must be odd");
        // Euler's criterion, independent of the reciprocity-based symbol.
        const Natural e = powmod(a, (q - 1) / 2, q);
        const int v = e == 0 ? 0 : (e == 1 ? 1 : -1);
        f.actual = std::to_string(v);
        holds = want == v;
        break;
      }
      case FactKind::Inequality: {
        if (f.expected != ">2" && f.expected != "<2") fail("expected '>2' or '<2'", 1);
        const Rational v = eval_rat(n);
        if (v >= Rational(19, 10) && v <= Rational(21, 10)) {
          const Rational w = eval_rat(n, true);
          if (w != v) {
            throw IntegrityError("inequality '" + f.expr + "' evaluates inconsistently: " + v.to_string() +
                                 " vs " + w.to_string());
          }
        }
        f.actual = v.to_string();
        holds = f.expected == ">2" ? v > Rational(2) : v < Rational(2);
        break;
      }
    }
  } catch (const DomainError& e) {
    f.actual = std::string("undefined: ") + e.what();
    holds = false;
  }
  f.status = holds ? FactStatus::Confirmed : FactStatus::Refuted;
  return f;
}

FactRecord fact_order(const Natural& a, const Natural& m, const Natural& value, std::string locus) {
  return {FactKind::Order, "(ord " + a.get_str() + " " + m.get_str() + ")", value.get_str(), std::move(locus), FactStatus::Unchecked, {}};
}

FactRecord fact_divides_sigma(const Natural& q, const Natural& p, unsigned a, std::string locus) {
  return {FactKind::Divides, "(sigma " + p.get_str() + " " + std::to_string(a) + ")", q.get_str(), std::move(locus), FactStatus::Unchecked, {}};
}

FactRecord fact_legendre(const Integer& a, const Natural& q, int value, std::string locus) {
  return {FactKind::Legendre, "(legendre " + a.get_str() + " " + q.get_str() + ")", std::to_string(value),
          std::move(locus), FactStatus::Unchecked, {}};
}

FactRecord fact_inequality(std::string expr, bool above_two, std::string locus) {
  return {FactKind::Inequality, std::move(expr), above_two ? ">2" : "<2", std::move(locus),
          FactStatus::Unchecked, {}};
}

bool FixtureSummary::clean_under_typo_ledger() const {
  if (!parse_errors.empty()) return false;
  for (const auto& r : records) {
    const bool literal = r.locus.find(kTypoLiteralTag) != std::string::npos;
    const auto want = literal ? FactStatus::Refuted : FactStatus::Confirmed;
    if (r.status != want) return false;
  }
  return true;
}

FixtureSummary verify_fixture_text(std::string_view text) {
  FixtureSummary out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      out.parse_errors.push_back({line_no, 1, "expected 4 tab-separated fields, got " + std::to_string(fields.size())});
      continue;
    }
    FactRecord rec;
    try {
      rec.kind = parse_fact_kind(fields[0]);
    } catch (const DomainError& e) {
      out.parse_errors.push_back({line_no, 1, e.what()});
      continue;
    }
    rec.expr = std::string(fields[1]);
    rec.expected = std::string(fields[2]);
    rec.locus = std::string(fields[3]);
    const std::size_t expr_col = fields[0].size() + 2;
    try {
      rec = verify_fact(std::move(rec));
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      const auto colon = msg.find(": ");
      out.parse_errors.push_back(
          {line_no, expr_col + e.column() - 1, colon == std::string::npos ? msg : msg.substr(colon + 2)});
      continue;
    }
    if (rec.status == FactStatus::Confirmed) ++out.confirmed; else ++out.refuted;
    out.records.push_back(std::move(rec));
  }
  return out;
}

FixtureSummary verify_fixture_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    FixtureSummary out;
    out.parse_errors.push_back({0, 0, "cannot read " + path});
    return out;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return verify_fixture_text(buf.str());
}

}  // namespace defiperf
