#include "defiperf/prune.hpp"

#include <algorithm>

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

struct DCandidate {
  Natural value;
  std::vector<unsigned> e;
};

// Everything the rules know about D at one point of the pipeline: either the
// explicit set of admissible D (as exponent vectors over the support) or an
// arithmetic progression clipped to [lower, upper].
struct DView {
  bool enumerated = false;
  std::vector<DCandidate> set;
  Natural modulus{1};
  Natural residue{0};
  Natural lower{2};
  std::optional<Natural> upper;
  bool empty = false;
  // Progression endpoints, valid when !enumerated && !empty.
  Natural ap_min;
  std::optional<Natural> ap_max;
};

struct Congruence {
  Natural modulus{1};
  Natural residue{0};
  bool ok = true;
};

Congruence crt(const Congruence& a, const Natural& m2, const Natural& r2) {
  Congruence out;
  Natural g;
  mpz_gcd(g.get_mpz_t(), a.modulus.get_mpz_t(), m2.get_mpz_t());
  const Natural diff = mod(Integer(r2 - a.residue), m2);
  if (!mpz_divisible_p(diff.get_mpz_t(), g.get_mpz_t())) {
    out.ok = false;
    return out;
  }
  const Natural m1g = a.modulus / g;
  const Natural m2g = m2 / g;
  Natural inv;
  if (m2g == 1) {
    inv = 0;
  } else {
    mpz_invert(inv.get_mpz_t(), Natural(m1g % m2g).get_mpz_t(), m2g.get_mpz_t());
  }
  out.modulus = a.modulus * m2g;
  const Natural t = mod(Integer((diff / g) * inv), m2g);
  out.residue = mod(Integer(a.residue + a.modulus * t), out.modulus);
  return out;
}

bool odd_support(const SubtreeSpec& spec) {
  for (const auto& p : spec.primes) {
    if (p == 2) return false;
  }
  return !spec.open || spec.open->min_prime > 2;
}

bool in_open_range(const SubtreeSpec& spec, const Natural& q) {
  if (!spec.open) return false;
  if (q < spec.open->min_prime) return false;
  return !spec.open->max_prime || q <= *spec.open->max_prime;
}

bool in_support(const SubtreeSpec& spec, const Natural& q) {
  return std::binary_search(spec.primes.begin(), spec.primes.end(), q) || in_open_range(spec, q);
}

// Exponent window of p_i in D, given alpha_i's range and beta_i's status.
struct EWindow {
  unsigned lo = 0;
  unsigned hi = 0;
};

std::optional<EWindow> e_window(const ExponentRange& r, BetaStatus b) {
  if (!r.max) return std::nullopt;
  switch (b) {
    case BetaStatus::Zero: return EWindow{r.min, *r.max};
    case BetaStatus::Positive: return EWindow{0, *r.max - 1};
    case BetaStatus::Unknown: return EWindow{0, *r.max};
  }
  return std::nullopt;
}

bool e_admissible(const ExponentRange& r, BetaStatus b, unsigned e) {
  if (b == BetaStatus::Zero) return r.contains(e);
  return true;
}

std::optional<Natural> max_value(const SubtreeSpec& spec);

DView build_dview(const SubtreeSpec& spec, const DConstraints& dc, std::size_t limit) {
  DView v;
  v.lower = dc.lower_bound < 2 ? Natural(2) : dc.lower_bound;
  v.upper = dc.upper_bound;
  v.modulus = dc.modulus;
  v.residue = mod(dc.residue, dc.modulus);
  if (dc.contradictory) {
    v.empty = true;
    return v;
  }

  bool can_enumerate = !spec.open;
  std::vector<EWindow> win;
  std::size_t total = 1;
  for (std::size_t i = 0; can_enumerate && i < spec.primes.size(); ++i) {
    const auto w = e_window(spec.exponents[i], spec.beta[i]);
    if (!w) {
      can_enumerate = false;
      break;
    }
    win.push_back(*w);
    const std::size_t width = w->hi - w->lo + 1;
    if (total > limit / width + 1) {
      can_enumerate = false;
      break;
    }
    total *= width;
    if (total > limit) can_enumerate = false;
  }

  if (can_enumerate) {
    v.enumerated = true;
    const std::size_t k = spec.primes.size();
    std::vector<std::vector<Natural>> pw(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (unsigned e = 0; e <= win[i].hi; ++e) pw[i].push_back(pow(spec.primes[i], e));
    }
    std::vector<unsigned> e(k);
    for (std::size_t i = 0; i < k; ++i) e[i] = win[i].lo;
    for (;;) {
      bool ok = true;
      for (std::size_t i = 0; i < k && ok; ++i) ok = e_admissible(spec.exponents[i], spec.beta[i], e[i]);
      if (ok) {
        Natural d(1);
        for (std::size_t i = 0; i < k; ++i) d *= pw[i][e[i]];
        if (d >= v.lower && (!v.upper || d <= *v.upper) && mod(d, v.modulus) == v.residue) {
          v.set.push_back({std::move(d), e});
        }
      }
      std::size_t i = 0;
      while (i < k && e[i] == win[i].hi) {
        e[i] = win[i].lo;
        ++i;
      }
      if (i == k) break;
      ++e[i];
    }
    std::sort(v.set.begin(), v.set.end(), [](const DCandidate& a, const DCandidate& b) { return a.value < b.value; });
    v.empty = v.set.empty();
    return v;
  }

  Congruence c{v.modulus, v.residue, true};
  if (odd_support(spec)) c = crt(c, Natural(2), Natural(1));
  if (!c.ok) {
    v.empty = true;
    return v;
  }
  v.modulus = c.modulus;
  v.residue = c.residue;
  v.ap_min = v.lower + mod(Integer(v.residue - v.lower), v.modulus);
  std::optional<Natural> top = v.upper;
  if (const auto nmax = max_value(spec)) {
    if (!top || *nmax < *top) top = *nmax;
  }
  if (top) {
    if (v.ap_min > *top) {
      v.empty = true;
      return v;
    }
    v.ap_max = *top - mod(Integer(*top - v.residue), v.modulus);
  }
  return v;
}

Natural dview_min(const DView& v) { return v.enumerated ? v.set.front().value : v.ap_min; }

std::optional<Natural> dview_max(const DView& v) {
  if (v.enumerated) return v.set.back().value;
  return v.ap_max;
}

// Restricts the view to D = (q + 1) / 2 (mod q), i.e. q | 2D - 1.
void force_into(DView& v, const Natural& q) {
  if (v.empty) return;
  if (q == 2) {
    v.empty = true;
    v.set.clear();
    return;
  }
  const Natural target = (q + 1) / 2;
  if (v.enumerated) {
    std::erase_if(v.set, [&](const DCandidate& c) { return mod(c.value, q) != target; });
    v.empty = v.set.empty();
    return;
  }
  const Congruence c = crt(Congruence{v.modulus, v.residue, true}, q, target);
  if (!c.ok) {
    v.empty = true;
    return;
  }
  v.modulus = c.modulus;
  v.residue = c.residue;
  v.ap_min = v.lower + mod(Integer(v.residue - v.lower), v.modulus);
  if (v.ap_max) {
    const Natural top = *v.ap_max;
    if (v.ap_min > top) {
      v.empty = true;
      return;
    }
    v.ap_max = top - mod(Integer(top - v.residue), v.modulus);
  }
}

// Candidate primes of the open slots: `count` smallest and `count` largest.
struct OpenCandidates {
  std::vector<Natural> smallest;
  std::vector<Natural> largest;  // empty when max_prime is unbounded
};

OpenCandidates open_candidates(const OpenSlots& o) {
  OpenCandidates c;
  Natural p = o.min_prime - 1;
  for (unsigned i = 0; i < o.count; ++i) {
    p = next_prime(p);
    if (o.max_prime && p > *o.max_prime) throw ContradictionError("not enough primes for the open slots");
    c.smallest.push_back(p);
  }
  if (o.max_prime) {
    p = *o.max_prime + 1;
    for (unsigned i = 0; i < o.count; ++i) {
      p = prev_prime(p);
      c.largest.push_back(p);
    }
    std::reverse(c.largest.begin(), c.largest.end());
  }
  return c;
}

std::optional<Natural> max_value(const SubtreeSpec& spec) {
  Natural n(1);
  for (std::size_t i = 0; i < spec.primes.size(); ++i) {
    if (!spec.exponents[i].max) return std::nullopt;
    n *= pow(spec.primes[i], *spec.exponents[i].max);
  }
  if (spec.open) {
    if (!spec.open->max_prime || !spec.open->exponents.max) return std::nullopt;
    for (const auto& p : open_candidates(*spec.open).largest) n *= pow(p, *spec.open->exponents.max);
  }
  return n;
}

std::string sr_term(const Natural& p, unsigned a) { return "(sr " + p.get_str() + " " + std::to_string(a) + ")"; }

std::string wrap_prod(const std::vector<std::string>& terms) {
  if (terms.empty()) return "1";
  if (terms.size() == 1) return terms.front();
  std::string s = "(prod";
  for (const auto& t : terms) s += " " + t;
  return s + ")";
}

BoundInterval bound_from_view(const SubtreeSpec& spec, const DView& dv) {
  if (dv.empty) throw ContradictionError("no admissible D");
  BoundInterval b;
  Rational lo(1), hi(1);
  std::vector<std::string> lo_terms, hi_terms;
  auto add_prime = [&](const Natural& p, const ExponentRange& r) {
    lo *= Rational(sigma_prime_power(p, r.min), pow(p, r.min));
    lo_terms.push_back(sr_term(p, r.min));
    if (r.max) {
      hi *= Rational(sigma_prime_power(p, *r.max), pow(p, *r.max));
      hi_terms.push_back(sr_term(p, *r.max));
    } else {
      hi *= Rational(p, p - 1);
      hi_terms.push_back("(sup " + p.get_str() + ")");
    }
  };
  for (std::size_t i = 0; i < spec.primes.size(); ++i) add_prime(spec.primes[i], spec.exponents[i]);
  if (spec.open) {
    const auto cand = open_candidates(*spec.open);
    ExponentRange low_only = spec.open->exponents;
    for (const auto& p : cand.largest) {
      lo *= Rational(sigma_prime_power(p, low_only.min), pow(p, low_only.min));
      lo_terms.push_back(sr_term(p, low_only.min));
    }
    for (const auto& p : cand.smallest) {
      const auto& r = spec.open->exponents;
      if (r.max) {
        hi *= Rational(sigma_prime_power(p, *r.max), pow(p, *r.max));
        hi_terms.push_back(sr_term(p, *r.max));
      } else {
        hi *= Rational(p, p - 1);
        hi_terms.push_back("(sup " + p.get_str() + ")");
      }
    }
  }
  b.lo_expr = wrap_prod(lo_terms);
  b.hi_expr = wrap_prod(hi_terms);
  if (!spec.abundancy_only) {
    const Natural dmin = dview_min(dv);
    hi += Rational(Natural(1), dmin);
    b.hi_expr = "(sum " + b.hi_expr + " (inv " + dmin.get_str() + "))";
    if (const auto dmax = dview_max(dv)) {
      lo += Rational(Natural(1), *dmax);
      b.lo_expr = "(sum " + b.lo_expr + " (inv " + dmax->get_str() + "))";
    }
  }
  b.lo = std::move(lo);
  b.hi = std::move(hi);
  return b;
}

SigmaFactorCache& cache_of(const RuleContext& ctx, std::unique_ptr<SigmaFactorCache>& local) {
  if (ctx.cache) return *ctx.cache;
  if (!local) local = std::make_unique<SigmaFactorCache>();
  return *local;
}

void note_probable(std::vector<Natural>& out, const Natural& q) {
  if (primality(q) == Primality::Probable && std::find(out.begin(), out.end(), q) == out.end()) {
    out.push_back(q);
  }
}

void dview_values(const DView& dv, std::vector<std::pair<std::string, std::string>>& ev) {
  if (dv.empty) {
    ev.emplace_back("D_set", "empty");
    return;
  }
  if (dv.enumerated) {
    ev.emplace_back("D_set_size", std::to_string(dv.set.size()));
  } else {
    ev.emplace_back("D_modulus", dv.modulus.get_str());
    ev.emplace_back("D_residue", dv.residue.get_str());
  }
  ev.emplace_back("D_min", dview_min(dv).get_str());
  const auto mx = dview_max(dv);
  ev.emplace_back("D_max", mx ? mx->get_str() : "none");
}

std::optional<PruneCertificate> bound_certificate(const SubtreeSpec& spec, const DView& dv,
                                                  std::vector<FactRecord> facts) {
  const BoundInterval b = bound_from_view(spec, dv);
  const bool above = b.lo > Rational(2);
  const bool below = b.hi < Rational(2);
  if (!above && !below) return std::nullopt;
  PruneCertificate cert;
  cert.rule = above ? PruneRule::BoundAboveTwo : PruneRule::BoundBelowTwo;
  cert.spec = spec;
  cert.facts = std::move(facts);
  cert.facts.push_back(fact_inequality(above ? b.lo_expr : b.hi_expr, above));
  cert.exact_values.emplace_back("lo", b.lo.to_string());
  cert.exact_values.emplace_back("hi", b.hi.to_string());
  dview_values(dv, cert.exact_values);
  return cert;
}

// Out-of-support prime factors of sigma(p^a), or nothing useful when the
// factorization is incomplete (the cofactor is ignored either way).
void collect_forced(const SubtreeSpec& spec, SigmaFactorCache& cache, const Natural& p, unsigned a,
                    std::vector<ForcedDivisor>& out) {
  if (a == 0) return;
  const FactorResult& fr = cache.get(p, a);
  for (const auto& pp : fr.factors.factors()) {
    if (in_support(spec, pp.p)) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const ForcedDivisor& f) { return f.q == pp.p; });
    if (!seen) out.push_back({pp.p, p, a});
  }
}

DConstraints merge_forced(const DConstraints& base, const std::vector<ForcedDivisor>& divs, bool& contradiction) {
  DConstraints out = base;
  Congruence c{out.modulus, out.residue, !out.contradictory};
  for (const auto& f : divs) {
    if (std::find(out.forced.begin(), out.forced.end(), f.q) != out.forced.end()) continue;
    out.forced.push_back(f.q);
    if (!c.ok) continue;
    if (f.q == 2) {
      c.ok = false;
      continue;
    }
    c = crt(c, f.q, (f.q + 1) / 2);
  }
  if (c.ok) {
    out.modulus = c.modulus;
    out.residue = c.residue;
  }
  out.contradictory = !c.ok;
  contradiction = out.contradictory;
  return out;
}

std::vector<unsigned> grid_of(const ExponentRange& r) {
  std::vector<unsigned> g;
  for (unsigned a = r.min; a <= *r.max; ++a) {
    if (r.contains(a)) g.push_back(a);
  }
  return g;
}

bool all_even(const SubtreeSpec& spec) {
  for (const auto& r : spec.exponents) {
    if (!(r.even_only || (r.is_fixed() && r.min % 2 == 0))) return false;
  }
  return true;
}

Natural order_modulus(const Natural& q, const Natural& p) {
  if (mod(p, q) == 1) return q;
  return mult_order(p, q);
}

}  // namespace

// ---------------------------------------------------------------------------

const FactorResult& SigmaFactorCache::get(const Natural& p, unsigned a) {
  const auto key = std::make_pair(p, a);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return *it->second;
  }
  auto fr = std::make_unique<FactorResult>(factorize(sigma_prime_power(p, a), budget_));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(fr));
  return *it->second;
}

std::string_view to_string(PruneRule rule) {
  switch (rule) {
    case PruneRule::BoundAboveTwo: return "BoundAboveTwo";
    case PruneRule::BoundBelowTwo: return "BoundBelowTwo";
    case PruneRule::OrderContradiction: return "OrderContradiction";
    case PruneRule::ForcedDivisorContradiction: return "ForcedDivisorContradiction";
    case PruneRule::QuadraticResidueContradiction: return "QuadraticResidueContradiction";
  }
  return "?";
}

PruneRule parse_prune_rule(std::string_view text) {
  for (auto r : {PruneRule::BoundAboveTwo, PruneRule::BoundBelowTwo, PruneRule::OrderContradiction,
                 PruneRule::ForcedDivisorContradiction, PruneRule::QuadraticResidueContradiction}) {
    if (to_string(r) == text) return r;
  }
  throw DomainError("unknown prune rule '" + std::string(text) + "'");
}

void validate(const SubtreeSpec& spec) {
  const auto k = spec.primes.size();
  if (spec.exponents.size() != k || spec.beta.size() != k) throw DomainError("spec: field lengths differ");
  auto check_range = [](const ExponentRange& r) {
    if (r.min < 1) throw DomainError("spec: exponent minimum must be >= 1");
    if (r.max && *r.max < r.min) throw DomainError("spec: empty exponent range");
    if (r.even_only && (r.min % 2 != 0 || (r.max && *r.max % 2 != 0))) {
      throw DomainError("spec: even-only range with odd endpoint");
    }
  };
  for (std::size_t i = 0; i < k; ++i) {
    if (!is_prime(spec.primes[i])) throw DomainError("spec: " + spec.primes[i].get_str() + " is not prime");
    if (i > 0 && spec.primes[i] <= spec.primes[i - 1]) throw DomainError("spec: primes must ascend");
    check_range(spec.exponents[i]);
  }
  if (spec.open) {
    if (spec.open->count == 0) throw DomainError("spec: open slots with count 0");
    if (k > 0 && spec.open->min_prime <= spec.primes.back()) throw DomainError("spec: open slots overlap support");
    check_range(spec.open->exponents);
  }
  if (spec.d_constraints.modulus < 1) throw DomainError("spec: D modulus must be >= 1");
}

BoundInterval bound_interval(const SubtreeSpec& spec, const RuleContext& ctx) {
  validate(spec);
  const DView dv = build_dview(spec, spec.d_constraints, ctx.d_enum_limit);
  return bound_from_view(spec, dv);
}

std::optional<PruneCertificate> prune_by_bounds(const SubtreeSpec& spec, const RuleContext& ctx) {
  validate(spec);
  const DView dv = build_dview(spec, spec.d_constraints, ctx.d_enum_limit);
  return bound_certificate(spec, dv, {});
}

bool sigma_divisibility(const Natural& q, const Natural& p, unsigned a) {
  if (q == p) throw DomainError("sigma_divisibility: q == p");
  if (!is_prime(q)) throw DomainError("sigma_divisibility: " + q.get_str() + " is not prime");
  const Natural r = mod(p, q);
  if (r == 0) return false;
  if (r == 1) return mod(Natural(a + 1UL), q) == 0;
  return powmod(p, Natural(a + 1UL), q) == 1;
}

ForcedResult forced_divisors(const SubtreeSpec& spec, const RuleContext& ctx) {
  validate(spec);
  std::unique_ptr<SigmaFactorCache> local;
  auto& cache = cache_of(ctx, local);
  ForcedResult out;
  for (std::size_t i = 0; i < spec.primes.size(); ++i) {
    if (spec.exponents[i].is_fixed()) collect_forced(spec, cache, spec.primes[i], spec.exponents[i].min, out.divisors);
  }
  out.merged = merge_forced(spec.d_constraints, out.divisors, out.contradiction);
  return out;
}

std::vector<ParityVector> qr_admissible_parities(const std::vector<Natural>& primes, const Natural& q) {
  return qr_admissible_parities(primes, q, std::vector<BetaStatus>(primes.size(), BetaStatus::Unknown));
}

std::vector<ParityVector> qr_admissible_parities(const std::vector<Natural>& primes, const Natural& q,
                                                 const std::vector<BetaStatus>& beta) {
  if (q == 2 || !is_prime(q)) throw DomainError("qr_admissible_parities: q must be an odd prime");
  if (primes.size() > 20) throw DomainError("qr_admissible_parities: too many primes");
  if (beta.size() != primes.size()) throw DomainError("qr_admissible_parities: beta length mismatch");
  std::vector<int> sym;
  for (const auto& p : primes) {
    if (mod(p, q) == 0) throw DomainError("qr_admissible_parities: q divides " + p.get_str());
    sym.push_back(legendre(p, q));
  }
  const int target = legendre(Integer(2), q);
  std::vector<ParityVector> out;
  const std::size_t k = primes.size();
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    int prod = 1;
    ParityVector v(k);
    bool ok = true;
    for (std::size_t i = 0; i < k; ++i) {
      v[i] = (mask >> i) & 1u;
      if (v[i]) {
        if (beta[i] == BetaStatus::Zero) ok = false;
        prod *= sym[i];
      }
    }
    if (ok && prod == target) out.push_back(std::move(v));
  }
  return out;
}

ForcedResult order_forced_divisors(const SubtreeSpec& spec, std::size_t index, unsigned m, const RuleContext& ctx) {
  validate(spec);
  if (index >= spec.primes.size()) throw DomainError("order_forced_divisors: index out of range");
  if (m == 0) throw DomainError("order_forced_divisors: m must be >= 1");
  std::unique_ptr<SigmaFactorCache> local;
  auto& cache = cache_of(ctx, local);
  ForcedResult out;
  collect_forced(spec, cache, spec.primes[index], m - 1, out.divisors);
  out.merged = merge_forced(spec.d_constraints, out.divisors, out.contradiction);
  return out;
}

std::optional<PruneCertificate> order_contradiction(const SubtreeSpec& spec, std::size_t index, unsigned m,
                                                    const RuleContext& ctx) {
  const ForcedResult fr = order_forced_divisors(spec, index, m, ctx);
  if (fr.divisors.empty()) return std::nullopt;
  DView dv = build_dview(spec, spec.d_constraints, ctx.d_enum_limit);
  for (const auto& f : fr.divisors) force_into(dv, f.q);
  if (!dv.empty && !fr.contradiction) return std::nullopt;
  PruneCertificate cert;
  cert.rule = PruneRule::OrderContradiction;
  cert.spec = spec;
  for (const auto& f : fr.divisors) {
    cert.facts.push_back(fact_divides_sigma(f.q, f.p, f.a));
    note_probable(cert.probable_primes, f.q);
  }
  cert.exact_values.emplace_back("prime", spec.primes[index].get_str());
  cert.exact_values.emplace_back("m", std::to_string(m));
  dview_values(dv, cert.exact_values);
  return cert;
}

std::optional<PruneCertificate> apply_rules(const SubtreeSpec& spec, const RuleContext& ctx) {
  validate(spec);
  std::unique_ptr<SigmaFactorCache> local;
  auto& cache = cache_of(ctx, local);
  const auto& t = ctx.toggles;
  if (!t.bound && !t.forced && !t.order && !t.qr) return std::nullopt;

  auto contradiction_cert = [&](PruneRule rule, std::vector<FactRecord> facts, const DView& dv) {
    PruneCertificate cert;
    cert.rule = rule;
    cert.spec = spec;
    cert.facts = std::move(facts);
    for (const auto& f : cert.facts) {
      if (f.kind == FactKind::Divides) note_probable(cert.probable_primes, Natural(f.expected));
    }
    dview_values(dv, cert.exact_values);
    return cert;
  };

  DView dv;
  try {
    dv = build_dview(spec, spec.d_constraints, ctx.d_enum_limit);
    if (dv.empty) return contradiction_cert(PruneRule::ForcedDivisorContradiction, {}, dv);
    if (t.bound) {
      if (auto c = bound_certificate(spec, dv, {})) return c;
    }
  } catch (const ContradictionError&) {
    // No completion exists at all (too few primes for the open slots).
    PruneCertificate cert;
    cert.rule = PruneRule::BoundBelowTwo;
    cert.spec = spec;
    cert.exact_values.emplace_back("open_slots", "unfillable");
    return cert;
  }

  // q | sigma(n) for every q found here; used by both the forced and QR stages.
  std::vector<ForcedDivisor> forced;
  for (std::size_t i = 0; i < spec.primes.size(); ++i) {
    if (spec.exponents[i].is_fixed()) collect_forced(spec, cache, spec.primes[i], spec.exponents[i].min, forced);
  }
  std::vector<FactRecord> forced_facts;
  for (const auto& f : forced) forced_facts.push_back(fact_divides_sigma(f.q, f.p, f.a));

  if (t.forced && !forced.empty()) {
    for (const auto& f : forced) force_into(dv, f.q);
    if (dv.empty) return contradiction_cert(PruneRule::ForcedDivisorContradiction, forced_facts, dv);
    if (t.bound) {
      if (auto c = bound_certificate(spec, dv, forced_facts)) {
        for (const auto& f : forced) note_probable(c->probable_primes, f.q);
        return c;
      }
    }
  }

  const bool bounded = std::all_of(spec.exponents.begin(), spec.exponents.end(),
                                   [](const ExponentRange& r) { return r.bounded(); });
  const std::size_t k = spec.primes.size();

  if (t.order && !spec.open && dv.enumerated && bounded) {
    for (std::size_t i = 0; i < k; ++i) {
      const Natural& q = spec.primes[i];
      unsigned max_e = 0;
      for (const auto& c : dv.set) max_e = std::max(max_e, c.e[i]);
      const bool beta_forced = max_e < spec.exponents[i].min;

      std::vector<std::size_t> candidates;
      std::vector<FactRecord> excluded;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        bool any = false;
        for (unsigned a : grid_of(spec.exponents[j])) {
          if (sigma_divisibility(q, spec.primes[j], a)) {
            any = true;
          } else {
            excluded.push_back({FactKind::NotDivides, "(sigma " + spec.primes[j].get_str() + " " + std::to_string(a) + ")",
                                q.get_str(), {}, FactStatus::Unchecked, {}});
          }
        }
        if (any) candidates.push_back(j);
      }

      auto order_cert = [&](std::vector<FactRecord> facts) {
        PruneCertificate cert = contradiction_cert(PruneRule::OrderContradiction, std::move(facts), dv);
        cert.exact_values.emplace_back("prime", q.get_str());
        cert.exact_values.emplace_back("beta_forced", beta_forced ? "1" : "0");
        return cert;
      };

      if (candidates.empty()) {
        // p_i divides no sigma(p_j^a), so p_i does not divide d.
        if (beta_forced) return order_cert(excluded);
        std::erase_if(dv.set, [&](const DCandidate& c) { return !spec.exponents[i].contains(c.e[i]); });
        if (dv.set.empty()) {
          dv.empty = true;
          return order_cert(excluded);
        }
        continue;
      }

      if (candidates.size() == 1 && beta_forced && !spec.exponents[candidates[0]].is_fixed()) {
        const std::size_t j = candidates[0];
        const Natural m = order_modulus(q, spec.primes[j]);
        std::vector<ForcedDivisor> extra;
        collect_forced(spec, cache, spec.primes[j], static_cast<unsigned>(m.get_ui() - 1), extra);
        if (extra.empty()) continue;
        for (const auto& f : extra) force_into(dv, f.q);
        if (dv.empty) {
          std::vector<FactRecord> facts = excluded;
          if (mod(spec.primes[j], q) != 1) facts.push_back(fact_order(spec.primes[j], q, m));
          for (const auto& f : extra) facts.push_back(fact_divides_sigma(f.q, f.p, f.a));
          PruneCertificate cert = order_cert(std::move(facts));
          cert.exact_values.emplace_back("m", m.get_str());
          for (const auto& f : extra) note_probable(cert.probable_primes, f.q);
          return cert;
        }
      }
    }
  }

  if (t.qr && !spec.open && all_even(spec)) {
    for (const auto& f : forced) {
      if (f.q == 2) continue;
      auto masks = qr_admissible_parities(spec.primes, f.q, spec.beta);
      if (dv.enumerated) {
        auto parity_of = [&](const DCandidate& c) {
          ParityVector v(k);
          for (std::size_t i = 0; i < k; ++i) v[i] = c.e[i] % 2;
          return v;
        };
        std::erase_if(masks, [&](const ParityVector& m) {
          return std::none_of(dv.set.begin(), dv.set.end(), [&](const DCandidate& c) { return parity_of(c) == m; });
        });
        if (!masks.empty()) {
          std::erase_if(dv.set, [&](const DCandidate& c) {
            return std::find(masks.begin(), masks.end(), parity_of(c)) == masks.end();
          });
        }
      }
      if (masks.empty() != t.invert_qr) {
        std::vector<FactRecord> facts{fact_divides_sigma(f.q, f.p, f.a), fact_legendre(Integer(2), f.q, legendre(Integer(2), f.q))};
        for (const auto& p : spec.primes) facts.push_back(fact_legendre(p, f.q, legendre(p, f.q)));
        PruneCertificate cert = contradiction_cert(PruneRule::QuadraticResidueContradiction, std::move(facts), dv);
        cert.exact_values.emplace_back("q", f.q.get_str());
        cert.exact_values.emplace_back("admissible_parities", std::to_string(masks.size()));
        return cert;
      }
    }
  }
  return std::nullopt;
}

}  // namespace defiperf
