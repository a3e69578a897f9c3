#include "defiperf/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

constexpr std::uint64_t kMaxPrimeCap = 10'000'000;
const std::vector<unsigned long> kPresetS5Second{5, 7, 11, 13, 17};

using Clock = std::chrono::steady_clock;

Natural binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return Natural(0);
  Natural r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

std::vector<Natural> candidate_primes(const SearchConfig& c) {
  std::vector<Natural> out;
  for (auto p : primes_up_to(c.prime_max.get_ui())) {
    if (p < c.prime_min) continue;
    if (c.odd_only && p == 2) continue;
    out.emplace_back(static_cast<unsigned long>(p));
  }
  return out;
}

bool has_preset(const SearchConfig& c) { return c.preset && *c.preset == kPresetS5; }

// Number of ways to finish an ascending prime tuple whose chosen positions
// end at candidate index `last` (ignored when nothing is chosen yet).
Natural count_tuples(const SearchConfig& c, const std::vector<Natural>& cand, std::size_t chosen,
                     std::size_t last) {
  const std::size_t n = cand.size();
  const unsigned r = c.omega - static_cast<unsigned>(chosen);
  if (r == 0) return Natural(1);
  if (has_preset(c) && chosen <= 1) {
    if (chosen == 0) {
      const auto it = std::find(cand.begin(), cand.end(), Natural(3));
      if (it == cand.end()) return Natural(0);
      return count_tuples(c, cand, 1, static_cast<std::size_t>(it - cand.begin()));
    }
    Natural total(0);
    for (auto p2 : kPresetS5Second) {
      const auto it = std::find(cand.begin(), cand.end(), Natural(p2));
      if (it == cand.end()) continue;
      const auto idx = static_cast<std::size_t>(it - cand.begin());
      if (idx <= last) continue;
      total += count_tuples(c, cand, 2, idx);
    }
    return total;
  }
  const std::size_t start = chosen == 0 ? 0 : last + 1;
  return binomial(n - std::min(start, n), r);
}

std::uint64_t to_u64(const Natural& v) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) throw DomainError("count does not fit in 64 bits");
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof out, 0, 0, v.get_mpz_t());
  return out;
}

unsigned thread_count(const SearchConfig& c, std::size_t tasks) {
  unsigned n = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DEFIPERF_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  if (c.leaf_budget) n = 1;  // keeps truncated runs reproducible
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, tasks)));
}

std::string describe(const SubtreeSpec& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.primes.size(); ++i) {
    if (i) out += ' ';
    const auto& r = s.exponents[i];
    out += s.primes[i].get_str() + "^";
    out += r.is_fixed() ? std::to_string(r.min) : std::to_string(r.min) + ".." + std::to_string(*r.max);
  }
  if (s.open) {
    out += " +" + std::to_string(s.open->count) + " from " + s.open->min_prime.get_str() + ".." +
           (s.open->max_prime ? s.open->max_prime->get_str() : "inf");
  }
  return out + "]";
}

struct Partial {
  std::vector<DPWitness> witnesses;
  std::vector<PruneCertificate> certificates;
  std::uint64_t evaluated = 0;
  std::uint64_t pruned = 0;
  std::uint64_t out_of_range = 0;
  std::uint64_t subtrees_pruned = 0;
  std::vector<std::string> trace;
};

class Walker {
 public:
  Walker(const SearchConfig& c, const std::vector<Natural>& cand, const std::vector<unsigned>& grid,
         SigmaFactorCache& cache, std::atomic<bool>& stop, std::optional<Clock::time_point> deadline)
      : c_(c), cand_(cand), grid_(grid), stop_(stop), deadline_(deadline) {
    ctx_.toggles = c.rules;
    ctx_.d_enum_limit = c.d_enum_limit;
    ctx_.cache = &cache;
    range_ = ExponentRange{grid.front(), grid.back(), c.odd_only};
  }

  // Applies the rules to a node. Returns true when the subtree is pruned.
  bool prune_node(const SubtreeSpec& spec, const Natural& leaves, Partial& out) {
    auto cert = apply_rules(spec, ctx_);
    if (!cert) return false;
    out.pruned += to_u64(leaves);
    ++out.subtrees_pruned;
    if (c_.trace) out.trace.push_back("prune " + std::string(to_string(cert->rule)) + " " + describe(spec));
    out.certificates.push_back(std::move(*cert));
    return true;
  }

  bool out_of_time() {
    if (stop_.load(std::memory_order_relaxed)) return true;
    if (deadline_ && ++ticks_ % 256 == 0 && Clock::now() > *deadline_) {
      stop_.store(true);
      return true;
    }
    return false;
  }

  SubtreeSpec base_spec(const std::vector<std::size_t>& chosen) const {
    SubtreeSpec s;
    for (auto i : chosen) {
      s.primes.push_back(cand_[i]);
      s.exponents.push_back(range_);
      s.beta.push_back(BetaStatus::Unknown);
    }
    if (c_.value_max) s.d_constraints.upper_bound = *c_.value_max;
    return s;
  }

  Natural grid_pow(unsigned k) const { return pow(Natural(static_cast<unsigned long>(grid_.size())), k); }

  void prime_level(std::vector<std::size_t>& chosen, Partial& out) {
    if (out_of_time()) return;
    const unsigned r = c_.omega - static_cast<unsigned>(chosen.size());
    if (r == 0) {
      std::vector<unsigned> fixed;
      exponent_level(chosen, fixed, out);
      return;
    }
    const std::size_t start = chosen.empty() ? 0 : chosen.back() + 1;
    const Natural leaves = count_tuples(c_, cand_, chosen.size(), chosen.empty() ? 0 : chosen.back()) * grid_pow(c_.omega);
    if (leaves == 0) return;

    if (c_.value_max) {
      Natural least(1);
      for (auto i : chosen) least *= pow(cand_[i], grid_.front());
      for (unsigned t = 0; t < r; ++t) least *= pow(cand_[start + t], grid_.front());
      if (least > *c_.value_max) {
        out.out_of_range += to_u64(leaves);
        return;
      }
    }

    if (!chosen.empty()) {
      SubtreeSpec spec = base_spec(chosen);
      spec.open = OpenSlots{r, cand_[start], cand_.back(), range_};
      if (prune_node(spec, leaves, out)) return;
    }

    for (std::size_t i = start; i + r <= cand_.size(); ++i) {
      if (has_preset(c_) && chosen.empty() && cand_[i] != 3) continue;
      if (has_preset(c_) && chosen.size() == 1 &&
          std::find(kPresetS5Second.begin(), kPresetS5Second.end(), cand_[i].get_ui()) == kPresetS5Second.end()) {
        continue;
      }
      chosen.push_back(i);
      prime_level(chosen, out);
      chosen.pop_back();
      if (stop_.load(std::memory_order_relaxed)) return;
    }
  }

  void exponent_level(const std::vector<std::size_t>& chosen, std::vector<unsigned>& fixed, Partial& out) {
    if (out_of_time()) return;
    const unsigned k = c_.omega;
    const auto j = static_cast<unsigned>(fixed.size());
    if (j == k) {
      leaf(chosen, fixed, out);
      return;
    }
    const Natural leaves = grid_pow(k - j);
    if (c_.value_max) {
      Natural least(1);
      for (unsigned i = 0; i < k; ++i) least *= pow(cand_[chosen[i]], i < j ? fixed[i] : grid_.front());
      if (least > *c_.value_max) {
        out.out_of_range += to_u64(leaves);
        return;
      }
    }
    SubtreeSpec spec = base_spec(chosen);
    for (unsigned i = 0; i < j; ++i) spec.exponents[i] = ExponentRange::fixed(fixed[i]);
    if (prune_node(spec, leaves, out)) return;
    for (unsigned a : grid_) {
      fixed.push_back(a);
      exponent_level(chosen, fixed, out);
      fixed.pop_back();
      if (stop_.load(std::memory_order_relaxed)) return;
    }
  }

  void leaf(const std::vector<std::size_t>& chosen, const std::vector<unsigned>& exps, Partial& out) {
    std::vector<Natural> primes;
    for (auto i : chosen) primes.push_back(cand_[i]);
    if (c_.value_max) {
      Natural n(1);
      for (std::size_t i = 0; i < primes.size(); ++i) n *= pow(primes[i], exps[i]);
      if (n > *c_.value_max) {
        ++out.out_of_range;
        return;
      }
    }
    if (c_.leaf_budget && leaves_seen_ >= *c_.leaf_budget) {
      stop_.store(true);
      return;
    }
    ++leaves_seen_;
    ++out.evaluated;
    auto w = evaluate_leaf(primes, exps);
    if (w) {
      verify_eq1(*w);
      if (c_.trace) out.trace.push_back("witness " + w->n.value().get_str());
      out.witnesses.push_back(std::move(*w));
    }
  }

 private:
  const SearchConfig& c_;
  const std::vector<Natural>& cand_;
  const std::vector<unsigned>& grid_;
  std::atomic<bool>& stop_;
  std::optional<Clock::time_point> deadline_;
  RuleContext ctx_;
  ExponentRange range_;
  std::uint64_t ticks_ = 0;
  std::uint64_t leaves_seen_ = 0;
};

void merge(Partial& into, Partial&& from) {
  for (auto& w : from.witnesses) into.witnesses.push_back(std::move(w));
  for (auto& c : from.certificates) into.certificates.push_back(std::move(c));
  for (auto& t : from.trace) into.trace.push_back(std::move(t));
  into.evaluated += from.evaluated;
  into.pruned += from.pruned;
  into.out_of_range += from.out_of_range;
  into.subtrees_pruned += from.subtrees_pruned;
}

std::vector<unsigned> range_values(const ExponentRange& r) {
  std::vector<unsigned> out;
  for (unsigned a = r.min; a <= *r.max; ++a) {
    if (r.contains(a)) out.push_back(a);
  }
  return out;
}

// Whether witness w could live in the subtree described by spec.
bool compatible(const SubtreeSpec& spec, const DPWitness& w) {
  for (std::size_t i = 0; i < spec.primes.size(); ++i) {
    const unsigned beta = w.d.exponent_of(spec.primes[i]);
    if (spec.beta[i] == BetaStatus::Zero && beta != 0) return false;
    if (spec.beta[i] == BetaStatus::Positive && beta == 0) return false;
  }
  const Natural D = w.D.value();
  const auto& dc = spec.d_constraints;
  if (D < dc.lower_bound) return false;
  if (dc.upper_bound && D > *dc.upper_bound) return false;
  if (mod(D, dc.modulus) != mod(dc.residue, dc.modulus)) return false;
  for (const auto& q : dc.forced) {
    if (mod(Integer(2 * D - 1), q) != 0) return false;
  }
  return true;
}

}  // namespace

void validate(const SearchConfig& c) {
  if (c.omega == 0) throw DomainError("omega must be >= 1");
  if (c.exponent_max == 0) throw DomainError("exponent_max must be >= 1");
  if (c.odd_only && c.exponent_max < 2) throw DomainError("odd search needs exponent_max >= 2");
  if (c.prime_max < 2 || c.prime_max > kMaxPrimeCap) {
    throw DomainError("prime_max must lie in [2, " + std::to_string(kMaxPrimeCap) + "]");
  }
  if (c.prime_min < 0 || c.prime_min > c.prime_max) throw DomainError("prime_min exceeds prime_max");
  if (c.value_max && *c.value_max < 2) throw DomainError("value_max must be >= 2");
  if (c.preset && *c.preset != kPresetS5) throw DomainError("unknown preset '" + *c.preset + "'");
  if (has_preset(c) && c.omega < 2) throw DomainError("preset paper-s5 needs omega >= 2");
  if (c.d_enum_limit == 0) throw DomainError("d_enum_limit must be >= 1");
  const auto cand = candidate_primes(c);
  if (cand.size() < c.omega) throw DomainError("fewer than omega primes in range");
  const Natural total = count_tuples(c, cand, 0, 0) * pow(Natural(static_cast<unsigned long>(exponent_grid(c).size())), c.omega);
  to_u64(total);
}

std::vector<unsigned> exponent_grid(const SearchConfig& c) {
  std::vector<unsigned> g;
  for (unsigned a = c.odd_only ? 2 : 1; a <= c.exponent_max; a += c.odd_only ? 2 : 1) g.push_back(a);
  return g;
}

std::optional<DPWitness> evaluate_leaf(const std::vector<Natural>& primes, const std::vector<unsigned>& exponents) {
  if (primes.size() != exponents.size()) throw DomainError("evaluate_leaf: length mismatch");
  std::vector<PrimePower> pp;
  for (std::size_t i = 0; i < primes.size(); ++i) pp.push_back({primes[i], exponents[i]});
  return dp_witness(Factorization::from_trusted_pairs(std::move(pp)));
}

SearchReport enumerate(const SearchConfig& config) {
  validate(config);
  SearchReport report;
  report.config = config;
  const auto cand = candidate_primes(config);
  const auto grid = exponent_grid(config);
  report.grid_leaves = to_u64(count_tuples(config, cand, 0, 0) *
                              pow(Natural(static_cast<unsigned long>(grid.size())), config.omega));

  FactorBudget budget;
  budget.seed = config.seed;
  SigmaFactorCache cache(budget);
  std::atomic<bool> stop{false};
  std::optional<Clock::time_point> deadline;
  if (config.time_budget_ms) deadline = Clock::now() + std::chrono::milliseconds(*config.time_budget_ms);

  Partial total;
  bool root_pruned = false;
  {
    // Root node: nothing chosen yet.
    Walker w(config, cand, grid, cache, stop, deadline);
    SubtreeSpec root;
    if (config.value_max) root.d_constraints.upper_bound = *config.value_max;
    root.open = OpenSlots{config.omega, cand.front(), cand.back(), ExponentRange{grid.front(), grid.back(), config.odd_only}};
    root_pruned = w.prune_node(root, Natural(static_cast<unsigned long>(report.grid_leaves)), total);
  }

  if (!root_pruned) {
    std::vector<std::size_t> tasks;
    for (std::size_t i = 0; i + config.omega <= cand.size(); ++i) {
      if (has_preset(config) && cand[i] != 3) continue;
      tasks.push_back(i);
    }
    std::vector<Partial> parts(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      Walker w(config, cand, grid, cache, stop, deadline);
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks.size() || stop.load()) break;
        std::vector<std::size_t> chosen{tasks[t]};
        w.prime_level(chosen, parts[t]);
      }
    };
    const unsigned nthreads = thread_count(config, tasks.size());
    if (nthreads <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    for (auto& p : parts) merge(total, std::move(p));
  }

  std::sort(total.witnesses.begin(), total.witnesses.end(),
            [](const DPWitness& a, const DPWitness& b) { return a.n.value() < b.n.value(); });
  report.witnesses = std::move(total.witnesses);
  report.certificates = std::move(total.certificates);
  report.trace = std::move(total.trace);
  report.leaves_evaluated = total.evaluated;
  report.leaves_pruned = total.pruned;
  report.leaves_out_of_range = total.out_of_range;
  report.subtrees_pruned = total.subtrees_pruned;
  report.complete = !stop.load() &&
                    report.leaves_evaluated + report.leaves_pruned + report.leaves_out_of_range == report.grid_leaves;
  return report;
}

bool in_shape_domain(const SearchConfig& c, const Factorization& n) {
  if (n.size() != c.omega) return false;
  const auto grid = exponent_grid(c);
  for (const auto& [p, a] : n.factors()) {
    if (p < c.prime_min || p > c.prime_max) return false;
    if (c.odd_only && p == 2) return false;
    if (std::find(grid.begin(), grid.end(), a) == grid.end()) return false;
  }
  if (c.value_max && n.value() > *c.value_max) return false;
  if (has_preset(c)) {
    if (n.factors()[0].p != 3) return false;
    const auto p2 = n.factors()[1].p;
    if (std::find(kPresetS5Second.begin(), kPresetS5Second.end(), p2.get_ui()) == kPresetS5Second.end()) return false;
  }
  return true;
}

bool replay(const SearchReport& report) {
  for (const auto& w : report.witnesses) {
    if (!verify_eq1(w)) throw IntegrityError("witness " + w.n.value().get_str() + " fails sigma(n) = (2D-1)d");
  }
  FactorBudget budget;
  budget.seed = report.config.seed;
  SigmaFactorCache cache(budget);
  RuleContext ctx;
  ctx.toggles = report.config.rules;
  ctx.d_enum_limit = report.config.d_enum_limit;
  ctx.cache = &cache;
  for (std::size_t i = 0; i < report.certificates.size(); ++i) {
    const auto& cert = report.certificates[i];
    const std::string name = "certificate #" + std::to_string(i) + " (" + std::string(to_string(cert.rule)) + " " +
                             describe(cert.spec) + ")";
    std::optional<PruneCertificate> again;
    try {
      again = apply_rules(cert.spec, ctx);
    } catch (const std::exception& e) {
      throw IntegrityError(name + ": re-evaluation failed: " + e.what());
    }
    if (!again || !(*again == cert)) throw IntegrityError(name + ": re-evaluation does not reproduce it");
    for (const auto& f : cert.facts) {
      const auto checked = verify_fact(f);
      if (checked.status != FactStatus::Confirmed) {
        throw IntegrityError(name + ": fact " + std::string(to_string(f.kind)) + " " + f.expr + " " + f.expected +
                             " is refuted (" + checked.actual + ")");
      }
    }
  }
  return true;
}

AuditResult audit_certificate(const PruneCertificate& cert, std::uint64_t limit) {
  const SubtreeSpec& s = cert.spec;
  AuditResult out;
  bool finite = std::all_of(s.exponents.begin(), s.exponents.end(), [](const ExponentRange& r) { return r.bounded(); });
  if (s.open) finite = finite && s.open->max_prime && s.open->exponents.bounded();
  out.finite = finite;
  if (!finite) return out;

  std::vector<std::vector<unsigned>> grids;
  for (const auto& r : s.exponents) grids.push_back(range_values(r));
  std::vector<Natural> open_cand;
  std::vector<unsigned> open_grid;
  unsigned r = 0;
  if (s.open) {
    r = s.open->count;
    for (Natural p = next_prime(s.open->min_prime - 1); p <= *s.open->max_prime; p = next_prime(p)) open_cand.push_back(p);
    open_grid = range_values(s.open->exponents);
  }

  Natural count(1);
  for (const auto& g : grids) count *= static_cast<unsigned long>(g.size());
  count *= binomial(open_cand.size(), r) * pow(Natural(static_cast<unsigned long>(open_grid.size())), r);
  if (count > limit) {
    out.completions = count.fits_ulong_p() ? count.get_ui() : 0;
    return out;
  }
  out.audited = true;
  out.completions = count.get_ui();

  // Choose the open primes, then walk every exponent vector.
  std::vector<std::size_t> pick(r);
  for (unsigned i = 0; i < r; ++i) pick[i] = i;
  for (;;) {
    if (r > open_cand.size()) break;
    std::vector<Natural> primes = s.primes;
    std::vector<std::vector<unsigned>> g = grids;
    for (auto i : pick) {
      primes.push_back(open_cand[i]);
      g.push_back(open_grid);
    }
    std::vector<std::size_t> idx(primes.size(), 0);
    for (;;) {
      std::vector<PrimePower> pp;
      for (std::size_t i = 0; i < primes.size(); ++i) pp.push_back({primes[i], g[i][idx[i]]});
      const auto f = Factorization::from_trusted_pairs(std::move(pp));
      if (f.value() >= 2) {
        if (auto w = dp_witness(f); w && compatible(s, *w)) {
          out.counterexample = std::move(w);
          return out;
        }
      }
      std::size_t i = 0;
      while (i < idx.size() && idx[i] + 1 == g[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
      ++idx[i];
    }
    // Next combination of open primes.
    if (r == 0) break;
    std::size_t t = r;
    while (t > 0 && pick[t - 1] == open_cand.size() - r + t - 1) --t;
    if (t == 0) break;
    ++pick[t - 1];
    for (std::size_t u = t; u < r; ++u) pick[u] = pick[u - 1] + 1;
  }
  return out;
}

}  // namespace defiperf
