#pragma once

#include <optional>

#include "defiperf/ntcore.hpp"
#include "defiperf/rational.hpp"

namespace defiperf {

/// n with sigma(n) = 2n - d, d a proper divisor; D = n / d.
struct DPWitness {
  Factorization n;
  Factorization d;
  Factorization D;
  Natural sigma_n;

  bool operator==(const DPWitness&) const = default;
};

/// Witness for value(f) >= 2, or nothing. The deficient divisor is read off
/// the support of f, so no general factoring happens here.
std::optional<DPWitness> dp_witness(const Factorization& f);

bool is_almost_perfect(const DPWitness& w);

/// sigma(n)/n in lowest terms.
Rational abundancy(const Factorization& f);

/// Recomputes sigma(n) = (2D - 1) d from scratch. Throws IntegrityError
/// naming the first field that disagrees.
bool verify_eq1(const DPWitness& w);

}  // namespace defiperf
