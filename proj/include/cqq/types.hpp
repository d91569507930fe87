#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cqq/density.hpp"

namespace cqq {

// Unsigned big integer, enough for multinomial coefficients (which overflow
// 64 bits quickly). Limbs are base 2^32, little-endian.
class BigUint {
 public:
  BigUint() : limbs_{0} {}
  explicit BigUint(std::uint64_t v);

  BigUint& mul_u32(std::uint32_t m);
  BigUint& add(const BigUint& other);
  // Exact division; caller guarantees divisibility.
  BigUint& div_u32_exact(std::uint32_t d);

  bool operator==(const BigUint& other) const { return limbs_ == other.limbs_; }
  double to_double() const;
  std::string to_string() const;
  bool fits_u64() const;
  std::uint64_t to_u64() const;  // truncates to the low 64 bits

 private:
  void trim();
  std::vector<std::uint32_t> limbs_;
};

BigUint binomial(int n, int k);

// Empirical distribution of a length-n word as letter counts.
struct TypeClass {
  std::vector<int> counts;
  int n = 0;

  std::vector<double> distribution() const;
};

// All types of length n over an alphabet of the given size; count equals
// C(n+|X|-1, |X|-1) and is bounded by (n+1)^|X|.
std::vector<TypeClass> enumerate_types(int n, int alphabet_size);

TypeClass type_of(const std::vector<int>& word, int alphabet_size);

// |T_lambda^n|, the multinomial n! / prod counts!.
BigUint type_class_size(const TypeClass& lambda);

// Probability p^n assigns to any single word of this type.
double word_probability(const ClassicalDistribution& p, const TypeClass& lambda);

// Probability p^n assigns to the whole type class.
double type_class_probability(const ClassicalDistribution& p,
                              const TypeClass& lambda);

// Two-clause delta-typicality: every letter frequency within delta of p(a),
// and letters outside supp(p) never occur.
bool is_delta_typical(const ClassicalDistribution& p, double delta,
                      const TypeClass& lambda);

struct DeltaTypicalSet {
  std::function<bool(const std::vector<int>&)> contains;  // per sequence
  double exact_probability = 0.0;
};
DeltaTypicalSet delta_typical(const ClassicalDistribution& p, double delta,
                              int n);

struct TailBoundReport {
  double exact_tail = 0.0;
  double bound = 0.0;  // 2^{-n c delta^2}, c = 2/ln 2
  bool holds = false;
};
TailBoundReport tail_bound_check(const ClassicalDistribution& p, double delta,
                                 int n);

}  // namespace cqq
