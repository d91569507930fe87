#include "cqq/types.hpp"

#include <cmath>

#include "cqq/errors.hpp"

namespace cqq {

BigUint::BigUint(std::uint64_t v) {
  limbs_ = {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
  trim();
}

void BigUint::trim() {
  while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

BigUint& BigUint::mul_u32(std::uint32_t m) {
  std::uint64_t carry = 0;
  for (auto& limb : limbs_) {
    const std::uint64_t v = std::uint64_t(limb) * m + carry;
    limb = static_cast<std::uint32_t>(v);
    carry = v >> 32;
  }
  if (carry != 0) limbs_.push_back(static_cast<std::uint32_t>(carry));
  return *this;
}

BigUint& BigUint::add(const BigUint& other) {
  const std::size_t n = std::max(limbs_.size(), other.limbs_.size());
  limbs_.resize(n, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v = carry + limbs_[i];
    if (i < other.limbs_.size()) v += other.limbs_[i];
    limbs_[i] = static_cast<std::uint32_t>(v);
    carry = v >> 32;
  }
  if (carry != 0) limbs_.push_back(static_cast<std::uint32_t>(carry));
  return *this;
}

BigUint& BigUint::div_u32_exact(std::uint32_t d) {
  std::uint64_t rem = 0;
  for (std::size_t i = limbs_.size(); i-- > 0;) {
    const std::uint64_t v = (rem << 32) | limbs_[i];
    limbs_[i] = static_cast<std::uint32_t>(v / d);
    rem = v % d;
  }
  trim();
  return *this;
}

double BigUint::to_double() const {
  double v = 0.0;
  for (std::size_t i = limbs_.size(); i-- > 0;)
    v = v * 4294967296.0 + double(limbs_[i]);
  return v;
}

std::string BigUint::to_string() const {
  // Repeated division by 10^9.
  std::vector<std::uint32_t> work = limbs_;
  std::string out;
  auto all_zero = [&] {
    for (auto w : work)
      if (w != 0) return false;
    return true;
  };
  if (all_zero()) return "0";
  while (!all_zero()) {
    std::uint64_t rem = 0;
    for (std::size_t i = work.size(); i-- > 0;) {
      const std::uint64_t v = (rem << 32) | work[i];
      work[i] = static_cast<std::uint32_t>(v / 1000000000ULL);
      rem = v % 1000000000ULL;
    }
    std::string chunk = std::to_string(rem);
    if (!all_zero())
      chunk = std::string(9 - chunk.size(), '0') + chunk;
    out = chunk + out;
  }
  return out;
}

bool BigUint::fits_u64() const { return limbs_.size() <= 2; }

std::uint64_t BigUint::to_u64() const {
  std::uint64_t v = limbs_[0];
  if (limbs_.size() > 1) v |= std::uint64_t(limbs_[1]) << 32;
  return v;
}

BigUint binomial(int n, int k) {
  if (k < 0 || k > n) return BigUint(0);
  if (k > n - k) k = n - k;
  BigUint r(1);
  for (int i = 1; i <= k; ++i) {
    r.mul_u32(static_cast<std::uint32_t>(n - k + i));
    r.div_u32_exact(static_cast<std::uint32_t>(i));
  }
  return r;
}

std::vector<double> TypeClass::distribution() const {
  std::vector<double> d(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    d[i] = double(counts[i]) / double(n);
  return d;
}

std::vector<TypeClass> enumerate_types(int n, int alphabet_size) {
  if (n < 1 || alphabet_size < 1)
    throw ValidationError("enumerate_types: n and alphabet size must be >= 1");
  const BigUint expected = binomial(n + alphabet_size - 1, alphabet_size - 1);
  if (!expected.fits_u64() || expected.to_u64() > 50'000'000ULL)
    throw ResourceError("enumerate_types: too many types (" +
                        expected.to_string() + ")");

  std::vector<TypeClass> out;
  std::vector<int> counts(alphabet_size, 0);
  // Lexicographic recursion over count vectors summing to n.
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == alphabet_size - 1) {
      counts[pos] = remaining;
      out.push_back({counts, n});
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[pos] = c;
      rec(pos + 1, remaining - c);
    }
  };
  rec(0, n);
  return out;
}

TypeClass type_of(const std::vector<int>& word, int alphabet_size) {
  TypeClass t{std::vector<int>(alphabet_size, 0), static_cast<int>(word.size())};
  for (int a : word) {
    if (a < 0 || a >= alphabet_size)
      throw ValidationError("type_of: letter out of range");
    ++t.counts[a];
  }
  return t;
}

BigUint type_class_size(const TypeClass& lambda) {
  // Multinomial n!/prod(c_a!) as a telescoping product of binomials over
  // prefix sums; each mul/div step keeps the intermediate an exact integer.
  BigUint r(1);
  int prefix = 0;
  for (int c : lambda.counts) {
    for (int i = 1; i <= c; ++i) {
      r.mul_u32(static_cast<std::uint32_t>(prefix + i));
      r.div_u32_exact(static_cast<std::uint32_t>(i));
    }
    prefix += c;
  }
  return r;
}

double word_probability(const ClassicalDistribution& p,
                        const TypeClass& lambda) {
  double prob = 1.0;
  for (std::size_t a = 0; a < lambda.counts.size(); ++a) {
    if (lambda.counts[a] == 0) continue;
    prob *= std::pow(p.probs[a], double(lambda.counts[a]));
  }
  return prob;
}

double type_class_probability(const ClassicalDistribution& p,
                              const TypeClass& lambda) {
  return type_class_size(lambda).to_double() * word_probability(p, lambda);
}

bool is_delta_typical(const ClassicalDistribution& p, double delta,
                      const TypeClass& lambda) {
  for (std::size_t a = 0; a < lambda.counts.size(); ++a) {
    const double freq = double(lambda.counts[a]) / double(lambda.n);
    if (std::abs(freq - p.probs[a]) > delta) return false;
    if (p.probs[a] == 0.0 && lambda.counts[a] != 0) return false;
  }
  return true;
}

DeltaTypicalSet delta_typical(const ClassicalDistribution& p, double delta,
                              int n) {
  if (delta <= 0.0) throw ValidationError("delta_typical: delta must be > 0");
  const int k = static_cast<int>(p.size());
  DeltaTypicalSet set;
  set.contains = [p, delta, k](const std::vector<int>& word) {
    return is_delta_typical(p, delta, type_of(word, k));
  };
  double prob = 0.0;
  for (const TypeClass& lambda : enumerate_types(n, k))
    if (is_delta_typical(p, delta, lambda))
      prob += type_class_probability(p, lambda);
  set.exact_probability = prob;
  return set;
}

TailBoundReport tail_bound_check(const ClassicalDistribution& p, double delta,
                                 int n) {
  constexpr double kC = 2.0 / 0.6931471805599453;  // 2 / ln 2
  TailBoundReport r;
  r.exact_tail = 1.0 - delta_typical(p, delta, n).exact_probability;
  if (r.exact_tail < 0.0) r.exact_tail = 0.0;
  r.bound = std::exp2(-double(n) * kC * delta * delta);
  r.holds = r.exact_tail <= r.bound;
  return r;
}

}  // namespace cqq
