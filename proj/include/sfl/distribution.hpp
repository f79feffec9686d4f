#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sfl/errors.hpp"
#include "sfl/mask.hpp"
#include "sfl/rational.hpp"

namespace sfl {

// Probability distribution over labels 0..m-1, exact weights summing to 1.
class RationalDistribution {
 public:
  RationalDistribution() = default;
  explicit RationalDistribution(std::vector<Rational> weights) : w_(std::move(weights)) {
    Rational sum(0);
    for (const Rational& p : w_) {
      if (p < 0) throw ConfigError("distribution: negative weight");
      sum += p;
    }
    if (sum != 1) throw ConfigError("distribution: weights sum to " + format_rational(sum));
  }

  static RationalDistribution point_mass(int label, int num_labels) {
    std::vector<Rational> w(num_labels, Rational(0));
    w.at(label) = 1;
    return RationalDistribution(std::move(w));
  }

  static RationalDistribution uniform_over(const Mask& support) {
    int n = support.count();
    if (n == 0) throw ConfigError("distribution: empty support");
    std::vector<Rational> w(support.size(), Rational(0));
    support.for_each([&](int i) { w[i] = Rational(1, n); });
    return RationalDistribution(std::move(w));
  }

  int num_labels() const { return static_cast<int>(w_.size()); }
  const Rational& weight(int label) const { return w_.at(label); }
  const std::vector<Rational>& weights() const { return w_; }

  Rational mass(const Mask& labels) const {
    Rational s(0);
    labels.for_each([&](int y) { s += w_[y]; });
    return s;
  }
  Rational complement_mass(const Mask& labels) const { return 1 - mass(labels); }

  Mask support() const {
    Mask m(num_labels());
    for (int y = 0; y < num_labels(); ++y)
      if (w_[y] > 0) m.set(y);
    return m;
  }

  // Inverse-CDF draw using one 64-bit variate; exact rational comparisons.
  int sample(std::mt19937_64& rng) const {
    Int u = Int(static_cast<uint64_t>(rng()));
    Int scale = Int(1) << 64;
    Rational cum(0);
    for (int y = 0; y < num_labels(); ++y) {
      cum += w_[y];
      if (Rational(u) < cum * scale) return y;
    }
    return num_labels() - 1;  // unreachable when weights sum to 1
  }

  bool operator==(const RationalDistribution& o) const { return w_ == o.w_; }

 private:
  std::vector<Rational> w_;
};

}  // namespace sfl
