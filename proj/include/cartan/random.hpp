#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace cartan {

/// Seeded generator shared by every sampling routine so that reports are
/// reproducible for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Uniform direction on the unit sphere of R^n.
  Eigen::VectorXd unit_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    do {
      for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    } while (v.norm() < 1e-12);
    return v.normalized();
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cartan
