#pragma once

#include <cstdint>
#include <random>

namespace mfc {

/// Seeded additive white Gaussian measurement noise.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, double amplitude) : seed_(seed), amplitude_(amplitude), engine_(seed) {}

  double draw() { return normal_(engine_); }

  double measure(double y_true) {
    if (amplitude_ == 0.0) return y_true;
    return y_true + amplitude_ * draw();
  }

  std::uint64_t seed() const { return seed_; }
  double amplitude() const { return amplitude_; }

 private:
  std::uint64_t seed_;
  double amplitude_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double noisy_measure(NoiseSource& n, double y_true) { return n.measure(y_true); }

}  // namespace mfc
