#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cpca/types.hpp"

namespace cpca {

// Deterministic random stream. mt19937_64 plus explicit Box-Muller / inverse-CDF
// transforms; std::normal_distribution and friends are implementation-defined,
// which would silently break the reproducibility contract between standard
// libraries. Streams for independent purposes (per replicate, per role) are
// derived from a base seed and a path of integers, so adding a consumer never
// shifts the draws of another.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    // splitmix64 finalizer over a hash-combine; avalanche is all we need.
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
  }

  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix(0x42d9f3a1c67b05d3ULL, seed);
    for (std::uint64_t v : path) h = mix(h, v);
    return RngStream(h);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]: keeps the log finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate) {
    return -std::log(1.0 - uniform01()) / rate;
  }

  Vector normal_vector(Eigen::Index p) {
    Vector v(p);
    for (Eigen::Index i = 0; i < p; ++i) v[i] = normal();
    return v;
  }

  // Row-major fill so the draw order matches reading the matrix row by row.
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    }
    return m;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cpca
