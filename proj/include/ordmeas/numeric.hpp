#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ordmeas {

/// Eigenvalues of a dense symmetric matrix (row-major, n*n) by cyclic
/// Jacobi rotations. Intended for the small matrices this library checks
/// for positive semidefiniteness.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

/// Least eigenvalue helper for PSD checks.
double min_eigenvalue(const std::vector<double>& a, int n);

/// SplitMix64: the fixed generator behind every seeded fixture in this
/// project. Constants are the ones published by Steele, Lea and Flood
/// (increment 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB), so streams are reproducible from the seed alone.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, hi) for small hi.
    int next_below(int hi) { return static_cast<int>(next() % static_cast<std::uint64_t>(hi)); }

  private:
    std::uint64_t state_;
};

}  // namespace ordmeas
