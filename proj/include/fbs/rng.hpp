#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace fbs {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby seed inputs.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-trial stream id. Distinct across (problem, trial) pairs for a fixed
// master seed, and stable across runs of the same binary.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view problem,
                                 std::uint64_t trial) {
  return mix64(mix64(master ^ fnv1a(problem)) + trial);
}

inline double randn(Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(rng);
}

inline double runif(Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

inline Eigen::VectorXd randn_vector(Rng& rng, Eigen::Index n, double stddev = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = stddev * randn(rng);
  return v;
}

inline Eigen::MatrixXd randn_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                    double stddev = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * randn(rng);
  return m;
}

// Complex Gaussian with independent N(0,1) real and imaginary parts.
inline Eigen::VectorXcd crandn_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double re = randn(rng);
    double im = randn(rng);
    v[i] = std::complex<double>(re, im);
  }
  return v;
}

inline Eigen::MatrixXcd crandn_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      double re = randn(rng);
      double im = randn(rng);
      m(i, j) = std::complex<double>(re, im);
    }
  return m;
}

inline Eigen::MatrixXd runif_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                    double lo = 0.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = runif(rng, lo, hi);
  return m;
}

// k distinct indices drawn from [0, n), in draw order.
inline std::vector<Eigen::Index> sample_without_replacement(Rng& rng, Eigen::Index n,
                                                            Eigen::Index k) {
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    std::size_t j = d(rng);
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return out;
}

}  // namespace fbs
