#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtk {

using DenseVector = std::vector<double>;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " +
                              std::to_string(b)) {}
};

inline void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_dim(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline DenseVector add(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  DenseVector out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline DenseVector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  DenseVector out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

inline DenseVector scale(double s, std::span<const double> a) {
  DenseVector out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace dtk
