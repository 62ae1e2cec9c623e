#pragma once

// Circular convolution (x ⊛ y)_k = Σ_i x_i y_{(k−i) mod d}.
//
// The direct method is the O(d²) defining sum. The fast method goes through
// FFTW's real-to-complex transforms and is restricted to power-of-two d.
// Plans are created once per dimension under a global lock; executing a plan
// on caller-owned buffers is thread-safe in FFTW.

#include <fftw3.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>

#include "dtk/vector.hpp"

namespace dtk {

enum class ConvolutionMethod { direct, fast };

class UnsupportedDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

template <typename T>
struct FftwFree {
  void operator()(T* p) const noexcept { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree<T>>;

inline FftwBuffer<double> alloc_real(std::size_t n) {
  return FftwBuffer<double>(fftw_alloc_real(n));
}
inline FftwBuffer<fftw_complex> alloc_complex(std::size_t n) {
  return FftwBuffer<fftw_complex>(fftw_alloc_complex(n));
}

class FftPlans {
 public:
  explicit FftPlans(std::size_t d) : dim_(d) {
    auto in = alloc_real(d);
    auto out = alloc_complex(d / 2 + 1);
    const int n = static_cast<int>(d);
    forward_ = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, out.get(), in.get(), FFTW_ESTIMATE);
    if (forward_ == nullptr || inverse_ == nullptr)
      throw std::runtime_error("FFTW plan creation failed");
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  std::size_t dim() const noexcept { return dim_; }

  void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out) const {
    const std::size_t d = dim_;
    const std::size_t h = d / 2 + 1;
    Workspace& w = workspace(d);
    double* ra = w.ra.get();
    double* rb = w.rb.get();
    fftw_complex* fa = w.fa.get();
    fftw_complex* fb = w.fb.get();
    std::copy(a.begin(), a.end(), ra);
    std::copy(b.begin(), b.end(), rb);
    fftw_execute_dft_r2c(forward_, ra, fa);
    fftw_execute_dft_r2c(forward_, rb, fb);
    for (std::size_t k = 0; k < h; ++k) {
      const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
      const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
      fa[k][0] = re;
      fa[k][1] = im;
    }
    fftw_execute_dft_c2r(inverse_, fa, ra);
    const double inv = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = ra[i] * inv;
  }

  // Per-thread scratch buffers, allocated with FFTW's alignment.
  struct Workspace {
    explicit Workspace(std::size_t d)
        : ra(alloc_real(d)), rb(alloc_real(d)), fa(alloc_complex(d / 2 + 1)), fb(alloc_complex(d / 2 + 1)) {}
    FftwBuffer<double> ra, rb;
    FftwBuffer<fftw_complex> fa, fb;
  };

  static Workspace& workspace(std::size_t d) {
    thread_local std::map<std::size_t, Workspace> pool;
    auto it = pool.find(d);
    if (it == pool.end()) it = pool.try_emplace(d, d).first;
    return it->second;
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  std::size_t dim_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline const FftPlans& plans_for(std::size_t d) {
  // The mutex must outlive the cache, so it is constructed first.
  std::mutex& mutex = FftPlans::planner_mutex();
  static std::map<std::size_t, std::unique_ptr<FftPlans>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<FftPlans>(d);
  return *slot;
}

}  // namespace detail

inline void circular_convolution_direct(std::span<const double> a, std::span<const double> b,
                                        std::span<double> out) {
  const std::size_t d = a.size();
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    // b index (k − i) mod d, split to avoid the modulo in the inner loop.
    for (std::size_t i = 0; i <= k; ++i) s += a[i] * b[k - i];
    for (std::size_t i = k + 1; i < d; ++i) s += a[i] * b[d + k - i];
    out[k] = s;
  }
}

inline DenseVector circular_convolution(std::span<const double> a, std::span<const double> b,
                                        ConvolutionMethod method) {
  require_same_dim(a, b);
  DenseVector out(a.size());
  if (method == ConvolutionMethod::direct) {
    circular_convolution_direct(a, b, out);
    return out;
  }
  if (!is_power_of_two(a.size()))
    throw UnsupportedDimension("fast circular convolution requires a power-of-two dimension, got " +
                               std::to_string(a.size()));
  if (a.size() == 1) {
    out[0] = a[0] * b[0];
    return out;
  }
  detail::plans_for(a.size()).convolve(a, b, out);
  return out;
}

}  // namespace dtk
