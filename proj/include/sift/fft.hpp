#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>

#include "sift/error.hpp"

namespace sift::detail {

// FFTW's planner is not thread safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// One-dimensional complex DFT of fixed size with owned, aligned buffers.
/// forward: X_q = sum_k x_k e^{-i 2 pi q k / n}; backward uses e^{+i...} and
/// is unnormalised.
class FftPlan {
 public:
  enum class Direction { forward, backward };

  FftPlan(std::size_t n, Direction dir) : n_(n) {
    if (n == 0) throw Error(ErrorKind::invalid_config, "FFT size must be positive");
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                             FFTW_ESTIMATE);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  ~FftPlan() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  std::size_t size() const { return n_; }
  std::span<std::complex<double>> input() { return {reinterpret_cast<std::complex<double>*>(in_), n_}; }
  std::span<const std::complex<double>> output() const {
    return {reinterpret_cast<const std::complex<double>*>(out_), n_};
  }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace sift::detail
