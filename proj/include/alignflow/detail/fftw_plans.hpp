#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

namespace alignflow::detail {

/// Process-wide cache of 1D real FFTW plans keyed by transform size.
///
/// The FFTW planner is not thread-safe, so plan creation is serialized.
/// Plans are created with FFTW_UNALIGNED and executed through the
/// new-array interface, which is safe to call concurrently.
class FftwPlans {
 public:
  struct Pair {
    fftw_plan forward;
    fftw_plan backward;
  };

  static const Pair& get(std::size_t n) {
    static FftwPlans cache;
    std::lock_guard lock(cache.mutex_);
    auto it = cache.plans_.find(n);
    if (it != cache.plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Pair p{fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c, flags),
           fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(), flags)};
    return cache.plans_.emplace(n, p).first->second;
  }

  FftwPlans(const FftwPlans&) = delete;
  FftwPlans& operator=(const FftwPlans&) = delete;

 private:
  FftwPlans() = default;
  ~FftwPlans() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<std::size_t, Pair> plans_;
};

/// Unnormalized r2c transform of `in` (length n) into `out` (length n/2+1).
inline void fft_r2c(std::vector<double>& in, std::vector<std::complex<double>>& out) {
  const auto& p = FftwPlans::get(in.size());
  out.resize(in.size() / 2 + 1);
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

/// Unnormalized c2r transform; destroys `in`.
inline void fft_c2r(std::vector<std::complex<double>>& in, std::vector<double>& out) {
  const std::size_t n = out.size();
  const auto& p = FftwPlans::get(n);
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace alignflow::detail
