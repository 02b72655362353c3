#pragma once

#include <complex>
#include <vector>

namespace quasilap {

/// 2-D complex DFT of an n0 x n1 row-major array, FFTW-backed.
///
/// The plan is created with FFTW_UNALIGNED so one instance can be executed on
/// any buffer of the right shape. Plan creation is serialized internally;
/// execution is thread-safe.
class Fft2d {
 public:
  Fft2d(int n0, int n1);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  Fft2d(Fft2d&& other) noexcept;
  Fft2d& operator=(Fft2d&& other) noexcept;

  /// Unnormalized forward transform, sum_x f(x) exp(-2 pi i k.x/n).
  void forward(std::vector<std::complex<double>>& data) const;
  /// Inverse transform including the 1/(n0 n1) factor.
  void inverse(std::vector<std::complex<double>>& data) const;

  int n0() const { return n0_; }
  int n1() const { return n1_; }

 private:
  int n0_ = 0;
  int n1_ = 0;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Shared plan for an n0 x n1 transform, created on first use.
const Fft2d& fft_plan(int n0, int n1);

/// Signed frequency of DFT index k on n points, in (-n/2, n/2].
/// For even n the Nyquist index k = n/2 maps to -n/2.
inline int signed_frequency(int k, int n) { return (k <= (n - 1) / 2) ? k : k - n; }

/// True when the signed frequency is the unpaired Nyquist mode of an even grid.
inline bool is_nyquist(int freq, int n) { return (n % 2 == 0) && freq == -n / 2; }

}  // namespace quasilap
