#include "quasilap/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace quasilap {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2d::Fft2d(int n0, int n1) : n0_(n0), n1_(n1) {
  if (n0 <= 0 || n1 <= 0) throw std::invalid_argument("Fft2d: sizes must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n0) * n1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!fwd_ || !bwd_) throw std::runtime_error("Fft2d: plan creation failed");
}

Fft2d::~Fft2d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

Fft2d::Fft2d(Fft2d&& other) noexcept
    : n0_(other.n0_), n1_(other.n1_), fwd_(std::exchange(other.fwd_, nullptr)),
      bwd_(std::exchange(other.bwd_, nullptr)) {}

Fft2d& Fft2d::operator=(Fft2d&& other) noexcept {
  if (this != &other) {
    std::swap(n0_, other.n0_);
    std::swap(n1_, other.n1_);
    std::swap(fwd_, other.fwd_);
    std::swap(bwd_, other.bwd_);
  }
  return *this;
}

void Fft2d::forward(std::vector<std::complex<double>>& data) const {
  if (data.size() != static_cast<std::size_t>(n0_) * n1_)
    throw std::invalid_argument("Fft2d::forward: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft2d::inverse(std::vector<std::complex<double>>& data) const {
  if (data.size() != static_cast<std::size_t>(n0_) * n1_)
    throw std::invalid_argument("Fft2d::inverse: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
  const double scale = 1.0 / (static_cast<double>(n0_) * n1_);
  for (auto& v : data) v *= scale;
}

const Fft2d& fft_plan(int n0, int n1) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<Fft2d>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[{n0, n1}];
  if (!slot) slot = std::make_unique<Fft2d>(n0, n1);
  return *slot;
}

}  // namespace quasilap
