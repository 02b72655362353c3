#include "quasilap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace quasilap::kernels {

namespace {

inline void scan_sample(cplx a20, cplx a11, cplx a02, const std::vector<cplx>& zetas, double& max_arg,
                        double& min_abs) {
  for (const cplx& z : zetas) {
    const cplx s = -(a20 * std::conj(z) * std::conj(z) + a11 * std::norm(z) + a02 * z * z);
    max_arg = std::max(max_arg, std::abs(std::arg(s)));
    min_abs = std::min(min_abs, std::abs(s));
  }
}

std::vector<cplx> covectors(int directions) {
  std::vector<cplx> z(directions);
  for (int j = 0; j < directions; ++j) z[j] = std::polar(1.0, M_PI * j / directions);
  return z;
}

inline cplx matrix_entry(const FourierAssembly& in, std::size_t j, std::size_t k) {
  const int n = in.n;
  const int dr = ((in.mode_row[j] - in.mode_row[k]) % n + n) % n;
  const int dc = ((in.mode_col[j] - in.mode_col[k]) % n + n) % n;
  const std::size_t idx = static_cast<std::size_t>(dr) * n + dc;
  cplx acc = 0.0;
  for (std::size_t f = 0; f < in.spectra.size(); ++f) acc += in.spectra[f][idx] * in.symbols[f][k];
  return acc;
}

}  // namespace

SymbolScan symbol_scan_serial(const cplx* p20, const cplx* p11, const cplx* p02, std::size_t n, int directions) {
  const auto zetas = covectors(directions);
  double max_arg = 0.0, min_abs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) scan_sample(p20[i], p11[i], p02[i], zetas, max_arg, min_abs);
  return {max_arg, min_abs};
}

SymbolScan symbol_scan_omp(const cplx* p20, const cplx* p11, const cplx* p02, std::size_t n, int directions) {
  const auto zetas = covectors(directions);
  double max_arg = 0.0, min_abs = std::numeric_limits<double>::infinity();
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for reduction(max : max_arg) reduction(min : min_abs) schedule(static)
  for (long long i = 0; i < nn; ++i) scan_sample(p20[i], p11[i], p02[i], zetas, max_arg, min_abs);
  return {max_arg, min_abs};
}

void assemble_fourier_matrix_serial(const FourierAssembly& in, cplx* out) {
  const std::size_t m = in.mode_row.size();
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < m; ++j) out[j + k * m] = matrix_entry(in, j, k);
}

void assemble_fourier_matrix_omp(const FourierAssembly& in, cplx* out) {
  const long long m = static_cast<long long>(in.mode_row.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < m; ++k)
    for (long long j = 0; j < m; ++j) out[j + k * m] = matrix_entry(in, j, k);
}

}  // namespace quasilap::kernels
