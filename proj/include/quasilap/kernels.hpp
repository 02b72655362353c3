#pragma once

#include <complex>
#include <cstddef>
#include <vector>

// Hot loops in two versions: a plain serial reference and an OpenMP one.
// Both must produce identical results; the tests and the benchmark compare them.
namespace quasilap::kernels {

using cplx = std::complex<double>;

struct SymbolScan {
  double max_abs_arg = 0.0;
  double min_abs = 0.0;
};

/// Scans s(zeta) = -(p20 conj(zeta)^2 + p11 |zeta|^2 + p02 zeta^2) over n samples and
/// `directions` unit covectors zeta = exp(i pi j / directions), j < directions
/// (the symbol is even in zeta, so half the circle suffices).
SymbolScan symbol_scan_serial(const cplx* p20, const cplx* p11, const cplx* p02, std::size_t n, int directions);
SymbolScan symbol_scan_omp(const cplx* p20, const cplx* p11, const cplx* p02, std::size_t n, int directions);

/// Fourier-collocation matrix of a variable-coefficient operator on an n x n grid.
///
/// spectra[f] holds the normalized DFT of the f-th product coefficient (n*n values,
/// row-major) and symbols[f][k] the symbol of the f-th derivative on basis mode k.
/// Modes are given by their DFT (row, col). Output is column-major, size m*m.
///   A(j, k) = sum_f spectra[f][(row_j - row_k) mod n, (col_j - col_k) mod n] * symbols[f][k]
struct FourierAssembly {
  int n = 0;
  std::vector<int> mode_row, mode_col;
  std::vector<std::vector<cplx>> spectra;
  std::vector<std::vector<cplx>> symbols;
};
void assemble_fourier_matrix_serial(const FourierAssembly& in, cplx* out);
void assemble_fourier_matrix_omp(const FourierAssembly& in, cplx* out);

}  // namespace quasilap::kernels
