#pragma once

#include <iosfwd>
#include <vector>

#include "quasilap/grid.hpp"

namespace quasilap {

struct EtaValue {
  cplx z;
  cplx value;
  int truncation_terms = 0;
  double tail_bound = 0.0;  // relative
};

/// Dedekind eta by its q-product. Rejects Im z < 0.05 (|q| > 0.73).
EtaValue dedekind_eta(cplx z);

/// log eta(z) = 2 pi i z/24 + sum Log(1 - q^n), continuous in z on the upper half-plane.
cplx log_dedekind_eta(cplx z);

/// log(2 pi sqrt(Im z) |eta(z)|^2).
double torus_logdet_exact(cplx z);

/// log 2 pi + (1/2) Log((z - w)/2i) + log eta(z) + conj(log eta(conj w)).
/// Holomorphic in z and w; equals torus_logdet_exact(z) at w = conj(z).
cplx torus_logdet_extension(cplx z, cplx w);

/// Eigenvalues 4 pi^2 |l|^2 <= cut of the flat Laplacian on C/(Z + zZ), l over the
/// dual lattice, counted with multiplicity and sorted.
std::vector<double> torus_eigenvalues(cplx z, double cut);

/// 4 pi^2 |l|^2 for the dual vector indexed by Fourier mode (m, n).
double torus_mode_eigenvalue(cplx z, int m, int n);

void write_eigenvalues_csv(std::ostream& os, const std::vector<double>& ev);
void write_eta_json(std::ostream& os, const EtaValue& eta);

}  // namespace quasilap
