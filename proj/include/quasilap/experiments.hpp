#pragma once

#include <string>
#include <vector>

#include "quasilap/determinant.hpp"
#include "quasilap/potential.hpp"

namespace quasilap {

/// Least-squares line y = slope x + intercept with its coefficient of determination.
struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct TorusDetReport {
  cplx z;
  double zeta_logdet = 0.0;
  double exact = 0.0;
  double rel_delta = 0.0;
  double raw = 0.0;
  int n = 0;
  double spectrum_defect = -1.0;  // discrete flat spectrum vs dual-lattice eigenvalues; -1 when n = 0
  int modes_compared = 0;
};
/// Zeta-regularized determinant against the eta formula. For n > 0 the flat Laplacian is
/// also discretized on an n x n grid and its lowest 20 eigenvalues compared.
TorusDetReport torus_det_report(cplx z, int n);

/// nu_eps = mu + eps * direction for each eps.
struct SymbolSweep {
  double diagonal_arg = 0.0;
  std::vector<double> eps, args;
  LinearFit fit;
  double max_arg = 0.0;
};
SymbolSweep symbol_angle_sweep(const BeltramiCoefficient& mu, const std::function<cplx(cplx)>& direction,
                               const std::vector<double>& eps, int directions = 32, const SolverOptions& opt = {});

struct EigenSweep {
  double diagonal_min = 0.0;  // smallest nonzero |lambda| at eps = 0
  double rho = 0.0;           // kernel radius, half of diagonal_min
  std::vector<double> eps, min_abs, deviation;
  std::vector<int> kernel_dims;
  std::vector<cplx> log_dets;
  double fitted_c = 0.0;  // max deviation / eps
  bool rho_violated = false;
  std::string failure;  // first error message raised inside the sweep
};
/// Discretized Delta_{mu, mu + eps d}: smallest nonzero |lambda| per eps and log det' on
/// the branch with cut angle theta. rho <= 0 uses half the diagonal gap. Runs the eps
/// values on `jobs` OpenMP threads; results are stored by index.
EigenSweep eigen_bound_sweep(const BeltramiCoefficient& mu, const std::function<cplx(cplx)>& direction,
                             const std::vector<double>& eps, int jobs = 1, const SolverOptions& opt = {},
                             double theta = kPi, double rho = 0.0);

/// Short title of acceptance criterion `id` (1..11).
const char* criterion_name(int id);

struct ExampleCheck {
  std::string example;
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
/// The potential construction on (z - w)^{-2}, constant and polynomial forms, and the
/// genus-1 extension checks, each with its tolerance.
std::vector<ExampleCheck> potential_examples();

/// Largest |lambda_i - lambda_i'| over the lowest `modes` eigenvalues of the discretized
/// flat Delta_{mu,mu} for constant mu and the flat Laplacian of the image torus.
double isometry_defect(const BeltramiCoefficient& mu, int modes, const SolverOptions& opt = {});

/// Largest sup distance between the coefficient fields of Delta_{mu,mu} built through
/// f_{mu,mu} and of the pullback Laplacian of w^mu.
double diagonal_coincidence_defect(const BeltramiCoefficient& mu, const SolverOptions& opt = {});

/// Largest |log_det_branch(theta) - log_det_branch(theta_0) - 2 pi i k| over `count`
/// admissible cut angles, k the nearest integer.
double contour_independence_defect(const SpectralDecomposition& S, int count = 3);

/// max over samples of |conj f_{nu,mu}(p) - f_{mu,nu}(conj p)| on a half-plane window grid.
double reflection_defect(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, const SolverOptions& opt = {});

}  // namespace quasilap
