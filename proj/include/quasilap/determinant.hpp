#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "quasilap/operator.hpp"

namespace quasilap {

/// Matrix of a flat-flavor HoloLaplacian in the Fourier basis of its torus grid.
/// Modes with a Nyquist index are left out, so an n x n grid with even n gives
/// (n-1)^2 unknowns. Mode 0 is the constant mode.
struct Discretization {
  Eigen::MatrixXcd matrix;
  int n = 0;
  std::vector<int> mode_row, mode_col;  // DFT indices of each basis mode
};

struct DiscretizeOptions {
  std::size_t cap = 4096;  // maximum number of unknowns
  bool parallel = true;    // OpenMP assembly
};
Discretization discretize(const HoloLaplacian& L, const DiscretizeOptions& opt = {});

/// Normalized DFT coefficients of a field on the basis modes, and back.
Eigen::VectorXcd to_modes(const Discretization& D, const SampledField& u);
SampledField from_modes(const Discretization& D, const ComplexGrid& g, const Eigen::VectorXcd& c);

struct SpectralOptions {
  double theta = kPi;       // cut ray arg = theta; branch arg in (theta - 2 pi, theta]
  double rho = 0.0;         // kernel radius; <= 0 picks half the first non-kernel |lambda|
  int expected_kernel = 1;  // constants; < 0 counts the kernel without enforcing it (needs rho > 0)
  bool certify = true;      // compute eigenvectors and eigenpair residuals
  double ray_tol = 1e-10;
};

struct SpectralDecomposition {
  std::vector<cplx> eigenvalues;  // sorted by modulus
  double theta = kPi;
  double rho = 0.0;
  double residual_bound = -1.0;  // max eigenpair residual, -1 when not certified
  double norm = 0.0;             // max absolute row sum
  int kernel_dim = 0;
  std::string method;            // "gershgorin" or "zgeev"
};

/// Full non-symmetric eigensolve (LAPACK zgeev). Numerically diagonal matrices are
/// read off the diagonal and certified by their Gershgorin radius.
/// Throws SpectralError on a residual above 1e-9 |A|, a wrong kernel dimension, or a
/// nonzero eigenvalue within ray_tol of the cut ray (choose another theta).
SpectralDecomposition eigen_spectrum(const Eigen::MatrixXcd& A, const SpectralOptions& opt = {});

enum class DetMethod { MatrixBranch, ZetaExactTorus };

struct DetResult {
  cplx log_det;
  int branch_index = 0;  // (Im log_det - sum of principal args) / 2 pi
  DetMethod method = DetMethod::MatrixBranch;
  double theta = kPi;
  double raw_log_det = 0.0;  // zeta: log det' of the Laplacian on C/(Z + zZ) itself
};

/// sum of log(lambda) over |lambda| > rho with arg lambda in (theta - 2 pi, theta].
DetResult log_det_branch(const SpectralDecomposition& S);
DetResult log_det_branch(const SpectralDecomposition& S, double theta);

/// Cut angles in the widest angular gaps of the nonzero spectrum, widest first.
std::vector<double> admissible_thetas(const SpectralDecomposition& S, int count);

/// Zeta-regularized log det' of the flat torus Laplacian via the heat trace split at t = 1:
///   log det' = gamma + A/4pi - (A/pi) sum' exp(-|w|^2/4)/|w|^2 - sum' E1(4 pi^2 |l|^2)
/// over lattice vectors w and dual vectors l, A = Im z. raw_log_det holds that value;
/// log_det is half the value for the torus rescaled to area 4 pi^2, which is the
/// log(2 pi sqrt(Im z) |eta(z)|^2) normalization. Throws InvalidArgument for |z|
/// outside [0.1, 10] or Im z outside the same range.
DetResult zeta_logdet_torus(cplx z);
/// zeta(0) of the flat torus Laplacian, -1.
double torus_zeta_at_zero();

using MatrixFamily = std::function<Eigen::MatrixXcd(cplx)>;

struct VariationResult {
  double defect = 0.0;
  cplx finite_difference;  // five-point derivative of log det' along real s
  cplx trace_formula;      // Tr((A + P0)^{-1} dA) - Tr(P0 dA)
};
/// Compares d/ds log det'(A(s)) at s0 with the trace of (1 - P0) A^{-1} dA, dA by the
/// same five-point stencil. P0 is the spectral projector onto the kernel.
/// Throws SpectralError if the branch jumps across the stencil.
VariationResult variation_check(const MatrixFamily& family, cplx s0, double h, const SpectralOptions& opt = {});

/// Spectral projector onto the kernel of A (rank opt.expected_kernel <= 1).
Eigen::MatrixXcd kernel_projector(const Eigen::MatrixXcd& A, int rank);

enum class FamilyDirection { Mu, Nu, Diagonal };
/// s -> matrix of Delta_{mu + s mu1, nu} (Mu), Delta_{mu, nu + s nu1} (Nu) or
/// Delta_{mu + s mu1, mu + s mu1} (Diagonal) on mu's torus grid.
MatrixFamily delta_family(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                          std::function<cplx(cplx)> mu1, std::function<cplx(cplx)> nu1, FamilyDirection dir,
                          const SolverOptions& sopt = {});

struct AdmissibilityOptions {
  double theta0 = kPi / 2.0;  // bound on |arg sigma|
  SpectralOptions spectral = [] {
    SpectralOptions s;
    s.certify = false;  // eigenvalues only inside sweeps
    return s;
  }();
  SolverOptions solver;
};

struct HolomorphyResult {
  double res_s = 0.0;  // cr_residual of s -> log det' Delta_{mu + s mu1, nu}
  double res_t = 0.0;  // anti_cr_residual of t -> log det' Delta_{mu, nu + t nu1}
  double max_symbol_arg = 0.0;
  double min_gap = 0.0;  // min nonzero |lambda| over the stencil
};
/// Throws InvalidArgument ("inadmissible: ...") naming the failed condition when a
/// stencil point has |arg sigma| >= theta0 or its spectrum violates the kernel or
/// cut-ray conditions. A null direction contributes a zero residual.
HolomorphyResult det_holomorphy_check(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                                      const std::function<cplx(cplx)>& mu1, const std::function<cplx(cplx)>& nu1,
                                      double h, const AdmissibilityOptions& opt = {});
/// cr_residual of s -> log det' Delta_{mu + s mu1, mu + s mu1}; real-analytic, not holomorphic.
double diagonal_holomorphy_residual(const BeltramiCoefficient& mu, const std::function<cplx(cplx)>& mu1, double h,
                                    const AdmissibilityOptions& opt = {});

/// log det' of Delta_{mu,nu} on mu's torus grid along with its spectrum.
struct OperatorDet {
  SpectralDecomposition spectrum;
  DetResult det;
  SymbolReport symbol;
};
OperatorDet operator_log_det(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                             const AdmissibilityOptions& opt = {});

}  // namespace quasilap
