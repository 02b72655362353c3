#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quasilap/grid.hpp"

namespace quasilap {

enum class SupportKind { Periodic, Compact, Window };

/// Sampled complex dilatation with a certified bound sup|mu| <= k < 1.
///
/// Periodic coefficients live on torus grids, compactly supported ones on a
/// centred plane grid. Window coefficients carry a pointwise evaluator on the
/// upper half-plane, which the plane solver uses to assemble the coefficient
/// on the whole box.
struct BeltramiCoefficient {
  SampledField field;
  double k = 0.0;
  double E = 0.0;  // max over samples of |mu| and its first and second derivatives
  SupportKind support = SupportKind::Periodic;
  double radius = 0.0;  // compact support radius
  std::function<cplx(cplx)> analytic;
};

/// Builds a coefficient from samples; support follows the grid kind.
BeltramiCoefficient make_coefficient(const SampledField& f);
/// Samples `f` on `g` and keeps `f` as the pointwise evaluator.
BeltramiCoefficient make_coefficient(const ComplexGrid& g, std::function<cplx(cplx)> f, double support_radius = 0.0);

/// Pointwise evaluator of a named preset on a given grid:
///   constant:re[,im]
///   bump:cx,cy,R,h_re[,h_im]     smooth bump of height h and radius R
///   fourier:m,n,amp_re[,amp_im]  amp * exp(2 pi i (m s + n t)) in lattice or box coordinates
///   random:seed,amp,maxmode      random trigonometric polynomial with sup <= amp
/// Torus presets are periodic in the lattice; bumps are periodized.
std::function<cplx(cplx)> preset_function(const std::string& spec, const ComplexGrid& g);
BeltramiCoefficient preset_coefficient(const std::string& spec, const ComplexGrid& g);

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 2000;
  int stagnation_window = 50;
  double cutoff_radius = 0.0;   // plane solves; 0 picks one from the output points
  double plane_spacing = 1.0 / 24.0;
  double cutoff_flat_fraction = 0.75;  // cutoff equals 1 inside this fraction of the radius
};

/// Sampled normalized quasiconformal map with first derivatives.
struct QuasiconformalMap {
  SampledField map_values;
  SampledField d_values;
  SampledField dbar_values;
  std::string normalization;
  double residual = 0.0;              // on the solver's own grid
  double interpolation_residual = 0.0;  // at output points reached by interpolation
  int iterations = 0;
  cplx new_modulus{0.0, 0.0};  // torus solves: image lattice is Z + new_modulus Z
  double min_abs_d = 0.0;
  std::function<cplx(cplx)> eval;
  std::function<cplx(cplx)> eval_d;
  std::function<cplx(cplx)> eval_dbar;
};

/// Normalized solution of dbar w = mu d w.
///  - periodic: w(0) = 0, w(1) = 1, w(p + 1) = w(p) + 1, w(p + z) = w(p) + z'
///  - compact / window: w fixes 0, 1 and infinity
QuasiconformalMap solve_wmu(const BeltramiCoefficient& mu, const SolverOptions& opt = {});

/// Solution of dbar w - mu d w = sigma with w(0) = 0 and d w in L^p, on a plane grid.
QuasiconformalMap solve_wmusigma(const BeltramiCoefficient& mu, const SampledField& sigma,
                                 const SolverOptions& opt = {});

/// f_{mu,nu}: coefficient mu on the upper half-plane and conj(nu(conj z)) below,
/// sampled on mu's grid. On torus grids this is the lattice-normalized w^mu; the
/// conjugate partner conj(f_{nu,mu}) is then conj(w^nu).
QuasiconformalMap solve_fmn(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                            const SolverOptions& opt = {});

/// Centred plane grid for compact-support solves: box side 4 * cutoff, odd resolution.
ComplexGrid make_plane_grid(double cutoff_radius, double spacing);

/// Beltrami coefficient of the inverse of a torus map, (-mu d w / conj(d w)) o w^{-1},
/// sampled on the image torus grid. With mu = dbar w / d w this is -dbar w / conj(d w)
/// at the preimage, which is located by Newton iteration on the interpolated map
/// starting from the inverse of its affine part.
BeltramiCoefficient inverse_map(const QuasiconformalMap& w);

/// sup |w^mu - w^nu| / sup|mu - nu| over samples inside |p| <= R (R <= 0: all samples).
double stability_gap(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, double R = 0.0,
                     const SolverOptions& opt = {});

/// inf |d w| over samples; restricted to `window` when given.
double min_abs_partial(const QuasiconformalMap& w, const std::optional<CompactWindow>& window = std::nullopt);

struct HolderFit {
  double alpha = 0.0;
  double constant = 0.0;
  std::vector<double> deltas;
  std::vector<double> moduli;
};
/// Modulus of continuity of the sampled map over |p| <= R fitted to c * delta^alpha.
HolderFit holder_modulus(const QuasiconformalMap& w, double R);

/// ||S f||_p / ||f||_p for the Beurling transform on a periodic grid.
double beurling_lp_ratio(const SampledField& f, double p);
/// ||f||_p over the grid with cell-area weights.
double lp_norm(const SampledField& f, double p);

/// Beurling transform (d of the Cauchy transform) on a torus grid, mean-zero part.
SampledField torus_beurling(const SampledField& f);

}  // namespace quasilap
