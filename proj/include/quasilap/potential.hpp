#pragma once

#include <functional>
#include <vector>

#include "quasilap/grid.hpp"

namespace quasilap {

/// Axis-parallel closed rectangle in C.
struct Rect {
  double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;
  bool contains(cplx p) const;
  bool interior(cplx p) const;
  Rect conj() const;
};

/// Omega(z, w) dz ^ dw on V x W for one-dimensional factors. A form of this type is
/// closed exactly when Omega is holomorphic in both variables; the certificate is the
/// largest sampled dbar_z / dbar_w difference quotient relative to max(1, |Omega|).
struct ClosedTwoForm {
  std::function<cplx(cplx, cplx)> omega;
  Rect V, W;
  double closedness_certificate = 0.0;
};

/// Samples a 6 x 6 x 6 x 6 grid of V x W at h = 1e-5 and throws InvalidArgument when
/// the certificate exceeds tol.
ClosedTwoForm make_closed_two_form(std::function<cplx(cplx, cplx)> omega, const Rect& V, const Rect& W,
                                   double tol = 1e-6);

struct ConeChart {
  cplx z0, w0;
};
/// Throws InvalidArgument unless z0 and w0 are interior to V and W.
void validate_chart(const ClosedTwoForm& form, const ConeChart& chart);

/// A path on [0, 1] with its derivative.
struct Path {
  std::function<cplx(double)> point;
  std::function<cplx(double)> tangent;
};
Path radial_path(cplx a, cplx b);
/// a -> b bent sideways by amp * sin(pi t) times the unit normal.
Path bent_path(cplx a, cplx b, double amp);

struct QuadratureOptions {
  double tol = 1e-12;        // per segment, absolute
  double max_error = 1e-10;  // estimated error that raises ConvergenceError
  unsigned max_depth = 15;
};

/// q(z, w) = integral over [z0, z] x [w0, w] of Omega dz ^ dw by iterated adaptive
/// Gauss-Kronrod quadrature along the radial segments. q(z0, w) = q(z, w0) = 0 exactly.
cplx cone_potential(const ClosedTwoForm& form, const ConeChart& chart, cplx z, cplx w,
                    const QuadratureOptions& opt = {});
/// Same integral over an arbitrary pair of paths (z0 -> z, w0 -> w).
cplx path_potential(const ClosedTwoForm& form, const Path& pz, const Path& pw, const QuadratureOptions& opt = {});

/// Central-difference d_z d_w of a function holomorphic in both variables, with one
/// Richardson step (h and 2h), so the truncation error is O(h^4).
cplx mixed_derivative(const std::function<cplx(cplx, cplx)>& F, cplx z, cplx w, double h);

/// |d_z d_w cone_potential - Omega(z, w)|.
double mixed_hessian_check(const ClosedTwoForm& form, const ConeChart& chart, cplx z, cplx w, double h);

/// |d_z d_w (q_1 - q_2)| for potentials with two different centers.
double chart_independence_defect(const ClosedTwoForm& form, const ConeChart& a, const ConeChart& b, cplx z, cplx w,
                                 double h);

/// Weil-Petersson density -i (z - conj z)^{-2} on the upper half-plane.
cplx wp_genus1(cplx z);
/// Its holomorphic extension density (z - w)^{-2}; at w = conj z it equals i wp_genus1(z).
cplx wp_extension_density(cplx z, cplx w);
/// The closed form of the cone potential of (z - w)^{-2}:
///   log(z - w) - log(z0 - w) - log(z - w0) + log(z0 - w0)
/// on the upper x lower half-plane, where z - w stays in the upper half-plane.
cplx log_potential_closed_form(const ConeChart& chart, cplx z, cplx w);
/// |d dbar log(z - conj z) - (z - conj z)^{-2}| by the five-point Laplacian.
double kahler_potential_check(cplx z, double h);

/// (q(z, w) + conj q(conj w, conj z)) / 2. Throws InvalidArgument when (z, w) or the
/// reflected point (conj w, conj z) is outside V x W.
cplx tilde_q(const std::function<cplx(cplx, cplx)>& q, const ClosedTwoForm& form, cplx z, cplx w);

/// d dbar of z -> g(z, conj z) by the five-point Laplacian (a quarter of it).
cplx diagonal_ddbar(const std::function<cplx(cplx, cplx)>& g, cplx z, double h);

/// F(z, w) = torus_logdet_extension(z, w) - (1/2) log((z - w)/2i) must split as f(z) + g(w).
struct ExtensionCheck {
  double mixed = 0.0;            // |d_z d_w F| at (z, w)
  double split_variation = 0.0;  // spread of F(z', w) - F(z', w2) over a 5 x 5 z'-grid around z
  double diagonal = 0.0;         // |extension(z, conj z) - torus_logdet_exact(z)|
};
/// Throws BranchError when Re((z - w)/2i) <= 0.
ExtensionCheck extension_structure_check(cplx z, cplx w, double h = 1e-3);

/// Solves P(z_k, conj z_k) = noise_k in least squares for the coefficients of a bivariate
/// polynomial of total degree <= degree, over `points` deterministic samples in the unit
/// disk. Small coefficients mean the diagonal determines P.
struct UniquenessWitness {
  int unknowns = 0;
  double min_singular = 0.0;
  double max_coefficient = 0.0;
};
UniquenessWitness diagonal_uniqueness_witness(int degree, int points, double noise, unsigned seed = 7);

}  // namespace quasilap
