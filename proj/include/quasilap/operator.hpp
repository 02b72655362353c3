#pragma once

#include <array>

#include "quasilap/beltrami.hpp"

namespace quasilap {

/// Hyperbolic: prefactor (f_{mu,nu} - conj f_{nu,mu})^2 on a half-plane window.
/// FlatTorus: constant prefactor -4, the flat counterpart of -4 (Im f)^2, so that
/// Delta_{0,0} = -4 d dbar is the positive flat Laplacian.
enum class Flavor { Hyperbolic, FlatTorus };

/// prefactor * (c20 d^2 + c11 d dbar + c02 dbar^2 + c10 d + c01 dbar)
struct HoloLaplacian {
  SampledField c20, c11, c02, c10, c01;
  SampledField prefactor;
  Flavor flavor = Flavor::FlatTorus;

  // provenance, kept for symbol diagnostics
  SampledField mu, nu;
  SampledField f_mn;        // f_{mu,nu}
  SampledField f_nm_conj;   // conj(f_{nu,mu})
  SampledField d_f_mn;      // d f_{mu,nu}
  SampledField d_f_nm_conj; // conj(d f_{nu,mu})
  double k = 0.0;           // max(sup|mu|, sup|nu|)

  const ComplexGrid& grid() const { return c11.grid; }
};

/// Delta_{mu,nu} from the normalized solutions f_{mu,nu} and f_{nu,mu} on mu's grid.
/// alpha = 1/((1 - mu conj nu) d f_{mu,nu}), alpha' = conj(alpha_{nu,mu}) and
///   c20 = -mu a a', c11 = (1 + mu conj nu) a a', c02 = -conj(nu) a a',
///   c10 = a a' (dbar - mu d) log a,  c01 = a a' (d - conj(nu) dbar) log a'.
/// The log derivatives are formed as (dbar a - mu d a)/a, never through a log field.
/// Torus grids give the flat flavor, window grids the hyperbolic one.
HoloLaplacian build_delta_mn(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                             const QuasiconformalMap& fmn, const QuasiconformalMap& fnm);

/// Pullback of the Laplacian by f^mu: build_delta_mn(mu, mu, f, f).
HoloLaplacian pullback_laplacian(const BeltramiCoefficient& mu, const QuasiconformalMap& f);

/// Solves for f_{mu,nu}, f_{nu,mu} and builds Delta_{mu,nu}.
HoloLaplacian make_delta_mn(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                            const SolverOptions& opt = {});

/// L u with spectral derivatives on tori and finite differences on windows.
SampledField apply(const HoloLaplacian& L, const SampledField& u);

/// sigma(L)(zeta) at sample i with sigma(dbar) = i zeta:
///   -prefactor (c20 conj(zeta)^2 + c11 |zeta|^2 + c02 zeta^2)
cplx principal_symbol(const HoloLaplacian& L, std::size_t i, cplx zeta);

struct SymbolReport {
  double max_abs_arg = 0.0;
  /// max |arg| of: -(f_{mu,nu} - conj f_{nu,mu})^2 (or 4 on the torus),
  /// (1 - mu conj nu)^{-2}, (d f_{mu,nu} conj(d f_{nu,mu}))^{-1} and
  /// (zeta - mu conj zeta)(conj zeta - conj(nu) zeta).
  std::array<double, 4> per_factor_args{};
  std::size_t sample_count = 0;
  int directions = 0;
  double min_abs_symbol = 0.0;  // over unit covectors
};

/// Argument of the principal symbol over all samples and `directions` unit covectors.
/// Throws EllipticityError if the symbol vanishes.
SymbolReport symbol_report(const HoloLaplacian& L, int directions = 32);

/// Sup over the lattice generators 1 and z of the change of every coefficient field
/// under translation, compared at off-grid points through the trigonometric interpolant,
/// together with the quasi-periodicity defect of the underlying maps.
double invariance_check(const HoloLaplacian& L, const QuasiconformalMap& fmn, const QuasiconformalMap& fnm);

struct HodgeForm {
  /// int du ^ *du for the metric |dw^mu|^2:
  ///   2 int [(1 + |mu|^2)(|a|^2 + |b|^2) - 4 Re(mu a conj b)] / (1 - |mu|^2) dx dy
  /// with a = d u, b = dbar u. Equals the flat Dirichlet energy int |grad u|^2 at mu = 0.
  double energy = 0.0;
  /// int (1 - |mu|^2)(|a|^2 + |b|^2) dx dy
  double comparison = 0.0;
  /// int (|a|^2 + |b|^2) dx dy
  double flat = 0.0;
  /// int |grad u|^2 dx dy
  double flat_dirichlet = 0.0;
};
HodgeForm hodge_quadratic_form(const BeltramiCoefficient& mu, const SampledField& u);

struct GardingResult {
  double defect = 0.0;   // |<u, Delta_{mu,nu} u> - ||grad u||^2|
  double epsilon = 0.0;  // discrete C^2 norm of mu - nu
  double ratio = 0.0;    // defect / (epsilon (||grad u||^2 + ||u||^2)), or the raw defect at epsilon = 0
  double energy = 0.0;
  double l2 = 0.0;
};
/// Inner products use the area form of the metric |dw^mu|^2 on the torus.
GardingResult garding_check(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, const SampledField& u,
                            const SolverOptions& opt = {});

/// max over samples of |f|, |d f|, |dbar f| and the three second derivatives.
double c2_norm(const SampledField& f);

}  // namespace quasilap
