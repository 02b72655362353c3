#include "quasilap/operator.hpp"

#include <algorithm>
#include <cmath>

#include "quasilap/kernels.hpp"

namespace quasilap {

namespace {

void require_same_grid(const ComplexGrid& a, const ComplexGrid& b, const char* what) {
  if (!a.same_as(b)) throw InvalidArgument(std::string(what) + ": grids differ");
}

SampledField reciprocal(const SampledField& f, const char* what) {
  SampledField r(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(std::abs(f.values[i]) > 0.0)) throw EllipticityError(std::string(what) + " vanishes at a sample");
    r.values[i] = 1.0 / f.values[i];
  }
  return r;
}

// (dbar - m d) log a = (dbar a - m d a) / a
SampledField twisted_log_dbar(const SampledField& a, const SampledField& m) {
  const auto da = derivative(a, Deriv::D);
  const auto dba = derivative(a, Deriv::Dbar);
  SampledField out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = (dba.values[i] - m.values[i] * da.values[i]) / a.values[i];
  return out;
}

// (d - m dbar) log a
SampledField twisted_log_d(const SampledField& a, const SampledField& m) {
  const auto da = derivative(a, Deriv::D);
  const auto dba = derivative(a, Deriv::Dbar);
  SampledField out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = (da.values[i] - m.values[i] * dba.values[i]) / a.values[i];
  return out;
}

double max_abs_arg(const SampledField& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(std::arg(v)));
  return m;
}

}  // namespace

HoloLaplacian build_delta_mn(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                             const QuasiconformalMap& fmn, const QuasiconformalMap& fnm) {
  const ComplexGrid& g = mu.field.grid;
  require_same_grid(g, nu.field.grid, "build_delta_mn");
  require_same_grid(g, fmn.map_values.grid, "build_delta_mn");
  require_same_grid(g, fnm.map_values.grid, "build_delta_mn");
  if (g.kind() == GridKind::Plane) throw InvalidArgument("build_delta_mn: use a torus or a half-plane window grid");
  if (!(mu.k < 1.0) || !(nu.k < 1.0)) throw EllipticityError("build_delta_mn: sup|mu| or sup|nu| >= 1");

  HoloLaplacian L;
  L.flavor = g.kind() == GridKind::Torus ? Flavor::FlatTorus : Flavor::Hyperbolic;
  L.mu = mu.field;
  L.nu = nu.field;
  L.k = std::max(mu.k, nu.k);
  L.f_mn = fmn.map_values;
  L.f_nm_conj = fnm.map_values.conj();
  L.d_f_mn = fmn.d_values;
  L.d_f_nm_conj = fnm.d_values.conj();

  const SampledField nubar = nu.field.conj();
  const SampledField one_minus = SampledField(g, 1.0) - mu.field * nubar;
  const SampledField alpha = reciprocal(one_minus * L.d_f_mn, "(1 - mu conj nu) d f_{mu,nu}");
  const SampledField alpha_p = reciprocal(one_minus * L.d_f_nm_conj, "(1 - mu conj nu) conj(d f_{nu,mu})");
  const SampledField aa = alpha * alpha_p;

  L.c20 = aa * mu.field * cplx(-1.0);
  L.c11 = aa * (SampledField(g, 1.0) + mu.field * nubar);
  L.c02 = aa * nubar * cplx(-1.0);
  L.c10 = aa * twisted_log_dbar(alpha, mu.field);
  L.c01 = aa * twisted_log_d(alpha_p, nubar);

  if (L.flavor == Flavor::FlatTorus) {
    L.prefactor = SampledField(g, -4.0);
  } else {
    const auto diff = L.f_mn - L.f_nm_conj;
    for (const auto& v : diff.values)
      if (!(std::abs(v) > 0.0)) throw EllipticityError("build_delta_mn: f_{mu,nu} = conj f_{nu,mu} at a sample");
    L.prefactor = diff * diff;
  }
  return L;
}

HoloLaplacian pullback_laplacian(const BeltramiCoefficient& mu, const QuasiconformalMap& f) {
  return build_delta_mn(mu, mu, f, f);
}

HoloLaplacian make_delta_mn(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, const SolverOptions& opt) {
  const auto fmn = solve_fmn(mu, nu, opt);
  const auto fnm = solve_fmn(nu, mu, opt);
  return build_delta_mn(mu, nu, fmn, fnm);
}

SampledField apply(const HoloLaplacian& L, const SampledField& u) {
  require_same_grid(L.grid(), u.grid, "apply");
  const auto d = derivatives(u);
  SampledField out(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i)
    out.values[i] = L.prefactor.values[i] *
                    (L.c20.values[i] * d.dd.values[i] + L.c11.values[i] * d.ddbar.values[i] +
                     L.c02.values[i] * d.dbardbar.values[i] + L.c10.values[i] * d.d.values[i] +
                     L.c01.values[i] * d.dbar.values[i]);
  return out;
}

cplx principal_symbol(const HoloLaplacian& L, std::size_t i, cplx zeta) {
  const cplx zb = std::conj(zeta);
  return -L.prefactor.values[i] *
         (L.c20.values[i] * zb * zb + L.c11.values[i] * std::norm(zeta) + L.c02.values[i] * zeta * zeta);
}

SymbolReport symbol_report(const HoloLaplacian& L, int directions) {
  if (directions < 8) throw InvalidArgument("symbol_report: at least 8 directions");
  const auto p20 = L.prefactor * L.c20;
  const auto p11 = L.prefactor * L.c11;
  const auto p02 = L.prefactor * L.c02;
  const auto scan = kernels::symbol_scan_omp(p20.values.data(), p11.values.data(), p02.values.data(), p20.size(),
                                             directions);
  if (!(scan.min_abs > 0.0)) throw EllipticityError("symbol_report: principal symbol vanishes for a nonzero covector");

  SymbolReport rep;
  rep.max_abs_arg = scan.max_abs_arg;
  rep.min_abs_symbol = scan.min_abs;
  rep.sample_count = p20.size();
  rep.directions = directions;

  const ComplexGrid& g = L.grid();
  rep.per_factor_args[0] = max_abs_arg(L.prefactor * cplx(-1.0));
  SampledField f1(g), f2(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx om = 1.0 - L.mu.values[i] * std::conj(L.nu.values[i]);
    f1.values[i] = 1.0 / (om * om);
    f2.values[i] = 1.0 / (L.d_f_mn.values[i] * L.d_f_nm_conj.values[i]);
  }
  rep.per_factor_args[1] = max_abs_arg(f1);
  rep.per_factor_args[2] = max_abs_arg(f2);
  // (zeta - mu conj zeta)(conj zeta - conj(nu) zeta) = -symbol of (d dbar - mu d^2 - conj(nu) dbar^2 + mu conj(nu) d dbar)
  SampledField q20(g), q11(g), q02(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx m = L.mu.values[i], nb = std::conj(L.nu.values[i]);
    q20.values[i] = m;
    q11.values[i] = -(1.0 + m * nb);
    q02.values[i] = nb;
  }
  rep.per_factor_args[3] =
      kernels::symbol_scan_omp(q20.values.data(), q11.values.data(), q02.values.data(), g.size(), directions)
          .max_abs_arg;
  return rep;
}

double invariance_check(const HoloLaplacian& L, const QuasiconformalMap& fmn, const QuasiconformalMap& fnm) {
  const ComplexGrid& g = L.grid();
  if (g.kind() != GridKind::Torus) throw InvalidArgument("invariance_check: torus grids only");
  const cplx z = g.lattice().modulus;
  const cplx offset = (1.0 + z) / (2.0 * g.n());
  const std::size_t stride = std::max<std::size_t>(1, g.size() / 64);
  std::vector<cplx> base;
  for (std::size_t i = 0; i < g.size(); i += stride) base.push_back(g.point(i) + offset);

  double worst = 0.0;
  for (const SampledField* f : {&L.c20, &L.c11, &L.c02, &L.c10, &L.c01, &L.prefactor}) {
    PeriodicInterpolant ip(*f);
    for (cplx p : base) {
      const cplx v = ip(p);
      worst = std::max({worst, std::abs(ip(p + 1.0) - v), std::abs(ip(p + z) - v)});
    }
  }
  for (const QuasiconformalMap* w : {&fmn, &fnm}) {
    if (!w->eval) continue;
    for (cplx p : base) {
      const cplx v = w->eval(p);
      worst = std::max({worst, std::abs(w->eval(p + 1.0) - v - 1.0), std::abs(w->eval(p + z) - v - w->new_modulus)});
    }
  }
  return worst;
}

HodgeForm hodge_quadratic_form(const BeltramiCoefficient& mu, const SampledField& u) {
  require_same_grid(mu.field.grid, u.grid, "hodge_quadratic_form");
  if (!u.all_finite()) throw InvalidArgument("hodge_quadratic_form: non-finite samples");
  if (!(mu.k < 1.0)) throw EllipticityError("hodge_quadratic_form: sup|mu| >= 1");
  const auto a = derivative(u, Deriv::D);
  const auto b = derivative(u, Deriv::Dbar);
  HodgeForm h;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const cplx m = mu.field.values[i];
    const double m2 = std::norm(m);
    const double s = std::norm(a.values[i]) + std::norm(b.values[i]);
    h.energy += 2.0 * ((1.0 + m2) * s - 4.0 * (m * a.values[i] * std::conj(b.values[i])).real()) / (1.0 - m2);
    h.comparison += (1.0 - m2) * s;
    h.flat += s;
    h.flat_dirichlet += std::norm(a.values[i] + b.values[i]) + std::norm(a.values[i] - b.values[i]);
  }
  const double da = u.grid.cell_area();
  h.energy *= da;
  h.comparison *= da;
  h.flat *= da;
  h.flat_dirichlet *= da;
  return h;
}

double c2_norm(const SampledField& f) {
  const auto d = derivatives(f);
  return std::max({f.sup_norm(), d.d.sup_norm(), d.dbar.sup_norm(), d.dd.sup_norm(), d.ddbar.sup_norm(),
                   d.dbardbar.sup_norm()});
}

GardingResult garding_check(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, const SampledField& u,
                            const SolverOptions& opt) {
  require_same_grid(mu.field.grid, u.grid, "garding_check");
  if (u.grid.kind() != GridKind::Torus) throw InvalidArgument("garding_check: torus grids only");
  const auto wm = solve_fmn(mu, mu, opt);
  const auto wn = solve_fmn(nu, mu, opt);
  const auto L = build_delta_mn(mu, nu, wm, wn);
  const auto Lu = apply(L, u);

  GardingResult r;
  cplx inner = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double jac = std::norm(wm.d_values.values[i]) * (1.0 - std::norm(mu.field.values[i]));
    inner += std::conj(u.values[i]) * Lu.values[i] * jac;
    r.l2 += std::norm(u.values[i]) * jac;
  }
  inner *= u.grid.cell_area();
  r.l2 *= u.grid.cell_area();
  r.energy = hodge_quadratic_form(mu, u).energy;
  r.defect = std::abs(inner - r.energy);
  r.epsilon = c2_norm(mu.field - nu.field);
  r.ratio = r.epsilon > 0.0 ? r.defect / (r.epsilon * (r.energy + r.l2)) : r.defect;
  return r;
}

}  // namespace quasilap
