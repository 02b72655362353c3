#include "quasilap/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "quasilap/oracles.hpp"

namespace quasilap {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line: need two or more matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_line: x values coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

TorusDetReport torus_det_report(cplx z, int n) {
  TorusDetReport r;
  r.z = z;
  r.n = n;
  const auto d = zeta_logdet_torus(z);
  r.zeta_logdet = d.log_det.real();
  r.raw = d.raw_log_det;
  r.exact = torus_logdet_exact(z);
  r.rel_delta = std::abs(r.zeta_logdet - r.exact) / std::abs(r.exact);
  if (n <= 0) return r;

  const auto g = ComplexGrid::torus(make_lattice(z), n);
  const auto zero = preset_coefficient("constant:0", g);
  const auto S = eigen_spectrum(discretize(make_delta_mn(zero, zero)).matrix);
  std::vector<double> got;
  for (const cplx& l : S.eigenvalues) got.push_back(l.real());
  std::sort(got.begin(), got.end());
  const auto exact = torus_eigenvalues(z, got[std::min<std::size_t>(got.size() - 1, 40)] * 1.5);
  r.modes_compared = static_cast<int>(std::min<std::size_t>({20, got.size(), exact.size()}));
  r.spectrum_defect = 0.0;
  for (int i = 0; i < r.modes_compared; ++i)
    r.spectrum_defect = std::max(r.spectrum_defect, std::abs(got[i] - exact[i]) / std::max(1.0, exact[i]));
  return r;
}

SymbolSweep symbol_angle_sweep(const BeltramiCoefficient& mu, const std::function<cplx(cplx)>& direction,
                               const std::vector<double>& eps, int directions, const SolverOptions& opt) {
  if (!mu.analytic) throw InvalidArgument("symbol_angle_sweep: mu needs a pointwise evaluator");
  SymbolSweep s;
  s.eps = eps;
  s.diagonal_arg = symbol_report(make_delta_mn(mu, mu, opt), directions).max_abs_arg;
  for (double e : eps) {
    const auto nu = make_coefficient(mu.field.grid, [&](cplx p) { return mu.analytic(p) + e * direction(p); });
    s.args.push_back(symbol_report(make_delta_mn(mu, nu, opt), directions).max_abs_arg);
  }
  s.max_arg = std::max(s.diagonal_arg, s.args.empty() ? 0.0 : *std::max_element(s.args.begin(), s.args.end()));
  if (eps.size() >= 2) s.fit = fit_line(eps, s.args);
  return s;
}

EigenSweep eigen_bound_sweep(const BeltramiCoefficient& mu, const std::function<cplx(cplx)>& direction,
                             const std::vector<double>& eps, int jobs, const SolverOptions& opt, double theta,
                             double rho) {
  if (!mu.analytic) throw InvalidArgument("eigen_bound_sweep: mu needs a pointwise evaluator");
  if (jobs < 1) throw InvalidArgument("eigen_bound_sweep: jobs must be positive");
  EigenSweep s;
  s.eps = eps;
  SpectralOptions sopt;
  sopt.certify = false;
  sopt.theta = theta;
  const auto S0 = eigen_spectrum(discretize(make_delta_mn(mu, mu, opt)).matrix, sopt);
  s.diagonal_min = std::abs(S0.eigenvalues.at(static_cast<std::size_t>(S0.kernel_dim)));
  s.rho = rho > 0.0 ? rho : 0.5 * s.diagonal_min;

  const std::size_t m = eps.size();
  s.min_abs.assign(m, 0.0);
  s.deviation.assign(m, 0.0);
  s.kernel_dims.assign(m, 0);
  s.log_dets.assign(m, cplx(0.0));
  std::vector<std::string> errors(m);
  sopt.rho = s.rho;
  const auto& g = mu.field.grid;

#pragma omp parallel for num_threads(jobs) schedule(static)
  for (std::size_t i = 0; i < m; ++i) {
    try {
      const double e = eps[i];
      const auto nu = make_coefficient(g, [&](cplx p) { return mu.analytic(p) + e * direction(p); });
      const auto A = discretize(make_delta_mn(mu, nu, opt), {4096, false}).matrix;
      SpectralOptions loose = sopt;
      loose.expected_kernel = -1;
      const auto S = eigen_spectrum(A, loose);
      s.kernel_dims[i] = S.kernel_dim;
      s.min_abs[i] = std::abs(S.eigenvalues.at(static_cast<std::size_t>(S.kernel_dim)));
      s.deviation[i] = std::abs(s.min_abs[i] - s.diagonal_min);
      s.log_dets[i] = log_det_branch(S).log_det;
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!errors[i].empty() && s.failure.empty()) s.failure = errors[i];
    if (s.kernel_dims[i] != 1) s.rho_violated = true;
    if (eps[i] > 0.0) s.fitted_c = std::max(s.fitted_c, s.deviation[i] / eps[i]);
  }
  if (!s.failure.empty()) s.rho_violated = true;
  return s;
}

const char* criterion_name(int id) {
  static const char* names[] = {"torus determinant oracle",
                                "holomorphic extension restriction",
                                "Beltrami solver",
                                "diagonal coincidence",
                                "spectral-cut angle",
                                "eigenvalue lower bound",
                                "determinant holomorphy",
                                "variation formula",
                                "potential construction",
                                "isometry invariance",
                                "contour independence"};
  if (id < 1 || id > 11) throw InvalidArgument("criterion_name: id must be in 1..11");
  return names[id - 1];
}

double isometry_defect(const BeltramiCoefficient& mu, int modes, const SolverOptions& opt) {
  const auto& g = mu.field.grid;
  if (g.kind() != GridKind::Torus) throw InvalidArgument("isometry_defect: torus grids only");
  const auto w = solve_wmu(mu, opt);
  const auto S = eigen_spectrum(discretize(pullback_laplacian(mu, w)).matrix);
  std::vector<double> got;
  for (const cplx& l : S.eigenvalues) got.push_back(l.real());
  std::sort(got.begin(), got.end());
  if (modes < 1 || modes > static_cast<int>(got.size())) throw InvalidArgument("isometry_defect: bad mode count");
  const auto exact = torus_eigenvalues(w.new_modulus, got[static_cast<std::size_t>(modes - 1)] * 1.5 + 1.0);
  if (static_cast<int>(exact.size()) < modes) throw SpectralError("isometry_defect: oracle spectrum too short");
  double worst = 0.0;
  for (int i = 0; i < modes; ++i) worst = std::max(worst, std::abs(got[i] - exact[i]));
  return worst;
}

double diagonal_coincidence_defect(const BeltramiCoefficient& mu, const SolverOptions& opt) {
  const auto a = make_delta_mn(mu, mu, opt);
  const auto b = pullback_laplacian(mu, solve_wmu(mu, opt));
  return std::max({sup_distance(a.c20, b.c20), sup_distance(a.c11, b.c11), sup_distance(a.c02, b.c02),
                   sup_distance(a.c10, b.c10), sup_distance(a.c01, b.c01), sup_distance(a.prefactor, b.prefactor)});
}

double contour_independence_defect(const SpectralDecomposition& S, int count) {
  const auto thetas = admissible_thetas(S, count);
  const cplx base = log_det_branch(S, thetas.at(0)).log_det;
  double worst = 0.0;
  for (double th : thetas) {
    const cplx d = log_det_branch(S, th).log_det - base;
    worst = std::max(worst, std::abs(d - 2.0 * kPi * I * std::round(d.imag() / (2.0 * kPi))));
  }
  return worst;
}

double reflection_defect(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, const SolverOptions& opt) {
  const auto& g = mu.field.grid;
  if (g.kind() != GridKind::Window) throw InvalidArgument("reflection_defect: half-plane window grids only");
  const auto fmn = solve_fmn(mu, nu, opt);
  const auto fnm = solve_fmn(nu, mu, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(std::conj(fnm.map_values.values[i]) - fmn.eval(std::conj(g.point(i)))));
  return worst;
}

namespace {

ExampleCheck check(std::string name, double defect, double tol) {
  return {std::move(name), defect, tol, defect <= tol};
}

}  // namespace

std::vector<ExampleCheck> potential_examples() {
  std::vector<ExampleCheck> out;
  const Rect box{-1.0, 1.0, -1.0, 1.0};
  const ConeChart c0{cplx(0.1, 0.2), cplx(-0.3, 0.1)};

  const auto zero = make_closed_two_form([](cplx, cplx) { return cplx(0.0); }, box, box);
  out.push_back(check("zero form", std::abs(cone_potential(zero, c0, cplx(0.5, 0.5), cplx(-0.2, -0.7))), 0.0));
  const auto one = make_closed_two_form([](cplx, cplx) { return cplx(1.0); }, box, box);
  const cplx zc(0.7, -0.4), wc(-0.6, 0.9);
  out.push_back(check("constant form potential",
                      std::abs(cone_potential(one, c0, zc, wc) - (zc - c0.z0) * (wc - c0.w0)), 1e-12));
  out.push_back(check("constant form mixed Hessian", mixed_hessian_check(one, c0, 0.5 * zc, 0.5 * wc, 1e-3), 1e-10));

  const Rect up{-0.8, 0.8, 0.4, 2.0};
  const auto wp = make_closed_two_form(wp_extension_density, up, up.conj());
  const ConeChart ch{cplx(0.0, 1.0), cplx(0.0, -1.0)};
  double worst = 0.0;
  for (cplx z : {cplx(0.0, 1.0), cplx(0.3, 1.5), cplx(-0.7, 0.5), cplx(0.75, 1.9)})
    for (cplx w : {cplx(0.0, -1.2), cplx(0.4, -0.6), cplx(-0.5, -1.8)})
      worst = std::max(worst, std::abs(cone_potential(wp, ch, z, w) - log_potential_closed_form(ch, z, w)));
  out.push_back(check("(z-w)^-2 closed-form potential", worst, 1e-10));
  out.push_back(check("(z-w)^-2 mixed Hessian", mixed_hessian_check(wp, ch, cplx(0.0, 1.0), cplx(0.0, -1.2), 1e-3),
                      1e-6));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double wq = 0.0, wh = 0.0;
  const ConeChart cp{cplx(0.2, -0.1), cplx(-0.1, 0.3)};
  for (int trial = 0; trial < 5; ++trial) {
    std::array<std::array<cplx, 4>, 4> c{};
    for (auto& row : c)
      for (auto& v : row) v = cplx(U(rng), U(rng));
    const auto omega = [c](cplx z, cplx w) {
      cplx s = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) s += c[a][b] * std::pow(z, a) * std::pow(w, b);
      return s;
    };
    const auto exact = [&](cplx z, cplx w) {
      cplx s = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          s += c[a][b] * (std::pow(z, a + 1) - std::pow(cp.z0, a + 1)) / double(a + 1) *
               (std::pow(w, b + 1) - std::pow(cp.w0, b + 1)) / double(b + 1);
      return s;
    };
    const auto f = make_closed_two_form(omega, box, box);
    for (cplx z : {cplx(0.6, 0.3), cplx(-0.5, -0.5)})
      for (cplx w : {cplx(0.1, -0.8), cplx(0.7, 0.4)}) {
        wq = std::max(wq, std::abs(cone_potential(f, cp, z, w) - exact(z, w)));
        wh = std::max(wh, mixed_hessian_check(f, cp, z, w, 1e-3));
      }
  }
  out.push_back(check("polynomial potential", wq, 1e-10));
  out.push_back(check("polynomial mixed Hessian", wh, 1e-8));

  const ConeChart other{cplx(0.4, 1.4), cplx(-0.3, -0.8)};
  const cplx z(0.2, 1.1), w(-0.1, -1.3);
  out.push_back(check("chart independence", chart_independence_defect(wp, ch, other, z, w, 1e-3), 1e-6));
  out.push_back(check("Stokes path deformation",
                      std::abs(cone_potential(wp, ch, z, w) -
                               path_potential(wp, bent_path(ch.z0, z, 0.1), bent_path(ch.w0, w, -0.15))),
                      1e-10));
  out.push_back(check("Kahler potential log(z - conj z)", kahler_potential_check(cplx(0.3, 1.0), 1e-3), 1e-6));

  const auto q = [&](cplx a, cplx b) { return cone_potential(wp, ch, a, b); };
  double im = 0.0;
  for (double x : {-0.6, -0.2, 0.3, 0.7})
    for (double y : {0.5, 1.0, 1.7}) im = std::max(im, std::abs(tilde_q(q, wp, cplx(x, y), cplx(x, -y)).imag()));
  out.push_back(check("symmetrized potential is real on the diagonal", im, 1e-12));
  const auto qt = [&](cplx a, cplx b) { return tilde_q(q, wp, a, b); };
  const cplx z1(0.1, 1.2);
  out.push_back(check("d dbar of the symmetrized potential", std::abs(diagonal_ddbar(qt, z1, 1e-3) - I * wp_genus1(z1)),
                      1e-5));

  const auto ext = extension_structure_check(I, cplx(0.0, -1.3), 1e-3);
  out.push_back(check("extension mixed derivative", ext.mixed, 1e-7));
  out.push_back(check("extension splitting", ext.split_variation, 1e-10));
  out.push_back(check("extension diagonal restriction", ext.diagonal, 1e-12));
  out.push_back(check("diagonal uniqueness (degree 4, 30 points)",
                      diagonal_uniqueness_witness(4, 30, 1e-13).max_coefficient, 1e-10));
  return out;
}

}  // namespace quasilap
