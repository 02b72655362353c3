#include "quasilap/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "quasilap/fft.hpp"

namespace quasilap {

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
      throw InvalidArgument("preset: cannot parse number '" + item + "'");
    }
  }
  return out;
}

double bump_profile(double rho) {
  if (rho >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - rho * rho));
}

// Lattice (torus) or box coordinates of p.
std::pair<double, double> unit_coordinates(const ComplexGrid& g, cplx p) {
  if (g.kind() == GridKind::Torus) {
    const cplx z = g.lattice().modulus;
    const double t = p.imag() / z.imag();
    return {p.real() - t * z.real(), t};
  }
  return {p.real(), p.imag()};
}

// Shortest representative of d modulo the lattice.
cplx reduce_mod_lattice(cplx d, cplx z) {
  const double t = d.imag() / z.imag();
  const double s = d.real() - t * z.real();
  const double s0 = std::round(s), t0 = std::round(t);
  cplx best = d;
  double best_abs = 1e300;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const cplx c = d - (s0 + a) - (t0 + b) * z;
      if (std::abs(c) < best_abs) {
        best_abs = std::abs(c);
        best = c;
      }
    }
  return best;
}

}  // namespace

std::function<cplx(cplx)> preset_function(const std::string& spec, const ComplexGrid& g) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidArgument("preset '" + spec + "': expected name:parameters");
  const std::string name = spec.substr(0, colon);
  const auto v = parse_numbers(spec.substr(colon + 1));
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (v.size() < lo || v.size() > hi) throw InvalidArgument("preset '" + spec + "': wrong parameter count");
  };
  if (name == "constant") {
    need(1, 2);
    const cplx c(v[0], v.size() > 1 ? v[1] : 0.0);
    return [c](cplx) { return c; };
  }
  if (name == "bump") {
    need(4, 5);
    const cplx center(v[0], v[1]);
    const double R = v[2];
    const cplx h(v[3], v.size() > 4 ? v[4] : 0.0);
    if (!(R > 0.0)) throw InvalidArgument("preset bump: radius must be positive");
    if (g.kind() == GridKind::Torus) {
      const cplx z = g.lattice().modulus;
      return [=](cplx p) { return h * bump_profile(std::abs(reduce_mod_lattice(p - center, z)) / R); };
    }
    return [=](cplx p) { return h * bump_profile(std::abs(p - center) / R); };
  }
  if (name == "fourier") {
    need(3, 4);
    const double m = v[0], n = v[1];
    if (m != std::round(m) || n != std::round(n)) throw InvalidArgument("preset fourier: integer modes required");
    const cplx amp(v[2], v.size() > 3 ? v[3] : 0.0);
    return [=](cplx p) {
      const auto [s, t] = unit_coordinates(g, p);
      return amp * std::exp(2.0 * kPi * I * (m * s + n * t));
    };
  }
  if (name == "random") {
    need(3, 3);
    const auto seed = static_cast<std::uint64_t>(v[0]);
    const double amp = v[1];
    const int maxmode = static_cast<int>(v[2]);
    if (maxmode < 0) throw InvalidArgument("preset random: maxmode must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    struct Mode {
      int m, n;
      cplx c;
    };
    std::vector<Mode> modes;
    double total = 0.0;
    for (int m = -maxmode; m <= maxmode; ++m)
      for (int n = -maxmode; n <= maxmode; ++n) {
        const cplx c(nd(rng), nd(rng));
        modes.push_back({m, n, c});
        total += std::abs(c);
      }
    for (auto& md : modes) md.c *= amp / total;
    return [=](cplx p) {
      const auto [s, t] = unit_coordinates(g, p);
      cplx acc = 0.0;
      for (const auto& md : modes) acc += md.c * std::exp(2.0 * kPi * I * (md.m * s + md.n * t));
      return acc;
    };
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

BeltramiCoefficient make_coefficient(const SampledField& f) {
  if (!f.all_finite()) throw InvalidArgument("Beltrami coefficient has non-finite samples");
  BeltramiCoefficient mu;
  mu.field = f;
  mu.k = f.sup_norm();
  if (!(mu.k < 1.0)) throw EllipticityError("Beltrami coefficient: sup|mu| >= 1");
  switch (f.grid.kind()) {
    case GridKind::Torus: mu.support = SupportKind::Periodic; break;
    case GridKind::Plane:
      mu.support = SupportKind::Compact;
      mu.radius = f.grid.box().side / 4.0;
      break;
    case GridKind::Window: mu.support = SupportKind::Window; break;
  }
  const auto d = derivatives(f);
  mu.E = std::max({mu.k, d.d.sup_norm(), d.dbar.sup_norm(), d.dd.sup_norm(), d.ddbar.sup_norm(),
                   d.dbardbar.sup_norm()});
  return mu;
}

BeltramiCoefficient make_coefficient(const ComplexGrid& g, std::function<cplx(cplx)> f, double support_radius) {
  auto mu = make_coefficient(SampledField::from_function(g, f));
  mu.analytic = std::move(f);
  if (g.kind() == GridKind::Plane && support_radius > 0.0) {
    if (support_radius > g.box().side / 4.0 + 1e-12)
      throw InvalidArgument("compact support radius exceeds a quarter of the plane box");
    mu.radius = support_radius;
  }
  return mu;
}

BeltramiCoefficient preset_coefficient(const std::string& spec, const ComplexGrid& g) {
  return make_coefficient(g, preset_function(spec, g));
}

namespace {

// Tracks the fixed-point residual and decides when to stop.
struct Progress {
  double tol;
  int window;
  double best = 1e300;
  int since_best = 0;

  // true when the iteration should stop
  bool update(double r) {
    if (!std::isfinite(r)) throw ConvergenceError("Beltrami iteration produced non-finite values");
    if (r < best * (1.0 - 1e-3)) {
      best = r;
      since_best = 0;
    } else {
      ++since_best;
    }
    return r <= 1e-3 * tol || since_best >= window;
  }
};

void finish_check(double residual, double tol, int iterations) {
  if (!(residual <= tol)) {
    std::ostringstream os;
    os << "Beltrami iteration stagnated at residual " << residual << " > tol " << tol << " after " << iterations
       << " iterations";
    throw ConvergenceError(os.str());
  }
}

double min_abs(const SampledField& f) {
  double m = 1e300;
  for (const auto& v : f.values) m = std::min(m, std::abs(v));
  return m;
}

void check_map(QuasiconformalMap& w) {
  w.min_abs_d = min_abs(w.d_values);
  if (!(w.min_abs_d > 1e-12)) throw EllipticityError("solved map has vanishing d w");
  for (std::size_t i = 0; i < w.d_values.size(); ++i) {
    const double jac = std::norm(w.d_values.values[i]) - std::norm(w.dbar_values.values[i]);
    if (!(jac > 0.0)) throw EllipticityError("solved map is not orientation preserving at a sample");
  }
}

// Spectral tables for the torus: symbols of d, dbar and the Beurling multiplier.
struct TorusTables {
  std::vector<cplx> d, dbar, beurling;
  std::vector<char> keep;  // zero mode and Nyquist modes dropped
};

TorusTables torus_tables(const ComplexGrid& g) {
  const int n = g.n();
  TorusTables t;
  t.d.resize(g.size());
  t.dbar.resize(g.size());
  t.beurling.resize(g.size());
  t.keep.resize(g.size());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto k = wave_numbers(g, r, c);
      const std::size_t i = g.index(r, c);
      const bool zero = (r == 0 && c == 0);
      t.keep[i] = !(zero || k.nyquist);
      t.d[i] = t.keep[i] ? k.d : cplx(0.0);
      t.dbar[i] = t.keep[i] ? k.dbar : cplx(0.0);
      t.beurling[i] = t.keep[i] ? k.d / k.dbar : cplx(0.0);
    }
  return t;
}

QuasiconformalMap solve_torus(const BeltramiCoefficient& mu, const SolverOptions& opt) {
  const ComplexGrid& g = mu.field.grid;
  const int n = g.n();
  const auto& fft = fft_plan(n, n);
  const auto tab = torus_tables(g);
  const auto& m = mu.field.values;
  const std::size_t sz = g.size();

  std::vector<cplx> ghat(sz, 0.0), g_phys(sz, 0.0), sg(sz, 0.0), rhs(sz);
  cplx B = 0.0;
  Progress prog{opt.tol, opt.stagnation_window};
  int it = 0;
  double res = 0.0;
  for (; it < opt.max_iterations; ++it) {
    // rhs = mu (1 + S g); B is its mean, the next g its projection.
    for (std::size_t i = 0; i < sz; ++i) rhs[i] = m[i] * (1.0 + sg[i]);
    cplx mean = 0.0;
    for (const auto& v : rhs) mean += v;
    B = mean / static_cast<double>(sz);
    res = 0.0;
    for (std::size_t i = 0; i < sz; ++i) res = std::max(res, std::abs(B + g_phys[i] - rhs[i]));
    res /= std::abs(1.0 + B);
    if (prog.update(res)) break;
    std::vector<cplx> spec = rhs;
    fft.forward(spec);
    for (std::size_t i = 0; i < sz; ++i) ghat[i] = tab.keep[i] ? spec[i] : cplx(0.0);
    g_phys = ghat;
    fft.inverse(g_phys);
    sg.resize(sz);
    for (std::size_t i = 0; i < sz; ++i) sg[i] = tab.beurling[i] * ghat[i];
    fft.inverse(sg);
  }
  finish_check(res, opt.tol, it);

  std::vector<cplx> phi(sz);
  for (std::size_t i = 0; i < sz; ++i) phi[i] = tab.keep[i] ? ghat[i] / tab.dbar[i] : cplx(0.0);
  fft.inverse(phi);
  const cplx phi0 = phi[0];
  const cplx scale = 1.0 / (1.0 + B);

  QuasiconformalMap w;
  w.map_values = SampledField(g);
  w.d_values = SampledField(g);
  w.dbar_values = SampledField(g);
  for (std::size_t i = 0; i < sz; ++i) {
    const cplx p = g.point(i);
    w.map_values.values[i] = (p + B * std::conj(p) + phi[i] - phi0) * scale;
    w.d_values.values[i] = (1.0 + sg[i]) * scale;
    w.dbar_values.values[i] = (B + g_phys[i]) * scale;
  }
  double cert = 0.0;
  for (std::size_t i = 0; i < sz; ++i)
    cert = std::max(cert, std::abs(w.dbar_values.values[i] - m[i] * w.d_values.values[i]));
  w.residual = cert;
  w.iterations = it;
  const cplx z = g.lattice().modulus;
  w.new_modulus = (z + B * std::conj(z)) * scale;
  w.normalization = "lattice: w(0)=0, w(1)=1, periods (1, z')";

  auto phi_i = std::make_shared<PeriodicInterpolant>(SampledField(g, phi));
  auto sg_i = std::make_shared<PeriodicInterpolant>(SampledField(g, sg));
  auto g_i = std::make_shared<PeriodicInterpolant>(SampledField(g, g_phys));
  w.eval = [=](cplx p) { return (p + B * std::conj(p) + (*phi_i)(p) - phi0) * scale; };
  w.eval_d = [=](cplx p) { return (1.0 + (*sg_i)(p)) * scale; };
  w.eval_dbar = [=](cplx p) { return (B + (*g_i)(p)) * scale; };
  finish_check(w.residual, opt.tol, it);
  check_map(w);
  return w;
}

// Truncated-kernel Cauchy and Beurling multipliers on a centred periodic box.
struct PlaneTables {
  ComplexGrid grid;
  std::vector<cplx> cauchy, beurling;
};

PlaneTables plane_tables(const ComplexGrid& g) {
  const double D = g.box().side / 2.0;
  PlaneTables t{g, std::vector<cplx>(g.size()), std::vector<cplx>(g.size())};
  const int n = g.n();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto k = wave_numbers(g, r, c);
      const std::size_t i = g.index(r, c);
      const double a = std::hypot(k.kx, k.ky);
      if (a == 0.0 || k.nyquist) continue;
      const double damp = 1.0 - std::cyl_bessel_j(0.0, a * D);
      const cplx zeta(k.kx, k.ky);
      t.cauchy[i] = -2.0 * I / zeta * damp;
      t.beurling[i] = std::conj(zeta) / zeta * damp;
    }
  return t;
}

std::vector<cplx> apply_multiplier(const std::vector<cplx>& f, const std::vector<cplx>& mult, int n) {
  std::vector<cplx> c = f;
  const auto& fft = fft_plan(n, n);
  fft.forward(c);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mult[i];
  fft.inverse(c);
  return c;
}

struct PlaneSolution {
  std::vector<cplx> h, sh, ph;
  double residual = 0.0;
  int iterations = 0;
};

// Solves h = a + m S h on the plane grid.
PlaneSolution plane_fixed_point(const PlaneTables& tab, const std::vector<cplx>& m, const std::vector<cplx>& a,
                                const SolverOptions& opt) {
  const int n = tab.grid.n();
  PlaneSolution s;
  s.h = a;
  Progress prog{opt.tol, opt.stagnation_window};
  int it = 0;
  double res = 0.0;
  for (; it < opt.max_iterations; ++it) {
    s.sh = apply_multiplier(s.h, tab.beurling, n);
    res = 0.0;
    std::vector<cplx> next(s.h.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = a[i] + m[i] * s.sh[i];
      res = std::max(res, std::abs(next[i] - s.h[i]));
    }
    if (prog.update(res)) break;
    s.h = std::move(next);
  }
  s.sh = apply_multiplier(s.h, tab.beurling, n);
  s.ph = apply_multiplier(s.h, tab.cauchy, n);
  s.residual = res;
  s.iterations = it;
  finish_check(res, opt.tol, it);
  return s;
}

double smooth_step(double t) {
  // C-infinity transition from 1 (t <= 0) to 0 (t >= 1)
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - t));
  const double b = std::exp(-1.0 / t);
  return a / (a + b);
}

double required_radius(const ComplexGrid& out, const SolverOptions& opt) {
  double r = 1.0;
  for (const auto& p : out.points()) r = std::max(r, std::abs(p));
  if (opt.cutoff_radius > 0.0) {
    if (opt.cutoff_radius * opt.cutoff_flat_fraction < r)
      throw InvalidArgument("cutoff radius too small for the requested output points");
    return opt.cutoff_radius;
  }
  return std::max(2.0, (r + 0.25) / opt.cutoff_flat_fraction);
}

QuasiconformalMap assemble_plane_map(const PlaneTables& tab, const PlaneSolution& s, const ComplexGrid& out,
                                     const std::function<cplx(std::size_t)>& mu_out, bool homogeneous) {
  const ComplexGrid& g = tab.grid;
  auto ph_i = std::make_shared<PeriodicInterpolant>(SampledField(g, s.ph));
  auto sh_i = std::make_shared<PeriodicInterpolant>(SampledField(g, s.sh));
  auto h_i = std::make_shared<PeriodicInterpolant>(SampledField(g, s.h));
  const double hom = homogeneous ? 1.0 : 0.0;
  auto raw = [=](cplx p) { return hom * p + (*ph_i)(p); };
  const cplx w0 = raw(0.0);
  const cplx scale = homogeneous ? 1.0 / (raw(1.0) - w0) : cplx(1.0);

  QuasiconformalMap w;
  const bool same = out.same_as(g);
  SampledField ph = same ? SampledField(g, s.ph) : ph_i->evaluate_on(out);
  SampledField sh = same ? SampledField(g, s.sh) : sh_i->evaluate_on(out);
  SampledField hh = same ? SampledField(g, s.h) : h_i->evaluate_on(out);
  w.map_values = SampledField(out);
  w.d_values = SampledField(out);
  w.dbar_values = SampledField(out);
  double ires = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx p = out.point(i);
    w.map_values.values[i] = (hom * p + ph.values[i] - w0) * scale;
    w.d_values.values[i] = (hom + sh.values[i]) * scale;
    w.dbar_values.values[i] = hh.values[i] * scale;
    if (homogeneous)
      ires = std::max(ires, std::abs(w.dbar_values.values[i] - mu_out(i) * w.d_values.values[i]));
  }
  w.residual = s.residual * std::abs(scale);
  w.interpolation_residual = same ? w.residual : ires;
  w.iterations = s.iterations;
  w.normalization = homogeneous ? "fixes 0, 1, infinity" : "w(0)=0";
  w.eval = [=](cplx p) { return (raw(p) - w0) * scale; };
  w.eval_d = [=](cplx p) { return (hom + (*sh_i)(p)) * scale; };
  w.eval_dbar = [=](cplx p) { return (*h_i)(p) * scale; };
  return w;
}

std::vector<cplx> plane_samples(const ComplexGrid& g, const std::function<cplx(cplx)>& f, double rc, double frac) {
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cplx p = g.point(i);
    const double eta = smooth_step((std::abs(p) - frac * rc) / ((1.0 - frac) * rc));
    v[i] = eta == 0.0 ? cplx(0.0) : eta * f(p);
  }
  return v;
}

void require_plane_grid(const BeltramiCoefficient& mu) {
  if (mu.field.grid.kind() != GridKind::Plane) throw InvalidArgument("compact-support solve needs a plane grid");
  const auto& b = mu.field.grid.box();
  if (std::abs(b.x0 + b.side / 2.0) > 1e-12 || std::abs(b.y0 + b.side / 2.0) > 1e-12)
    throw InvalidArgument("plane grid must be centred at the origin");
}

}  // namespace

ComplexGrid make_plane_grid(double cutoff_radius, double spacing) {
  if (!(cutoff_radius > 0.0) || !(spacing > 0.0)) throw InvalidArgument("plane grid: positive radius and spacing");
  const double side = 4.0 * cutoff_radius;
  int m = static_cast<int>(std::ceil(side / spacing));
  if (m % 2 == 0) ++m;
  return ComplexGrid::plane(PlaneBox{-side / 2.0, -side / 2.0, side}, m);
}

QuasiconformalMap solve_wmu(const BeltramiCoefficient& mu, const SolverOptions& opt) {
  if (!(mu.k < 1.0)) throw EllipticityError("solve_wmu: k >= 1");
  switch (mu.support) {
    case SupportKind::Periodic: return solve_torus(mu, opt);
    case SupportKind::Compact: {
      require_plane_grid(mu);
      const auto tab = plane_tables(mu.field.grid);
      const auto s = plane_fixed_point(tab, mu.field.values, mu.field.values, opt);
      auto w = assemble_plane_map(tab, s, mu.field.grid, [&](std::size_t i) { return mu.field.values[i]; }, true);
      check_map(w);
      return w;
    }
    case SupportKind::Window: return solve_fmn(mu, mu, opt);
  }
  throw InvalidArgument("solve_wmu: unknown support");
}

QuasiconformalMap solve_wmusigma(const BeltramiCoefficient& mu, const SampledField& sigma, const SolverOptions& opt) {
  require_plane_grid(mu);
  if (!sigma.grid.same_as(mu.field.grid)) throw InvalidArgument("solve_wmusigma: sigma must share mu's grid");
  if (!sigma.all_finite()) throw InvalidArgument("solve_wmusigma: non-finite sigma");
  const auto tab = plane_tables(mu.field.grid);
  const auto s = plane_fixed_point(tab, mu.field.values, sigma.values, opt);
  auto w = assemble_plane_map(tab, s, mu.field.grid, [](std::size_t) { return cplx(0.0); }, false);
  double res = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i)
    res = std::max(res, std::abs(w.dbar_values.values[i] - mu.field.values[i] * w.d_values.values[i] -
                                 sigma.values[i]));
  w.residual = res;
  w.interpolation_residual = res;
  finish_check(res, opt.tol, w.iterations);
  return w;
}

QuasiconformalMap solve_fmn(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, const SolverOptions& opt) {
  if (!(mu.k < 1.0) || !(nu.k < 1.0)) throw EllipticityError("solve_fmn: k >= 1");
  if (mu.support == SupportKind::Periodic) {
    if (nu.support != SupportKind::Periodic || !nu.field.grid.same_as(mu.field.grid))
      throw InvalidArgument("solve_fmn: both coefficients must share the torus grid");
    return solve_torus(mu, opt);
  }
  if (mu.support == SupportKind::Compact) {
    require_plane_grid(mu);
    if (!nu.field.grid.same_as(mu.field.grid)) throw InvalidArgument("solve_fmn: grids differ");
    const auto& g = mu.field.grid;
    const int n = g.n();
    std::vector<cplx> m(g.size());
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const std::size_t i = g.index(r, c);
        m[i] = g.point(r, c).imag() > 0.0 ? mu.field.values[i] : std::conj(nu.field.values[g.index((n - r) % n, c)]);
      }
    const auto tab = plane_tables(g);
    const auto s = plane_fixed_point(tab, m, m, opt);
    auto w = assemble_plane_map(tab, s, g, [&](std::size_t i) { return m[i]; }, true);
    check_map(w);
    return w;
  }
  if (!mu.analytic || !nu.analytic) throw InvalidArgument("solve_fmn: window coefficients need pointwise evaluators");
  const ComplexGrid& out = mu.field.grid;
  const double rc = required_radius(out, opt);
  const ComplexGrid g = make_plane_grid(rc, opt.plane_spacing);
  auto muf = mu.analytic;
  auto nuf = nu.analytic;
  auto coeff = [muf, nuf](cplx p) { return p.imag() > 0.0 ? muf(p) : std::conj(nuf(std::conj(p))); };
  const auto m = plane_samples(g, coeff, rc, opt.cutoff_flat_fraction);
  for (const auto& v : m)
    if (!(std::abs(v) < 1.0)) throw EllipticityError("solve_fmn: |coefficient| >= 1 on the plane box");
  const auto tab = plane_tables(g);
  const auto s = plane_fixed_point(tab, m, m, opt);
  std::vector<cplx> mu_out(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) mu_out[i] = coeff(out.point(i));
  auto w = assemble_plane_map(tab, s, out, [&](std::size_t i) { return mu_out[i]; }, true);
  check_map(w);
  return w;
}

BeltramiCoefficient inverse_map(const QuasiconformalMap& w) {
  const ComplexGrid& g = w.map_values.grid;
  if (g.kind() != GridKind::Torus) throw InvalidArgument("inverse_map: torus maps only");
  if (!w.eval || !w.eval_d || !w.eval_dbar) throw InvalidArgument("inverse_map: map has no evaluators");
  const cplx z = g.lattice().modulus;
  const cplx zp = w.new_modulus;
  const cplx B = (z - zp) / (zp - std::conj(z));
  const ComplexGrid image = ComplexGrid::torus(make_lattice(zp), g.n());
  SampledField mt(image);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const cplx q = image.point(i);
    const cplx Q = q * (1.0 + B);
    cplx p = (Q - B * std::conj(Q)) / (1.0 - std::norm(B));
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const cplx r = q - w.eval(p);
      if (std::abs(r) < 1e-14 * (1.0 + std::abs(q))) {
        ok = true;
        break;
      }
      const cplx a = w.eval_d(p), b = w.eval_dbar(p);
      const double jac = std::norm(a) - std::norm(b);
      if (!(jac > 0.0)) throw ConvergenceError("inverse_map: degenerate Jacobian during Newton iteration");
      p += (std::conj(a) * r - b * std::conj(r)) / jac;
    }
    if (!ok) throw ConvergenceError("inverse_map: Newton iteration did not converge; image grid too distorted");
    mt.values[i] = -w.eval_dbar(p) / std::conj(w.eval_d(p));
  }
  return make_coefficient(mt);
}

double stability_gap(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, double R,
                     const SolverOptions& opt) {
  if (!mu.field.grid.same_as(nu.field.grid)) throw InvalidArgument("stability_gap: grids differ");
  const double dist = sup_distance(mu.field, nu.field);
  if (dist == 0.0) return 0.0;
  const auto a = solve_wmu(mu, opt);
  const auto b = solve_wmu(nu, opt);
  double m = 0.0;
  for (std::size_t i = 0; i < a.map_values.size(); ++i) {
    if (R > 0.0 && std::abs(a.map_values.grid.point(i)) > R) continue;
    m = std::max(m, std::abs(a.map_values.values[i] - b.map_values.values[i]));
  }
  return m / dist;
}

double min_abs_partial(const QuasiconformalMap& w, const std::optional<CompactWindow>& window) {
  double m = 1e300;
  const auto& g = w.d_values.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (window && !window->contains(g.point(i))) continue;
    m = std::min(m, std::abs(w.d_values.values[i]));
  }
  if (m == 1e300) throw InvalidArgument("min_abs_partial: no samples inside the window");
  if (!(m > 1e-12)) throw EllipticityError("min_abs_partial: d w vanishes, solver failure");
  return m;
}

HolderFit holder_modulus(const QuasiconformalMap& w, double R) {
  const auto& g = w.map_values.grid;
  const int n = g.n();
  HolderFit fit;
  for (int s = 1; s <= n / 4; s *= 2) {
    double omega = 0.0, delta = 0.0;
    for (int r = 0; r + s < n; ++r)
      for (int c = 0; c + s < n; ++c) {
        const cplx p = g.point(r, c);
        if (std::abs(p) > R) continue;
        for (auto [dr, dc] : {std::pair{0, s}, std::pair{s, 0}}) {
          const cplx q = g.point(r + dr, c + dc);
          if (std::abs(q) > R) continue;
          const double d = std::abs(q - p);
          const double v = std::abs(w.map_values.values[g.index(r + dr, c + dc)] - w.map_values.values[g.index(r, c)]);
          omega = std::max(omega, v);
          delta = std::max(delta, d);
        }
      }
    if (omega > 0.0 && delta > 0.0) {
      fit.deltas.push_back(delta);
      fit.moduli.push_back(omega);
    }
  }
  if (fit.deltas.size() < 2) throw InvalidArgument("holder_modulus: too few samples inside radius");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(fit.deltas.size());
  for (std::size_t i = 0; i < fit.deltas.size(); ++i) {
    const double x = std::log(fit.deltas[i]), y = std::log(fit.moduli[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.alpha = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  fit.constant = std::exp((sy - fit.alpha * sx) / k);
  return fit;
}

SampledField torus_beurling(const SampledField& f) {
  if (f.grid.kind() != GridKind::Torus) throw InvalidArgument("torus_beurling: torus grid required");
  const auto tab = torus_tables(f.grid);
  return SampledField(f.grid, apply_multiplier(f.values, tab.beurling, f.grid.n()));
}

double lp_norm(const SampledField& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p >= 1 required");
  double s = 0.0;
  for (const auto& v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid.cell_area(), 1.0 / p);
}

double beurling_lp_ratio(const SampledField& f, double p) {
  const double base = lp_norm(f, p);
  if (base == 0.0) return 0.0;
  SampledField sf(f.grid);
  if (f.grid.kind() == GridKind::Torus) {
    sf = torus_beurling(f);
  } else if (f.grid.kind() == GridKind::Plane) {
    sf = SampledField(f.grid, apply_multiplier(f.values, plane_tables(f.grid).beurling, f.grid.n()));
  } else {
    throw InvalidArgument("beurling_lp_ratio: periodic grid required");
  }
  return lp_norm(sf, p) / base;
}

}  // namespace quasilap
