#include "quasilap/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "quasilap/oracles.hpp"

namespace quasilap {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

struct ErrorTrace {
  double inner_worst = 0.0;
  double outer = 0.0;
  std::size_t inner_calls = 0;
};

[[noreturn]] void quadrature_failure(const char* what, const ErrorTrace& tr, const QuadratureOptions& opt) {
  std::ostringstream os;
  os << what << ": quadrature did not converge (outer error " << tr.outer << ", worst inner error " << tr.inner_worst
     << " over " << tr.inner_calls << " inner integrals, max depth " << opt.max_depth << ", limit " << opt.max_error
     << ")";
  throw ConvergenceError(os.str());
}

}  // namespace

bool Rect::contains(cplx p) const {
  return p.real() >= re_lo && p.real() <= re_hi && p.imag() >= im_lo && p.imag() <= im_hi;
}

bool Rect::interior(cplx p) const {
  return p.real() > re_lo && p.real() < re_hi && p.imag() > im_lo && p.imag() < im_hi;
}

Rect Rect::conj() const { return {re_lo, re_hi, -im_hi, -im_lo}; }

ClosedTwoForm make_closed_two_form(std::function<cplx(cplx, cplx)> omega, const Rect& V, const Rect& W, double tol) {
  if (!omega) throw InvalidArgument("make_closed_two_form: empty evaluator");
  if (!(V.re_lo < V.re_hi && V.im_lo < V.im_hi && W.re_lo < W.re_hi && W.im_lo < W.im_hi))
    throw InvalidArgument("make_closed_two_form: degenerate rectangle");
  ClosedTwoForm f{std::move(omega), V, W, 0.0};
  const double h = 1e-5;
  const int m = 6;
  auto at = [&](const Rect& r, int a, int b) {
    return cplx(r.re_lo + (r.re_hi - r.re_lo) * (a + 0.5) / m, r.im_lo + (r.im_hi - r.im_lo) * (b + 0.5) / m);
  };
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          const cplx z = at(V, a, b), w = at(W, c, d);
          const double dz = cr_residual([&](cplx s) { return f.omega(s, w); }, z, h);
          const double dw = cr_residual([&](cplx s) { return f.omega(z, s); }, w, h);
          const double scale = std::max(1.0, std::abs(f.omega(z, w)));
          f.closedness_certificate = std::max({f.closedness_certificate, dz / scale, dw / scale});
        }
  if (!(f.closedness_certificate <= tol)) {
    std::ostringstream os;
    os << "make_closed_two_form: form is not closed (dbar residual " << f.closedness_certificate << ")";
    throw InvalidArgument(os.str());
  }
  return f;
}

void validate_chart(const ClosedTwoForm& form, const ConeChart& chart) {
  if (!form.V.interior(chart.z0) || !form.W.interior(chart.w0))
    throw InvalidArgument("cone chart: centers must be interior to V and W");
}

Path radial_path(cplx a, cplx b) {
  return {[a, b](double t) { return a + t * (b - a); }, [a, b](double) { return b - a; }};
}

Path bent_path(cplx a, cplx b, double amp) {
  const cplx d = b - a;
  const cplx normal = std::abs(d) > 0.0 ? I * d / std::abs(d) : cplx(0.0, 1.0);
  return {[=](double t) { return a + t * d + amp * std::sin(kPi * t) * normal; },
          [=](double t) { return d + amp * kPi * std::cos(kPi * t) * normal; }};
}

cplx path_potential(const ClosedTwoForm& form, const Path& pz, const Path& pw, const QuadratureOptions& opt) {
  ErrorTrace tr;
  auto outer = [&](double s) {
    const cplx zs = pz.point(s);
    const cplx dz = pz.tangent(s);
    double err = 0.0;
    const cplx inner = GK::integrate([&](double t) { return form.omega(zs, pw.point(t)) * pw.tangent(t); }, 0.0, 1.0,
                                     opt.max_depth, opt.tol, &err);
    tr.inner_worst = std::max(tr.inner_worst, err);
    ++tr.inner_calls;
    return inner * dz;
  };
  const cplx q = GK::integrate(outer, 0.0, 1.0, opt.max_depth, opt.tol, &tr.outer);
  if (!(tr.outer <= opt.max_error) || !(tr.inner_worst <= opt.max_error) || !std::isfinite(q.real()) ||
      !std::isfinite(q.imag()))
    quadrature_failure("path_potential", tr, opt);
  return q;
}

cplx cone_potential(const ClosedTwoForm& form, const ConeChart& chart, cplx z, cplx w, const QuadratureOptions& opt) {
  validate_chart(form, chart);
  if (!form.V.contains(z) || !form.W.contains(w)) throw InvalidArgument("cone_potential: (z, w) outside V x W");
  if (z == chart.z0 || w == chart.w0) return 0.0;
  return path_potential(form, radial_path(chart.z0, z), radial_path(chart.w0, w), opt);
}

cplx mixed_derivative(const std::function<cplx(cplx, cplx)>& F, cplx z, cplx w, double h) {
  if (!(h > 0.0)) throw InvalidArgument("mixed_derivative: h must be positive");
  auto d = [&](double s) { return (F(z + s, w + s) - F(z + s, w - s) - F(z - s, w + s) + F(z - s, w - s)) / (4.0 * s * s); };
  return (4.0 * d(h) - d(2.0 * h)) / 3.0;
}

double mixed_hessian_check(const ClosedTwoForm& form, const ConeChart& chart, cplx z, cplx w, double h) {
  const auto q = [&](cplx a, cplx b) { return cone_potential(form, chart, a, b); };
  return std::abs(mixed_derivative(q, z, w, h) - form.omega(z, w));
}

double chart_independence_defect(const ClosedTwoForm& form, const ConeChart& a, const ConeChart& b, cplx z, cplx w,
                                 double h) {
  const auto diff = [&](cplx x, cplx y) { return cone_potential(form, a, x, y) - cone_potential(form, b, x, y); };
  return std::abs(mixed_derivative(diff, z, w, h));
}

cplx wp_genus1(cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("wp_genus1: requires Im z > 0");
  const cplx d = z - std::conj(z);
  return -I / (d * d);
}

cplx wp_extension_density(cplx z, cplx w) {
  if (z == w) throw InvalidArgument("wp_extension_density: z = w");
  return 1.0 / ((z - w) * (z - w));
}

cplx log_potential_closed_form(const ConeChart& chart, cplx z, cplx w) {
  for (cplx d : {z - w, chart.z0 - w, z - chart.w0, chart.z0 - chart.w0})
    if (!(d.imag() > 0.0)) throw BranchError("log_potential_closed_form: z - w must stay in the upper half-plane");
  return std::log(z - w) - std::log(chart.z0 - w) - std::log(z - chart.w0) + std::log(chart.z0 - chart.w0);
}

cplx diagonal_ddbar(const std::function<cplx(cplx, cplx)>& g, cplx z, double h) {
  const auto G = [&](cplx p) { return g(p, std::conj(p)); };
  const cplx lap = (G(z + h) + G(z - h) + G(z + I * h) + G(z - I * h) - 4.0 * G(z)) / (h * h);
  return 0.25 * lap;
}

double kahler_potential_check(cplx z, double h) {
  if (!(z.imag() > h)) throw InvalidArgument("kahler_potential_check: stencil leaves the upper half-plane");
  const auto q = [](cplx a, cplx b) { return std::log(a - b); };
  const cplx d = z - std::conj(z);
  return std::abs(diagonal_ddbar(q, z, h) - 1.0 / (d * d));
}

cplx tilde_q(const std::function<cplx(cplx, cplx)>& q, const ClosedTwoForm& form, cplx z, cplx w) {
  if (!form.V.contains(z) || !form.W.contains(w)) throw InvalidArgument("tilde_q: (z, w) outside V x W");
  const cplx zr = std::conj(w), wr = std::conj(z);
  if (!form.V.contains(zr) || !form.W.contains(wr))
    throw InvalidArgument("tilde_q: reflected point (conj w, conj z) outside V x W");
  return 0.5 * (q(z, w) + std::conj(q(zr, wr)));
}

ExtensionCheck extension_structure_check(cplx z, cplx w, double h) {
  const auto F = [](cplx a, cplx b) {
    const cplx r = (a - b) / (2.0 * I);
    if (!(r.real() > 0.0)) throw BranchError("extension_structure_check: Re((z - w)/2i) <= 0");
    return torus_logdet_extension(a, b) - 0.5 * std::log(r);
  };
  if (!(((z - w) / (2.0 * I)).real() > 0.0)) throw BranchError("extension_structure_check: Re((z - w)/2i) <= 0");
  ExtensionCheck r;
  r.mixed = std::abs(mixed_derivative(F, z, w, h));

  const cplx w2 = w - cplx(0.1, 0.2);
  double lo_re = 1e300, hi_re = -1e300, lo_im = 1e300, hi_im = -1e300;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      const cplx zp = z + cplx(0.05 * a, 0.05 * b);
      const cplx d = F(zp, w) - F(zp, w2);
      lo_re = std::min(lo_re, d.real());
      hi_re = std::max(hi_re, d.real());
      lo_im = std::min(lo_im, d.imag());
      hi_im = std::max(hi_im, d.imag());
    }
  r.split_variation = std::max(hi_re - lo_re, hi_im - lo_im);
  r.diagonal = std::abs(torus_logdet_extension(z, std::conj(z)) - torus_logdet_exact(z));
  return r;
}

UniquenessWitness diagonal_uniqueness_witness(int degree, int points, double noise, unsigned seed) {
  if (degree < 0 || points <= 0) throw InvalidArgument("diagonal_uniqueness_witness: bad sizes");
  std::vector<std::pair<int, int>> mono;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) mono.emplace_back(a, b);
  if (static_cast<int>(mono.size()) > points)
    throw InvalidArgument("diagonal_uniqueness_witness: fewer samples than unknowns");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Eigen::MatrixXcd M(points, static_cast<Eigen::Index>(mono.size()));
  Eigen::VectorXcd rhs(points);
  for (int k = 0; k < points; ++k) {
    const cplx p = std::sqrt(U(rng)) * std::polar(1.0, 2.0 * kPi * U(rng));
    for (std::size_t j = 0; j < mono.size(); ++j)
      M(k, static_cast<Eigen::Index>(j)) = std::pow(p, mono[j].first) * std::pow(std::conj(p), mono[j].second);
    rhs(k) = noise * cplx(2.0 * U(rng) - 1.0, 2.0 * U(rng) - 1.0);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  UniquenessWitness u;
  u.unknowns = static_cast<int>(mono.size());
  u.min_singular = svd.singularValues().minCoeff();
  u.max_coefficient = svd.solve(rhs).cwiseAbs().maxCoeff();
  return u;
}

}  // namespace quasilap
