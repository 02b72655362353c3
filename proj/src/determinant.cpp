#include "quasilap/determinant.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "quasilap/fft.hpp"
#include "quasilap/kernels.hpp"
#include "quasilap/oracles.hpp"

namespace quasilap {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

std::vector<cplx> normalized_spectrum(const SampledField& f) {
  std::vector<cplx> c = f.values;
  const int n = f.grid.n();
  fft_plan(n, n).forward(c);
  const double s = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : c) v *= s;
  return c;
}

double wrap_into(double a, double theta) {
  // representative of a modulo 2 pi in (theta - 2 pi, theta]
  a = std::fmod(a - theta, kTwoPi);
  if (a > 0.0) a -= kTwoPi;
  if (a <= -kTwoPi) a += kTwoPi;
  return a + theta;
}

double principal_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

}  // namespace

Discretization discretize(const HoloLaplacian& L, const DiscretizeOptions& opt) {
  const ComplexGrid& g = L.grid();
  if (L.flavor != Flavor::FlatTorus || g.kind() != GridKind::Torus)
    throw InvalidArgument("discretize: flat-torus operators only");
  Discretization D;
  D.n = g.n();
  const int n = g.n();
  kernels::FourierAssembly in;
  in.n = n;
  in.symbols.assign(5, {});
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto k = wave_numbers(g, r, c);
      if (k.nyquist) continue;
      D.mode_row.push_back(r);
      D.mode_col.push_back(c);
      in.symbols[0].push_back(k.d * k.d);
      in.symbols[1].push_back(k.d * k.dbar);
      in.symbols[2].push_back(k.dbar * k.dbar);
      in.symbols[3].push_back(k.d);
      in.symbols[4].push_back(k.dbar);
    }
  const std::size_t m = D.mode_row.size();
  if (m > opt.cap) {
    std::ostringstream msg;
    msg << "discretize: " << m << " unknowns exceed the cap of " << opt.cap;
    throw InvalidArgument(msg.str());
  }
  in.mode_row = D.mode_row;
  in.mode_col = D.mode_col;
  for (const SampledField* c : {&L.c20, &L.c11, &L.c02, &L.c10, &L.c01})
    in.spectra.push_back(normalized_spectrum(L.prefactor * *c));
  D.matrix.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  if (opt.parallel)
    kernels::assemble_fourier_matrix_omp(in, D.matrix.data());
  else
    kernels::assemble_fourier_matrix_serial(in, D.matrix.data());
  return D;
}

Eigen::VectorXcd to_modes(const Discretization& D, const SampledField& u) {
  if (u.grid.kind() != GridKind::Torus || u.grid.n() != D.n) throw InvalidArgument("to_modes: grid mismatch");
  const auto c = normalized_spectrum(u);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(D.mode_row.size()));
  for (std::size_t j = 0; j < D.mode_row.size(); ++j) out[j] = c[u.grid.index(D.mode_row[j], D.mode_col[j])];
  return out;
}

SampledField from_modes(const Discretization& D, const ComplexGrid& g, const Eigen::VectorXcd& c) {
  if (g.kind() != GridKind::Torus || g.n() != D.n) throw InvalidArgument("from_modes: grid mismatch");
  if (c.size() != static_cast<Eigen::Index>(D.mode_row.size())) throw InvalidArgument("from_modes: size mismatch");
  std::vector<cplx> v(g.size(), 0.0);
  const double scale = static_cast<double>(g.n()) * g.n();
  for (std::size_t j = 0; j < D.mode_row.size(); ++j) v[g.index(D.mode_row[j], D.mode_col[j])] = c[j] * scale;
  fft_plan(g.n(), g.n()).inverse(v);
  return SampledField(g, std::move(v));
}

SpectralDecomposition eigen_spectrum(const Eigen::MatrixXcd& A, const SpectralOptions& opt) {
  if (A.rows() != A.cols() || A.rows() == 0) throw InvalidArgument("eigen_spectrum: square nonempty matrix required");
  const Eigen::Index m = A.rows();
  SpectralDecomposition S;
  S.theta = opt.theta;
  S.norm = A.cwiseAbs().rowwise().sum().maxCoeff();

  double radius = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) radius = std::max(radius, A.row(i).cwiseAbs().sum() - std::abs(A(i, i)));

  if (radius <= 1e-12 * S.norm) {
    S.method = "gershgorin";
    S.eigenvalues.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) S.eigenvalues[i] = A(i, i);
    S.residual_bound = radius;
  } else {
    S.method = "zgeev";
    Eigen::MatrixXcd work = A;
    std::vector<lapack_complex_double> w(static_cast<std::size_t>(m));
    Eigen::MatrixXcd vr;
    if (opt.certify) vr.resize(m, m);
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', opt.certify ? 'V' : 'N', static_cast<lapack_int>(m),
        reinterpret_cast<lapack_complex_double*>(work.data()), static_cast<lapack_int>(m), w.data(), nullptr, 1,
        opt.certify ? reinterpret_cast<lapack_complex_double*>(vr.data()) : nullptr,
        opt.certify ? static_cast<lapack_int>(m) : 1);
    if (info != 0) throw SpectralError("eigen_spectrum: zgeev failed with info " + std::to_string(info));
    S.eigenvalues.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) S.eigenvalues[i] = w[i];
    if (opt.certify) {
      const Eigen::MatrixXcd AV = A * vr;
      double res = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) res = std::max(res, (AV.col(i) - S.eigenvalues[i] * vr.col(i)).norm());
      S.residual_bound = res;
      if (res > 1e-9 * S.norm) {
        std::ostringstream msg;
        msg << "eigen_spectrum: eigenpair residual " << res << " exceeds 1e-9 |A| = " << 1e-9 * S.norm;
        throw SpectralError(msg.str());
      }
    }
  }
  std::stable_sort(S.eigenvalues.begin(), S.eigenvalues.end(),
                   [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });

  const int kernel = std::max(0, opt.expected_kernel);
  if (kernel > static_cast<int>(m)) throw InvalidArgument("eigen_spectrum: kernel larger than the matrix");
  if (opt.rho > 0.0) {
    S.rho = opt.rho;
  } else {
    S.rho = kernel < static_cast<int>(m) ? 0.5 * std::abs(S.eigenvalues[static_cast<std::size_t>(kernel)]) : 1.0;
  }
  S.kernel_dim = static_cast<int>(std::count_if(S.eigenvalues.begin(), S.eigenvalues.end(),
                                                [&](cplx l) { return std::abs(l) < S.rho; }));
  if (opt.expected_kernel < 0) {
    if (!(opt.rho > 0.0)) throw InvalidArgument("eigen_spectrum: an unchecked kernel needs an explicit rho");
  } else if (S.kernel_dim != kernel) {
    std::ostringstream msg;
    msg << "eigen_spectrum: " << S.kernel_dim << " eigenvalues inside |lambda| < rho = " << S.rho << ", expected "
        << kernel;
    throw SpectralError(msg.str());
  }
  const double kernel_tol = 1e-8 * std::max(1.0, S.norm);
  for (int i = 0; i < std::min(kernel, S.kernel_dim); ++i)
    if (std::abs(S.eigenvalues[static_cast<std::size_t>(i)]) > kernel_tol)
      throw SpectralError("eigen_spectrum: kernel eigenvalue is not numerically zero");

  const cplx dir = std::polar(1.0, -opt.theta);
  for (const cplx& l : S.eigenvalues) {
    if (std::abs(l) < S.rho) continue;
    const cplx r = l * dir;  // ray becomes the positive real axis
    const double dist = r.real() > 0.0 ? std::abs(r.imag()) : std::abs(r);
    if (dist < opt.ray_tol * std::max(1.0, std::abs(l))) {
      std::ostringstream msg;
      msg << "eigen_spectrum: eigenvalue " << l << " lies on the cut ray arg = " << opt.theta
          << "; choose a different theta";
      throw SpectralError(msg.str());
    }
  }
  return S;
}

DetResult log_det_branch(const SpectralDecomposition& S) { return log_det_branch(S, S.theta); }

DetResult log_det_branch(const SpectralDecomposition& S, double theta) {
  DetResult r;
  r.theta = theta;
  r.method = DetMethod::MatrixBranch;
  double re = 0.0, im = 0.0, principal = 0.0;
  for (const cplx& l : S.eigenvalues) {
    if (std::abs(l) < S.rho) continue;
    re += std::log(std::abs(l));
    const double a = std::arg(l);
    im += wrap_into(a, theta);
    principal += a;
  }
  r.log_det = cplx(re, im);
  r.raw_log_det = re;
  r.branch_index = static_cast<int>(std::lround((im - principal) / kTwoPi));
  return r;
}

std::vector<double> admissible_thetas(const SpectralDecomposition& S, int count) {
  if (count <= 0) return {};
  std::vector<double> args;
  for (const cplx& l : S.eigenvalues)
    if (std::abs(l) >= S.rho) {
      double a = std::arg(l);
      if (a < 0.0) a += kTwoPi;
      args.push_back(a);
    }
  if (args.empty()) {
    std::vector<double> out;
    for (int j = 0; j < count; ++j) out.push_back(principal_angle(kPi - kTwoPi * j / count));
    return out;
  }
  std::sort(args.begin(), args.end());
  struct Gap {
    double start, width;
  };
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i + 1] - args[i] > 1e-9) gaps.push_back({args[i], args[i + 1] - args[i]});
  gaps.push_back({args.back(), args.front() + kTwoPi - args.back()});
  std::stable_sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.width > b.width; });

  std::vector<double> out;
  if (static_cast<int>(gaps.size()) >= count) {
    for (int j = 0; j < count; ++j) out.push_back(principal_angle(gaps[j].start + 0.5 * gaps[j].width));
  } else {
    for (const auto& gp : gaps) out.push_back(principal_angle(gp.start + 0.5 * gp.width));
    // remaining angles split the widest gap evenly
    const int extra = count - static_cast<int>(gaps.size());
    for (int j = 1; j <= extra; ++j) {
      const double f = static_cast<double>(j) / (2.0 * (extra + 1));
      out.push_back(principal_angle(gaps[0].start + f * gaps[0].width));
    }
  }
  return out;
}

double torus_zeta_at_zero() { return -1.0; }

DetResult zeta_logdet_torus(cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("zeta_logdet_torus: Im z must be positive");
  if (std::abs(z) < 0.1 || std::abs(z) > 10.0 || z.imag() < 0.1 || z.imag() > 10.0)
    throw InvalidArgument("zeta_logdet_torus: modulus outside the supported box 0.1 <= |z|, Im z <= 10");
  const double area = z.imag();
  const double cut = 60.0;  // exp(-60) terms dropped

  // lattice part: sum' exp(-|w|^2/4)/|w|^2, |w|^2 <= 4 cut
  const double wmax = std::sqrt(4.0 * cut);
  const int bmax = static_cast<int>(std::ceil(wmax / z.imag())) + 1;
  double lattice = 0.0;
  for (int b = -bmax; b <= bmax; ++b) {
    const double center = -b * z.real();
    const int a0 = static_cast<int>(std::floor(center - wmax)) - 1;
    const int a1 = static_cast<int>(std::ceil(center + wmax)) + 1;
    for (int a = a0; a <= a1; ++a) {
      if (a == 0 && b == 0) continue;
      const double w2 = std::norm(cplx(a, 0.0) + static_cast<double>(b) * z);
      if (w2 > 4.0 * cut) continue;
      lattice += std::exp(-0.25 * w2) / w2;
    }
  }

  // dual part: sum' E1(lambda), lambda = (2 pi m)^2 + (2 pi (n - m Re z)/Im z)^2 <= cut
  const double kmax = std::sqrt(cut) / kTwoPi;
  const int mmax = static_cast<int>(std::ceil(kmax)) + 1;
  double dual = 0.0;
  for (int m = -mmax; m <= mmax; ++m) {
    const double center = m * z.real();
    const int n0 = static_cast<int>(std::floor(center - kmax * z.imag())) - 1;
    const int n1 = static_cast<int>(std::ceil(center + kmax * z.imag())) + 1;
    for (int n = n0; n <= n1; ++n) {
      if (m == 0 && n == 0) continue;
      const double lam = torus_mode_eigenvalue(z, m, n);
      if (lam > cut) continue;
      dual += boost::math::expint(1, lam);
    }
  }
  const double gamma = boost::math::constants::euler<double>();
  DetResult r;
  r.method = DetMethod::ZetaExactTorus;
  r.raw_log_det = gamma + area / (4.0 * kPi) - (area / kPi) * lattice - dual;
  // scaling to area 4 pi^2 multiplies the operator by area / 4 pi^2
  const double rescaled = r.raw_log_det + torus_zeta_at_zero() * std::log(area / (4.0 * kPi * kPi));
  r.log_det = 0.5 * rescaled;
  return r;
}

Eigen::MatrixXcd kernel_projector(const Eigen::MatrixXcd& A, int rank) {
  const Eigen::Index m = A.rows();
  if (rank == 0) return Eigen::MatrixXcd::Zero(m, m);
  if (rank != 1) throw InvalidArgument("kernel_projector: rank 0 or 1 only");
  const double norm = std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
  const cplx shift(1e-10 * norm, 0.7e-10 * norm);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A - shift * Eigen::MatrixXcd::Identity(m, m));
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(m), w = Eigen::VectorXcd::Ones(m);
  for (int it = 0; it < 4; ++it) {
    v = lu.solve(v);
    v.normalize();
    w = lu.adjoint().solve(w);
    w.normalize();
  }
  const cplx denom = w.dot(v);  // w^H v
  if (!(std::abs(denom) > 1e-12)) throw SpectralError("kernel_projector: defective kernel");
  return v * w.adjoint() / denom;
}

VariationResult variation_check(const MatrixFamily& family, cplx s0, double h, const SpectralOptions& opt) {
  if (!(h > 0.0)) throw InvalidArgument("variation_check: h must be positive");
  const int offsets[4] = {-2, -1, 1, 2};
  const double weights[4] = {1.0, -8.0, 8.0, -1.0};
  std::vector<Eigen::MatrixXcd> mats;
  std::vector<cplx> logs;
  for (int k : offsets) {
    mats.push_back(family(s0 + static_cast<double>(k) * h));
    logs.push_back(log_det_branch(eigen_spectrum(mats.back(), opt)).log_det);
  }
  for (std::size_t i = 0; i + 1 < logs.size(); ++i)
    if (std::abs((logs[i + 1] - logs[i]).imag()) > kPi)
      throw SpectralError("variation_check: an eigenvalue crosses the cut ray within the stencil");
  VariationResult r;
  Eigen::MatrixXcd dA = Eigen::MatrixXcd::Zero(mats[0].rows(), mats[0].cols());
  for (int i = 0; i < 4; ++i) {
    r.finite_difference += weights[i] * logs[i];
    dA += weights[i] * mats[i];
  }
  r.finite_difference /= 12.0 * h;
  dA /= 12.0 * h;

  const Eigen::MatrixXcd A0 = family(s0);
  const Eigen::MatrixXcd P0 = kernel_projector(A0, opt.expected_kernel);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A0 + P0);
  r.trace_formula = lu.solve(dA).trace() - (P0 * dA).trace();
  r.defect = std::abs(r.finite_difference - r.trace_formula);
  return r;
}

MatrixFamily delta_family(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu, std::function<cplx(cplx)> mu1,
                          std::function<cplx(cplx)> nu1, FamilyDirection dir, const SolverOptions& sopt) {
  if (!mu.analytic || !nu.analytic) throw InvalidArgument("delta_family: coefficients need pointwise evaluators");
  if (!mu1) mu1 = [](cplx) { return cplx(0.0); };
  if (!nu1) nu1 = [](cplx) { return cplx(0.0); };
  const ComplexGrid g = mu.field.grid;
  auto mf = mu.analytic, nf = nu.analytic;
  return [=](cplx s) {
    auto shifted = [&](const std::function<cplx(cplx)>& base, const std::function<cplx(cplx)>& d) {
      return make_coefficient(g, [base, d, s](cplx p) { return base(p) + s * d(p); });
    };
    BeltramiCoefficient a, b;
    switch (dir) {
      case FamilyDirection::Mu:
        a = shifted(mf, mu1);
        b = make_coefficient(g, nf);
        break;
      case FamilyDirection::Nu:
        a = make_coefficient(g, mf);
        b = shifted(nf, nu1);
        break;
      case FamilyDirection::Diagonal:
        a = shifted(mf, mu1);
        b = a;
        break;
    }
    return discretize(make_delta_mn(a, b, sopt)).matrix;
  };
}

OperatorDet operator_log_det(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                             const AdmissibilityOptions& opt) {
  const auto L = make_delta_mn(mu, nu, opt.solver);
  OperatorDet out;
  out.symbol = symbol_report(L);
  if (!(out.symbol.max_abs_arg < opt.theta0)) {
    std::ostringstream msg;
    msg << "inadmissible: principal symbol angle " << out.symbol.max_abs_arg << " >= theta0 = " << opt.theta0;
    throw InvalidArgument(msg.str());
  }
  try {
    out.spectrum = eigen_spectrum(discretize(L).matrix, opt.spectral);
  } catch (const SpectralError& e) {
    throw InvalidArgument(std::string("inadmissible: spectral condition failed: ") + e.what());
  }
  out.det = log_det_branch(out.spectrum);
  return out;
}

namespace {

double first_gap(const SpectralDecomposition& S) {
  for (const cplx& l : S.eigenvalues)
    if (std::abs(l) >= S.rho) return std::abs(l);
  return 0.0;
}

}  // namespace

HolomorphyResult det_holomorphy_check(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu,
                                      const std::function<cplx(cplx)>& mu1, const std::function<cplx(cplx)>& nu1,
                                      double h, const AdmissibilityOptions& opt) {
  if (!mu.analytic || !nu.analytic) throw InvalidArgument("det_holomorphy_check: coefficients need pointwise evaluators");
  const ComplexGrid g = mu.field.grid;
  HolomorphyResult r;
  r.min_gap = 1e300;
  auto record = [&](const OperatorDet& d) {
    r.max_symbol_arg = std::max(r.max_symbol_arg, d.symbol.max_abs_arg);
    r.min_gap = std::min(r.min_gap, first_gap(d.spectrum));
    return d.det.log_det;
  };
  if (mu1) {
    auto F = [&](cplx s) {
      const auto ms = make_coefficient(g, [&, s](cplx p) { return mu.analytic(p) + s * mu1(p); });
      return record(operator_log_det(ms, nu, opt));
    };
    r.res_s = cr_residual(F, 0.0, h);
  }
  if (nu1) {
    auto G = [&](cplx t) {
      const auto nt = make_coefficient(g, [&, t](cplx p) { return nu.analytic(p) + t * nu1(p); });
      return record(operator_log_det(mu, nt, opt));
    };
    r.res_t = anti_cr_residual(G, 0.0, h);
  }
  if (!mu1 && !nu1) r.min_gap = first_gap(operator_log_det(mu, nu, opt).spectrum);
  return r;
}

double diagonal_holomorphy_residual(const BeltramiCoefficient& mu, const std::function<cplx(cplx)>& mu1, double h,
                                    const AdmissibilityOptions& opt) {
  if (!mu.analytic) throw InvalidArgument("diagonal_holomorphy_residual: coefficient needs a pointwise evaluator");
  const ComplexGrid g = mu.field.grid;
  auto F = [&](cplx s) {
    const auto ms = make_coefficient(g, [&, s](cplx p) { return mu.analytic(p) + s * mu1(p); });
    return operator_log_det(ms, ms, opt).det.log_det;
  };
  return cr_residual(F, 0.0, h);
}

}  // namespace quasilap
