#include "quasilap/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <json.hpp>

namespace quasilap {

namespace {

constexpr double kEtaMinImag = 0.05;
constexpr double kTailTarget = 1e-16;
constexpr int kMaxEtaTerms = 4000;

void check_upper(cplx z, const char* who) {
  if (!(z.imag() > 0.0)) throw InvalidArgument(std::string(who) + ": requires Im z > 0");
  if (z.imag() < kEtaMinImag)
    throw InvalidArgument(std::string(who) + ": Im z < 0.05 would need modular acceleration");
}

// Terms M such that the product tail prod_{n>M}(1 - q^n) differs from 1 by at most
// exp(|q|^{M+1}/(1-|q|)^2) - 1.
std::pair<int, double> truncation(double aq) {
  const double denom = (1.0 - aq) * (1.0 - aq);
  int m = 1;
  double qm = aq * aq;  // |q|^{m+1}
  while (qm / denom > kTailTarget && m < kMaxEtaTerms) {
    qm *= aq;
    ++m;
  }
  const double bound = std::expm1(qm / denom);
  if (bound > 1e-14) throw ConvergenceError("dedekind_eta: tail bound not reached");
  return {m, bound};
}

}  // namespace

EtaValue dedekind_eta(cplx z) {
  check_upper(z, "dedekind_eta");
  const cplx q = std::exp(2.0 * kPi * I * z);
  const auto [m, bound] = truncation(std::abs(q));
  cplx prod = 1.0;
  cplx qn = 1.0;
  for (int n = 1; n <= m; ++n) {
    qn *= q;
    prod *= 1.0 - qn;
  }
  const cplx q24 = std::exp(2.0 * kPi * I * z / 24.0);
  return EtaValue{z, q24 * prod, m, bound};
}

cplx log_dedekind_eta(cplx z) {
  check_upper(z, "log_dedekind_eta");
  const cplx q = std::exp(2.0 * kPi * I * z);
  const int m = truncation(std::abs(q)).first;
  cplx s = 2.0 * kPi * I * z / 24.0;
  cplx qn = 1.0;
  for (int n = 1; n <= m; ++n) {
    qn *= q;
    s += std::log(1.0 - qn);
  }
  return s;
}

double torus_logdet_exact(cplx z) {
  const auto eta = dedekind_eta(z);
  return std::log(2.0 * kPi) + 0.5 * std::log(z.imag()) + 2.0 * std::log(std::abs(eta.value));
}

cplx torus_logdet_extension(cplx z, cplx w) {
  if (!(z.imag() > 0.0) || !(w.imag() < 0.0))
    throw InvalidArgument("torus_logdet_extension: requires Im z > 0 and Im w < 0");
  const cplx r = (z - w) / (2.0 * I);
  if (!(r.real() > 0.0)) throw BranchError("torus_logdet_extension: Re((z - w)/2i) <= 0");
  return std::log(2.0 * kPi) + 0.5 * std::log(r) + log_dedekind_eta(z) + std::conj(log_dedekind_eta(std::conj(w)));
}

double torus_mode_eigenvalue(cplx z, int m, int n) {
  const double a = static_cast<double>(m);
  const double b = (n - m * z.real()) / z.imag();
  return 4.0 * kPi * kPi * (a * a + b * b);
}

std::vector<double> torus_eigenvalues(cplx z, double cut) {
  make_lattice(z);
  if (!(cut > 0.0)) throw InvalidArgument("torus_eigenvalues: cutoff must be positive");
  const double r2 = cut / (4.0 * kPi * kPi);  // bound on |l|^2
  const int mmax = static_cast<int>(std::floor(std::sqrt(r2)));
  std::vector<double> ev;
  for (int m = -mmax; m <= mmax; ++m) {
    const double rest = r2 - static_cast<double>(m) * m;
    if (rest < 0.0) continue;
    const double span = std::sqrt(rest) * z.imag();
    const double c = m * z.real();
    const int nlo = static_cast<int>(std::ceil(c - span)) - 1;
    const int nhi = static_cast<int>(std::floor(c + span)) + 1;
    for (int n = nlo; n <= nhi; ++n) {
      const double lam = torus_mode_eigenvalue(z, m, n);
      if (lam <= cut) ev.push_back(lam);
    }
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

void write_eigenvalues_csv(std::ostream& os, const std::vector<double>& ev) {
  os << "index,eigenvalue\n" << std::setprecision(17);
  for (std::size_t i = 0; i < ev.size(); ++i) os << i << ',' << ev[i] << '\n';
}

void write_eta_json(std::ostream& os, const EtaValue& eta) {
  nlohmann::json j;
  j["z"] = {eta.z.real(), eta.z.imag()};
  j["value"] = {eta.value.real(), eta.value.imag()};
  j["truncation_terms"] = eta.truncation_terms;
  j["tail_bound"] = eta.tail_bound;
  os << j.dump(2) << '\n';
}

}  // namespace quasilap
