#include <doctest.h>

#include <cmath>
#include <map>

#include "quasilap/fft.hpp"
#include "quasilap/oracles.hpp"

using namespace quasilap;

namespace {

// q-series product truncated at a fixed depth.
cplx eta_depth(cplx z, int depth) {
  const cplx q = std::exp(2.0 * kPi * I * z);
  cplx prod = 1.0, qn = 1.0;
  for (int n = 1; n <= depth; ++n) {
    qn *= q;
    prod *= 1.0 - qn;
  }
  return std::exp(2.0 * kPi * I * z / 24.0) * prod;
}

// Eigenvalues of the positive flat Laplacian obtained by applying the Fourier
// symbol of -(d_x^2 + d_y^2) on every resolvable mode of an n x n torus grid.
std::vector<double> fft_diagonalized(cplx z, int n) {
  const auto g = ComplexGrid::torus(make_lattice(z), n);
  std::vector<double> ev;
  const auto& fft = fft_plan(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      std::vector<cplx> e(g.size(), 0.0);
      e[g.index(r, c)] = 1.0;
      fft.inverse(e);
      SampledField basis(g, e);
      const auto lap = spectral_derivatives(basis).ddbar;
      // lap = (1/4) Delta_flat basis; eigenvalue of -Delta is -4 lap/basis
      const auto k = wave_numbers(g, r, c);
      if (k.nyquist) continue;
      ev.push_back((-4.0 * lap.values[1] / basis.values[1]).real());
    }
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST_CASE("dedekind eta examples") {
  const auto e = dedekind_eta(I);
  CHECK(std::abs(eta_depth(I, 60) - eta_depth(I, 80)) < 1e-13);
  CHECK(std::abs(e.value - eta_depth(I, 80)) < 1e-13);
  CHECK(e.value.real() == doctest::Approx(0.768225422326057).epsilon(1e-12));
  CHECK(e.tail_bound <= 1e-14);

  const cplx z(0.0, 2.0);
  CHECK(std::abs(dedekind_eta(z + 1.0).value - std::exp(I * kPi / 12.0) * dedekind_eta(z).value) < 1e-13);

  const cplx z10(0.0, 10.0);
  const cplx q24 = std::exp(2.0 * kPi * I * z10 / 24.0);
  CHECK(std::abs(dedekind_eta(z10).value / q24 - 1.0) < 1e-14);

  CHECK_THROWS_AS(dedekind_eta({0.0, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(dedekind_eta({0.0, 0.04}), InvalidArgument);
  CHECK(std::abs(std::exp(log_dedekind_eta({0.3, 0.8})) - dedekind_eta({0.3, 0.8}).value) < 1e-14);
}

TEST_CASE("torus log-determinant formula") {
  const double eta_i = std::abs(dedekind_eta(I).value);
  CHECK(torus_logdet_exact(I) == doctest::Approx(std::log(2.0 * kPi * eta_i * eta_i)).epsilon(1e-14));
  CHECK(std::abs(torus_logdet_exact({0.3, 1.0}) - torus_logdet_exact({1.3, 1.0})) < 1e-13);
  const double t = 8.0;
  const double asym = std::log(2.0 * kPi) + 0.5 * std::log(t) - kPi * t / 6.0;
  CHECK(std::abs(torus_logdet_exact({0.0, t}) - asym) < 1e-6);
}

TEST_CASE("holomorphic extension") {
  for (double x = 0.1; x < 0.95; x += 0.2)
    for (double y = 0.5; y <= 2.0; y += 0.3) {
      const cplx z(x, y);
      const cplx v = torus_logdet_extension(z, std::conj(z));
      CHECK(std::abs(v.imag()) < 1e-12);
      CHECK(std::abs(v.real() - torus_logdet_exact(z)) < 1e-12);
    }
  const cplx w0(0.0, -1.1);
  CHECK(cr_residual([&](cplx z) { return torus_logdet_extension(z, w0); }, I, 1e-4) < 1e-8);
  CHECK(cr_residual([&](cplx w) { return torus_logdet_extension(I, w); }, w0, 1e-4) < 1e-8);
  // The extension is not a function of conj(w): its dbar-derivative in conj(w) vanishes.
  CHECK(anti_cr_residual([&](cplx wb) { return torus_logdet_extension(I, std::conj(wb)); }, std::conj(w0), 1e-4) <
        1e-8);
  CHECK_THROWS_AS(torus_logdet_extension({0.0, 1.0}, {0.0, 1.0}), InvalidArgument);
}

TEST_CASE("torus eigenvalues against FFT diagonalization") {
  for (cplx z : {cplx(0.0, 1.0), cplx(0.0, 2.0), cplx(0.5, 1.0)}) {
    const auto fft = fft_diagonalized(z, 32);
    const auto ev = torus_eigenvalues(z, 2000.0);
    std::size_t count = 0;
    for (double v : fft)
      if (v <= 2000.0) ++count;
    REQUIRE(count == ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(ev[i] - fft[i]) < 1e-9 * (1.0 + ev[i]));
  }
  const auto ev_i = torus_eigenvalues(I, 4.0 * kPi * kPi * 1.5);
  CHECK(ev_i[0] == 0.0);
  CHECK(std::count_if(ev_i.begin(), ev_i.end(), [](double v) { return std::abs(v - 4 * kPi * kPi) < 1e-9; }) == 4);
  const auto ev_2i = torus_eigenvalues({0.0, 2.0}, 20.0);
  CHECK(std::count_if(ev_2i.begin(), ev_2i.end(), [](double v) { return std::abs(v - kPi * kPi) < 1e-9; }) == 2);
  CHECK(std::count(ev_2i.begin(), ev_2i.end(), 0.0) == 1);
  CHECK(torus_eigenvalues(I, 1.0).size() == 1);
}

TEST_CASE("Weyl law") {
  const double cut = 4000.0;
  const auto ev = torus_eigenvalues(I, cut);
  const double ratio = static_cast<double>(ev.size()) / cut;
  CHECK(std::abs(ratio / (1.0 / (4.0 * kPi)) - 1.0) < 0.05);
}

TEST_CASE("eta part is pluriharmonic") {
  const double h = 1e-3;
  auto ddbar = [&](auto F, cplx z) {
    return (F(z + h) + F(z - h) + F(z + I * h) + F(z - I * h) - 4.0 * F(z)) / (4.0 * h * h);
  };
  for (cplx z : {cplx(0.1, 0.8), cplx(0.4, 1.3), cplx(-0.2, 2.0)}) {
    auto rest = [](cplx p) {
      return torus_logdet_exact(p) - 0.5 * std::log(p.imag()) - 2.0 * std::log(std::abs(dedekind_eta(p).value));
    };
    CHECK(std::abs(ddbar(rest, z)) < 1e-6);
    auto full = [](cplx p) { return torus_logdet_exact(p); };
    auto half_log = [](cplx p) { return 0.5 * std::log(p.imag()); };
    // d dbar (1/2 log Im z) = 1/(8 (Im z)^2) up to sign; compare the two FD values.
    CHECK(std::abs(ddbar(full, z) - ddbar(half_log, z)) < 1e-5);
  }
}
