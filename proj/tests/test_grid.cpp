#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "quasilap/grid.hpp"

using namespace quasilap;

namespace {

ComplexGrid square_torus(int n) { return ComplexGrid::torus(make_lattice({0.0, 1.0}), n); }

// Band-limited random field with modes |m|,|n| <= 3 on a torus.
SampledField random_trig(const ComplexGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  const cplx z = g.lattice().modulus;
  std::vector<std::tuple<int, int, cplx>> modes;
  for (int m = -3; m <= 3; ++m)
    for (int n = -3; n <= 3; ++n) modes.emplace_back(m, n, cplx(nd(rng), nd(rng)));
  return SampledField::from_function(g, [&](cplx p) {
    const double t = p.imag() / z.imag();
    const double s = p.real() - t * z.real();
    cplx acc = 0.0;
    for (auto& [m, n, c] : modes) acc += c * std::exp(2.0 * kPi * I * (m * s + n * t));
    return acc;
  });
}

}  // namespace

TEST_CASE("torus grid points and validation") {
  const auto g = square_torus(8);
  CHECK(g.size() == 64);
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 8; ++j) CHECK(std::abs(g.point(k, j) - cplx(j, k) / 8.0) < 1e-15);

  const auto g2 = ComplexGrid::torus(make_lattice({0.0, 2.0}), 4);
  CHECK(g2.size() == 16);
  CHECK(g2.cell_area() * 16 == doctest::Approx(2.0));

  CHECK_THROWS_AS(ComplexGrid::torus(LatticeSpec{{0.0, -1.0}}, 8), InvalidArgument);
  CHECK_THROWS_AS(make_lattice({1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(square_torus(3), InvalidArgument);
}

TEST_CASE("nearest-neighbour spacing on a skew torus by enumeration") {
  const cplx z(0.5, 1.0);
  const auto g = ComplexGrid::torus(make_lattice(z), 16);
  REQUIRE(g.size() == 256);
  const auto pts = g.points();
  double brute = 1e300;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b)
      for (int u = -1; u <= 1; ++u)
        for (int v = -1; v <= 1; ++v) {
          const double d = std::abs(pts[a] - pts[b] + static_cast<double>(u) + static_cast<double>(v) * z);
          if (d > 1e-12) brute = std::min(brute, d);
        }
  double lattice_min = 1e300;
  for (int u = -3; u <= 3; ++u)
    for (int v = -3; v <= 3; ++v)
      if (u || v) lattice_min = std::min(lattice_min, std::abs(static_cast<double>(u) + static_cast<double>(v) * z) / 16.0);
  CHECK(brute == doctest::Approx(lattice_min).epsilon(1e-12));
}

TEST_CASE("spectral derivative examples") {
  const auto g = square_torus(16);
  const SampledField one(g, 1.0);
  CHECK(spectral_derivative(one, Deriv::D).sup_norm() < 1e-14);
  CHECK(spectral_derivative(one, Deriv::Dbar).sup_norm() < 1e-14);

  const auto f = SampledField::from_function(g, [](cplx p) { return std::exp(2.0 * kPi * I * p.real()); });
  const auto df = spectral_derivative(f, Deriv::Dbar);
  CHECK(sup_distance(df, f * cplx(0.0, kPi)) < 1e-12);
  const auto d = spectral_derivative(f, Deriv::D);
  CHECK(sup_distance(d, f * cplx(0.0, kPi)) < 1e-12);

  const auto fy = SampledField::from_function(g, [](cplx p) { return std::exp(2.0 * kPi * I * p.imag()); });
  // d = (d_x - i d_y)/2, d_y e^{2 pi i y} = 2 pi i e^{2 pi i y}
  CHECK(sup_distance(spectral_derivative(fy, Deriv::D), fy * cplx(kPi, 0.0)) < 1e-12);
  CHECK(sup_distance(spectral_derivative(fy, Deriv::Dbar), fy * cplx(-kPi, 0.0)) < 1e-12);
}

TEST_CASE("d dbar against a second-difference Laplacian") {
  double prev = 0.0;
  for (int n : {32, 64}) {
    const auto g = square_torus(n);
    const auto f = random_trig(g, 7);
    const auto ddb = spectral_derivatives(f).ddbar;
    const double h = 1.0 / n;
    double err = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        auto at = [&](int rr, int cc) { return f.values[g.index((rr + n) % n, (cc + n) % n)]; };
        const cplx lap = (at(r, c + 1) + at(r, c - 1) + at(r + 1, c) + at(r - 1, c) - 4.0 * at(r, c)) / (h * h);
        err = std::max(err, std::abs(ddb.values[g.index(r, c)] - 0.25 * lap));
      }
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("spectral derivative invariants") {
  const auto g = ComplexGrid::torus(make_lattice({0.3, 1.2}), 32);
  const auto f = random_trig(g, 3);
  const auto a = spectral_derivative(spectral_derivative(f, Deriv::D), Deriv::Dbar);
  const auto b = spectral_derivative(spectral_derivative(f, Deriv::Dbar), Deriv::D);
  CHECK(sup_distance(a, b) < 1e-10 * a.sup_norm());
  CHECK(sup_distance(a, spectral_derivatives(f).ddbar) < 1e-10 * a.sup_norm());

  const auto re = f.map([](cplx v) { return cplx(v.real(), 0.0); });
  const auto dbar = spectral_derivative(re, Deriv::Dbar);
  const auto dconj = spectral_derivative(re.conj(), Deriv::D).conj();
  CHECK(sup_distance(dbar, dconj) < 1e-12 * (1.0 + dbar.sup_norm()));

  const auto w = ComplexGrid::window(make_window(-0.5, 0.5, 0.5, 1.5, 0.1), 16);
  CHECK_THROWS_AS(spectral_derivative(SampledField(w), Deriv::D), InvalidArgument);
}

TEST_CASE("window finite differences are fourth order") {
  const auto win = make_window(-0.5, 0.5, 0.5, 1.5, 0.1);
  double prev = 0.0;
  for (int n : {32, 64}) {
    const auto g = ComplexGrid::window(win, n);
    const auto f = SampledField::from_function(g, [](cplx p) { return std::exp(p) + std::norm(p); });
    const auto d = finite_difference_derivatives(f);
    const auto exact_d = SampledField::from_function(g, [](cplx p) { return std::exp(p) + std::conj(p); });
    const auto exact_dbar = SampledField::from_function(g, [](cplx p) { return p; });
    const double err = std::max(sup_distance(d.d, exact_d), sup_distance(d.dbar, exact_dbar));
    CHECK(sup_distance(d.ddbar, SampledField(g, 1.0)) < 3e-5);
    if (prev > 0.0) CHECK(prev / err > 12.0);
    prev = err;
  }
}

TEST_CASE("periodic interpolation") {
  const auto g = ComplexGrid::torus(make_lattice({0.2, 0.9}), 16);
  const auto f = random_trig(g, 11);
  PeriodicInterpolant ip(f);
  for (std::size_t i = 0; i < g.size(); i += 7) CHECK(std::abs(ip(g.point(i)) - f.values[i]) < 1e-12);
  const auto z = g.lattice().modulus;
  const cplx p(0.123, 0.456);
  const auto g2 = ComplexGrid::torus(make_lattice(z), 32);
  const auto f2 = random_trig(g2, 11);
  CHECK(std::abs(ip(p) - PeriodicInterpolant(f2)(p)) < 1e-12);
  CHECK(std::abs(ip(p + 1.0) - ip(p)) < 1e-12);
  CHECK(std::abs(ip(p + z) - ip(p)) < 1e-12);
}

TEST_CASE("plane tensor evaluation matches pointwise evaluation") {
  const auto g = ComplexGrid::plane(PlaneBox{-2.0, -2.0, 4.0}, 33);
  const auto f = SampledField::from_function(g, [](cplx p) { return std::exp(-2.0 * std::norm(p)) * p; });
  PeriodicInterpolant ip(f);
  const auto w = ComplexGrid::window(make_window(-0.5, 0.5, 0.4, 1.2, 0.1), 6);
  const auto tens = ip.evaluate_on(w);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(tens.values[i] - ip(w.point(i))) < 1e-12);
}

TEST_CASE("cr_residual examples") {
  const auto sq = [](cplx s) { return s * s; };
  CHECK(cr_residual(sq, {1.0, 1.0}, 1e-4) < 1e-10);
  CHECK(cr_residual([](cplx s) { return std::conj(s); }, {0.3, -0.2}, 1e-4) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(cr_residual([](cplx s) { return cplx(std::norm(s), 0.0); }, 2.0, 1e-4) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(anti_cr_residual([](cplx s) { return std::conj(s); }, {0.3, -0.2}, 1e-4) < 1e-10);
  CHECK_THROWS_AS(cr_residual(sq, 0.0, 0.0), InvalidArgument);

  // Polynomial: residual is C h^2 with C = |F'''|/6.
  const auto poly = [](cplx s) { return s * s * s * s - 2.0 * s * s * s + s; };
  const cplx s0(0.4, 0.7);
  double c_max = 0.0;
  for (double h : {1e-2, 5e-3, 2.5e-3}) c_max = std::max(c_max, cr_residual(poly, s0, h) / (h * h));
  const double expected = std::abs(24.0 * s0 - 12.0) / 6.0;
  MESSAGE("polynomial cr_residual constant C = " << c_max);
  CHECK(c_max == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("container round trip") {
  const auto gt = ComplexGrid::torus(make_lattice({0.5, 1.0}), 8);
  const auto gw = ComplexGrid::window(make_window(-0.5, 0.5, 0.5, 1.5, 0.1), 8);
  const auto gp = ComplexGrid::plane(PlaneBox{-1.0, -1.0, 2.0}, 9);
  for (const auto& g : {gt, gw, gp}) {
    const auto f = SampledField::from_function(g, [](cplx p) { return p * p + I; });
    std::stringstream ss;
    write_container(ss, f);
    const auto back = read_container(ss);
    CHECK(back.grid.same_as(g));
    CHECK(sup_distance(back, f) == 0.0);
  }
  std::stringstream bad("QLAX");
  CHECK_THROWS_AS(read_container(bad), InvalidArgument);

  std::stringstream csv;
  write_csv(csv, SampledField(gt, 2.0));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 65);
}
