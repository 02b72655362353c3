#include <doctest.h>

#include <cmath>

#include "quasilap/experiments.hpp"
#include "quasilap/oracles.hpp"

using namespace quasilap;

TEST_CASE("fit_line") {
  const auto f = fit_line({1.0, 2.0, 4.0}, {3.0, 5.0, 9.0});
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit_line({1.0, 2.0, 3.0}, {1.0, 3.0, 2.0}).r2 == doctest::Approx(0.25));
  CHECK_THROWS_AS(fit_line({1.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(fit_line({1.0, 1.0}, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("torus_det_report") {
  const auto r = torus_det_report({1.0 / 3.0, 2.0}, 0);
  CHECK(r.rel_delta <= 1e-8);
  CHECK(r.spectrum_defect == -1.0);
  const auto s = torus_det_report(I, 16);
  CHECK(s.modes_compared == 20);
  CHECK(s.spectrum_defect <= 1e-12);
}

TEST_CASE("symbol sweep is linear for constants") {
  const auto g = ComplexGrid::torus(make_lattice(I), 16);
  const auto mu = preset_coefficient("constant:0.2", g);
  const auto s = symbol_angle_sweep(mu, [](cplx) { return cplx(1.0); }, {0.01, 0.02, 0.04});
  CHECK(s.diagonal_arg <= 1e-12);
  CHECK(s.fit.r2 >= 0.99);
  CHECK(s.fit.slope > 0.0);
  CHECK(s.max_arg == s.args.back());
}

TEST_CASE("eigen sweep is independent of the thread count") {
  const auto g = ComplexGrid::torus(make_lattice(I), 16);
  const auto mu = preset_coefficient("constant:0.1", g);
  const auto d = preset_function("fourier:1,0,0.2", g);
  const auto dir = [&](cplx p) { return 0.5 + d(p); };
  const auto a = eigen_bound_sweep(mu, dir, {0.01, 0.02, 0.04}, 1);
  const auto b = eigen_bound_sweep(mu, dir, {0.01, 0.02, 0.04}, 2);
  INFO(a.failure);
  CHECK(a.failure.empty());
  CHECK(!a.rho_violated);
  CHECK(a.min_abs == b.min_abs);
  CHECK(a.log_dets == b.log_dets);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.deviation[i] <= a.fitted_c * a.eps[i] * (1.0 + 1e-12));
  CHECK(a.fitted_c > 0.0);
  CHECK_THROWS_AS(eigen_bound_sweep(mu, dir, {0.01}, 0), InvalidArgument);
}

TEST_CASE("isometry and coincidence defects") {
  const auto g = ComplexGrid::torus(make_lattice({0.2, 1.0}), 16);
  CHECK(isometry_defect(preset_coefficient("constant:0.2,0.1", g), 12) < 1e-9);
  CHECK(diagonal_coincidence_defect(preset_coefficient("fourier:1,1,0.05", g)) <= 1e-12);
}

TEST_CASE("contour independence defect") {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4, 4);
  A(1, 1) = cplx(1.0, 2.0);
  A(2, 2) = cplx(-3.0, 0.5);
  A(3, 3) = cplx(0.2, -1.0);
  SpectralOptions o;
  o.rho = 0.1;
  CHECK(contour_independence_defect(eigen_spectrum(A, o), 3) < 1e-13);
}

TEST_CASE("reflection identity on a window") {
  const auto g = ComplexGrid::window(make_window(-1.0, 1.0, 0.5, 1.5, 0.25), 16);
  const auto mu = preset_coefficient("bump:0,1,0.6,0.3,0.1", g);
  const auto nu = preset_coefficient("bump:0.1,0.9,0.5,-0.2,0.25", g);
  CHECK(reflection_defect(mu, nu) < 1e-9);
  CHECK_THROWS_AS(reflection_defect(preset_coefficient("constant:0.1", ComplexGrid::torus(make_lattice(I), 8)),
                                    preset_coefficient("constant:0.1", ComplexGrid::torus(make_lattice(I), 8))),
                  InvalidArgument);
}

TEST_CASE("potential examples all pass") {
  for (const auto& e : potential_examples()) {
    INFO(e.example << " defect " << e.defect);
    CHECK(e.pass);
  }
  CHECK(std::string(criterion_name(9)) == "potential construction");
  CHECK_THROWS_AS(criterion_name(12), InvalidArgument);
}
