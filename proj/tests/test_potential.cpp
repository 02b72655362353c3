#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "quasilap/oracles.hpp"
#include "quasilap/potential.hpp"

using namespace quasilap;

namespace {

const Rect kUpper{-0.8, 0.8, 0.4, 2.0};
const Rect kLower = kUpper.conj();

ClosedTwoForm wp_form() { return make_closed_two_form(wp_extension_density, kUpper, kLower); }

// Omega = sum c_ab z^a w^b with a, b <= 3, and its cone potential in closed form.
struct Poly {
  std::array<std::array<cplx, 4>, 4> c{};
  cplx omega(cplx z, cplx w) const {
    cplx s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += c[a][b] * std::pow(z, a) * std::pow(w, b);
    return s;
  }
  cplx potential(const ConeChart& ch, cplx z, cplx w) const {
    cplx s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        s += c[a][b] * (std::pow(z, a + 1) - std::pow(ch.z0, a + 1)) / double(a + 1) *
             (std::pow(w, b + 1) - std::pow(ch.w0, b + 1)) / double(b + 1);
    return s;
  }
};

Poly random_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Poly p;
  for (auto& row : p.c)
    for (auto& v : row) v = cplx(U(rng), U(rng));
  return p;
}

}  // namespace

TEST_CASE("closed two-forms") {
  const Rect box{-1.0, 1.0, -1.0, 1.0};
  CHECK(make_closed_two_form([](cplx, cplx) { return cplx(0.0); }, box, box).closedness_certificate == 0.0);
  CHECK(wp_form().closedness_certificate < 1e-6);
  CHECK_THROWS_AS(make_closed_two_form([](cplx z, cplx w) { return std::conj(z) * w; }, box, box), InvalidArgument);
  CHECK_THROWS_AS(validate_chart(wp_form(), {cplx(0.0, 3.0), cplx(0.0, -1.0)}), InvalidArgument);
}

TEST_CASE("cone potential of trivial and constant forms") {
  const Rect box{-1.0, 1.0, -1.0, 1.0};
  const ConeChart ch{cplx(0.1, 0.2), cplx(-0.3, 0.1)};
  const auto zero = make_closed_two_form([](cplx, cplx) { return cplx(0.0); }, box, box);
  CHECK(cone_potential(zero, ch, cplx(0.5, 0.5), cplx(-0.2, -0.7)) == cplx(0.0));

  const auto one = make_closed_two_form([](cplx, cplx) { return cplx(1.0); }, box, box);
  const cplx z(0.7, -0.4), w(-0.6, 0.9);
  CHECK(std::abs(cone_potential(one, ch, z, w) - (z - ch.z0) * (w - ch.w0)) < 1e-14);
  CHECK(cone_potential(one, ch, ch.z0, w) == cplx(0.0));
  CHECK(cone_potential(one, ch, z, ch.w0) == cplx(0.0));
  CHECK(mixed_hessian_check(one, ch, z * 0.5, w * 0.5, 1e-3) < 1e-10);
  CHECK_THROWS_AS(cone_potential(one, ch, cplx(2.0, 0.0), w), InvalidArgument);
}

TEST_CASE("cone potential of (z - w)^-2") {
  const auto f = wp_form();
  const ConeChart ch{cplx(0.0, 1.0), cplx(0.0, -1.0)};
  double worst = 0.0;
  for (cplx z : {cplx(0.0, 1.0), cplx(0.3, 1.5), cplx(-0.7, 0.5), cplx(0.75, 1.9)})
    for (cplx w : {cplx(0.0, -1.2), cplx(0.4, -0.6), cplx(-0.5, -1.8)})
      worst = std::max(worst, std::abs(cone_potential(f, ch, z, w) - log_potential_closed_form(ch, z, w)));
  MESSAGE("closed-form defect " << worst);
  CHECK(worst <= 1e-10);
  const double mh = mixed_hessian_check(f, ch, cplx(0.0, 1.0), cplx(0.0, -1.2), 1e-3);
  MESSAGE("mixed Hessian defect " << mh);
  CHECK(mh <= 1e-6);
}

TEST_CASE("polynomial oracle suite") {
  std::mt19937_64 rng(11);
  const Rect box{-1.0, 1.0, -1.0, 1.0};
  const ConeChart ch{cplx(0.2, -0.1), cplx(-0.1, 0.3)};
  double worst_q = 0.0, worst_h = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Poly p = random_poly(rng);
    const auto f = make_closed_two_form([p](cplx z, cplx w) { return p.omega(z, w); }, box, box);
    for (cplx z : {cplx(0.6, 0.3), cplx(-0.5, -0.5)})
      for (cplx w : {cplx(0.1, -0.8), cplx(0.7, 0.4)}) {
        worst_q = std::max(worst_q, std::abs(cone_potential(f, ch, z, w) - p.potential(ch, z, w)));
        worst_h = std::max(worst_h, mixed_hessian_check(f, ch, z, w, 1e-3));
      }
  }
  MESSAGE("polynomial potential defect " << worst_q << ", mixed Hessian defect " << worst_h);
  CHECK(worst_q <= 1e-12);
  CHECK(worst_h <= 1e-8);
}

TEST_CASE("chart independence and Stokes") {
  const auto f = wp_form();
  const ConeChart a{cplx(0.0, 1.0), cplx(0.0, -1.0)};
  const ConeChart b{cplx(0.4, 1.4), cplx(-0.3, -0.8)};
  const cplx z(0.2, 1.1), w(-0.1, -1.3);
  // the potentials differ, but only by a(z) + b(w)
  CHECK(std::abs(cone_potential(f, a, z, w) - cone_potential(f, b, z, w)) > 1e-3);
  CHECK(chart_independence_defect(f, a, b, z, w, 1e-3) < 1e-6);

  const cplx radial = cone_potential(f, a, z, w);
  const cplx bent = path_potential(f, bent_path(a.z0, z, 0.1), bent_path(a.w0, w, -0.15));
  CHECK(std::abs(radial - bent) < 1e-11);
  const auto r = radial_path(1.0, 3.0);
  CHECK(r.point(0.5) == cplx(2.0));
  const auto s = bent_path(0.0, 1.0, 0.2);
  CHECK(std::abs(s.point(0.5) - cplx(0.5, 0.2)) < 1e-15);
  CHECK(std::abs(s.point(1.0) - 1.0) < 1e-15);
}

TEST_CASE("quadrature failure is reported") {
  const Rect box{-1.0, 1.0, -1.0, 1.0};
  const auto f = make_closed_two_form([](cplx z, cplx w) { return std::exp(40.0 * z * w); }, box, box, 1e-4);
  QuadratureOptions tight;
  tight.max_depth = 1;
  tight.max_error = 1e-14;
  CHECK_THROWS_AS(cone_potential(f, {cplx(0.0, 0.0), cplx(0.0, 0.0)}, cplx(0.9, 0.9), cplx(0.9, -0.9), tight),
                  ConvergenceError);
}

TEST_CASE("genus-1 Weil-Petersson density") {
  CHECK(std::abs(wp_genus1(I) - cplx(0.0, 0.25)) < 1e-16);
  CHECK_THROWS_AS(wp_genus1(cplx(0.3, 0.0)), InvalidArgument);
  for (cplx z : {cplx(0.0, 1.0), cplx(0.4, 0.7), cplx(-1.2, 2.5)})
    CHECK(std::abs(wp_extension_density(z, std::conj(z)) - I * wp_genus1(z)) < 1e-15);
  CHECK(kahler_potential_check(cplx(0.3, 1.0), 1e-3) < 1e-6);
}

TEST_CASE("symmetrized potential") {
  const auto f = wp_form();
  const ConeChart ch{cplx(0.0, 1.0), cplx(0.0, -1.0)};
  const auto q = [&](cplx z, cplx w) { return cone_potential(f, ch, z, w); };
  double worst = 0.0;
  for (double x : {-0.6, -0.2, 0.3, 0.7})
    for (double y : {0.5, 1.0, 1.7}) worst = std::max(worst, std::abs(tilde_q(q, f, cplx(x, y), cplx(x, -y)).imag()));
  CHECK(worst <= 1e-12);

  const Rect box{-1.0, 1.0, -1.0, 1.0};
  const auto one = make_closed_two_form([](cplx, cplx) { return cplx(1.0); }, box, box);
  const ConeChart sym{cplx(0.2, 0.3), cplx(0.2, -0.3)};
  const cplx z(0.5, 0.6);
  const cplx expect = (z - sym.z0) * (std::conj(z) - sym.w0);  // |z - z0|^2, real
  const auto qc = [&](cplx a, cplx b) { return cone_potential(one, sym, a, b); };
  CHECK(std::abs(tilde_q(qc, one, z, std::conj(z)) - expect) < 1e-14);
  CHECK(std::abs(expect.imag()) < 1e-15);

  // d dbar of the diagonal restriction is i times the Weil-Petersson density
  const auto qt = [&](cplx a, cplx b) { return tilde_q(q, f, a, b); };
  const cplx z1(0.1, 1.2);
  CHECK(std::abs(diagonal_ddbar(qt, z1, 1e-3) - I * wp_genus1(z1)) < 1e-5);

  CHECK_THROWS_AS(tilde_q(q, f, cplx(0.0, 1.0), cplx(0.0, -3.0)), InvalidArgument);
  const Rect skew{0.0, 1.0, 0.5, 1.5};
  const auto g = make_closed_two_form(wp_extension_density, skew, kLower);
  CHECK_THROWS_AS(tilde_q(q, g, cplx(0.5, 1.0), cplx(-0.5, -1.0)), InvalidArgument);
}

TEST_CASE("extension splits as f(z) + g(w)") {
  const auto r = extension_structure_check(I, cplx(0.0, -1.3));
  MESSAGE("mixed " << r.mixed << " split " << r.split_variation << " diagonal " << r.diagonal);
  CHECK(r.mixed <= 1e-7);
  CHECK(r.split_variation <= 1e-10);
  CHECK(r.diagonal <= 1e-12);
  CHECK_THROWS_AS(extension_structure_check(cplx(0.0, 0.5), cplx(0.0, 1.0)), BranchError);
}

TEST_CASE("diagonal determines the extension") {
  const auto u = diagonal_uniqueness_witness(4, 30, 1e-13);
  CHECK(u.unknowns == 15);
  CHECK(u.min_singular > 1e-3);
  CHECK(u.max_coefficient <= 1e-10);
  CHECK_THROWS_AS(diagonal_uniqueness_witness(6, 20, 0.0), InvalidArgument);
}
