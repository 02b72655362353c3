#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <string>
#include <vector>

#include "quasilap/errors.hpp"

namespace quasilap {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Lattice Z + zZ with modulus z in the upper half-plane.
struct LatticeSpec {
  cplx modulus;

  double area() const { return modulus.imag(); }
};

LatticeSpec make_lattice(cplx z);

/// Rectangle S = [x_min,x_max] x [y_min,y_max] in the upper half-plane and its
/// enlarged neighbourhood Q obtained by growing every side by `margin`.
struct CompactWindow {
  double x_min = -0.5;
  double x_max = 0.5;
  double y_min = 0.5;
  double y_max = 1.5;
  double margin = 0.1;

  bool contains(cplx p) const {
    return p.real() >= x_min && p.real() <= x_max && p.imag() >= y_min && p.imag() <= y_max;
  }
  bool in_neighbourhood(cplx p) const {
    return p.real() >= x_min - margin && p.real() <= x_max + margin &&
           p.imag() >= y_min - margin && p.imag() <= y_max + margin;
  }
};

CompactWindow make_window(double x_min, double x_max, double y_min, double y_max, double margin);

/// Square periodic box [x0, x0 + side) x [y0, y0 + side) used by the plane solvers.
struct PlaneBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 1.0;
};

enum class GridKind : std::uint8_t { Torus = 0, Window = 1, Plane = 2 };

/// Sample points on a torus, a half-plane window or a periodic plane box.
///
/// Storage is row-major: index = row * N + col.
///  - torus:  p = (col + row * z) / N, lattice coordinates s = col/N, t = row/N
///  - window: p = (x_min + (col+1) hx) + i (y_min + (row+1) hy), hx = width/(N+1)
///  - plane:  p = (x0 + col h) + i (y0 + row h), h = side/N
class ComplexGrid {
 public:
  static ComplexGrid torus(const LatticeSpec& lattice, int n);
  static ComplexGrid window(const CompactWindow& window, int n);
  static ComplexGrid plane(const PlaneBox& box, int n);

  GridKind kind() const { return kind_; }
  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * n_ + col; }

  cplx point(int row, int col) const;
  cplx point(std::size_t idx) const { return point(static_cast<int>(idx / n_), static_cast<int>(idx % n_)); }
  std::vector<cplx> points() const;

  const LatticeSpec& lattice() const;
  const CompactWindow& window_spec() const;
  const PlaneBox& box() const;

  /// Spacing along rows/columns in the flat metric (for the torus: |1|/N and |z|/N).
  double hx() const;
  double hy() const;
  /// Area of one sample cell, so that sum(values) * cell_area() integrates.
  double cell_area() const;

  bool same_as(const ComplexGrid& other) const;

 private:
  GridKind kind_ = GridKind::Torus;
  int n_ = 0;
  LatticeSpec lattice_{cplx{0.0, 1.0}};
  CompactWindow window_{};
  PlaneBox box_{};
};

/// Complex samples on a grid.
struct SampledField {
  ComplexGrid grid;
  std::vector<cplx> values;

  SampledField() : grid(ComplexGrid::torus(LatticeSpec{cplx{0.0, 1.0}}, 4)) {}
  SampledField(ComplexGrid g, std::vector<cplx> v);
  explicit SampledField(ComplexGrid g, cplx fill = 0.0);

  static SampledField from_function(const ComplexGrid& g, const std::function<cplx(cplx)>& f);

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  double sup_norm() const;
  cplx mean() const;
  bool all_finite() const;
  SampledField conj() const;
  SampledField map(const std::function<cplx(cplx)>& f) const;

  SampledField& operator+=(const SampledField& o);
  SampledField& operator-=(const SampledField& o);
  SampledField& operator*=(const SampledField& o);
  SampledField& operator*=(cplx s);
};

SampledField operator+(SampledField a, const SampledField& b);
SampledField operator-(SampledField a, const SampledField& b);
SampledField operator*(SampledField a, const SampledField& b);
SampledField operator*(SampledField a, cplx s);
SampledField operator*(cplx s, SampledField a);
SampledField operator/(const SampledField& a, const SampledField& b);

double sup_distance(const SampledField& a, const SampledField& b);

enum class Deriv { D, Dbar };

/// Fourier-collocation derivative on a torus grid. Nyquist modes are dropped.
SampledField spectral_derivative(const SampledField& f, Deriv which);

/// All first and second Cauchy-Riemann derivatives from a single forward transform.
struct DerivativeSet {
  SampledField d, dbar, dd, ddbar, dbardbar;
};
DerivativeSet spectral_derivatives(const SampledField& f);

/// Fourth-order finite differences with one-sided closure; window and plane grids.
SampledField finite_difference_derivative(const SampledField& f, Deriv which);
DerivativeSet finite_difference_derivatives(const SampledField& f);

/// Dispatches to spectral (torus) or finite-difference (window, plane) derivatives.
SampledField derivative(const SampledField& f, Deriv which);
DerivativeSet derivatives(const SampledField& f);

/// Angular wave numbers of DFT index (row, col) on a torus or plane grid, and the
/// Fourier symbols of d and dbar acting on exp(i(kx x + ky y)).
struct WaveNumbers {
  double kx = 0.0;
  double ky = 0.0;
  cplx d;
  cplx dbar;
  bool nyquist = false;
};
WaveNumbers wave_numbers(const ComplexGrid& g, int row, int col);

/// Trigonometric interpolant of a periodic (torus or plane) field. Even-grid
/// Nyquist modes enter as cosines so the interpolant reproduces the samples.
class PeriodicInterpolant {
 public:
  explicit PeriodicInterpolant(const SampledField& f);
  cplx operator()(cplx p) const;
  std::vector<cplx> evaluate(const std::vector<cplx>& pts) const;
  /// Values at every point of `out`. Axis-aligned outputs of a plane interpolant are
  /// evaluated as a separable tensor product.
  SampledField evaluate_on(const ComplexGrid& out) const;
  const ComplexGrid& grid() const { return grid_; }

 private:
  std::pair<double, double> periods_of(cplx p) const;
  ComplexGrid grid_;
  std::vector<cplx> coeffs_;
};

/// Trigonometric interpolant of a torus field evaluated at one point.
cplx torus_interpolate(const SampledField& f, cplx p);

/// Half of the central-difference stencil
///   |(F(s0+h)-F(s0-h))/2h + i (F(s0+ih)-F(s0-ih))/2h|,
/// i.e. an estimate of |dbar_s F| at s0.
double cr_residual(const std::function<cplx(cplx)>& F, cplx s0, double h);
/// Same estimate of |d_s F|; vanishes when F is anti-holomorphic.
double anti_cr_residual(const std::function<cplx(cplx)>& F, cplx s0, double h);
/// Max of cr_residual over the entries of a vector-valued map.
double cr_residual_max(const std::function<std::vector<cplx>(cplx)>& F, cplx s0, double h);
double anti_cr_residual_max(const std::function<std::vector<cplx>(cplx)>& F, cplx s0, double h);

// Binary container: "QLAP", version u32, kind u8, N u32, modulus re/im f64,
// then for window/plane grids the geometry as f64s, then row-major (re, im) f64 pairs.
inline constexpr std::uint32_t kContainerVersion = 1;
void write_container(std::ostream& os, const SampledField& f);
SampledField read_container(std::istream& is);
void save_container(const std::string& path, const SampledField& f);
SampledField load_container(const std::string& path);
void write_csv(std::ostream& os, const SampledField& f);

}  // namespace quasilap
