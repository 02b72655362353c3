#include "quasilap/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "quasilap/fft.hpp"

namespace quasilap {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

LatticeSpec make_lattice(cplx z) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidArgument("lattice modulus must satisfy Im z > 0");
  return LatticeSpec{z};
}

CompactWindow make_window(double x_min, double x_max, double y_min, double y_max, double margin) {
  if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidArgument("window: empty rectangle");
  if (!(margin > 0.0)) throw InvalidArgument("window: margin must be positive");
  if (!(y_min - margin > 0.0)) throw InvalidArgument("window: neighbourhood must stay inside the upper half-plane");
  return CompactWindow{x_min, x_max, y_min, y_max, margin};
}

ComplexGrid ComplexGrid::torus(const LatticeSpec& lattice, int n) {
  make_lattice(lattice.modulus);
  if (n < 4) throw InvalidArgument("grid resolution must be >= 4");
  ComplexGrid g;
  g.kind_ = GridKind::Torus;
  g.n_ = n;
  g.lattice_ = lattice;
  return g;
}

ComplexGrid ComplexGrid::window(const CompactWindow& w, int n) {
  make_window(w.x_min, w.x_max, w.y_min, w.y_max, w.margin);
  if (n < 5) throw InvalidArgument("window grid resolution must be >= 5 for the finite-difference stencils");
  ComplexGrid g;
  g.kind_ = GridKind::Window;
  g.n_ = n;
  g.window_ = w;
  return g;
}

ComplexGrid ComplexGrid::plane(const PlaneBox& box, int n) {
  if (!(box.side > 0.0)) throw InvalidArgument("plane box side must be positive");
  if (n < 4) throw InvalidArgument("grid resolution must be >= 4");
  ComplexGrid g;
  g.kind_ = GridKind::Plane;
  g.n_ = n;
  g.box_ = box;
  return g;
}

cplx ComplexGrid::point(int row, int col) const {
  switch (kind_) {
    case GridKind::Torus:
      return (static_cast<double>(col) + static_cast<double>(row) * lattice_.modulus) / static_cast<double>(n_);
    case GridKind::Window:
      return {window_.x_min + (col + 1) * hx(), window_.y_min + (row + 1) * hy()};
    case GridKind::Plane:
      return {box_.x0 + col * hx(), box_.y0 + row * hy()};
  }
  return {};
}

std::vector<cplx> ComplexGrid::points() const {
  std::vector<cplx> out(size());
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < n_; ++c) out[index(r, c)] = point(r, c);
  return out;
}

const LatticeSpec& ComplexGrid::lattice() const {
  if (kind_ != GridKind::Torus) throw InvalidArgument("grid is not a torus grid");
  return lattice_;
}

const CompactWindow& ComplexGrid::window_spec() const {
  if (kind_ != GridKind::Window) throw InvalidArgument("grid is not a window grid");
  return window_;
}

const PlaneBox& ComplexGrid::box() const {
  if (kind_ != GridKind::Plane) throw InvalidArgument("grid is not a plane grid");
  return box_;
}

double ComplexGrid::hx() const {
  switch (kind_) {
    case GridKind::Torus: return 1.0 / n_;
    case GridKind::Window: return (window_.x_max - window_.x_min) / (n_ + 1);
    case GridKind::Plane: return box_.side / n_;
  }
  return 0.0;
}

double ComplexGrid::hy() const {
  switch (kind_) {
    case GridKind::Torus: return std::abs(lattice_.modulus) / n_;
    case GridKind::Window: return (window_.y_max - window_.y_min) / (n_ + 1);
    case GridKind::Plane: return box_.side / n_;
  }
  return 0.0;
}

double ComplexGrid::cell_area() const {
  if (kind_ == GridKind::Torus) return lattice_.area() / (static_cast<double>(n_) * n_);
  return hx() * hy();
}

bool ComplexGrid::same_as(const ComplexGrid& o) const {
  if (kind_ != o.kind_ || n_ != o.n_) return false;
  switch (kind_) {
    case GridKind::Torus: return lattice_.modulus == o.lattice_.modulus;
    case GridKind::Window:
      return window_.x_min == o.window_.x_min && window_.x_max == o.window_.x_max &&
             window_.y_min == o.window_.y_min && window_.y_max == o.window_.y_max;
    case GridKind::Plane: return box_.x0 == o.box_.x0 && box_.y0 == o.box_.y0 && box_.side == o.box_.side;
  }
  return false;
}

SampledField::SampledField(ComplexGrid g, std::vector<cplx> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) throw InvalidArgument("field value count does not match the grid");
}

SampledField::SampledField(ComplexGrid g, cplx fill) : grid(std::move(g)), values(grid.size(), fill) {}

SampledField SampledField::from_function(const ComplexGrid& g, const std::function<cplx(cplx)>& f) {
  SampledField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = f(g.point(i));
  return out;
}

double SampledField::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

cplx SampledField::mean() const {
  cplx s = 0.0;
  for (const auto& v : values) s += v;
  return s / static_cast<double>(values.size());
}

bool SampledField::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

SampledField SampledField::conj() const {
  SampledField out = *this;
  for (auto& v : out.values) v = std::conj(v);
  return out;
}

SampledField SampledField::map(const std::function<cplx(cplx)>& f) const {
  SampledField out = *this;
  for (auto& v : out.values) v = f(v);
  return out;
}

namespace {
void require_same(const SampledField& a, const SampledField& b) {
  if (!a.grid.same_as(b.grid)) throw InvalidArgument("fields live on different grids");
}
}  // namespace

SampledField& SampledField::operator+=(const SampledField& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}
SampledField& SampledField::operator-=(const SampledField& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}
SampledField& SampledField::operator*=(const SampledField& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] *= o.values[i];
  return *this;
}
SampledField& SampledField::operator*=(cplx s) {
  for (auto& v : values) v *= s;
  return *this;
}

SampledField operator+(SampledField a, const SampledField& b) { return a += b; }
SampledField operator-(SampledField a, const SampledField& b) { return a -= b; }
SampledField operator*(SampledField a, const SampledField& b) { return a *= b; }
SampledField operator*(SampledField a, cplx s) { return a *= s; }
SampledField operator*(cplx s, SampledField a) { return a *= s; }
SampledField operator/(const SampledField& a, const SampledField& b) {
  require_same(a, b);
  SampledField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] /= b.values[i];
  return out;
}

double sup_distance(const SampledField& a, const SampledField& b) {
  require_same(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

WaveNumbers wave_numbers(const ComplexGrid& g, int row, int col) {
  const int n = g.n();
  const int fm = signed_frequency(col, n);
  const int fn = signed_frequency(row, n);
  WaveNumbers k;
  k.nyquist = is_nyquist(fm, n) || is_nyquist(fn, n);
  if (g.kind() == GridKind::Torus) {
    const cplx z = g.lattice().modulus;
    k.kx = 2.0 * kPi * fm;
    k.ky = 2.0 * kPi * (fn - fm * z.real()) / z.imag();
  } else if (g.kind() == GridKind::Plane) {
    k.kx = 2.0 * kPi * fm / g.box().side;
    k.ky = 2.0 * kPi * fn / g.box().side;
  } else {
    throw InvalidArgument("window grids are not periodic; use finite differences");
  }
  k.d = 0.5 * cplx(k.ky, k.kx);
  k.dbar = 0.5 * cplx(-k.ky, k.kx);
  return k;
}

namespace {

std::vector<cplx> forward_coefficients(const SampledField& f) {
  std::vector<cplx> c = f.values;
  fft_plan(f.grid.n(), f.grid.n()).forward(c);
  return c;
}

SampledField apply_symbol(const SampledField& f, const std::vector<cplx>& spectrum,
                          const std::function<cplx(const WaveNumbers&)>& symbol) {
  const int n = f.grid.n();
  std::vector<cplx> c(spectrum.size());
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col) {
      const auto k = wave_numbers(f.grid, r, col);
      const std::size_t i = f.grid.index(r, col);
      c[i] = k.nyquist ? cplx(0.0) : symbol(k) * spectrum[i];
    }
  fft_plan(n, n).inverse(c);
  return SampledField(f.grid, std::move(c));
}

}  // namespace

SampledField spectral_derivative(const SampledField& f, Deriv which) {
  if (f.grid.kind() == GridKind::Window)
    throw InvalidArgument("spectral_derivative needs a periodic grid; use finite_difference_derivative on windows");
  const auto spec = forward_coefficients(f);
  if (which == Deriv::D) return apply_symbol(f, spec, [](const WaveNumbers& k) { return k.d; });
  return apply_symbol(f, spec, [](const WaveNumbers& k) { return k.dbar; });
}

DerivativeSet spectral_derivatives(const SampledField& f) {
  if (f.grid.kind() == GridKind::Window)
    throw InvalidArgument("spectral_derivatives needs a periodic grid");
  const auto spec = forward_coefficients(f);
  return DerivativeSet{
      apply_symbol(f, spec, [](const WaveNumbers& k) { return k.d; }),
      apply_symbol(f, spec, [](const WaveNumbers& k) { return k.dbar; }),
      apply_symbol(f, spec, [](const WaveNumbers& k) { return k.d * k.d; }),
      apply_symbol(f, spec, [](const WaveNumbers& k) { return k.d * k.dbar; }),
      apply_symbol(f, spec, [](const WaveNumbers& k) { return k.dbar * k.dbar; }),
  };
}

namespace {

// Fourth-order first derivative along one grid line of n samples with spacing h.
void fd4_line(const cplx* in, std::size_t stride, int n, double h, cplx* out, std::size_t ostride) {
  auto f = [&](int i) { return in[static_cast<std::size_t>(i) * stride]; };
  const double s = 1.0 / (12.0 * h);
  for (int i = 0; i < n; ++i) {
    cplx v;
    if (i >= 2 && i <= n - 3) {
      v = (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) * s;
    } else if (i == 0) {
      v = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) * s;
    } else if (i == 1) {
      v = (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) * s;
    } else if (i == n - 2) {
      v = -(-3.0 * f(n - 1) - 10.0 * f(n - 2) + 18.0 * f(n - 3) - 6.0 * f(n - 4) + f(n - 5)) * s;
    } else {
      v = -(-25.0 * f(n - 1) + 48.0 * f(n - 2) - 36.0 * f(n - 3) + 16.0 * f(n - 4) - 3.0 * f(n - 5)) * s;
    }
    out[static_cast<std::size_t>(i) * ostride] = v;
  }
}

SampledField fd_x(const SampledField& f) {
  const int n = f.grid.n();
  SampledField out(f.grid);
  for (int r = 0; r < n; ++r)
    fd4_line(&f.values[f.grid.index(r, 0)], 1, n, f.grid.hx(), &out.values[f.grid.index(r, 0)], 1);
  return out;
}

SampledField fd_y(const SampledField& f) {
  const int n = f.grid.n();
  SampledField out(f.grid);
  for (int c = 0; c < n; ++c) fd4_line(&f.values[c], n, n, f.grid.hy(), &out.values[c], n);
  return out;
}

}  // namespace

SampledField finite_difference_derivative(const SampledField& f, Deriv which) {
  if (f.grid.kind() == GridKind::Torus)
    throw InvalidArgument("finite_difference_derivative is for window and plane grids");
  const auto fx = fd_x(f);
  const auto fy = fd_y(f);
  const cplx sgn = which == Deriv::D ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
  SampledField out(f.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = 0.5 * (fx.values[i] + sgn * fy.values[i]);
  return out;
}

DerivativeSet finite_difference_derivatives(const SampledField& f) {
  if (f.grid.kind() == GridKind::Torus)
    throw InvalidArgument("finite_difference_derivatives is for window and plane grids");
  const auto fx = fd_x(f);
  const auto fy = fd_y(f);
  const auto fxx = fd_x(fx);
  const auto fxy = fd_y(fx);
  const auto fyy = fd_y(fy);
  DerivativeSet d{SampledField(f.grid), SampledField(f.grid), SampledField(f.grid), SampledField(f.grid),
                  SampledField(f.grid)};
  for (std::size_t i = 0; i < f.size(); ++i) {
    d.d.values[i] = 0.5 * (fx.values[i] - I * fy.values[i]);
    d.dbar.values[i] = 0.5 * (fx.values[i] + I * fy.values[i]);
    d.dd.values[i] = 0.25 * (fxx.values[i] - 2.0 * I * fxy.values[i] - fyy.values[i]);
    d.ddbar.values[i] = 0.25 * (fxx.values[i] + fyy.values[i]);
    d.dbardbar.values[i] = 0.25 * (fxx.values[i] + 2.0 * I * fxy.values[i] - fyy.values[i]);
  }
  return d;
}

SampledField derivative(const SampledField& f, Deriv which) {
  return f.grid.kind() == GridKind::Window ? finite_difference_derivative(f, which) : spectral_derivative(f, which);
}

DerivativeSet derivatives(const SampledField& f) {
  return f.grid.kind() == GridKind::Window ? finite_difference_derivatives(f) : spectral_derivatives(f);
}

PeriodicInterpolant::PeriodicInterpolant(const SampledField& f) : grid_(f.grid) {
  if (grid_.kind() == GridKind::Window) throw InvalidArgument("interpolation needs a periodic grid");
  coeffs_ = f.values;
  fft_plan(grid_.n(), grid_.n()).forward(coeffs_);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (auto& c : coeffs_) c *= scale;
}

std::pair<double, double> PeriodicInterpolant::periods_of(cplx p) const {
  if (grid_.kind() == GridKind::Torus) {
    const cplx z = grid_.lattice().modulus;
    const double t = p.imag() / z.imag();
    return {p.real() - t * z.real(), t};
  }
  const auto& b = grid_.box();
  return {(p.real() - b.x0) / b.side, (p.imag() - b.y0) / b.side};
}

namespace {
void basis_row(int n, double s, std::vector<cplx>& e) {
  e.resize(n);
  for (int k = 0; k < n; ++k) {
    const int f = signed_frequency(k, n);
    if (is_nyquist(f, n)) {
      e[k] = std::cos(kPi * n * s);
    } else {
      const double a = 2.0 * kPi * f * s;
      e[k] = {std::cos(a), std::sin(a)};
    }
  }
}
}  // namespace

cplx PeriodicInterpolant::operator()(cplx p) const {
  const auto [s, t] = periods_of(p);
  const int n = grid_.n();
  std::vector<cplx> es, et;
  basis_row(n, s, es);
  basis_row(n, t, et);
  cplx total = 0.0;
  for (int r = 0; r < n; ++r) {
    cplx row = 0.0;
    const cplx* c = &coeffs_[static_cast<std::size_t>(r) * n];
    for (int col = 0; col < n; ++col) row += c[col] * es[col];
    total += et[r] * row;
  }
  return total;
}

std::vector<cplx> PeriodicInterpolant::evaluate(const std::vector<cplx>& pts) const {
  std::vector<cplx> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = (*this)(pts[i]);
  return out;
}

SampledField PeriodicInterpolant::evaluate_on(const ComplexGrid& out) const {
  const bool separable = grid_.kind() == GridKind::Plane && out.kind() != GridKind::Torus;
  if (!separable) return SampledField(out, evaluate(out.points()));
  const int n = grid_.n();
  const int m = out.n();
  // rows[r][k] = sum_col coeffs[k][col] * e_col(s_c) for every output column c, then combine with e_k(t_r).
  std::vector<std::vector<cplx>> ex(m), ey(m);
  for (int c = 0; c < m; ++c) basis_row(n, periods_of(out.point(0, c)).first, ex[c]);
  for (int r = 0; r < m; ++r) basis_row(n, periods_of(out.point(r, 0)).second, ey[r]);
  std::vector<cplx> partial(static_cast<std::size_t>(n) * m);
  for (int k = 0; k < n; ++k) {
    const cplx* ck = &coeffs_[static_cast<std::size_t>(k) * n];
    for (int c = 0; c < m; ++c) {
      cplx acc = 0.0;
      for (int col = 0; col < n; ++col) acc += ck[col] * ex[c][col];
      partial[static_cast<std::size_t>(k) * m + c] = acc;
    }
  }
  SampledField res(out);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      cplx acc = 0.0;
      for (int k = 0; k < n; ++k) acc += ey[r][k] * partial[static_cast<std::size_t>(k) * m + c];
      res.values[out.index(r, c)] = acc;
    }
  return res;
}

cplx torus_interpolate(const SampledField& f, cplx p) { return PeriodicInterpolant(f)(p); }

namespace {
void check_step(double h) {
  if (!(h > 0.0)) throw InvalidArgument("cr_residual: step h must be positive");
}
}  // namespace

double cr_residual(const std::function<cplx(cplx)>& F, cplx s0, double h) {
  check_step(h);
  const cplx dx = (F(s0 + h) - F(s0 - h)) / (2.0 * h);
  const cplx dy = (F(s0 + I * h) - F(s0 - I * h)) / (2.0 * h);
  return 0.5 * std::abs(dx + I * dy);
}

double anti_cr_residual(const std::function<cplx(cplx)>& F, cplx s0, double h) {
  check_step(h);
  const cplx dx = (F(s0 + h) - F(s0 - h)) / (2.0 * h);
  const cplx dy = (F(s0 + I * h) - F(s0 - I * h)) / (2.0 * h);
  return 0.5 * std::abs(dx - I * dy);
}

namespace {
double vector_residual(const std::function<std::vector<cplx>(cplx)>& F, cplx s0, double h, double sign) {
  check_step(h);
  const auto xp = F(s0 + h), xm = F(s0 - h), yp = F(s0 + I * h), ym = F(s0 - I * h);
  if (xp.size() != xm.size() || xp.size() != yp.size() || xp.size() != ym.size())
    throw InvalidArgument("cr_residual_max: map changed its output size across the stencil");
  double m = 0.0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const cplx dx = (xp[i] - xm[i]) / (2.0 * h);
    const cplx dy = (yp[i] - ym[i]) / (2.0 * h);
    m = std::max(m, 0.5 * std::abs(dx + sign * I * dy));
  }
  return m;
}
}  // namespace

double cr_residual_max(const std::function<std::vector<cplx>(cplx)>& F, cplx s0, double h) {
  return vector_residual(F, s0, h, 1.0);
}

double anti_cr_residual_max(const std::function<std::vector<cplx>(cplx)>& F, cplx s0, double h) {
  return vector_residual(F, s0, h, -1.0);
}

namespace {
template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("container: truncated input");
  return v;
}
}  // namespace

void write_container(std::ostream& os, const SampledField& f) {
  os.write("QLAP", 4);
  put<std::uint32_t>(os, kContainerVersion);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(f.grid.kind()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.n()));
  const cplx z = f.grid.kind() == GridKind::Torus ? f.grid.lattice().modulus : cplx(0.0);
  put<double>(os, z.real());
  put<double>(os, z.imag());
  if (f.grid.kind() == GridKind::Window) {
    const auto& w = f.grid.window_spec();
    for (double v : {w.x_min, w.x_max, w.y_min, w.y_max, w.margin}) put<double>(os, v);
  } else if (f.grid.kind() == GridKind::Plane) {
    const auto& b = f.grid.box();
    for (double v : {b.x0, b.y0, b.side}) put<double>(os, v);
  }
  for (const auto& v : f.values) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

SampledField read_container(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QLAP", 4) != 0) throw InvalidArgument("container: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kContainerVersion) throw InvalidArgument("container: unsupported version");
  const auto kind = get<std::uint8_t>(is);
  const auto n = static_cast<int>(get<std::uint32_t>(is));
  const double zr = get<double>(is);
  const double zi = get<double>(is);
  ComplexGrid grid = ComplexGrid::torus(LatticeSpec{cplx(0.0, 1.0)}, 4);
  switch (static_cast<GridKind>(kind)) {
    case GridKind::Torus: grid = ComplexGrid::torus(make_lattice({zr, zi}), n); break;
    case GridKind::Window: {
      double v[5];
      for (double& x : v) x = get<double>(is);
      grid = ComplexGrid::window(make_window(v[0], v[1], v[2], v[3], v[4]), n);
      break;
    }
    case GridKind::Plane: {
      PlaneBox b{get<double>(is), get<double>(is), get<double>(is)};
      grid = ComplexGrid::plane(b, n);
      break;
    }
    default: throw InvalidArgument("container: unknown grid kind");
  }
  std::vector<cplx> values(grid.size());
  for (auto& v : values) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    v = {re, im};
  }
  SampledField f(grid, std::move(values));
  if (!f.all_finite()) throw InvalidArgument("container: non-finite values");
  return f;
}

void save_container(const std::string& path, const SampledField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  write_container(os, f);
}

SampledField load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  return read_container(is);
}

void write_csv(std::ostream& os, const SampledField& f) {
  os << "re_p,im_p,re_v,im_v\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const cplx p = f.grid.point(i);
    os << p.real() << ',' << p.imag() << ',' << f.values[i].real() << ',' << f.values[i].imag() << '\n';
  }
}

}  // namespace quasilap
