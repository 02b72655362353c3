// quasilap: config-driven experiment runner.
//
// Every run writes <out>/<experiment>/manifest.json and results.{json,csv}. Exit codes:
// 0 all checks passed, 1 a check failed or a numerical invariant broke, 2 bad config.

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "quasilap/experiments.hpp"
#include "quasilap/oracles.hpp"

using namespace quasilap;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr const char* kVersion = "0.1.0";
constexpr int kSchema = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// section.key -> default. Keys outside this table are rejected.
const std::map<std::string, std::string>& known_keys() {
  static const std::map<std::string, std::string> keys = {
      {"experiment.name", ""},
      {"experiment.seed", "0"},
      {"grid.modulus", "i"},
      {"grid.N", "32"},
      {"beltrami.mu", "constant:0"},
      {"beltrami.nu", ""},
      {"beltrami.mu1", ""},
      {"beltrami.nu1", ""},
      {"solver.tol", "1e-10"},
      {"solver.max_iterations", "2000"},
      {"sweep.eps", "0.01,0.02,0.04"},
      {"sweep.h", "1e-3"},
      {"sweep.h_variation", "1e-4"},
      {"sweep.theta", "3.141592653589793"},
      {"sweep.rho", "0"},
      {"sweep.directions", "32"},
      {"output.dir", "quasilap-out"},
      {"output.format", "json"},
  };
  return keys;
}

using Settings = std::map<std::string, std::string>;

Settings load_ini(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Settings s;
  bool schema_seen = false;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (name != "schema") throw ConfigError("config: unknown top-level key '" + name + "'");
      if (node.data() != std::to_string(kSchema))
        throw ConfigError("config: unsupported schema " + node.data() + " (expected " + std::to_string(kSchema) + ")");
      schema_seen = true;
      continue;
    }
    for (const auto& [key, value] : node) {
      const std::string full = name + "." + key;
      if (!known_keys().count(full)) throw ConfigError("config: unknown key '" + full + "'");
      s[full] = value.data();
    }
  }
  if (!schema_seen) throw ConfigError("config: missing 'schema = 1'");
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double a = std::stod(t.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(t);
      const std::string rest = t.substr(slash + 1);
      const double b = std::stod(rest, &used);
      if (used != rest.size() || b == 0.0) throw std::invalid_argument(t);
      return a / b;
    }
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse number '" + text + "'");
  }
}

// "0.5,1", "i", "2i", "-0.5+1.2i", "1/3+2i"
cplx parse_complex(const std::string& text, const std::string& key) {
  std::string t;
  for (char c : text)
    if (c != ' ') t += c;
  if (t.empty()) throw ConfigError(key + ": empty complex number");
  if (const auto comma = t.find(','); comma != std::string::npos)
    return {parse_real(t.substr(0, comma), key), parse_real(t.substr(comma + 1), key)};
  std::vector<std::string> terms;
  std::size_t start = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      terms.push_back(t.substr(start, i - start));
      start = i;
    }
  terms.push_back(t.substr(start));
  cplx z = 0.0;
  for (std::string term : terms) {
    if (term.empty()) throw ConfigError(key + ": cannot parse complex number '" + text + "'");
    if (term.back() == 'i') {
      term.pop_back();
      if (term.empty() || term == "+") term += "1";
      if (term == "-") term = "-1";
      z += cplx(0.0, parse_real(term, key));
    } else {
      z += parse_real(term, key);
    }
  }
  return z;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Run {
  std::string command;
  Settings settings;
  fs::path dir;
  std::string format;
  int jobs = 1;
  json results = json::object();
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  json criteria = json::array();
  double seconds = 0.0;
  bool mu_given = false;  // beltrami.mu came from the config or a flag

  const std::string& get(const std::string& key) const { return settings.at(key); }
  double real(const std::string& key) const { return parse_real(get(key), key); }
  int integer(const std::string& key) const {
    const double v = real(key);
    if (v != std::floor(v)) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(v);
  }
  cplx complex(const std::string& key) const { return parse_complex(get(key), key); }
  std::vector<double> reals(const std::string& key) const {
    std::vector<double> v;
    for (const auto& s : split(get(key), ',')) v.push_back(parse_real(s, key));
    return v;
  }

  void criterion(int id, bool pass, double value, double tolerance, const std::string& detail) {
    criteria.push_back(
        {{"id", id}, {"name", criterion_name(id)}, {"pass", pass}, {"value", value}, {"tolerance", tolerance},
         {"detail", detail}});
  }
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

// Grid resolution: even, 8..1024; matrix experiments stay within the 4096-unknown cap.
int grid_size(const Run& r, bool matrix) {
  const int n = r.integer("grid.N");
  if (n < 8 || n > 1024 || n % 2 != 0) throw ConfigError("grid.N: expected an even size in [8, 1024]");
  if (matrix && n > 64) throw ConfigError("grid.N: matrix experiments support N <= 64");
  return n;
}

ComplexGrid torus_grid(const Run& r, bool matrix) {
  const cplx z = r.complex("grid.modulus");
  if (!(z.imag() > 0.0)) throw ConfigError("grid.modulus: Im z must be positive");
  return ComplexGrid::torus(make_lattice(z), grid_size(r, matrix));
}

BeltramiCoefficient coefficient(const Run& r, const std::string& key, const ComplexGrid& g) {
  try {
    return preset_coefficient(r.get(key), g);
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::function<cplx(cplx)> function(const Run& r, const std::string& key, const ComplexGrid& g) {
  try {
    return preset_function(r.get(key), g);
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

SolverOptions solver(const Run& r) {
  SolverOptions o;
  o.tol = r.real("solver.tol");
  o.max_iterations = r.integer("solver.max_iterations");
  if (!(o.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (o.max_iterations < 1) throw ConfigError("solver.max_iterations: must be positive");
  return o;
}

// Unit direction (nu - mu)/sup|nu - mu| on the grid samples.
std::function<cplx(cplx)> unit_direction(const BeltramiCoefficient& mu, const BeltramiCoefficient& nu) {
  const double s = sup_distance(mu.field, nu.field);
  if (!(s > 0.0)) return nullptr;
  auto a = mu.analytic, b = nu.analytic;
  return [a, b, s](cplx p) { return (b(p) - a(p)) / s; };
}

// ---------------------------------------------------------------------------

void torus_det(Run& r) {
  std::vector<cplx> moduli;
  for (const auto& s : split(r.get("grid.modulus"), ';')) moduli.push_back(parse_complex(s, "grid.modulus"));
  for (cplx z : moduli)
    if (!(z.imag() > 0.0)) throw ConfigError("grid.modulus: Im z must be positive");
  const int n = r.integer("grid.N");
  if (n != 0) grid_size(r, true);

  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, spec = 0.0;
  r.csv_header = {"z_re", "z_im", "zeta_logdet", "exact", "rel_delta", "raw", "spectrum_defect"};
  json rows = json::array();
  for (cplx z : moduli) {
    const auto t = torus_det_report(z, n);
    worst = std::max(worst, t.rel_delta);
    spec = std::max(spec, t.spectrum_defect);
    rows.push_back({{"z", cjson(z)},
                    {"zeta_logdet", t.zeta_logdet},
                    {"exact", t.exact},
                    {"rel_delta", t.rel_delta},
                    {"raw_log_det", t.raw},
                    {"spectrum_defect", t.spectrum_defect},
                    {"modes_compared", t.modes_compared}});
    r.csv_rows.push_back({num(z.real()), num(z.imag()), num(t.zeta_logdet), num(t.exact), num(t.rel_delta),
                          num(t.raw), num(t.spectrum_defect)});
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.results["moduli"] = rows;
  r.criterion(1, worst <= 1e-8, worst, 1e-8, "max relative delta against the eta formula");
  if (n == 0) r.criterion(1, r.seconds <= 5.0, r.seconds, 5.0, "wall time in seconds");
  if (n != 0) r.criterion(1, spec <= 1e-10, spec, 1e-10, "discrete flat spectrum, lowest 20 modes");

  double restr = 0.0, cr = 0.0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b) {
      const cplx z(0.1 + 0.8 * a / 9.0, 0.5 + 1.5 * b / 9.0);
      restr = std::max(restr, std::abs(torus_logdet_extension(z, std::conj(z)) - torus_logdet_exact(z)));
    }
  const cplx w0(0.0, -1.1);
  cr = std::max(cr, cr_residual([&](cplx z) { return torus_logdet_extension(z, w0); }, I, 1e-4));
  cr = std::max(cr, anti_cr_residual([&](cplx wb) { return torus_logdet_extension(I, std::conj(wb)); },
                                     std::conj(w0), 1e-4));
  r.results["extension_restriction"] = restr;
  r.results["extension_cr"] = cr;
  r.criterion(2, restr <= 1e-12, restr, 1e-12, "10 x 10 grid, extension at w = conj z");
  r.criterion(2, cr <= 1e-8, cr, 1e-8, "CR residuals in z and conj w, h = 1e-4");

  if (r.mu_given && n != 0) {
    const auto g = ComplexGrid::torus(make_lattice(moduli.front()), n);
    const auto mu = coefficient(r, "beltrami.mu", g);
    if (sup_distance(mu.field, SampledField(g, mu.field.values[0])) != 0.0)
      throw ConfigError("beltrami.mu: isometry check needs a constant preset");
    const double d = isometry_defect(mu, 20, solver(r));
    r.results["isometry_defect"] = d;
    r.criterion(10, d <= 1e-6, d, 1e-6, "lowest 20 modes against the image torus");
  }
}

void beltrami_solve(Run& r) {
  const auto g = torus_grid(r, false);
  const auto mu = coefficient(r, "beltrami.mu", g);
  const auto opt = solver(r);
  const auto w = solve_wmu(mu, opt);
  r.results["residual"] = w.residual;
  r.results["iterations"] = w.iterations;
  r.results["new_modulus"] = cjson(w.new_modulus);
  r.results["min_abs_d"] = w.min_abs_d;
  r.results["k"] = mu.k;
  r.criterion(3, w.residual <= opt.tol, w.residual, opt.tol, "residual certificate for " + r.get("beltrami.mu"));

  const cplx c = mu.field.values[0];
  if (sup_distance(mu.field, SampledField(g, c)) == 0.0) {
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const cplx p = g.point(i);
      err = std::max(err, std::abs(w.map_values.values[i] - (p + c * std::conj(p)) / (1.0 + c)));
    }
    r.results["affine_error"] = err;
    r.criterion(3, err <= 1e-12, err, 1e-12, "affine closed form for a constant coefficient");
  }
  if (g.n() <= 256) {
    const double d = diagonal_coincidence_defect(mu, opt);
    r.results["diagonal_coincidence"] = d;
    r.criterion(4, d <= 1e-8, d, 1e-8, "Delta_{mu,mu} against the pullback Laplacian");
  }
  save_container((r.dir / "map.qlap").string(), w.map_values);
  r.csv_header = {"index", "re", "im"};
  for (std::size_t i = 0; i < g.size(); i += std::max<std::size_t>(1, g.size() / 256))
    r.csv_rows.push_back({std::to_string(i), num(w.map_values.values[i].real()), num(w.map_values.values[i].imag())});
}

void symbol_angle(Run& r) {
  const auto g = torus_grid(r, false);
  const auto opt = solver(r);
  const auto mu = coefficient(r, "beltrami.mu", g);
  if (r.get("beltrami.nu").empty()) throw ConfigError("beltrami.nu: required");
  const auto nu = coefficient(r, "beltrami.nu", g);
  const int dirs = r.integer("sweep.directions");
  if (dirs < 8) throw ConfigError("sweep.directions: at least 8");
  const auto eps = r.reals("sweep.eps");

  const auto rep = symbol_report(make_delta_mn(mu, nu, opt), dirs);
  r.results["max_abs_arg"] = rep.max_abs_arg;
  r.results["per_factor_args"] = json::array(
      {rep.per_factor_args[0], rep.per_factor_args[1], rep.per_factor_args[2], rep.per_factor_args[3]});
  r.results["min_abs_symbol"] = rep.min_abs_symbol;

  const auto dir = unit_direction(mu, nu);
  r.csv_header = {"eps", "max_abs_arg"};
  if (!dir || eps.size() < 2) {
    const double d = symbol_report(make_delta_mn(mu, mu, opt), dirs).max_abs_arg;
    r.results["diagonal_arg"] = d;
    r.criterion(5, d <= 1e-10, d, 1e-10, "diagonal symbol is real positive");
    return;
  }
  const auto s = symbol_angle_sweep(mu, dir, eps, dirs, opt);
  r.results["diagonal_arg"] = s.diagonal_arg;
  r.results["sweep"] = {{"eps", s.eps}, {"args", s.args}, {"slope", s.fit.slope}, {"intercept", s.fit.intercept},
                        {"r2", s.fit.r2}};
  r.csv_rows.push_back({"0", num(s.diagonal_arg)});
  for (std::size_t i = 0; i < eps.size(); ++i) r.csv_rows.push_back({num(eps[i]), num(s.args[i])});
  r.criterion(5, s.diagonal_arg <= 1e-10, s.diagonal_arg, 1e-10, "diagonal symbol is real positive");
  r.criterion(5, s.fit.r2 >= 0.99, s.fit.r2, 0.99, "linear fit of max |arg sigma| in eps (R^2)");
  r.criterion(5, s.max_arg < kPi / 2.0, s.max_arg, kPi / 2.0, "max |arg sigma| below theta_0");
}

void det_sweep(Run& r) {
  const auto g = torus_grid(r, true);
  const auto opt = solver(r);
  const auto mu = coefficient(r, "beltrami.mu", g);
  std::function<cplx(cplx)> dir;
  if (!r.get("beltrami.mu1").empty()) {
    dir = function(r, "beltrami.mu1", g);
  } else if (!r.get("beltrami.nu").empty()) {
    dir = unit_direction(mu, coefficient(r, "beltrami.nu", g));
  }
  if (!dir) throw ConfigError("det-sweep: give beltrami.mu1 (direction) or a beltrami.nu different from mu");
  const auto eps = r.reals("sweep.eps");
  if (eps.empty()) throw ConfigError("sweep.eps: empty");
  const double theta = r.real("sweep.theta");
  const double rho = r.real("sweep.rho");

  const auto s = eigen_bound_sweep(mu, dir, eps, r.jobs, opt, theta, rho);
  if (!s.failure.empty()) r.results["failure"] = s.failure;
  r.results["diagonal_min"] = s.diagonal_min;
  r.results["rho"] = s.rho;
  r.results["fitted_c"] = s.fitted_c;
  json rows = json::array();
  r.csv_header = {"eps", "min_abs", "deviation", "kernel_dim", "log_det_re", "log_det_im"};
  for (std::size_t i = 0; i < eps.size(); ++i) {
    rows.push_back({{"eps", eps[i]},
                    {"min_abs", s.min_abs[i]},
                    {"deviation", s.deviation[i]},
                    {"kernel_dim", s.kernel_dims[i]},
                    {"log_det", cjson(s.log_dets[i])}});
    r.csv_rows.push_back({num(eps[i]), num(s.min_abs[i]), num(s.deviation[i]), std::to_string(s.kernel_dims[i]),
                          num(s.log_dets[i].real()), num(s.log_dets[i].imag())});
  }
  r.results["sweep"] = rows;
  r.criterion(6, !s.rho_violated, s.fitted_c, s.rho,
              "no nonzero eigenvalue inside |lambda| < rho; value is the fitted C");

  const double emax = *std::max_element(eps.begin(), eps.end());
  const auto nu = make_coefficient(g, [&](cplx p) { return mu.analytic(p) + emax * dir(p); });
  SpectralOptions so;
  so.certify = false;
  so.theta = theta;
  so.rho = s.rho;
  const auto S = eigen_spectrum(discretize(make_delta_mn(mu, nu, opt)).matrix, so);
  const double c = contour_independence_defect(S, 3);
  r.results["contour_defect"] = c;
  r.criterion(11, c <= 1e-9, c, 1e-9, "three admissible cut angles at the largest eps");
}

void holomorphy_check(Run& r) {
  const auto g = torus_grid(r, true);
  const auto opt = solver(r);
  const auto mu = coefficient(r, "beltrami.mu", g);
  const auto nu = r.get("beltrami.nu").empty() ? mu : coefficient(r, "beltrami.nu", g);
  if (r.get("beltrami.mu1").empty()) throw ConfigError("beltrami.mu1: required");
  const auto mu1 = function(r, "beltrami.mu1", g);
  const auto nu1 = r.get("beltrami.nu1").empty() ? mu1 : function(r, "beltrami.nu1", g);
  const double h = r.real("sweep.h");
  const double hv = r.real("sweep.h_variation");
  if (!(h > 0.0) || !(hv > 0.0)) throw ConfigError("sweep.h, sweep.h_variation: must be positive");

  AdmissibilityOptions adm;
  adm.solver = opt;
  const auto res = det_holomorphy_check(mu, nu, mu1, nu1, h, adm);
  const double diag = diagonal_holomorphy_residual(mu, mu1, h, adm);
  r.results["res_s"] = res.res_s;
  r.results["res_t"] = res.res_t;
  r.results["diagonal_residual"] = diag;
  r.results["max_symbol_arg"] = res.max_symbol_arg;
  r.results["min_gap"] = res.min_gap;
  const double worst = std::max(res.res_s, res.res_t);
  r.criterion(7, worst <= 1e-5, worst, 1e-5, "CR residual in s and anti-CR residual in t");
  r.criterion(7, diag >= 10.0 * worst, diag, 10.0 * worst, "diagonal family residual at least 10x larger");

  const auto fam = delta_family(mu, nu, mu1, nullptr, FamilyDirection::Mu, opt);
  const auto v = variation_check(fam, 0.0, hv);
  SpectralOptions none;
  none.expected_kernel = 0;
  const MatrixFamily closed = [](cplx s) {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 3);
    A(0, 0) = 1.0 + s;
    A(1, 1) = 2.0 - s * s;
    A(2, 2) = 3.0;
    return A;
  };
  const auto vc = variation_check(closed, 0.3, 1e-3, none);
  r.results["variation_defect"] = v.defect;
  r.results["variation_derivative"] = cjson(v.trace_formula);
  r.results["closed_form_variation_defect"] = vc.defect;
  r.criterion(8, v.defect <= 1e-6, v.defect, 1e-6, "Delta-family variation along mu1");
  r.criterion(8, vc.defect <= 1e-10, vc.defect, 1e-10, "diagonal closed-form family");
  r.csv_header = {"quantity", "value"};
  for (const auto& [k, val] : r.results.items())
    if (val.is_number()) r.csv_rows.push_back({k, num(val.get<double>())});
}

void potential_verify(Run& r) {
  json rows = json::array();
  bool all = true;
  double worst_ratio = 0.0;
  r.csv_header = {"example", "defect", "tolerance", "pass"};
  for (const auto& e : potential_examples()) {
    rows.push_back({{"example", e.example}, {"defect", e.defect}, {"tolerance", e.tolerance}, {"pass", e.pass}});
    r.csv_rows.push_back({e.example, num(e.defect), num(e.tolerance), e.pass ? "true" : "false"});
    all = all && e.pass;
    if (e.tolerance > 0.0) worst_ratio = std::max(worst_ratio, e.defect / e.tolerance);
  }
  r.results["examples"] = rows;
  r.criterion(9, all, worst_ratio, 1.0, "largest defect / tolerance over the examples");
}

// ---------------------------------------------------------------------------

void write_outputs(const Run& r, const std::string& experiment) {
  fs::create_directories(r.dir);
  json config = json::object();
  std::string canonical;
  for (const auto& [k, v] : r.settings) {
    config[k] = v;
    canonical += k + "=" + v + "\n";
  }
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(r.command + "\n" + canonical);

  bool pass = true;
  for (const auto& c : r.criteria) pass = pass && c["pass"].get<bool>();
  json manifest = {{"schema", kSchema},
                   {"tool", "quasilap"},
                   {"version", kVersion},
                   {"subcommand", r.command},
                   {"experiment", experiment},
                   {"config", config},
                   {"config_hash", "fnv1a64:" + hash.str()},
                   {"modules",
                    {{"grid-core", kVersion},
                     {"oracles", kVersion},
                     {"beltrami", kVersion},
                     {"operator-family", kVersion},
                     {"determinant", kVersion},
                     {"potential", kVersion},
                     {"cli", kVersion}}},
                   {"criteria", r.criteria},
                   {"pass", pass},
                   {"elapsed_seconds", r.seconds},
                   {"results_file", r.format == "csv" ? "results.csv" : "results.json"}};
  std::ofstream(r.dir / "manifest.json") << manifest.dump(2) << '\n';

  if (r.format == "csv") {
    std::ofstream os(r.dir / "results.csv");
    for (std::size_t i = 0; i < r.csv_header.size(); ++i) os << (i ? "," : "") << r.csv_header[i];
    os << '\n';
    for (const auto& row : r.csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
  } else {
    std::ofstream(r.dir / "results.json") << json{{"schema", kSchema}, {"results", r.results}}.dump(2) << '\n';
  }
}

int report(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    std::cerr << "report: " << dir.string() << " is not a directory\n";
    return kExitConfig;
  }
  std::vector<fs::path> manifests;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    std::cerr << "report: no manifest.json under " << dir.string() << '\n';
    return kExitConfig;
  }
  // id -> (experiment, pass)
  std::map<int, std::vector<std::pair<std::string, bool>>> table;
  for (const auto& p : manifests) {
    json m;
    try {
      std::ifstream(p) >> m;
    } catch (const json::exception& e) {
      std::cerr << "report: unreadable manifest " << p.string() << ": " << e.what() << '\n';
      return kExitConfig;
    }
    const std::string name = m.value("experiment", p.parent_path().filename().string());
    std::map<int, bool> per;
    for (const auto& c : m["criteria"]) {
      const int id = c["id"].get<int>();
      per[id] = (per.count(id) ? per[id] : true) && c["pass"].get<bool>();
    }
    for (const auto& [id, ok] : per) table[id].push_back({name, ok});
  }
  std::cout << std::left << std::setw(4) << "id" << std::setw(36) << "criterion" << std::setw(6) << "pass"
            << "runs\n";
  for (const auto& [id, runs] : table) {
    bool ok = true;
    std::string names;
    for (const auto& [n, p] : runs) {
      ok = ok && p;
      names += (names.empty() ? "" : ", ") + n + (p ? "" : " (FAIL)");
    }
    std::cout << std::left << std::setw(4) << id << std::setw(36) << criterion_name(id) << std::setw(6)
              << (ok ? "PASS" : "FAIL") << names << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasilap: Beltrami maps, the Delta_{mu,nu} family, regularized determinants and cone potentials"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Flag {
    CLI::Option* opt;
    std::string key;
  };
  std::vector<Flag> flags;
  std::map<std::string, std::string> values;
  std::string config_path, out_flag, format_flag;
  int jobs = 1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI config file (schema = 1)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_flag, "output directory (QUASILAP_OUT overrides)");
    sub->add_option("--format", format_flag, "results format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--jobs", jobs, "OpenMP threads for sweeps")->check(CLI::PositiveNumber);
    auto bind = [&, sub](const std::string& name, const std::string& key, const std::string& help) {
      flags.push_back({sub->add_option(name, values[sub->get_name() + ":" + key], help), key});
    };
    bind("--name", "experiment.name", "experiment name (output subdirectory)");
    bind("--seed", "experiment.seed", "seed recorded with random presets");
    bind("--z", "grid.modulus", "torus modulus, e.g. i, 0.5+1i, 1/3+2i or re,im");
    bind("--N", "grid.N", "grid size");
    bind("--tol", "solver.tol", "Beltrami solver tolerance");
    bind("--max-iterations", "solver.max_iterations", "Beltrami solver iteration cap");
    return bind;
  };

  auto* td = app.add_subcommand("torus-det", "zeta-regularized torus determinant against the eta formula");
  std::function<void(const std::string&, const std::string&, const std::string&)> bind = common(td);
  bind("--mu", "beltrami.mu", "constant preset for the isometry check (needs --N)");
  td->footer(
      "--z accepts a ';'-separated list. CSV columns: z_re,z_im,zeta_logdet,exact,rel_delta,raw,spectrum_defect.\n"
      "Criteria 1, 2 and (with --mu) 10.");

  auto* bs = app.add_subcommand("beltrami-solve", "normalized torus solution of the Beltrami equation");
  bind = common(bs);
  bind("--preset", "beltrami.mu", "coefficient preset (constant:, fourier:, bump:, random:)");
  bs->footer("Writes map.qlap. CSV columns: index,re,im (map samples). Criteria 3 and 4.");

  auto* sa = app.add_subcommand("symbol-angle", "max |arg| of the principal symbol of Delta_{mu,nu}");
  bind = common(sa);
  bind("--mu", "beltrami.mu", "mu preset");
  bind("--nu", "beltrami.nu", "nu preset");
  bind("--eps", "sweep.eps", "comma-separated eps values along (nu - mu)/sup|nu - mu|");
  bind("--directions", "sweep.directions", "covector directions per sample");
  sa->footer("CSV columns: eps,max_abs_arg. Criterion 5.");

  auto* ds = app.add_subcommand("det-sweep", "spectrum and log det' of Delta_{mu, mu + eps d}");
  bind = common(ds);
  bind("--mu", "beltrami.mu", "mu preset");
  bind("--nu", "beltrami.nu", "direction (nu - mu)/sup|nu - mu|");
  bind("--dir", "beltrami.mu1", "direction preset d (takes precedence over --nu)");
  bind("--eps", "sweep.eps", "comma-separated eps values");
  bind("--theta", "sweep.theta", "cut angle");
  bind("--rho", "sweep.rho", "kernel radius (0 = half the diagonal gap)");
  ds->footer("CSV columns: eps,min_abs,deviation,kernel_dim,log_det_re,log_det_im. Criteria 6 and 11.");

  auto* pv = app.add_subcommand("potential-verify", "cone potentials and the genus-1 extension");
  common(pv);
  pv->footer("CSV columns: example,defect,tolerance,pass. Criterion 9.");

  auto* hc = app.add_subcommand("holomorphy-check", "holomorphy of log det' and the variation formula");
  bind = common(hc);
  bind("--mu", "beltrami.mu", "mu preset");
  bind("--nu", "beltrami.nu", "nu preset (default mu)");
  bind("--mu1", "beltrami.mu1", "direction in mu");
  bind("--nu1", "beltrami.nu1", "direction in nu (default mu1)");
  bind("--step", "sweep.h", "CR stencil step h");
  bind("--step-variation", "sweep.h_variation", "variation stencil step");
  hc->footer("CSV columns: quantity,value. Criteria 7 and 8.");

  auto* rp = app.add_subcommand("report", "pass/fail matrix of the manifests under a directory");
  std::string report_dir;
  rp->add_option("dir", report_dir, "artifact directory (default: QUASILAP_OUT or quasilap-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (rp->parsed()) {
    if (report_dir.empty()) {
      const char* env = std::getenv("QUASILAP_OUT");
      report_dir = env && *env ? env : "quasilap-out";
    }
    return report(report_dir);
  }

  CLI::App* sub = app.get_subcommands().front();
  Run r;
  r.command = sub->get_name();
  r.jobs = jobs;
  try {
    for (const auto& [k, v] : known_keys()) r.settings[k] = v;
    if (r.command == "holomorphy-check") r.settings["sweep.h"] = "1e-3";
    if (r.command == "torus-det") {
      r.settings["grid.modulus"] = "i;2i;0.5+1i;1/3+2i;0.5i";
      r.settings["grid.N"] = "0";
    }
    if (!config_path.empty())
      for (const auto& [k, v] : load_ini(config_path)) {
        r.settings[k] = v;
        if (k == "beltrami.mu") r.mu_given = true;
      }
    for (const auto& f : flags) {
      if (f.opt->count() == 0) continue;
      r.settings[f.key] = values[r.command + ":" + f.key];
      if (f.key == "beltrami.mu") r.mu_given = true;
    }
    if (!format_flag.empty()) r.settings["output.format"] = format_flag;
    if (!out_flag.empty()) r.settings["output.dir"] = out_flag;
    r.format = r.get("output.format");
    if (r.format != "json" && r.format != "csv") throw ConfigError("output.format: json or csv");
    std::string out = r.get("output.dir");
    if (const char* env = std::getenv("QUASILAP_OUT"); env && *env) out = env;
    std::string experiment = r.get("experiment.name").empty() ? r.command : r.get("experiment.name");
    if (experiment.find('/') != std::string::npos || experiment == "..")
      throw ConfigError("experiment.name: must be a plain directory name");
    r.dir = fs::path(out) / experiment;
    // output.dir does not change any number, so it stays out of the hash
    r.settings.erase("output.dir");
    fs::create_directories(r.dir);
    const auto t0 = std::chrono::steady_clock::now();

    if (r.command == "torus-det") torus_det(r);
    else if (r.command == "beltrami-solve") beltrami_solve(r);
    else if (r.command == "symbol-angle") symbol_angle(r);
    else if (r.command == "det-sweep") det_sweep(r);
    else if (r.command == "potential-verify") potential_verify(r);
    else if (r.command == "holomorphy-check") holomorphy_check(r);
    if (r.command != "torus-det") r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_outputs(r, experiment);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << r.command << ": " << e.what() << '\n';
    return kExitFail;
  }

  bool pass = true;
  for (const auto& c : r.criteria) {
    const bool ok = c["pass"].get<bool>();
    pass = pass && ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << c["id"].get<int>() << "] " << c["name"].get<std::string>()
              << ": " << c["detail"].get<std::string>() << "  value " << c["value"].get<double>()
              << "  tolerance " << c["tolerance"].get<double>() << '\n';
  }
  std::cout << "wrote " << (r.dir / "manifest.json").string() << '\n';
  return pass ? 0 : kExitFail;
}
