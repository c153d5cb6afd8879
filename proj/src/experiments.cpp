#include "lrg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lrg/fourier.hpp"
#include "lrg/images.hpp"

namespace lrg {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration.

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + (where.empty() ? "" : ".") + key + ": unknown key");
}

const json& require_object(const json& parent, const std::string& key, const std::string& where) {
  if (!parent.contains(key)) throw ConfigError(where + key + ": missing required section");
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(where + key + ": expected an object");
  return v;
}

int get_int(const json& obj, const std::string& key, const std::string& where, bool required, int fallback) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + key + ": missing required field");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + key + ": expected an integer");
  const auto i = v.get<long long>();
  if (i < -1000000 || i > 1000000) throw ConfigError(where + key + ": value out of range");
  return static_cast<int>(i);
}

double get_double(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + key + ": expected a finite number");
  return x;
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

}  // namespace

void validate_experiment_name(const std::string& name) {
  if (!std::regex_match(name, std::regex("[A-Za-z0-9_.-]+")))
    throw ConfigError("experiment: name must match [A-Za-z0-9_.-]+");
}

LatticeGeometry ExperimentConfig::geometry() const { return make_geometry(d, L, k, m); }

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, "", {"experiment", "output", "seed", "geometry", "params", "fourier", "images", "decay"});

  ExperimentConfig c;
  c.experiment = get_string(root, "experiment", c.experiment);
  validate_experiment_name(c.experiment);
  c.output = get_string(root, "output", c.output);
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    c.seed = root.at("seed").get<std::uint64_t>();
  }

  const json& g = require_object(root, "geometry", "");
  reject_unknown(g, "geometry", {"d", "L", "k", "m"});
  c.d = get_int(g, "d", "geometry.", true, 0);
  c.L = get_int(g, "L", "geometry.", true, 0);
  c.k = get_int(g, "k", "geometry.", true, 0);
  c.m = get_int(g, "m", "geometry.", true, 0);
  if (c.d < 1 || c.d > 2) throw ConfigError("geometry.d: must be 1 or 2");
  if (c.L < 3 || c.L % 2 == 0) throw ConfigError("geometry.L: must be odd and >= 3");
  if (c.k < 0) throw ConfigError("geometry.k: must be >= 0");
  if (c.m < c.k) throw ConfigError("geometry.m: must be >= k");
  try {
    (void)c.geometry();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }

  if (root.contains("params")) {
    const json& p = require_object(root, "params", "");
    reject_unknown(p, "params", {"a", "mu0", "c_star"});
    c.params.a = get_double(p, "a", "params.", c.params.a);
    c.params.mu0 = get_double(p, "mu0", "params.", c.params.mu0);
    c.params.c_star = get_double(p, "c_star", "params.", c.params.c_star);
  }
  if (!(c.params.a > 0.0)) throw ConfigError("params.a: must be > 0");
  if (!(c.params.mu0 >= 0.0)) throw ConfigError("params.mu0: must be >= 0");
  if (!(c.params.c_star > 0.0)) throw ConfigError("params.c_star: must be > 0");

  if (root.contains("fourier")) {
    const json& f = require_object(root, "fourier", "");
    reject_unknown(f, "fourier", {"M_init", "q_max"});
    c.fourier_M_init = get_int(f, "M_init", "fourier.", false, c.fourier_M_init);
    c.q_max = get_double(f, "q_max", "fourier.", c.q_max);
  }
  if (c.fourier_M_init != 0) {
    const std::int64_t B = ipow(c.L, c.k);
    if (c.fourier_M_init % B != 0 || c.fourier_M_init < 4 * B)
      throw ConfigError("fourier.M_init: must be 0 or a multiple of L^k that is >= 4 L^k");
  }
  if (!(c.q_max >= 0.0 && c.q_max <= 0.2)) throw ConfigError("fourier.q_max: must lie in [0, 0.2]");

  if (root.contains("images")) {
    const json& im = require_object(root, "images", "");
    reject_unknown(im, "images", {"shells"});
    c.shells = get_int(im, "shells", "images.", false, c.shells);
  }
  if (c.shells < 1 || c.shells > 8) throw ConfigError("images.shells: must lie in [1, 8]");

  if (root.contains("decay")) {
    const json& dcy = require_object(root, "decay", "");
    reject_unknown(dcy, "decay", {"window", "q_grid"});
    if (dcy.contains("window")) {
      const json& w = require_object(dcy, "window", "decay.");
      reject_unknown(w, "decay.window", {"min", "max_fraction"});
      c.window.min = get_double(w, "min", "decay.window.", c.window.min);
      c.window.max_fraction = get_double(w, "max_fraction", "decay.window.", c.window.max_fraction);
    }
    if (dcy.contains("q_grid")) {
      const json& q = dcy.at("q_grid");
      if (!q.is_array() || q.empty()) throw ConfigError("decay.q_grid: expected a non-empty array of numbers");
      c.q_grid.clear();
      for (const auto& v : q) {
        if (!v.is_number()) throw ConfigError("decay.q_grid: expected numbers");
        const double x = v.get<double>();
        if (!(std::abs(x) <= 0.2)) throw ConfigError("decay.q_grid: entries must lie in [-0.2, 0.2]");
        c.q_grid.push_back(x);
      }
    }
  }
  if (!(c.window.min >= 0.0)) throw ConfigError("decay.window.min: must be >= 0");
  if (!(c.window.max_fraction > 0.0 && c.window.max_fraction <= 1.0))
    throw ConfigError("decay.window.max_fraction: must lie in (0, 1]");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Judging.

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_tol(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

MetricRow info(const std::string& metric, double value) { return {metric, value, "-", "info"}; }

MetricRow check(const std::string& metric, double value, const std::string& tolerance) {
  return {metric, value, tolerance, judge(value, tolerance)};
}

MetricRow le(const std::string& metric, double value, double tol) { return check(metric, value, "<=" + fmt_tol(tol)); }
MetricRow ge(const std::string& metric, double value, double tol) { return check(metric, value, ">=" + fmt_tol(tol)); }
MetricRow gt(const std::string& metric, double value, double tol) { return check(metric, value, ">" + fmt_tol(tol)); }
MetricRow finite(const std::string& metric, double value) { return check(metric, value, "finite"); }
MetricRow flag(const std::string& metric, bool value) { return check(metric, value ? 1.0 : 0.0, "==1"); }

std::string num_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string judge(double value, const std::string& tol) {
  if (tol == "-") return "info";
  if (tol == "finite") return std::isfinite(value) ? "true" : "false";
  static const std::regex re(R"((<=|>=|==|<|>)(.+))");
  std::smatch m;
  if (!std::regex_match(tol, m, re)) throw std::invalid_argument("malformed tolerance '" + tol + "'");
  const std::string op = m[1];
  const double bound = std::stod(m[2]);
  bool ok = false;
  if (op == "<=") ok = value <= bound;
  else if (op == ">=") ok = value >= bound;
  else if (op == "==") ok = value == bound;
  else if (op == "<") ok = value < bound;
  else ok = value > bound;
  return ok ? "true" : "false";
}

bool SuiteResult::passed() const {
  return std::none_of(rows.begin(), rows.end(), [](const MetricRow& r) { return r.pass == "false"; });
}

// ---------------------------------------------------------------------------
// Suites.

namespace {

// Eigenvalues of the d-dimensional Neumann Laplacian as sums of one-dimensional ones.
std::vector<double> product_spectrum(int d, int n, double eta) {
  const auto one = laplacian_eigenvalues_closed_form(n, eta);
  std::vector<double> all{0.0};
  for (int mu = 0; mu < d; ++mu) {
    std::vector<double> next;
    next.reserve(all.size() * one.size());
    for (double a : all)
      for (double b : one) next.push_back(a + b);
    all = std::move(next);
  }
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<MetricRow> suite_spectrum(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  const LatticeGeometry g = c.geometry();
  const SpectrumReport sr = spectrum(neumann_laplacian(g));
  const auto closed = product_spectrum(g.d, static_cast<int>(g.sites_per_axis()), g.spacing());
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < closed.size(); ++i) {
    diff = std::max(diff, std::abs(sr.eigenvalues[i] - closed[i]));
    scale = std::max(scale, std::abs(closed[i]));
  }
  rows.push_back(le("spectrum_rel_error", scale > 0 ? diff / scale : diff, 1e-10));
  rows.push_back(info("spectrum_min_eigenvalue", sr.min_eigenvalue));
  rows.push_back(info("spectrum_max_abs_eigenvalue", scale));

  // Chebyshev roots: Jacobi-matrix eigenvalues vs the cosine formula.
  const int n = static_cast<int>(std::min<std::int64_t>(g.sites_per_axis(), 30));
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (int i = 0; i + 1 < n - 1; ++i) J(i, i + 1) = J(i + 1, i) = 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  const auto roots = chebyshev_roots(n - 1);
  double root_err = 0.0, residual = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    root_err = std::max(root_err, std::abs(es.eigenvalues()(i) - roots[static_cast<std::size_t>(i)]));
    residual = std::max(residual, std::abs(chebyshev(n - 1, roots[static_cast<std::size_t>(i)])));
  }
  rows.push_back(le("chebyshev_root_error", root_err, 1e-12));
  rows.push_back(le("chebyshev_root_residual", residual, 1e-12));
  return rows;
}

std::vector<MetricRow> suite_rg(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  const LatticeGeometry g = c.geometry();
  const auto seq = a_sequence(c.params.a, c.L, 50);
  double a_err = 0.0;
  for (int j = 1; j <= 50; ++j)
    a_err = std::max(a_err, std::abs(seq[static_cast<std::size_t>(j)] - a_closed_form(c.params.a, c.L, j)) /
                                a_closed_form(c.params.a, c.L, j));
  rows.push_back(le("a_sequence_rel_error", a_err, 1e-14));
  if (g.k < 1) {
    rows.push_back(info("rg_levels", 0.0));
    return rows;
  }
  for (int j = 1; j <= g.k - 1; ++j)
    rows.push_back(le("rg_step_residual_j" + std::to_string(j), rg_step_residual(g, c.params, j), 1e-9));
  rows.push_back(le("rg_telescope_residual", rg_telescope_residual(g, c.params), 1e-9));
  for (int j = 1; j <= g.k; ++j) {
    if (j + 1 <= g.m) {
      const RgOperators ops = rg_operators(g, c.params, j);
      rows.push_back(le("c_identity_residual_j" + std::to_string(j), c_identity_residual(ops, g), 1e-10));
      rows.push_back(le("a_closed_form_residual_j" + std::to_string(j), a_closed_form_residual(ops), 1e-10));
    }
    const ScalingResiduals s = scaling_residuals(g, c.params, j);
    rows.push_back(le("scaling_residual_j" + std::to_string(j), s.max(), 1e-11));
  }
  return rows;
}

std::vector<MetricRow> suite_images(const ExperimentConfig& c) {
  const LatticeGeometry g = c.geometry();
  if (g.k < 1) throw ConfigError("images-verify: geometry.k must be >= 1");
  if (g.site_count() > 243) throw ConfigError("images-verify: at most 243 sites are supported");
  std::vector<MetricRow> rows;
  const ImagesResidualReport rep = images_residual_report(g, c.params, c.shells, c.fourier_M_init);
  for (const auto& r : rep.rows) {
    const std::string s = "_shells" + std::to_string(r.shells);
    rows.push_back(info("images_g_max_error" + s, r.g_max_error));
    rows.push_back(info("images_g_median_error" + s, r.g_median_error));
    rows.push_back(info("images_gq_max_error" + s, r.gq_max_error));
    rows.push_back(info("images_truncation_estimate" + s, r.truncation_estimate));
  }
  const double tol = g.d == 1 ? 1e-6 : 1e-5;
  rows.push_back(le("images_max_error", rep.rows.back().max_error(), tol));
  rows.push_back(flag("images_monotone", rep.monotone));
  rows.push_back(info("images_quadrature_M", rep.quadrature_M));
  return rows;
}

std::vector<MetricRow> suite_fourier(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  if (c.k < 1) throw ConfigError("fourier-verify: geometry.k must be >= 1");
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal;

  // Q^*Q: exact block means vs the momentum-space formula on a three-block patch.
  const LatticeGeometry patch = make_geometry(c.d, c.L, c.k, c.k + 1);
  const std::int64_t B = ipow(c.L, c.k);
  Field f = Field::zeros(patch);
  for (std::size_t s = 0; s < patch.site_count(); ++s) {
    const Site x = patch.site_at(s);
    if (std::all_of(x.begin(), x.end(), [&](std::int64_t v) { return v >= B && v < 2 * B; }))
      f.values(static_cast<Eigen::Index>(s)) = normal(rng);
  }
  rows.push_back(le("qkqk_fourier_residual", qkqk_fourier_residual(f), 1e-8));

  // Momentum-space solve followed by the symbol.
  const TorusGrid grid = make_torus_grid(c.d, c.L, c.k, static_cast<int>(4 * B));
  std::vector<cplx> fh(grid.point_count());
  for (auto& v : fh) v = cplx(normal(rng), normal(rng));
  const auto back = free_apply_symbol(free_apply_ghat(fh, grid, c.params), grid, c.params);
  double rt = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < fh.size(); ++i) {
    rt = std::max(rt, std::abs(back[i] - fh[i]));
    sc = std::max(sc, std::abs(fh[i]));
  }
  rows.push_back(le("ghat_roundtrip_error", rt / sc, 1e-10));

  // Contour shift: unshifted vs shifted along every axis and sign.
  const FreeKernel K(c.d, c.L, c.k, c.params);
  std::vector<std::pair<Site, Site>> g_pairs, gq_pairs;
  const Site origin(static_cast<std::size_t>(c.d), 0);
  for (std::int64_t t : {std::int64_t{0}, std::int64_t{1}, B, 2 * B + 1, 3 * B}) {
    Site x(static_cast<std::size_t>(c.d), 0);
    x[0] = t;
    g_pairs.emplace_back(x, origin);
    gq_pairs.emplace_back(x, origin);
  }
  const auto g0 = K.g_converged(g_pairs, {}, c.fourier_M_init);
  const auto gq0 = K.gq_converged(gq_pairs, {}, c.fourier_M_init);
  double worst = 0.0;
  for (int mu = 0; mu < c.d; ++mu)
    for (double sgn : {1.0, -1.0}) {
      RVec q(static_cast<std::size_t>(c.d), 0.0);
      q[mu] = sgn * c.q_max;
      const auto g1 = K.g_converged(g_pairs, q, c.fourier_M_init);
      const auto gq1 = K.gq_converged(gq_pairs, q, c.fourier_M_init);
      for (std::size_t i = 0; i < g_pairs.size(); ++i) {
        worst = std::max(worst, std::abs(g1.values[i] - g0.values[i]) / std::abs(g0.values[i]));
        worst = std::max(worst, std::abs(gq1.values[i] - gq0.values[i]) / std::abs(gq0.values[i]));
      }
    }
  rows.push_back(le("contour_shift_rel_change", worst, 1e-8));
  rows.push_back(info("quadrature_M", std::max(g0.M, gq0.M)));
  return rows;
}

int strip_samples(int d) { return d == 1 ? 64 : 16; }

std::vector<MetricRow> suite_strip(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  double lo = INFINITY, hi = 0.0, floor = INFINITY;
  for (int k = 1; k <= 3; ++k) {
    const StripBoundReport rep = strip_bound_report(c.d, c.L, k, c.params, c.q_max, strip_samples(c.d));
    rows.push_back(finite("strip_weighted_sup_k" + std::to_string(k), rep.overall_sup));
    lo = std::min(lo, rep.overall_sup);
    hi = std::max(hi, rep.overall_sup);
    floor = std::min(floor, rep.min_floor_ratio);
  }
  rows.push_back(le("strip_sup_variation", hi / lo, 10.0));
  rows.push_back(ge("strip_min_floor_ratio", floor, kStripFloor));

  const auto coarse = technical_bounds_report(16);
  const auto fine = technical_bounds_report(32);
  double drift = 1.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const auto& r = fine[i];
    std::string name = "lemma_" + r.lemma + "_" + std::to_string(i);
    if (r.k > 0) name += "_k" + std::to_string(r.k);
    if (r.claimed > 0.0)
      rows.push_back(r.lower_bound ? ge(name, r.value, r.claimed) : le(name, r.value, r.claimed));
    else
      rows.push_back(finite(name, r.value));
    drift = std::max({drift, r.value / coarse[i].value, coarse[i].value / r.value});
  }
  rows.push_back(le("lemma_refinement_drift", drift, 2.0));
  return rows;
}

std::vector<MetricRow> suite_decay(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  const LatticeGeometry g = c.geometry();
  const auto profile = decay_profile(g, c.params);
  for (const auto& pt : envelope(profile)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "profile_distance=%.6f", pt.distance);
    rows.push_back(info(buf, pt.magnitude));
  }
  DecayFit fit;
  try {
    fit = fit_decay(envelope(profile), c.window);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("decay-profile: ") + e.what() + "; use a larger geometry or widen decay.window");
  }
  rows.push_back(gt("decay_rate", fit.rate, 0.0));
  rows.push_back(info("decay_log_prefactor", fit.log_prefactor));
  rows.push_back(info("decay_rms_residual", fit.rms_residual));
  rows.push_back(info("decay_fit_points", fit.point_count));
  return rows;
}

std::vector<MetricRow> suite_ct(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  const LatticeGeometry g = c.geometry();
  std::vector<std::vector<double>> qs;
  for (double q : c.q_grid) {
    std::vector<double> v(static_cast<std::size_t>(c.d), 0.0);
    v[0] = q;
    qs.push_back(v);
  }
  const CtReport rep = ct_bound_report(g, c.params, qs, c.seed);
  for (const auto& r : rep.rows) {
    const std::string s = "_q=" + num_label(r.q[0]);
    rows.push_back(info("ct_sigma_min" + s, r.min_singular_value));
    rows.push_back(finite("ct_bound_constant" + s, r.bound_constant));
    rows.push_back(info("ct_coercivity" + s, r.coercivity));
  }
  rows.push_back(le("ct_max_violation", rep.max_violation, 1e-10));
  const KernelOperator D0 = conjugated_operator(g, c.params, std::vector<double>(static_cast<std::size_t>(c.d), 0.0));
  rows.push_back(flag("ct_q0_bit_equal", D0.kernel() == defining_operator(g, c.params).kernel()));
  rows.push_back(gt("ct_c1", rep.c1, 0.0));
  rows.push_back(finite("ct_random_constant", rep.random_constant));
  rows.push_back(info("ct_seed", static_cast<double>(rep.seed)));
  return rows;
}

std::vector<MetricRow> suite_positivity(const ExperimentConfig& c) {
  std::vector<MetricRow> rows;
  std::vector<LatticeGeometry> family;
  const int extra = c.m - c.k;
  for (int k = 1; k <= 3; ++k) {
    const std::int64_t n = ipow(ipow(c.L, k + extra), c.d);
    if (n <= 2187) family.push_back(make_geometry(c.d, c.L, k, k + extra));
  }
  if (family.size() < 2) throw ConfigError("positivity: geometry too large for a k-family (reduce m - k)");
  const auto report = positivity_report(family, c.params);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : report) {
    rows.push_back(gt("positivity_c_k" + std::to_string(r.geometry.k), r.c, 0.0));
    lo = std::min(lo, r.c);
    hi = std::max(hi, r.c);
  }
  rows.push_back(le("positivity_ratio", hi / lo, 4.0));
  return rows;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"spectrum",     "rg-verify",     "images-verify", "fourier-verify",
                                              "strip-bound",  "decay-profile", "ct-report",     "positivity"};
  return names;
}

SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  r.name = name;
  if (name == "spectrum") r.rows = suite_spectrum(cfg);
  else if (name == "rg-verify") r.rows = suite_rg(cfg);
  else if (name == "images-verify") r.rows = suite_images(cfg);
  else if (name == "fourier-verify") r.rows = suite_fourier(cfg);
  else if (name == "strip-bound") r.rows = suite_strip(cfg);
  else if (name == "decay-profile") r.rows = suite_decay(cfg);
  else if (name == "ct-report") r.rows = suite_ct(cfg);
  else if (name == "positivity") r.rows = suite_positivity(cfg);
  else throw std::invalid_argument("unknown suite '" + name + "'");
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_csv(const std::filesystem::path& dir, const SuiteResult& suite, const ExperimentConfig& cfg) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (suite.name + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kCsvHeader << '\n';
  for (const auto& r : suite.rows) {
    out << cfg.experiment << ',' << cfg.d << ',' << cfg.L << ',' << cfg.k << ',' << cfg.m << ',' << fmt(cfg.params.a)
        << ',' << fmt(cfg.params.mu0) << ',' << r.metric << ',' << fmt(r.value) << ',' << r.tolerance << ','
        << r.pass << '\n';
  }
}

void write_summary(const std::filesystem::path& dir, const std::vector<SuiteResult>& suites,
                   const ExperimentConfig& cfg) {
  std::filesystem::create_directories(dir);
  json root;
  root["experiment"] = cfg.experiment;
  root["geometry"] = {{"d", cfg.d}, {"L", cfg.L}, {"k", cfg.k}, {"m", cfg.m}};
  root["params"] = {{"a", cfg.params.a}, {"mu0", cfg.params.mu0}, {"c_star", cfg.params.c_star}};
  root["seed"] = cfg.seed;
  json s = json::object();
  for (const auto& suite : suites) {
    json metrics = json::object();
    for (const auto& r : suite.rows) metrics[r.metric] = r.value;
    s[suite.name] = {{"status", suite.passed() ? "pass" : "fail"}, {"metrics", metrics},
                     {"wall_time_s", suite.wall_time_s}};
  }
  root["suites"] = s;
  const auto path = dir / "summary.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << root.dump(2) << '\n';
}

}  // namespace lrg
