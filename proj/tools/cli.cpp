#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "favar/favar.hpp"

namespace favar::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::set_default(const std::string& key, std::string value) {
  if (!has(key)) values_[key] = std::move(value);
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long RunConfig::get_int(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCategory::config, "option '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCategory::config, "option '" + key + "' expects an unsigned integer");
  }
  return out;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "inf" || v == "Inf" || v == "infinity") return kNoTruncation;
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCategory::config, "option '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCategory::config, "option '" + key + "' expects true/false");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string{};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::config,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    cfg.set(key, value);
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::serialise() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// helpers

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Output directory with a file manifest written on close.
class RunDirectory {
 public:
  RunDirectory(fs::path root, const RunConfig& cfg) : root_(std::move(root)) {
    fs::create_directories(root_);
    write_text("config.txt", cfg.serialise());
  }

  fs::path path(const std::string& name) {
    const fs::path p = root_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    files_.push_back(name);
    return p;
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(path(name));
    if (!out) throw Error(ErrorCategory::io, "cannot write " + (root_ / name).string());
    out << text;
  }

  void write_matrix(const std::string& name, const Matrix& m,
                    const std::vector<std::string>& header = {}) {
    write_matrix_csv(path(name), m, header);
  }

  void finish() {
    std::ostringstream out;
    out << "# favar run manifest\n# config: config.txt\n";
    for (const auto& f : files_) {
      const fs::path p = root_ / f;
      out << f << ',' << fs::file_size(p) << ',' << std::hex << std::setw(16)
          << std::setfill('0') << fnv1a(p) << std::dec << '\n';
    }
    std::ofstream m(root_ / "manifest.txt");
    m << out.str();
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

std::vector<std::string> numbered(const std::string& prefix, Index k) {
  std::vector<std::string> out;
  for (Index i = 1; i <= k; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Declarative option table: every option is stored as a string keyed by its
// long name, so config files and flags share one namespace.
struct OptionSpec {
  std::string name;
  std::string help;
  bool is_flag = false;
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void declare(Subcommand& sc, const std::vector<OptionSpec>& specs) {
  for (const auto& s : specs) {
    if (s.is_flag) {
      sc.options[s.name] = sc.app->add_flag("--" + s.name, s.help);
    } else {
      sc.options[s.name] = sc.app->add_option("--" + s.name, sc.values[s.name], s.help);
    }
  }
}

RunConfig collect(const Subcommand& sc, const std::string& command) {
  RunConfig cfg;
  // Config file first, explicit flags override.
  for (const char* file_key : {"config", "dgp"}) {
    const auto it = sc.options.find(file_key);
    if (it != sc.options.end() && it->second->count() > 0) {
      const RunConfig file = RunConfig::load(sc.values.at(file_key));
      for (const auto& [k, v] : file.values()) cfg.set(k, v);
    }
  }
  for (const auto& [name, opt] : sc.options) {
    if (name == "config" || name == "dgp" || opt->count() == 0) continue;
    const auto v = sc.values.find(name);
    cfg.set(name, v == sc.values.end() ? "true" : v->second);
  }
  cfg.set("command", command);
  cfg.set_default("threads", std::to_string(resolve_threads(0)));
  return cfg;
}

const std::vector<OptionSpec> kCommon = {
    {"config", "flat key = value config file; flags override it"},
    {"out", "output directory"},
    {"threads", "worker threads (0 = hardware concurrency)"},
};

const std::vector<OptionSpec> kModel = {
    {"input", "panel CSV"},
    {"no-header", "input CSV has no header row", true},
    {"r", "number of factors (0 = no factor stage)"},
    {"factors", "number of factors or 'auto'"},
    {"r-max", "largest factor number searched with --factors auto"},
    {"r-criterion", "Bai-Ng criterion used with auto (1, 2 or 3)"},
    {"d", "VAR order"},
    {"tau", "fixed truncation level on the MAD scale (inf = none)"},
    {"tau-cv", "select tau by cross validation (default)", true},
    {"tau-grid-size", "number of tau candidates"},
    {"cv-lags", "largest lag in the tau CV score (default d)"},
    {"lambda", "fixed Lasso penalty"},
    {"lambda-cv", "select lambda by cross validation (default)", true},
    {"n-lambda", "lambda grid size"},
    {"folds", "lambda CV folds"},
    {"tol", "coordinate descent tolerance"},
    {"max-iter", "coordinate descent sweep cap"},
};

const std::vector<OptionSpec> kDgp = {
    {"dgp", "DGP config file (key = value)"},
    {"n", "sample size"},
    {"p", "dimension"},
    {"var", "VAR design: banded | erdos_renyi | none"},
    {"innovation", "gaussian | t | lognormal"},
    {"nu", "student-t degrees of freedom"},
    {"factor-design", "var1 | none"},
    {"factor-number", "r under factor-design = var1"},
    {"sigma", "innovation covariance: identity | power_decay"},
    {"burn-in", "discarded initial steps"},
    {"seed", "master seed"},
    {"reps", "replications"},
};

std::vector<OptionSpec> concat(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

FitOptions model_options(const RunConfig& cfg) {
  FitOptions o;
  o.d = cfg.get_int("d", cfg.get_int("order", 1));
  const std::string factors = cfg.get("factors", "");
  if (factors == "auto") {
    o.r_auto = true;
    o.r_max = cfg.get_int("r-max", 0);
    o.r_criterion = static_cast<int>(cfg.get_int("r-criterion", 2)) - 1;
  } else if (!factors.empty()) {
    RunConfig tmp;
    tmp.set("factors", factors);
    o.r = tmp.get_int("factors", 0);
  }
  if (cfg.has("r")) o.r = cfg.get_int("r", 0);

  if (cfg.has("tau") && !cfg.get_bool("tau-cv", false)) {
    o.tau = TauSetting::fixed(cfg.get_double("tau", kNoTruncation));
  } else {
    o.tau = TauSetting::cross_validated(static_cast<int>(cfg.get_int("tau-grid-size", kDefaultTauGridSize)));
    if (cfg.has("cv-lags")) o.tau.cv_lags = cfg.get_int("cv-lags", o.d);
  }
  if (cfg.has("lambda") && !cfg.get_bool("lambda-cv", false)) {
    o.lambda = LambdaSetting::fixed(cfg.get_double("lambda", 0.0));
  } else {
    o.lambda = LambdaSetting::cross_validated(
        static_cast<int>(cfg.get_int("n-lambda", kDefaultLambdaGridSize)),
        static_cast<int>(cfg.get_int("folds", kDefaultFolds)));
  }
  o.lasso.tol = cfg.get_double("tol", o.lasso.tol);
  o.lasso.max_iter = cfg.get_int("max-iter", o.lasso.max_iter);
  o.threads = static_cast<std::size_t>(cfg.get_int("threads", 1));
  return o;
}

DgpSpec dgp_options(const RunConfig& cfg) {
  DgpSpec s;
  s.n = cfg.get_int("n", s.n);
  s.p = cfg.get_int("p", s.p);
  s.var_design = parse_var_design(cfg.get("var", to_string(s.var_design)));
  s.innovation.law = parse_innovation_law(cfg.get("innovation", to_string(s.innovation.law)));
  s.innovation.nu = cfg.get_double("nu", s.innovation.nu);
  s.factor_design = parse_factor_design(cfg.get("factor-design", to_string(s.factor_design)));
  s.r = cfg.get_int("factor-number", s.r);
  s.sigma_eps = parse_noise_covariance(cfg.get("sigma", to_string(s.sigma_eps)));
  s.burn_in = cfg.get_int("burn-in", s.burn_in);
  s.seed = cfg.get_u64("seed", s.seed);
  return s;
}

PanelSeries load_input(const RunConfig& cfg) {
  if (!cfg.has("input")) throw Error(ErrorCategory::config, "missing --input");
  return load_csv(cfg.get("input"), !cfg.get_bool("no-header", false));
}

fs::path require_out(const RunConfig& cfg) {
  if (!cfg.has("out")) throw Error(ErrorCategory::config, "missing --out");
  return cfg.get("out");
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const DgpSpec base = dgp_options(cfg);
  base.validate();
  const auto reps = static_cast<std::size_t>(cfg.get_int("reps", 1));
  const std::size_t threads = static_cast<std::size_t>(cfg.get_int("threads", 1));
  RunDirectory dir(require_out(cfg), cfg);

  std::vector<SimulatedPanel> sims(reps);
  std::vector<std::string> errors(reps);
  parallel_for(reps, threads, [&](std::size_t i) {
    DgpSpec spec = base;
    spec.seed = derive_seed(base.seed, i);
    try {
      sims[i] = simulate_panel(spec);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < reps; ++i) {
    if (!errors[i].empty()) {
      throw Error(ErrorCategory::numeric, "replication " + std::to_string(i) + ": " + errors[i]);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "rep_%04zu/", i);
    const std::string prefix = name;
    const auto& s = sims[i];
    dir.write_matrix(prefix + "x.csv", s.x.values(), s.x.names());
    dir.write_matrix(prefix + "A.csv", s.A);
    dir.write_matrix(prefix + "chi.csv", s.chi, s.x.names());
    dir.write_matrix(prefix + "xi.csv", s.xi, s.x.names());
    if (base.factor_design == FactorDesign::var1) {
      dir.write_matrix(prefix + "Lambda.csv", s.Lambda, numbered("f", s.Lambda.cols()));
      dir.write_matrix(prefix + "F.csv", s.F, numbered("f", s.F.cols()));
      dir.write_matrix(prefix + "D.csv", s.D);
    }
  }
  dir.finish();
  out << "simulated " << reps << " panel(s) of size " << base.n << "x" << base.p
      << " into " << cfg.get("out") << '\n';
  return 0;
}

void write_fit(RunDirectory& dir, const FavarFit& f, const PanelSeries& x) {
  const Index p = x.p();
  if (f.factors) {
    dir.write_matrix("loadings.csv", f.factors->loadings, numbered("f", f.factors->r));
    dir.write_matrix("factors.csv", f.factors->factors, numbered("f", f.factors->r));
    dir.write_matrix("eigenvalues.csv", f.factors->eigvals, {"eigenvalue"});
  }
  for (Index l = 1; l <= f.var.d; ++l) {
    dir.write_matrix("A_" + std::to_string(l) + ".csv", f.var.block(l), x.names());
  }
  Matrix sparsity(p, 2);
  for (Index j = 0; j < p; ++j) {
    sparsity(j, 0) = static_cast<double>(f.var.active_set[static_cast<std::size_t>(j)].size());
    sparsity(j, 1) = static_cast<double>(f.var.iterations[static_cast<std::size_t>(j)]);
  }
  dir.write_matrix("sparsity.csv", sparsity, {"nonzeros", "sweeps"});
  if (f.tau_cv) {
    Matrix t(static_cast<Index>(f.tau_cv->grid.size()), 2);
    for (std::size_t j = 0; j < f.tau_cv->grid.size(); ++j) {
      t(static_cast<Index>(j), 0) = f.tau_cv->grid[j];
      t(static_cast<Index>(j), 1) = f.tau_cv->scores[j];
    }
    dir.write_matrix("tau_cv.csv", t, {"tau", "score"});
  }
  if (f.lambda_cv) {
    Matrix t(static_cast<Index>(f.lambda_cv->grid.size()), 2);
    for (std::size_t j = 0; j < f.lambda_cv->grid.size(); ++j) {
      t(static_cast<Index>(j), 0) = f.lambda_cv->grid[j];
      t(static_cast<Index>(j), 1) = f.lambda_cv->mean_scores[j];
    }
    dir.write_matrix("lambda_cv.csv", t, {"lambda", "mean_score"});
  }
  if (f.r_report) {
    const auto& rep = *f.r_report;
    Matrix t(rep.r_max + 1, 5);
    for (Index k = 0; k <= rep.r_max; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      t.row(k) << static_cast<double>(k), rep.residual_variance[kk], rep.criteria[0][kk],
          rep.criteria[1][kk], rep.criteria[2][kk];
    }
    dir.write_matrix("factor_number.csv", t, {"k", "V", "IC_p1", "IC_p2", "IC_p3"});
  }

  std::ostringstream s;
  s << "n = " << x.n() << "\np = " << p << "\nd = " << f.var.d << "\nr = " << f.r()
    << "\ntau = " << fmt(f.rule.tau) << "\ntau_source = "
    << (f.tau_cv ? "cv" : "fixed") << "\nlambda = " << fmt(f.var.lambda)
    << "\nlambda_source = " << (f.lambda_cv ? "cv" : "fixed")
    << "\nnonzeros = " << f.var.nonzeros() << "\nentries = " << f.var.A.size() << '\n';
  if (f.r_report) {
    s << "r_chosen_ic = " << f.r_report->chosen[0] << ',' << f.r_report->chosen[1] << ','
      << f.r_report->chosen[2] << '\n';
  }
  dir.write_text("summary.txt", s.str());
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  const PanelSeries x = load_input(cfg);
  const FitOptions opts = model_options(cfg);
  const FavarFit f = fit(x, opts);
  RunDirectory dir(require_out(cfg), cfg);
  write_fit(dir, f, x);
  dir.finish();
  out << "tau = " << fmt(f.rule.tau) << ", r = " << f.r() << ", lambda = " << fmt(f.var.lambda)
      << ", nonzeros = " << f.var.nonzeros() << '\n';
  return 0;
}

int cmd_cv_tau(const RunConfig& cfg, std::ostream& out) {
  const PanelSeries x = load_input(cfg);
  const Index d = cfg.get_int("cv-lags", cfg.get_int("d", 1));
  const ScaleVector s = mad_scales(x);
  const TauGrid grid = build_tau_grid(x, s, static_cast<int>(cfg.get_int("tau-grid-size", kDefaultTauGridSize)));
  const TauCvReport rep = cv_tau(x, s, d, grid, static_cast<std::size_t>(cfg.get_int("threads", 1)));
  Matrix t(static_cast<Index>(grid.size()), 2);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    t(static_cast<Index>(j), 0) = grid[j];
    t(static_cast<Index>(j), 1) = rep.scores[j];
  }
  if (cfg.has("out")) {
    RunDirectory dir(cfg.get("out"), cfg);
    dir.write_matrix("tau_cv.csv", t, {"tau", "score"});
    dir.write_matrix("scales.csv", s.sigma, {"mad"});
    dir.finish();
  }
  out << "tau = " << fmt(rep.tau()) << " (index " << rep.chosen + 1 << " of " << grid.size() << ")\n";
  return 0;
}

int cmd_forecast(const RunConfig& cfg, std::ostream& out) {
  const PanelSeries x = load_input(cfg);
  ForecastOptions fo;
  RunConfig model = cfg;
  if (cfg.has("order")) model.set("d", cfg.get("order"));
  fo.fit = model_options(model);
  fo.window = cfg.get_int("window", 120);
  fo.horizon = cfg.get_int("horizon", 1);
  fo.baseline = cfg.get_bool("baseline", false);
  fo.reselect_r = cfg.get_bool("reselect-r", false);
  fo.threads = static_cast<std::size_t>(cfg.get_int("threads", 1));
  fo.fit.threads = 1;
  if (cfg.get_bool("fixed-tau", false) && fo.fit.tau.mode == TauSetting::Mode::cv) {
    const TruncationRule rule =
        choose_truncation(x.rows(0, fo.window), fo.fit.tau, fo.fit.d, 1);
    fo.fit.tau = TauSetting::fixed(rule.tau);
  }
  const ForecastRun run = rolling_forecast(x, fo);

  RunDirectory dir(require_out(cfg), cfg);
  Matrix origins(static_cast<Index>(run.origins.size()), 2);
  for (std::size_t k = 0; k < run.origins.size(); ++k) {
    origins(static_cast<Index>(k), 0) = static_cast<double>(run.origins[k] + 1);
    origins(static_cast<Index>(k), 1) = run.main.ok[k] && (!run.baseline || run.baseline->ok[k]) ? 1 : 0;
  }
  dir.write_matrix("origins.csv", origins, {"t", "aligned"});
  dir.write_matrix("realised.csv", run.realised, x.names());
  dir.write_matrix("forecast.csv", run.main.forecast, x.names());
  dir.write_matrix("forecast_common.csv", run.main.common, x.names());
  dir.write_matrix("forecast_idio.csv", run.main.idio, x.names());
  dir.write_matrix("fe.csv", absolute_errors(run, run.main), x.names());
  std::string failures;
  for (const auto& f : run.main.failures) failures += run.main.label + " " + f + '\n';
  if (run.baseline) {
    dir.write_matrix("forecast_baseline.csv", run.baseline->forecast, x.names());
    dir.write_matrix("fe_baseline.csv", absolute_errors(run, *run.baseline), x.names());
    for (const auto& f : run.baseline->failures) failures += run.baseline->label + " " + f + '\n';
  }
  dir.write_text("failures.txt", failures);
  dir.finish();
  out << "origins = " << run.origins.size() << ", aligned = " << run.aligned().size()
      << ", r = " << run.r << '\n';
  return 0;
}

std::vector<double> read_column(const fs::path& path, const std::string& column, Index* which = nullptr) {
  // Error streams may be a single unnamed column or a named panel column.
  std::ifstream probe(path);
  std::string first;
  std::getline(probe, first);
  double tmp = 0.0;
  const auto c0 = first.substr(0, first.find(','));
  const bool numeric_first =
      !c0.empty() && std::from_chars(c0.data(), c0.data() + c0.size(), tmp).ec == std::errc{};
  Matrix m;
  std::vector<std::string> names;
  {
    const PanelSeries ps = load_csv(path, !numeric_first);
    m = ps.values();
    names = ps.names();
  }
  Index col = 0;
  if (!column.empty()) {
    const auto it = std::find(names.begin(), names.end(), column);
    if (it == names.end()) throw Error(ErrorCategory::input, "column '" + column + "' not in " + path.string());
    col = it - names.begin();
  }
  if (which) *which = col;
  return std::vector<double>(m.col(col).data(), m.col(col).data() + m.rows());
}

std::string svg_path(const std::vector<double>& path, double cv) {
  const double w = 640, h = 320, pad = 30;
  double lo = -cv * 1.2, hi = cv * 1.2;
  for (double v : path) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  auto X = [&](std::size_t i) {
    return pad + (w - 2 * pad) * (path.size() < 2 ? 0.0 : static_cast<double>(i) / (path.size() - 1));
  };
  auto Y = [&](double v) { return pad + (h - 2 * pad) * (hi - v) / (hi - lo); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double c : {cv, -cv}) {
    s << "<line x1=\"" << pad << "\" x2=\"" << w - pad << "\" y1=\"" << Y(c) << "\" y2=\"" << Y(c)
      << "\" stroke=\"red\" stroke-dasharray=\"4 4\"/>\n";
  }
  s << "<line x1=\"" << pad << "\" x2=\"" << w - pad << "\" y1=\"" << Y(0) << "\" y2=\"" << Y(0)
    << "\" stroke=\"gray\"/>\n<polyline fill=\"none\" stroke=\"black\" points=\"";
  for (std::size_t i = 0; i < path.size(); ++i) s << X(i) << ',' << Y(path[i]) << ' ';
  s << "\"/>\n</svg>\n";
  return s.str();
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const std::string metric = cfg.get("metric", "rme");
  if (metric == "rme") {
    if (!cfg.has("trunc") || !cfg.has("plain")) {
      throw Error(ErrorCategory::config, "rme needs --trunc and --plain error files");
    }
    const MatrixNorm norm = parse_matrix_norm(cfg.get("norm", "max"));
    const auto a = read_column(cfg.get("trunc"), cfg.get("column"));
    const auto b = read_column(cfg.get("plain"), cfg.get("column"));
    const RmeReport r = rme_report(a, b);
    char ratio[32];
    std::snprintf(ratio, sizeof(ratio), "%.3f", r.ratio);
    out << cfg.get("label", "rme") << " & " << to_string(norm) << " & " << ratio << " \\\\\n";
    if (cfg.has("out")) {
      RunDirectory dir(cfg.get("out"), cfg);
      std::ostringstream s;
      s << "norm,numerator,denominator,ratio,count\n"
        << to_string(norm) << ',' << fmt(r.numerator) << ',' << fmt(r.denominator) << ','
        << fmt(r.ratio) << ',' << r.count << '\n';
      dir.write_text("rme.csv", s.str());
      dir.finish();
    }
    return 0;
  }
  if (metric == "summary") {
    const MatrixNorm norm = parse_matrix_norm(cfg.get("norm", "max_row_l2"));
    const auto e = read_column(cfg.get("trunc"), cfg.get("column"));
    const MetricReport r = summarise_errors(norm, e);
    out << "norm,count,mean,q25,median,q75\n"
        << to_string(norm) << ',' << r.errors.size() << ',' << fmt(r.mean) << ',' << fmt(r.q25)
        << ',' << fmt(r.median) << ',' << fmt(r.q75) << '\n';
    return 0;
  }
  if (metric == "fluctuation") {
    if (!cfg.has("fe-a") || !cfg.has("fe-b")) {
      throw Error(ErrorCategory::config, "fluctuation needs --fe-a and --fe-b");
    }
    const double mu = cfg.get_double("mu", 0.3);
    const PanelSeries fa = load_csv(cfg.get("fe-a"), true);
    const PanelSeries fb = load_csv(cfg.get("fe-b"), true);
    if (fa.p() != fb.p() || fa.n() != fb.n()) {
      throw Error(ErrorCategory::input, "forecast error files differ in shape");
    }
    std::vector<Index> cols;
    if (cfg.has("column")) {
      const auto it = std::find(fa.names().begin(), fa.names().end(), cfg.get("column"));
      if (it == fa.names().end()) throw Error(ErrorCategory::input, "unknown column " + cfg.get("column"));
      cols.push_back(it - fa.names().begin());
    } else {
      for (Index i = 0; i < fa.p(); ++i) cols.push_back(i);
    }
    std::optional<RunDirectory> dir;
    if (cfg.has("out")) dir.emplace(cfg.get("out"), cfg);
    std::ostringstream summary;
    summary << "variable,critical_value,min_stat,max_stat,favours_a,favours_b\n";
    for (Index i : cols) {
      const Vector a = fa.values().col(i), b = fb.values().col(i);
      const auto res = fluctuation_test(std::span<const double>(a.data(), a.size()),
                                        std::span<const double>(b.data(), b.size()), mu);
      double lo = 0.0, hi = 0.0;
      for (double v : res.path) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const std::string& name = fa.names()[static_cast<std::size_t>(i)];
      // Negative statistics mean smaller losses for series a.
      summary << name << ',' << fmt(res.critical_value) << ',' << fmt(lo) << ',' << fmt(hi)
              << ',' << (lo < -res.critical_value ? 1 : 0) << ','
              << (hi > res.critical_value ? 1 : 0) << '\n';
      if (dir) {
        Matrix pth(static_cast<Index>(res.path.size()), 2);
        for (std::size_t k = 0; k < res.path.size(); ++k) {
          pth(static_cast<Index>(k), 0) = static_cast<double>(k + res.window);
          pth(static_cast<Index>(k), 1) = res.path[k];
        }
        dir->write_matrix("fluctuation_" + name + ".csv", pth, {"window_end", "statistic"});
        if (cfg.get_bool("plot", false)) {
          dir->write_text("fluctuation_" + name + ".svg", svg_path(res.path, res.critical_value));
        }
      }
    }
    if (dir) {
      dir->write_text("fluctuation_summary.csv", summary.str());
      dir->finish();
    }
    out << summary.str();
    return 0;
  }
  throw Error(ErrorCategory::config, "unknown metric '" + metric + "'");
}

int cmd_experiment(const RunConfig& cfg, std::ostream& out) {
  ExperimentConfig ec;
  ec.dgp = dgp_options(cfg);
  ec.reps = static_cast<std::size_t>(cfg.get_int("reps", 200));
  ec.fit = model_options(cfg);
  if (!cfg.has("r") && !cfg.has("factors")) {
    ec.fit.r = ec.dgp.factor_design == FactorDesign::var1 ? ec.dgp.r : 0;
  }
  ec.fit.threads = 1;
  ec.threads = static_cast<std::size_t>(cfg.get_int("threads", 1));
  ec.plain_uses_same_tau = cfg.get_bool("same-tau", false);
  if (cfg.has("norms")) {
    ec.norms.clear();
    std::stringstream ss(cfg.get("norms"));
    std::string item;
    while (std::getline(ss, item, ',')) ec.norms.push_back(parse_matrix_norm(item));
  }
  const fs::path root = require_out(cfg);
  ec.out_dir = root;
  const ExperimentResult res = run_experiment(ec);

  RunDirectory dir(root, cfg);
  std::vector<std::string> header{"rep", "ok", "tau", "lambda_trunc", "lambda_plain"};
  for (auto n : ec.norms) {
    header.push_back("err_trunc_" + to_string(n));
    header.push_back("err_plain_" + to_string(n));
  }
  Matrix table(static_cast<Index>(res.replications.size()), static_cast<Index>(header.size()));
  table.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < res.replications.size(); ++i) {
    const auto& r = res.replications[i];
    const auto row = static_cast<Index>(i);
    table(row, 0) = static_cast<double>(i);
    table(row, 1) = r.ok ? 1.0 : 0.0;
    if (!r.ok) continue;
    table(row, 2) = r.tau;
    table(row, 3) = r.lambda_trunc;
    table(row, 4) = r.lambda_plain;
    for (std::size_t k = 0; k < ec.norms.size(); ++k) {
      table(row, static_cast<Index>(5 + 2 * k)) = r.err_trunc[k];
      table(row, static_cast<Index>(6 + 2 * k)) = r.err_plain[k];
    }
  }
  dir.write_matrix("replications.csv", table, header);
  std::ostringstream s;
  s << "norm,numerator,denominator,rme,successes,failures\n";
  std::ostringstream row;
  row << '(' << ec.dgp.n << ',' << ec.dgp.p << ')';
  for (std::size_t k = 0; k < ec.norms.size(); ++k) {
    const auto& r = res.rme[k];
    s << to_string(ec.norms[k]) << ',' << fmt(r.numerator) << ',' << fmt(r.denominator) << ','
      << fmt(r.ratio) << ',' << r.count << ',' << res.failures << '\n';
    char buf[32];
    std::snprintf(buf, sizeof(buf), " & %.3f", r.ratio);
    row << buf;
  }
  dir.write_text("rme.csv", s.str());
  dir.finish();
  out << row.str() << " \\\\\n";
  if (res.failures) out << res.failures << " replication(s) failed\n";
  return 0;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::input: return 3;
    case ErrorCategory::numeric: return 4;
    case ErrorCategory::convergence: return 5;
    case ErrorCategory::io: return 6;
  }
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail-robust factor-adjusted VAR estimation and forecasting"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::map<std::string, Subcommand> subs;
  auto add = [&](const std::string& name, const std::string& help,
                 const std::vector<OptionSpec>& specs) {
    Subcommand& sc = subs[name];
    sc.app = app.add_subcommand(name, help);
    declare(sc, specs);
  };
  add("simulate", "generate panels from a simulation design", concat({kCommon, kDgp}));
  add("estimate", "fit the truncated factor-adjusted VAR", concat({kCommon, kModel}));
  add("cv-tau", "cross-validate the truncation level", concat({kCommon, kModel}));
  add("forecast", "rolling-window forecasting",
      concat({kCommon, kModel,
              {{"window", "rolling window length T"},
               {"horizon", "forecast horizon h"},
               {"order", "VAR order (alias of --d)"},
               {"baseline", "also forecast without truncation", true},
               {"fixed-tau", "select tau once on the first window", true},
               {"reselect-r", "re-select r in every window", true}}}));
  add("evaluate", "error metrics and forecast comparison",
      concat({kCommon,
              {{"metric", "rme | summary | fluctuation"},
               {"norm", "max | l2_col_max | max_row_l2 | frobenius"},
               {"trunc", "error stream of the truncated estimator"},
               {"plain", "error stream of the untruncated estimator"},
               {"column", "column name to read"},
               {"label", "row label for the rme table line"},
               {"fe-a", "forecast errors of method a (CSV with header)"},
               {"fe-b", "forecast errors of method b"},
               {"mu", "fluctuation window fraction"},
               {"plot", "emit SVG plots", true}}}));
  add("experiment", "replicated simulation comparing truncated and untruncated fits",
      concat({kCommon, kDgp, kModel,
              {{"norms", "comma-separated error norms"},
               {"same-tau", "fit both arms with the same tau", true}}}));

  std::vector<std::string> owned = args;
  owned.insert(owned.begin(), "favar");
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "favar: error[config]: " << e.what() << '\n';
    return 2;
  }

  for (auto& [name, sc] : subs) {
    if (!sc.app->parsed()) continue;
    try {
      const RunConfig cfg = collect(sc, name);
      if (name == "simulate") return cmd_simulate(cfg, out);
      if (name == "estimate") return cmd_estimate(cfg, out);
      if (name == "cv-tau") return cmd_cv_tau(cfg, out);
      if (name == "forecast") return cmd_forecast(cfg, out);
      if (name == "evaluate") return cmd_evaluate(cfg, out);
      if (name == "experiment") return cmd_experiment(cfg, out);
    } catch (const Error& e) {
      err << "favar: error[" << to_string(e.category()) << "]: " << e.what() << '\n';
      return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
      err << "favar: error[io]: " << e.what() << '\n';
      return exit_code(ErrorCategory::io);
    }
  }
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace favar::cli
