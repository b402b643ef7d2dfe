#include "favar/experiment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "favar/rng.hpp"

namespace favar {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::filesystem::path rep_path(const std::filesystem::path& dir, std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof(name), "rep_%05zu.csv", i);
  return dir / "reps" / name;
}

void write_record(const std::filesystem::path& path, const ReplicationRecord& r,
                  const std::vector<MatrixNorm>& norms) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp);
    out << "index," << r.index << '\n'
        << "seed," << r.seed << '\n'
        << "ok," << (r.ok ? 1 : 0) << '\n'
        << "tau," << fmt(r.tau) << '\n'
        << "lambda_trunc," << fmt(r.lambda_trunc) << '\n'
        << "lambda_plain," << fmt(r.lambda_plain) << '\n';
    for (std::size_t k = 0; k < norms.size() && r.ok; ++k) {
      out << "err_trunc_" << to_string(norms[k]) << ',' << fmt(r.err_trunc[k]) << '\n';
      out << "err_plain_" << to_string(norms[k]) << ',' << fmt(r.err_plain[k]) << '\n';
    }
    if (!r.ok) out << "message," << r.message << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::optional<ReplicationRecord> read_record(const std::filesystem::path& path,
                                             const std::vector<MatrixNorm>& norms) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  ReplicationRecord r;
  r.err_trunc.assign(norms.size(), 0.0);
  r.err_plain.assign(norms.size(), 0.0);
  std::string line;
  std::size_t found = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::string key = line.substr(0, comma);
    const std::string val = line.substr(comma + 1);
    if (key == "message") { r.message = val; continue; }
    double v = 0.0;
    std::from_chars(val.data(), val.data() + val.size(), v);
    if (key == "index") r.index = std::stoull(val);
    else if (key == "seed") r.seed = std::stoull(val);
    else if (key == "ok") r.ok = val == "1";
    else if (key == "tau") r.tau = v;
    else if (key == "lambda_trunc") r.lambda_trunc = v;
    else if (key == "lambda_plain") r.lambda_plain = v;
    for (std::size_t k = 0; k < norms.size(); ++k) {
      if (key == "err_trunc_" + to_string(norms[k])) { r.err_trunc[k] = v; ++found; }
      if (key == "err_plain_" + to_string(norms[k])) { r.err_plain[k] = v; ++found; }
    }
  }
  if (r.ok && found != 2 * norms.size()) return std::nullopt;  // written with other norms
  return r;
}

}  // namespace

Matrix padded_truth(const Matrix& A, Index d) {
  Matrix out = Matrix::Zero(A.rows(), A.cols() * d);
  out.leftCols(A.cols()) = A;
  return out;
}

ReplicationRecord run_replication(const ExperimentConfig& cfg, std::size_t index) {
  ReplicationRecord rec;
  rec.index = index;
  rec.seed = derive_seed(cfg.dgp.seed, index);
  try {
    DgpSpec spec = cfg.dgp;
    spec.seed = rec.seed;
    const SimulatedPanel sim = simulate_panel(spec);
    const Matrix truth = padded_truth(sim.A, cfg.fit.d);

    FitOptions trunc_opts = cfg.fit;
    trunc_opts.threads = 1;
    const FavarFit ft = fit(sim.x, trunc_opts);

    FitOptions plain_opts = trunc_opts;
    if (cfg.plain_uses_same_tau) {
      plain_opts.tau = TauSetting::fixed(ft.rule.tau);
    } else {
      plain_opts.tau = TauSetting::none();
    }
    const FavarFit fp = fit(sim.x, plain_opts);

    rec.tau = ft.rule.tau;
    rec.lambda_trunc = ft.var.lambda;
    rec.lambda_plain = fp.var.lambda;
    for (MatrixNorm norm : cfg.norms) {
      rec.err_trunc.push_back(matrix_error(norm, ft.var.A, truth));
      rec.err_plain.push_back(matrix_error(norm, fp.var.A, truth));
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.message = e.what();
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.dgp.validate();
  cfg.fit.validate();
  if (cfg.norms.empty()) throw Error(ErrorCategory::config, "experiment needs at least one norm");

  ExperimentResult result;
  result.norms = cfg.norms;
  result.replications.resize(cfg.reps);
  std::vector<char> done(cfg.reps, 0);
  if (cfg.out_dir) {
    std::filesystem::create_directories(*cfg.out_dir / "reps");
    for (std::size_t i = 0; i < cfg.reps; ++i) {
      if (auto rec = read_record(rep_path(*cfg.out_dir, i), cfg.norms)) {
        result.replications[i] = std::move(*rec);
        done[i] = 1;
      }
    }
  }

  parallel_for(cfg.reps, cfg.threads, [&](std::size_t i) {
    if (done[i]) return;
    result.replications[i] = run_replication(cfg, i);
    if (cfg.out_dir) write_record(rep_path(*cfg.out_dir, i), result.replications[i], cfg.norms);
  });

  for (std::size_t k = 0; k < cfg.norms.size(); ++k) {
    std::vector<double> num, den;
    for (const auto& r : result.replications) {
      if (!r.ok) continue;
      num.push_back(r.err_trunc[k]);
      den.push_back(r.err_plain[k]);
    }
    result.rme.push_back(num.empty() ? RmeReport{} : rme_report(num, den));
  }
  for (const auto& r : result.replications) result.failures += r.ok ? 0 : 1;
  return result;
}

}  // namespace favar
