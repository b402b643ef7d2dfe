#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "favar/evaluate.hpp"
#include "favar/pipeline.hpp"
#include "favar/simulate.hpp"

namespace favar {

/// One simulation table cell: `reps` replications of the DGP, each fitted
/// with the configured truncation and with tau = inf.
struct ExperimentConfig {
  DgpSpec dgp;                  // dgp.seed is the master seed
  std::size_t reps = 200;
  FitOptions fit;               // truncated arm; the plain arm uses tau = inf
  bool plain_uses_same_tau = false;  // both arms use fit.tau (sanity runs)
  std::vector<MatrixNorm> norms{MatrixNorm::max_elementwise, MatrixNorm::l2_col_max,
                                MatrixNorm::max_row_l2};
  std::optional<std::filesystem::path> out_dir;  // persistence + resume
  std::size_t threads = 1;      // parallel replications
};

struct ReplicationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double tau = 0.0;
  double lambda_trunc = 0.0;
  double lambda_plain = 0.0;
  std::vector<double> err_trunc;  // one per norm
  std::vector<double> err_plain;
  std::string message;
};

struct ExperimentResult {
  std::vector<ReplicationRecord> replications;
  std::vector<MatrixNorm> norms;
  std::vector<RmeReport> rme;  // one per norm, over successful replications
  std::size_t failures = 0;
};

/// Runs (or resumes) the experiment. With out_dir set, each finished
/// replication is written to out_dir/reps/rep_<i>.csv and skipped on rerun.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Single replication (exposed for tests).
ReplicationRecord run_replication(const ExperimentConfig& cfg, std::size_t index);

/// True VAR coefficient matrix [A, 0, ..., 0] padded to p x pd.
Matrix padded_truth(const Matrix& A, Index d);

}  // namespace favar
