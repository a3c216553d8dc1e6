#ifndef NERM_HARNESS_HPP
#define NERM_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nerm/noise.hpp"
#include "nerm/sparse.hpp"
#include "nerm/tasks.hpp"

namespace nerm {

enum class Algo { sgd, ssag, ssaga, adagrad };

Algo parse_algo(std::string_view token);  // "sgd"|"ssag"|"ssaga"|"adagrad"
std::string format_algo(Algo a);

struct RunConfig {
  std::string task = "erm";  // "erm" | "auc"
  std::string train_path;
  std::string test_path;  // optional
  Algo algo = Algo::sgd;
  LossKind loss = LossKind::logistic;  // ERM loss; AUC always squared hinge
  NoiseSpec noise;
  double lambda2 = 0.0;
  double lambda1 = 0.0;
  double c = 0.0;  // stepsize numerator; 0 means the 2/lambda2 default
  std::vector<double> gamma_list;
  double beta_exponent = 0.75;
  int epochs = 20;
  int repetitions = 5;
  std::uint64_t master_seed = 42;
  EvalSpec eval;  // eval_seed 0 means "use master_seed"
  bool iterate_averaging = false;
  double adagrad_eta = 0.1;
  double adagrad_eps = 1e-8;
  bool measure_time = true;  // off: wall_time_ms = 0, byte-reproducible CSV
  std::string out_prefix;

  double effective_c() const { return c != 0.0 ? c : 2.0 / lambda2; }
};

// One measurement row; epochs increase strictly within a
// (algorithm, gamma, repetition) group. A diverged cell contributes a final
// row with train_objective = NaN and then stops.
struct TraceRecord {
  std::string algorithm;
  double gamma = 0.0;
  int repetition = 0;
  int epoch = 0;
  double train_objective = 0.0;
  std::optional<double> test_auc;
  std::int64_t wall_time_ms = 0;
  std::uint64_t seed_used = 0;
};

// Pure seed-derivation scheme: the cell at (gamma index g, repetition r)
// draws from streams (master_seed, stream_id_for(g, r, purpose)), with
// purpose 0 = training draws, 1 = initialization, 2 = evaluation. Ids never
// collide across the sweep grid.
std::uint64_t stream_id_for(std::size_t gamma_index, int repetition,
                            int purpose);

struct CellResult {
  std::vector<TraceRecord> records;
  std::int64_t steps = 0;
  DenseVector final_theta;  // averaged iterate when averaging is on
  bool diverged = false;
  std::int64_t degenerate_steps = 0;
};

// Runs one (gamma, repetition) cell against in-memory data.
CellResult run_cell(const RunConfig& cfg, const SparseDataset& train,
                    const SparseDataset* test, std::size_t gamma_index,
                    int repetition);

// Full sweep: every gamma in gamma_list x every repetition, records sorted
// by (algorithm, gamma, repetition, epoch). A diverged cell never stops the
// others.
std::vector<TraceRecord> run_experiment(const RunConfig& cfg,
                                        const SparseDataset& train,
                                        const SparseDataset* test = nullptr);

// Loads train/test from cfg paths (gzip-aware) and runs the sweep.
std::vector<TraceRecord> run_experiment(const RunConfig& cfg);

// Header "algorithm,gamma,repetition,epoch,train_objective,test_auc,
// wall_time_ms,seed"; floats at 17 significant digits; missing AUC as an
// empty field. Records are sorted before writing.
void emit_csv(const std::vector<TraceRecord>& records, const std::string& path);
std::string format_csv(const std::vector<TraceRecord>& records);

// Per-(algorithm, gamma) epoch-wise mean/std of the objective across
// repetitions plus the best-gamma pick by final mean objective (ties go to
// the smallest gamma). See README for the schema.
void emit_summary_json(const std::vector<TraceRecord>& records,
                       const std::string& path);
std::string format_summary_json(const std::vector<TraceRecord>& records);

// Analytic extra storage vs plain SGD, in bytes (8-byte reals):
// sgd 0; ssag one dense vector + 3 scalars; ssaga n scalars + one dense
// vector; adagrad one dense accumulator.
std::uint64_t memory_report(Algo algo, std::uint64_t n, std::uint64_t d);

}  // namespace nerm

#endif
