#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nerm/errors.hpp"
#include "nerm/harness.hpp"
#include "nerm/losses.hpp"
#include "nerm/noise.hpp"
#include "nerm/verify.hpp"

namespace {

std::string human_bytes(std::uint64_t bytes) {
  char buf[64];
  if (bytes >= 1ull << 20)
    std::snprintf(buf, sizeof(buf), "%.1f MiB",
                  static_cast<double>(bytes) / (1ull << 20));
  else if (bytes >= 1ull << 10)
    std::snprintf(buf, sizeof(buf), "%.1f KiB",
                  static_cast<double>(bytes) / (1ull << 10));
  else
    std::snprintf(buf, sizeof(buf), "%" PRIu64 " B", bytes);
  return buf;
}

int run_train(const nerm::RunConfig& cfg_in, const std::string& noise_token,
              const std::string& algo_token, const std::string& loss_token) {
  nerm::RunConfig cfg = cfg_in;
  cfg.noise = nerm::NoiseSpec::parse(noise_token);
  cfg.algo = nerm::parse_algo(algo_token);
  cfg.loss = nerm::parse_loss(loss_token);

  const nerm::SparseDataset train = nerm::load_libsvm(cfg.train_path);
  std::optional<nerm::SparseDataset> test;
  if (!cfg.test_path.empty()) test = nerm::load_libsvm(cfg.test_path, train.dim);

  const std::uint64_t extra =
      nerm::memory_report(cfg.algo, train.rows(), train.dim);
  std::cout << "extra storage for " << nerm::format_algo(cfg.algo)
            << " (n=" << train.rows() << ", d=" << train.dim
            << "): " << extra << " bytes (" << human_bytes(extra) << ")\n";

  const std::vector<nerm::TraceRecord> records =
      nerm::run_experiment(cfg, train, test ? &*test : nullptr);

  const std::string csv_path = cfg.out_prefix + ".csv";
  const std::string json_path = cfg.out_prefix + ".summary.json";
  nerm::emit_csv(records, csv_path);
  nerm::emit_summary_json(records, json_path);
  std::cout << "wrote " << records.size() << " rows to " << csv_path
            << " and the sweep summary to " << json_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stochastic optimizers (sgd/ssag/ssaga/adagrad) for noise-perturbed "
      "linear models, with a benchmark harness and a brute-force "
      "verification suite"};
  app.require_subcommand(1);

  // --- train ---------------------------------------------------------------
  nerm::RunConfig cfg;
  std::string noise_token = "none";
  std::string algo_token = "sgd";
  std::string loss_token = "logistic";
  bool no_timing = false;

  CLI::App* train = app.add_subcommand("train", "run a sweep and emit traces");
  train->add_option("--task", cfg.task, "erm|auc")->default_val("erm");
  train->add_option("--data", cfg.train_path, "training set, LIBSVM text (.gz ok)")
      ->required();
  train->add_option("--test", cfg.test_path, "held-out set for the AUC column");
  train->add_option("--algo", algo_token, "sgd|ssag|ssaga|adagrad")->required();
  train->add_option("--loss", loss_token, "logistic|sqhinge|squared (erm only)");
  train->add_option("--noise", noise_token, "none|dropout:<p>|gauss:<sigma>");
  train->add_option("--lambda", cfg.lambda2, "l2 weight")->required();
  train->add_option("--l1", cfg.lambda1, "l1 weight (enables the prox step)");
  train->add_option("--c", cfg.c, "stepsize numerator (default 2/lambda)");
  train->add_option("--gammas", cfg.gamma_list, "stepsize offsets to sweep")
      ->required()
      ->delimiter(',');
  train->add_option("--beta-exp", cfg.beta_exponent,
                    "ssag moving-average exponent c2");
  train->add_option("--epochs", cfg.epochs, "epochs per cell");
  train->add_option("--reps", cfg.repetitions, "repetitions per gamma");
  train->add_option("--seed", cfg.master_seed, "master seed");
  train->add_option("--eval-perturbations", cfg.eval.k_perturbations,
                    "perturbations per sample in objective estimates");
  train->add_option("--eval-seed", cfg.eval.eval_seed,
                    "evaluation seed (default: master seed)");
  train->add_option("--max-pairs", cfg.eval.max_pairs,
                    "pair subsample cap for the auc objective");
  train->add_flag("--iterate-averaging", cfg.iterate_averaging,
                  "evaluate and report the averaged iterate");
  train->add_option("--adagrad-eta", cfg.adagrad_eta, "adagrad base stepsize");
  train->add_option("--adagrad-eps", cfg.adagrad_eps, "adagrad denominator floor");
  train->add_flag("--no-timing", no_timing,
                  "record wall_time_ms as 0 so CSV bytes are reproducible");
  train->add_option("--out", cfg.out_prefix, "output prefix")->required();

  // --- verify ---------------------------------------------------------------
  CLI::App* verify =
      app.add_subcommand("verify", "run the oracle suite, print pass/fail");

  // --- meminfo ---------------------------------------------------------------
  CLI::App* meminfo =
      app.add_subcommand("meminfo", "extra-storage estimate vs plain sgd");
  std::string mem_algo = "ssag";
  std::uint64_t mem_n = 0, mem_d = 0;
  meminfo->add_option("--algo", mem_algo, "sgd|ssag|ssaga|adagrad")->required();
  meminfo->add_option("--n", mem_n, "sample count")->required();
  meminfo->add_option("--d", mem_d, "feature dimension")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      cfg.measure_time = !no_timing;
      return run_train(cfg, noise_token, algo_token, loss_token);
    }
    if (verify->parsed()) {
      const int failures = nerm::print_verification_table(std::cout);
      return failures == 0 ? 0 : 1;
    }
    if (meminfo->parsed()) {
      const nerm::Algo algo = nerm::parse_algo(mem_algo);
      const std::uint64_t extra = nerm::memory_report(algo, mem_n, mem_d);
      std::cout << nerm::format_algo(algo) << " extra storage for n=" << mem_n
                << ", d=" << mem_d << ": " << extra << " bytes ("
                << human_bytes(extra) << "); iterate averaging adds another "
                << 8 * mem_d << " bytes\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
