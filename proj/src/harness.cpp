#include "nerm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "nerm/errors.hpp"
#include "nerm/optimizers.hpp"
#include "nerm/rng.hpp"

namespace nerm {

Algo parse_algo(std::string_view token) {
  if (token == "sgd") return Algo::sgd;
  if (token == "ssag") return Algo::ssag;
  if (token == "ssaga") return Algo::ssaga;
  if (token == "adagrad") return Algo::adagrad;
  throw ConfigError("unknown algorithm \"" + std::string(token) + "\"");
}

std::string format_algo(Algo a) {
  switch (a) {
    case Algo::sgd:
      return "sgd";
    case Algo::ssag:
      return "ssag";
    case Algo::ssaga:
      return "ssaga";
    case Algo::adagrad:
      return "adagrad";
  }
  return "sgd";
}

std::uint64_t stream_id_for(std::size_t gamma_index, int repetition,
                            int purpose) {
  return (static_cast<std::uint64_t>(gamma_index) << 32) |
         (static_cast<std::uint64_t>(repetition) << 8) |
         static_cast<std::uint64_t>(purpose);
}

std::uint64_t memory_report(Algo algo, std::uint64_t n, std::uint64_t d) {
  switch (algo) {
    case Algo::sgd:
      return 0;
    case Algo::ssag:
      return 8 * (d + 3);  // x_tilde plus the a, a~, s scalars
    case Algo::ssaga:
      return 8 * n + 8 * d;  // derivative table plus m
    case Algo::adagrad:
      return 8 * d;  // squared-gradient accumulator
  }
  return 0;
}

namespace {

bool all_finite(const DenseVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.task != "erm" && cfg.task != "auc")
    throw ConfigError("task must be \"erm\" or \"auc\"");
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (cfg.gamma_list.empty()) throw ConfigError("gamma list must be nonempty");
  for (double g : cfg.gamma_list)
    if (!(g > 0.0)) throw ConfigError("every gamma must be positive");
  if (cfg.lambda2 < 0.0 || cfg.lambda1 < 0.0)
    throw ConfigError("regularization weights must be nonnegative");
  if (cfg.algo != Algo::adagrad && cfg.c == 0.0 && cfg.lambda2 <= 0.0)
    throw ConfigError("c must be given explicitly when lambda2 = 0");
  if (cfg.task == "auc" && cfg.algo == Algo::ssaga)
    throw ConfigError(
        "ssaga is not available for the auc task (the pairwise sample space "
        "has n+*n- virtual samples)");
  if (cfg.algo == Algo::adagrad && cfg.lambda1 > 0.0)
    throw ConfigError("the proximal variant is not defined for adagrad");
  if (cfg.eval.k_perturbations < 1)
    throw ConfigError("eval perturbation count must be >= 1");
}

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void step(const Sample& s) = 0;
  virtual const DenseVector& theta() const = 0;
  virtual std::int64_t degenerate_steps() const { return 0; }
};

class SgdStepper : public Stepper {
 public:
  SgdStepper(std::size_t dim, LossKind loss, RegSpec reg, StepSchedule sched)
      : theta_(dim, 0.0), loss_(loss), reg_(reg), sched_(sched) {}
  void step(const Sample& s) override {
    sgd_step(theta_, s, loss_, reg_, sched_.eta(t_));
    ++t_;
  }
  const DenseVector& theta() const override { return theta_; }

 private:
  DenseVector theta_;
  LossKind loss_;
  RegSpec reg_;
  StepSchedule sched_;
  std::int64_t t_ = 1;
};

class SsagStepper : public Stepper {
 public:
  SsagStepper(const DenseVector& x_tilde, LossKind loss, RegSpec reg,
              StepSchedule sched, double beta_exponent)
      : state_(make_ssag(DenseVector(x_tilde.size(), 0.0), x_tilde,
                         beta_exponent)),
        loss_(loss),
        reg_(reg),
        sched_(sched) {}
  void step(const Sample& s) override { ssag_step(state_, s, loss_, reg_, sched_); }
  const DenseVector& theta() const override { return state_.theta; }
  std::int64_t degenerate_steps() const override {
    return state_.degenerate_steps;
  }

 private:
  SsagState state_;
  LossKind loss_;
  RegSpec reg_;
  StepSchedule sched_;
};

class SsagaStepper : public Stepper {
 public:
  SsagaStepper(const SparseDataset& ds, LossKind loss, RegSpec reg,
               StepSchedule sched, const NoiseSpec& noise, RngStream& init_rng)
      : state_(ssaga_init(ds, DenseVector(ds.dim, 0.0), loss, noise, init_rng)),
        loss_(loss),
        reg_(reg),
        sched_(sched) {}
  void step(const Sample& s) override {
    ssaga_step(state_, s, loss_, reg_, sched_);
  }
  const DenseVector& theta() const override { return state_.theta; }

 private:
  SsagaState state_;
  LossKind loss_;
  RegSpec reg_;
  StepSchedule sched_;
};

class AdagradStepper : public Stepper {
 public:
  AdagradStepper(std::size_t dim, LossKind loss, RegSpec reg, double base_eta,
                 double eps)
      : state_(make_adagrad(DenseVector(dim, 0.0), base_eta, eps)),
        loss_(loss),
        reg_(reg) {}
  void step(const Sample& s) override { adagrad_step(state_, s, loss_, reg_); }
  const DenseVector& theta() const override { return state_.theta; }

 private:
  AdagradState state_;
  LossKind loss_;
  RegSpec reg_;
};

std::optional<double> dataset_auc(const SparseDataset& ds,
                                  const DenseVector& theta) {
  if (ds.pos_ids.empty() || ds.neg_ids.empty()) return std::nullopt;
  DenseVector scores(ds.rows());
  for (std::size_t i = 0; i < ds.rows(); ++i) scores[i] = dot(ds.row(i), theta);
  return auc_metric(scores, ds.labels);
}

struct TaskBundle {
  std::optional<ErmTask> erm;
  std::optional<AucTask> auc;

  Sample draw(RngStream& rng) const {
    return erm ? draw_erm_sample(*erm, rng) : draw_auc_sample(*auc, rng);
  }
  std::size_t epoch_steps() const {
    return erm ? steps_per_epoch(*erm) : steps_per_epoch(*auc);
  }
  double objective(const DenseVector& theta, const EvalSpec& spec) const {
    return erm ? estimate_objective(*erm, theta, spec)
               : estimate_objective(*auc, theta, spec);
  }
  LossKind loss() const { return erm ? erm->loss : LossKind::squared_hinge; }
  RegSpec reg() const { return erm ? erm->reg : auc->reg; }
  DenseVector x_tilde() const {
    return erm ? ssag_xtilde(*erm) : ssag_xtilde(*auc);
  }
};

TaskBundle make_task(const RunConfig& cfg, const SparseDataset& train) {
  TaskBundle bundle;
  const RegSpec reg{cfg.lambda2, cfg.lambda1};
  if (cfg.task == "erm")
    bundle.erm = make_erm_task(train, cfg.loss, reg, cfg.noise);
  else
    bundle.auc = make_auc_task(train, reg, cfg.noise);
  return bundle;
}

std::unique_ptr<Stepper> make_stepper(const RunConfig& cfg,
                                      const SparseDataset& train,
                                      const TaskBundle& task,
                                      const StepSchedule& sched,
                                      RngStream& init_rng) {
  switch (cfg.algo) {
    case Algo::sgd:
      return std::make_unique<SgdStepper>(train.dim, task.loss(), task.reg(),
                                          sched);
    case Algo::ssag:
      return std::make_unique<SsagStepper>(task.x_tilde(), task.loss(),
                                           task.reg(), sched,
                                           cfg.beta_exponent);
    case Algo::ssaga:
      return std::make_unique<SsagaStepper>(train, task.loss(), task.reg(),
                                            sched, cfg.noise, init_rng);
    case Algo::adagrad:
      return std::make_unique<AdagradStepper>(train.dim, task.loss(),
                                              task.reg(), cfg.adagrad_eta,
                                              cfg.adagrad_eps);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace

CellResult run_cell(const RunConfig& cfg, const SparseDataset& train,
                    const SparseDataset* test, std::size_t gamma_index,
                    int repetition) {
  validate_config(cfg);
  const TaskBundle task = make_task(cfg, train);
  const double gamma = cfg.gamma_list.at(gamma_index);
  const StepSchedule sched{cfg.effective_c(), gamma};
  const std::uint64_t train_sid = stream_id_for(gamma_index, repetition, 0);
  RngStream train_stream(cfg.master_seed, train_sid);
  RngStream init_stream(cfg.master_seed,
                        stream_id_for(gamma_index, repetition, 1));
  EvalSpec eval = cfg.eval;
  const std::uint64_t eval_base = eval.eval_seed ? eval.eval_seed : cfg.master_seed;
  eval.eval_seed =
      derive_seed(eval_base, stream_id_for(gamma_index, repetition, 2));

  auto stepper = make_stepper(cfg, train, task, sched, init_stream);
  AveragerState averager;
  averager.gamma = gamma;

  const std::size_t epoch_steps = task.epoch_steps();
  const auto started = std::chrono::steady_clock::now();
  CellResult out;
  out.records.reserve(cfg.epochs);
  const std::string algo_name = format_algo(cfg.algo);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < epoch_steps; ++s) {
      const Sample sample = task.draw(train_stream);
      if (cfg.iterate_averaging) average_update(averager, stepper->theta());
      stepper->step(sample);
      ++out.steps;
    }
    const DenseVector& model =
        cfg.iterate_averaging ? averager.theta_bar : stepper->theta();

    TraceRecord rec;
    rec.algorithm = algo_name;
    rec.gamma = gamma;
    rec.repetition = repetition;
    rec.epoch = epoch;
    rec.seed_used = train_sid;

    const bool finite = all_finite(stepper->theta()) && all_finite(model);
    rec.train_objective = finite
                              ? task.objective(model, eval)
                              : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(rec.train_objective)) {
      if (task.auc) {
        rec.test_auc = dataset_auc(test ? *test : train, model);
      } else if (test) {
        rec.test_auc = dataset_auc(*test, model);
      }
    } else {
      rec.train_objective = std::numeric_limits<double>::quiet_NaN();
      out.diverged = true;
    }
    if (cfg.measure_time)
      rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    out.records.push_back(std::move(rec));
    if (out.diverged) break;  // abort this cell only
  }
  out.final_theta = cfg.iterate_averaging && !averager.theta_bar.empty()
                        ? averager.theta_bar
                        : stepper->theta();
  out.degenerate_steps = stepper->degenerate_steps();
  return out;
}

std::vector<TraceRecord> run_experiment(const RunConfig& cfg,
                                        const SparseDataset& train,
                                        const SparseDataset* test) {
  validate_config(cfg);
  if (cfg.algo != Algo::adagrad && cfg.lambda2 > 0.0 &&
      cfg.effective_c() * cfg.lambda2 <= 1.0) {
    std::cerr << "[warn] c = " << cfg.effective_c()
              << " does not satisfy c > 1/lambda2; the 1/t rate guarantees "
                 "need a larger c\n";
  }
  std::vector<TraceRecord> records;
  std::int64_t degenerate = 0;
  for (std::size_t g = 0; g < cfg.gamma_list.size(); ++g) {
    for (int r = 0; r < cfg.repetitions; ++r) {
      CellResult cell = run_cell(cfg, train, test, g, r);
      degenerate += cell.degenerate_steps;
      for (auto& rec : cell.records) records.push_back(std::move(rec));
    }
  }
  if (degenerate > 0)
    std::cerr << "[warn] ssag control coefficient fell back to 0 on "
              << degenerate << " steps (all-zero samples)\n";
  std::sort(records.begin(), records.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
              if (a.gamma != b.gamma) return a.gamma < b.gamma;
              if (a.repetition != b.repetition)
                return a.repetition < b.repetition;
              return a.epoch < b.epoch;
            });
  return records;
}

std::vector<TraceRecord> run_experiment(const RunConfig& cfg) {
  const SparseDataset train = load_libsvm(cfg.train_path);
  std::optional<SparseDataset> test;
  if (!cfg.test_path.empty())
    test = load_libsvm(cfg.test_path, train.dim >= 1
                                          ? std::optional<std::size_t>(train.dim)
                                          : std::nullopt);
  return run_experiment(cfg, train, test ? &*test : nullptr);
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<TraceRecord> sorted_copy(const std::vector<TraceRecord>& records) {
  std::vector<TraceRecord> out = records;
  std::sort(out.begin(), out.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
              if (a.gamma != b.gamma) return a.gamma < b.gamma;
              if (a.repetition != b.repetition)
                return a.repetition < b.repetition;
              return a.epoch < b.epoch;
            });
  return out;
}

}  // namespace

std::string format_csv(const std::vector<TraceRecord>& records) {
  std::ostringstream out;
  out << "algorithm,gamma,repetition,epoch,train_objective,test_auc,"
         "wall_time_ms,seed\n";
  for (const TraceRecord& r : sorted_copy(records)) {
    out << r.algorithm << ',' << fmt17(r.gamma) << ',' << r.repetition << ','
        << r.epoch << ',' << fmt17(r.train_objective) << ',';
    if (r.test_auc) out << fmt17(*r.test_auc);
    out << ',' << r.wall_time_ms << ',' << r.seed_used << '\n';
  }
  return out.str();
}

void emit_csv(const std::vector<TraceRecord>& records,
              const std::string& path) {
  if (records.empty()) throw ConfigError("emit_csv: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << format_csv(records);
}

std::string format_summary_json(const std::vector<TraceRecord>& records) {
  using json = nlohmann::ordered_json;
  const std::vector<TraceRecord> recs = sorted_copy(records);

  json results = json::array();
  // best final mean per algorithm; ties resolved toward the smaller gamma
  // by the ascending iteration order
  std::vector<std::pair<std::string, std::pair<double, double>>> best;

  std::size_t i = 0;
  int max_epoch = 0, max_rep = 0;
  for (const auto& r : recs) {
    max_epoch = std::max(max_epoch, r.epoch);
    max_rep = std::max(max_rep, r.repetition + 1);
  }
  while (i < recs.size()) {
    const std::string algo = recs[i].algorithm;
    const double gamma = recs[i].gamma;
    std::size_t j = i;
    while (j < recs.size() && recs[j].algorithm == algo &&
           recs[j].gamma == gamma)
      ++j;

    // epoch-wise objective mean/std across repetitions
    std::vector<std::vector<double>> by_epoch(max_epoch);
    for (std::size_t k = i; k < j; ++k)
      by_epoch[recs[k].epoch - 1].push_back(recs[k].train_objective);
    json mean = json::array(), std_dev = json::array();
    double final_mean = std::numeric_limits<double>::quiet_NaN();
    for (int e = 0; e < max_epoch; ++e) {
      if (by_epoch[e].empty()) {
        mean.push_back(nullptr);
        std_dev.push_back(nullptr);
        continue;
      }
      double m = 0.0;
      for (double v : by_epoch[e]) m += v;
      m /= static_cast<double>(by_epoch[e].size());
      double var = 0.0;
      for (double v : by_epoch[e]) var += (v - m) * (v - m);
      var /= static_cast<double>(by_epoch[e].size());
      mean.push_back(m);
      std_dev.push_back(std::sqrt(var));
      if (e == max_epoch - 1) final_mean = m;
    }

    json entry;
    entry["algorithm"] = algo;
    entry["gamma"] = gamma;
    entry["objective_mean"] = mean;
    entry["objective_std"] = std_dev;
    entry["final_objective_mean"] = final_mean;
    results.push_back(entry);

    auto it = std::find_if(best.begin(), best.end(),
                           [&](const auto& b) { return b.first == algo; });
    if (std::isfinite(final_mean)) {
      if (it == best.end())
        best.push_back({algo, {gamma, final_mean}});
      else if (final_mean < it->second.second)
        it->second = {gamma, final_mean};
    } else if (it == best.end()) {
      best.push_back(
          {algo, {gamma, std::numeric_limits<double>::quiet_NaN()}});
    }
    i = j;
  }

  json root;
  root["epochs"] = max_epoch;
  root["repetitions"] = max_rep;
  root["results"] = results;
  json best_obj;
  for (const auto& [algo, pick] : best) {
    json b;
    b["gamma"] = pick.first;
    b["final_objective_mean"] = pick.second;
    best_obj[algo] = b;
  }
  root["best"] = best_obj;
  return root.dump(2) + "\n";
}

void emit_summary_json(const std::vector<TraceRecord>& records,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << format_summary_json(records);
}

}  // namespace nerm
