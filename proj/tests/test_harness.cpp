#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nerm/errors.hpp"
#include "nerm/harness.hpp"
#include "nerm/synth.hpp"

using namespace nerm;

namespace {

RunConfig base_config() {
  RunConfig cfg;
  cfg.task = "erm";
  cfg.algo = Algo::sgd;
  cfg.loss = LossKind::logistic;
  cfg.noise = NoiseSpec::dropout(0.3);
  cfg.lambda2 = 1e-2;
  cfg.gamma_list = {50.0};
  cfg.epochs = 2;
  cfg.repetitions = 1;
  cfg.master_seed = 42;
  cfg.measure_time = false;
  return cfg;
}

SparseDataset small_data(std::size_t n = 4) {
  RngStream rng(200, 0);
  return make_random_sparse_dataset(n, 6, 2, 4, rng, 0.5);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("algorithm tokens") {
  CHECK(parse_algo("ssag") == Algo::ssag);
  CHECK(format_algo(Algo::ssaga) == "ssaga");
  CHECK_THROWS_AS(parse_algo("saga"), ConfigError);
}

TEST_CASE("one epoch of an n=4 erm run is exactly n steps and one row") {
  const SparseDataset train = small_data(4);
  RunConfig cfg = base_config();
  cfg.epochs = 1;
  const CellResult cell = run_cell(cfg, train, nullptr, 0, 0);
  CHECK(cell.steps == 4);
  CHECK(cell.records.size() == 1);
  CHECK(cell.records[0].epoch == 1);
  CHECK(std::isfinite(cell.records[0].train_objective));
}

TEST_CASE("auc epochs take max(n+, n-) steps") {
  RngStream rng(201, 0);
  const SparseDataset train = make_separable_auc_dataset(3, 2, 8, rng);
  RunConfig cfg = base_config();
  cfg.task = "auc";
  cfg.epochs = 2;
  const CellResult cell = run_cell(cfg, train, nullptr, 0, 0);
  CHECK(cell.steps == 6);  // 2 epochs * max(3, 2)
  REQUIRE(cell.records.size() == 2);
  CHECK(cell.records[1].test_auc.has_value());  // training auc, no test set
}

TEST_CASE("identical config and seed produce byte-identical csv") {
  const SparseDataset train = small_data(5);
  RunConfig cfg = base_config();
  cfg.algo = Algo::ssag;
  cfg.gamma_list = {50.0, 100.0};
  cfg.repetitions = 2;
  const std::string a = format_csv(run_experiment(cfg, train));
  const std::string b = format_csv(run_experiment(cfg, train));
  CHECK(a == b);
  CHECK(a.substr(0, a.find('\n')) ==
        "algorithm,gamma,repetition,epoch,train_objective,test_auc,"
        "wall_time_ms,seed");
}

TEST_CASE("different seeds change the trajectory") {
  const SparseDataset train = small_data(5);
  RunConfig cfg = base_config();
  const std::string a = format_csv(run_experiment(cfg, train));
  cfg.master_seed = 43;
  const std::string b = format_csv(run_experiment(cfg, train));
  CHECK(a != b);
}

TEST_CASE("csv shape and parse-back") {
  TraceRecord rec;
  rec.algorithm = "ssag";
  rec.gamma = 100.0;
  rec.repetition = 0;
  rec.epoch = 1;
  rec.train_objective = 1.0 / 3.0;
  rec.wall_time_ms = 0;
  rec.seed_used = 7;
  SUBCASE("one record gives two lines with the empty auc field kept") {
    const std::string csv = format_csv({rec});
    std::istringstream in(csv);
    std::string header, line, extra;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, line));
    CHECK(!std::getline(in, extra));
    const auto fields = split(line, ',');
    REQUIRE(fields.size() == 8);
    CHECK(fields[0] == "ssag");
    CHECK(fields[5] == "");  // missing auc stays an empty column
  }
  SUBCASE("round trip reproduces every record bit for bit") {
    const SparseDataset train = small_data(6);
    RunConfig cfg = base_config();
    cfg.task = "auc";
    RngStream rng(202, 0);
    const SparseDataset auc_train = make_separable_auc_dataset(4, 4, 8, rng);
    const auto records = run_experiment(cfg, auc_train);
    const std::string csv = format_csv(records);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    std::size_t row = 0;
    std::string line;
    while (std::getline(in, line)) {
      const auto f = split(line, ',');
      REQUIRE(f.size() == 8);
      const TraceRecord& r = records[row];
      CHECK(f[0] == r.algorithm);
      CHECK(std::stod(f[1]) == r.gamma);
      CHECK(std::stoi(f[2]) == r.repetition);
      CHECK(std::stoi(f[3]) == r.epoch);
      CHECK(std::stod(f[4]) == r.train_objective);
      if (r.test_auc)
        CHECK(std::stod(f[5]) == *r.test_auc);
      else
        CHECK(f[5] == "");
      CHECK(std::stoll(f[6]) == r.wall_time_ms);
      CHECK(std::stoull(f[7]) == r.seed_used);
      ++row;
    }
    CHECK(row == records.size());
  }
}

TEST_CASE("summary json") {
  SUBCASE("single repetition yields zero stds and the best gamma") {
    const SparseDataset train = small_data(5);
    RunConfig cfg = base_config();
    cfg.gamma_list = {10.0, 100.0};
    cfg.epochs = 3;
    const auto records = run_experiment(cfg, train);
    const auto summary = nlohmann::json::parse(format_summary_json(records));
    REQUIRE(summary["results"].size() == 2);
    for (const auto& entry : summary["results"]) {
      REQUIRE(entry["objective_std"].size() == 3);
      for (const auto& s : entry["objective_std"])
        CHECK(s.get<double>() == 0.0);
    }
    // the pick must match a manual scan of final objectives
    double best_val = 1e300, best_gamma = 0.0;
    for (const auto& entry : summary["results"]) {
      const double v = entry["final_objective_mean"].get<double>();
      if (v < best_val) {
        best_val = v;
        best_gamma = entry["gamma"].get<double>();
      }
    }
    CHECK(summary["best"]["sgd"]["gamma"].get<double>() == best_gamma);
  }
  SUBCASE("ties go to the smallest gamma") {
    std::vector<TraceRecord> recs;
    for (double gamma : {100.0, 10.0}) {
      TraceRecord r;
      r.algorithm = "sgd";
      r.gamma = gamma;
      r.repetition = 0;
      r.epoch = 1;
      r.train_objective = 0.5;
      recs.push_back(r);
    }
    const auto summary = nlohmann::json::parse(format_summary_json(recs));
    CHECK(summary["best"]["sgd"]["gamma"].get<double>() == 10.0);
  }
  SUBCASE("means and stds agree with recomputation from the records") {
    const SparseDataset train = small_data(6);
    RunConfig cfg = base_config();
    cfg.repetitions = 3;
    cfg.epochs = 2;
    const auto records = run_experiment(cfg, train);
    const auto summary = nlohmann::json::parse(format_summary_json(records));
    for (int epoch = 1; epoch <= 2; ++epoch) {
      double mean = 0.0;
      int count = 0;
      for (const auto& r : records)
        if (r.epoch == epoch) {
          mean += r.train_objective;
          ++count;
        }
      mean /= count;
      double var = 0.0;
      for (const auto& r : records)
        if (r.epoch == epoch)
          var += (r.train_objective - mean) * (r.train_objective - mean);
      var /= count;
      const auto& entry = summary["results"][0];
      CHECK(entry["objective_mean"][epoch - 1].get<double>() ==
            doctest::Approx(mean).epsilon(1e-15));
      CHECK(entry["objective_std"][epoch - 1].get<double>() ==
            doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }
  }
}

TEST_CASE("a diverging cell records a nan row and spares the others") {
  const SparseDataset train = small_data(4);
  RunConfig cfg = base_config();
  cfg.loss = LossKind::squared;  // unbounded derivative blows up fast
  cfg.noise = NoiseSpec::none();
  cfg.c = 1e18;
  cfg.gamma_list = {1.0, 1e30};  // second cell steps tinily and survives
  cfg.epochs = 8;
  const auto records = run_experiment(cfg, train);

  // the exploding cell ends with exactly one failure row and stops there
  std::vector<const TraceRecord*> bad, good;
  for (const auto& r : records)
    (r.gamma == 1.0 ? bad : good).push_back(&r);
  REQUIRE(!bad.empty());
  CHECK(bad.size() < 8);
  for (std::size_t i = 0; i + 1 < bad.size(); ++i)
    CHECK(std::isfinite(bad[i]->train_objective));
  CHECK(std::isnan(bad.back()->train_objective));

  // the tiny-step cell is untouched and finishes every epoch
  REQUIRE(good.size() == 8);
  for (const auto* r : good) CHECK(std::isfinite(r->train_objective));

  const std::string csv = format_csv(records);
  CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("memory report follows the storage accounting") {
  CHECK(memory_report(Algo::sgd, 1000000, 1000000) == 0);
  const std::uint64_t ssag = memory_report(Algo::ssag, 1, 1000000);
  CHECK(ssag == 8ull * (1000000 + 3));
  CHECK(std::fabs(static_cast<double>(ssag) - 8e6) <= 0.01 * 8e6);  // ~8 MB
  const std::uint64_t ssaga = memory_report(Algo::ssaga, 1000000, 1000);
  CHECK(ssaga == 8ull * 1000000 + 8ull * 1000);
  CHECK(memory_report(Algo::adagrad, 5, 100) == 800);
  // orderings from the storage table: sgd < ssag (O(d)) < ssaga (O(n)+O(d))
  CHECK(memory_report(Algo::sgd, 1000000, 1000000) <
        memory_report(Algo::ssag, 1000000, 1000000));
  CHECK(memory_report(Algo::ssag, 1000000, 1000000) <
        memory_report(Algo::ssaga, 1000000, 1000000));
}

TEST_CASE("stream ids never collide across the sweep grid") {
  std::set<std::uint64_t> seen;
  for (std::size_t g = 0; g < 10; ++g)
    for (int r = 0; r < 10; ++r)
      for (int purpose = 0; purpose < 3; ++purpose)
        CHECK(seen.insert(stream_id_for(g, r, purpose)).second);
}

TEST_CASE("config validation") {
  const SparseDataset train = small_data(4);
  RunConfig cfg = base_config();
  SUBCASE("ssaga cannot run the auc task") {
    RngStream rng(203, 0);
    const SparseDataset auc_train = make_separable_auc_dataset(3, 3, 8, rng);
    cfg.task = "auc";
    cfg.algo = Algo::ssaga;
    CHECK_THROWS_AS(run_experiment(cfg, auc_train), ConfigError);
  }
  SUBCASE("adagrad rejects the l1 modifier") {
    cfg.algo = Algo::adagrad;
    cfg.lambda1 = 0.1;
    CHECK_THROWS_AS(run_experiment(cfg, train), ConfigError);
  }
  SUBCASE("c is required when lambda2 is 0") {
    cfg.lambda2 = 0.0;
    CHECK_THROWS_AS(run_experiment(cfg, train), ConfigError);
    cfg.c = 1.0;
    CHECK_NOTHROW(run_experiment(cfg, train));
  }
  SUBCASE("empty gamma list is rejected") {
    cfg.gamma_list.clear();
    CHECK_THROWS_AS(run_experiment(cfg, train), ConfigError);
  }
}

TEST_CASE("file-based experiment round trip") {
  const SparseDataset train = small_data(5);
  const std::string path = "test_harness_tmp.libsvm";
  {
    std::ofstream out(path);
    serialize_libsvm(train, out);
  }
  RunConfig cfg = base_config();
  cfg.train_path = path;
  cfg.epochs = 1;
  const auto records = run_experiment(cfg);
  std::remove(path.c_str());
  CHECK(records.size() == 1);

  const std::string csv_path = "test_harness_tmp.csv";
  emit_csv(records, csv_path);
  std::ifstream in(csv_path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "algorithm,gamma,repetition,epoch,train_objective,test_auc,"
        "wall_time_ms,seed");
  in.close();
  std::remove(csv_path.c_str());
}

TEST_SUITE_END();
