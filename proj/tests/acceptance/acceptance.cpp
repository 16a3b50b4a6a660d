// Acceptance suite: one PASS/FAIL line per criterion.
//
//   rssi_acceptance [criterion|all] [path/to/rssi]
//
// The rssi executable is only needed by criterion 9. Exit status is 0 when
// every selected criterion passes.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../support/gradient_check.hpp"
#include "../support/reference_rows.hpp"
#include "json.hpp"
#include "rssi/data/csv.hpp"
#include "rssi/data/dataset.hpp"
#include "rssi/data/sequence.hpp"
#include "rssi/data/synthetic.hpp"
#include "rssi/evaluation/compare.hpp"
#include "rssi/evaluation/evaluate.hpp"
#include "rssi/format.hpp"
#include "rssi/models/models.hpp"
#include "rssi/numerics/dropout.hpp"
#include "rssi/numerics/loss.hpp"
#include "rssi/numerics/optimizer.hpp"
#include "rssi/random.hpp"
#include "rssi/training/train.hpp"

namespace fs = std::filesystem;
using namespace rssi;
using namespace rssi::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fixed(double v, int decimals = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

void check_budget(Outcome& o, Clock::time_point t0, double budget_s) {
  const double s = seconds_since(t0);
  if (s <= budget_s) {
    o.note("runtime " + fixed(s, 1) + " s");
  } else {
    o.check(false, "runtime " + fixed(s, 1) + " s exceeds " + fixed(budget_s, 0) + " s");
  }
}

Dataset default_data(std::uint64_t seed) {
  return generate_synthetic(SyntheticConfig{}, derive_seed(seed, "data"));
}

// 1. Improvement arithmetic.
Outcome criterion_improvement(const std::string&) {
  constexpr double kTol = 0.01;
  Outcome o;
  const struct {
    double ours, expected;
  } cases[] = {{5.30, 88.29}, {1.15, 97.46}};
  for (const auto& c : cases) {
    const double got = improvement_pct(45.25, c.ours);
    o.check(std::abs(got - c.expected) <= kTol,
            "improvement(45.25, " + fixed(c.ours, 2) + ") = " + fixed(got));
    o.note(fixed(c.ours, 2) + " -> " + fixed(got, 2) + "%");
  }
  return o;
}

// 2. RMSE values printed to two decimals.
Outcome criterion_rmse(const std::string&) {
  Outcome o;
  const struct {
    double mse;
    const char* printed;
  } cases[] = {{5.30, "2.30"}, {8.62, "2.93"}, {51.44, "7.17"}, {0.27, "0.52"}, {0.19, "0.43"}};
  for (const auto& c : cases) {
    const std::string got = format_fixed(rmse(c.mse), 2);
    o.check(got == c.printed, "rmse(" + fixed(c.mse, 2) + ") printed " + got);
  }
  o.note("5 values");
  return o;
}

// 3. Gradient checks.
Outcome criterion_gradients(const std::string&) {
  constexpr double kTol = 1e-6;
  constexpr std::uint64_t kSeeds = 20;
  const auto t0 = Clock::now();
  Outcome o;
  const std::pair<const char*, std::function<GradCheck(std::uint64_t)>> families[] = {
      {"FeatureANN", [](std::uint64_t s) { return check_feature_ann(s); }},
      {"SequenceANN", [](std::uint64_t s) { return check_sequence_ann(s); }},
      {"RNN", [](std::uint64_t s) { return check_rnn(s); }},
      {"LSTM", [](std::uint64_t s) { return check_lstm(s); }},
  };
  for (const auto& [name, run] : families) {
    double worst = 0.0;
    for (std::uint64_t s = 0; s < kSeeds; ++s) {
      const GradCheck r = run(s);
      worst = std::max(worst, r.relative_error);
      o.check(r.relative_error <= kTol,
              std::string(name) + " seed " + std::to_string(s) + " rel err " +
                  std::to_string(r.relative_error));
    }
    std::ostringstream w;
    w << name << " max " << std::scientific << std::setprecision(1) << worst;
    o.note(w.str());
  }
  check_budget(o, t0, 60.0);
  return o;
}

// 4. Optimizer oracles.
Outcome criterion_optimizers(const std::string&) {
  constexpr double kFirstStepTol = 1e-6;
  constexpr double kTarget = 0.1;
  constexpr int kMaxSteps = 2000;
  constexpr double kLr = 0.01;
  const auto t0 = Clock::now();
  Outcome o;
  for (double lr : {0.001, 0.01}) {
    for (double g : {1e-3, 1.0, 10.0}) {
      Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 5.0);
      OptimizerState<double> state(1);
      adam_step(theta, Eigen::VectorXd(Eigen::VectorXd::Constant(1, g)), state, lr);
      const double step = std::abs(theta[0] - 5.0);
      o.check(std::abs(step - lr) <= kFirstStepTol,
              "first Adam step " + std::to_string(step) + " for lr " + std::to_string(lr));
    }
  }
  for (auto kind : {OptimizerKind::Adam, OptimizerKind::NAdam}) {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 5.0);
    OptimizerState<double> state(1);
    int reached = -1;
    for (int k = 1; k <= kMaxSteps && reached < 0; ++k) {
      const Eigen::VectorXd grad = 2.0 * theta;
      optimizer_step(kind, theta, grad, state, kLr);
      if (std::abs(theta[0]) < kTarget) reached = k;
    }
    const std::string name(to_string(kind));
    o.check(reached > 0, name + " did not reach |theta| < 0.1");
    o.note(name + " reached in " + std::to_string(reached) + " steps");
  }
  check_budget(o, t0, 5.0);
  return o;
}

// 5. Encoding and the published example rows.
Outcome criterion_encoding(const std::string&) {
  Outcome o;
  for (int loc = kMinLocation; loc <= kMaxLocation; ++loc) {
    o.check(encode_category(loc) == expected_category(loc),
            "L" + std::to_string(loc) + " -> " + std::to_string(encode_category(loc)));
  }
  for (const auto& row : reference_rows()) {
    const Dataset ds = parse_csv_text(std::string(kCsvHeader) + "\n" + row.csv + "\n");
    const std::string key = ds.size() == 1 ? to_string(feature_triple(ds.records[0])) : "?";
    o.check(key == row.key, row.csv + " gave " + key + ", expected " + row.key);
  }
  o.note("40 locations, " + std::to_string(reference_rows().size()) + " rows");
  return o;
}

// 6. FeatureANN beats OLS and LSTM on the feature task.
Outcome criterion_ordering(const std::string&) {
  constexpr int kRequired = 4;
  const std::uint64_t seeds[] = {1, 2, 3, 4, 5};
  const auto t0 = Clock::now();
  Outcome o;
  int held = 0;
  for (std::uint64_t seed : seeds) {
    ComparisonSpec spec = table2_suite(seed);
    std::erase_if(spec.entries, [](const ComparisonEntry& e) { return e.kind == ModelKind::Rnn; });
    const ComparisonTable t = build_comparison(default_data(seed), spec);
    double feature = 0, ols = 0, lstm = 0;
    for (const auto& r : t.rows) {
      if (r.kind == ModelKind::FeatureAnn) feature = r.test.mse;
      if (r.kind == ModelKind::Ols) ols = r.test.mse;
      if (r.kind == ModelKind::Lstm) lstm = r.test.mse;
    }
    const bool ok = feature < ols && feature < lstm;
    held += ok ? 1 : 0;
    o.note("seed " + std::to_string(seed) + ": ann " + fixed(feature) + " ols " + fixed(ols) +
           " lstm " + fixed(lstm) + (ok ? "" : " (violated)"));
  }
  o.check(held >= kRequired, "ordering held on " + std::to_string(held) + " of 5 seeds");
  check_budget(o, t0, 15 * 60.0);
  return o;
}

// 7. Noise-free data is learnable.
Outcome criterion_noiseless(const std::string&) {
  constexpr double kFeatureMax = 0.05;
  constexpr double kSequenceMax = 0.01;
  constexpr std::uint64_t kSeed = 7;
  const auto t0 = Clock::now();
  Outcome o;
  SyntheticConfig cfg;
  cfg.sigma_los_db = 0.0;
  cfg.sigma_nlos_db = 0.0;
  const Dataset data = generate_synthetic(cfg, derive_seed(kSeed, "data"));

  const auto [train, test] = split_random(data, kTrainFraction, derive_seed(kSeed, "split"));
  const FeatureTrainResult f = train_feature_model(train, TrainConfig::feature_defaults(kSeed));
  o.check(f.report.final_train_mse <= kFeatureMax,
          "FeatureANN train MSE " + fixed(f.report.final_train_mse, 6));
  o.note("FeatureANN train MSE " + fixed(f.report.final_train_mse, 6));

  const SelectedSequence seq = select_sequence(data, FeatureTriple{3.0, 0, 0});
  const SequenceTrainResult s = train_sequence_model(seq, TrainConfig::sequence_defaults(kSeed));
  const EvalMetrics m = evaluate(AnyModel(s.model), s.split.test.inputs, s.split.test.targets);
  o.check(m.mse <= kSequenceMax, "SequenceANN test MSE " + fixed(m.mse, 6));
  o.note("SequenceANN [3,0,0] test MSE " + fixed(m.mse, 6));
  check_budget(o, t0, 5 * 60.0);
  return o;
}

// 8. Dropout mask statistics and deterministic inference.
Outcome criterion_dropout(const std::string&) {
  constexpr int kMasks = 10000;
  constexpr Index kWidth = 64;
  constexpr double kTol = 0.05;
  Outcome o;
  Rng rng(derive_seed(8, "dropout"));
  long dropped = 0;
  for (int k = 0; k < kMasks; ++k) {
    const DropoutMask mask = sample_dropout_mask(kWidth, kSequenceDropout, rng);
    dropped += (!mask.keep).count();
  }
  const double frac = static_cast<double>(dropped) / (static_cast<double>(kMasks) * kWidth);
  o.check(std::abs(frac - 0.5) <= kTol, "drop fraction " + fixed(frac));
  o.note("drop fraction " + fixed(frac));

  Rng data_rng(derive_seed(8, "data"));
  std::normal_distribution<double> noise(-60.0, 2.0);
  Eigen::VectorXd series(400);
  for (Index i = 0; i < series.size(); ++i) series[i] = noise(data_rng);
  const SequenceTrainResult s = train_sequence_model(
      SelectedSequence{FeatureTriple{3.0, 0, 0}, series}, TrainConfig::sequence_defaults(8).with_epochs(20), 4);
  const AnyModel model(s.model);
  const Eigen::VectorXd a = predict(model, s.split.test.inputs);
  const Eigen::VectorXd b = predict(model, s.split.test.inputs);
  const Eigen::VectorXd c = predict(AnyModel(s.model), s.split.test.inputs);
  const bool same = a.size() == b.size() && a.size() == c.size() &&
                    std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0 &&
                    std::memcmp(a.data(), c.data(), sizeof(double) * a.size()) == 0;
  o.check(same, "repeated inference differs");

  Eigen::VectorXd x(kWidth);
  for (Index i = 0; i < kWidth; ++i) x[i] = noise(data_rng);
  const DropoutMask mask = sample_dropout_mask(kWidth, kSequenceDropout, rng);
  const Eigen::VectorXd passed = mask.apply(x, Phase::Inference);
  o.check(std::memcmp(passed.data(), x.data(), sizeof(double) * kWidth) == 0,
          "inference-phase dropout altered activations");
  o.note("inference bitwise stable over " + std::to_string(a.size()) + " outputs");
  return o;
}

void strip_timing(nlohmann::json& j) {
  if (j.is_object()) {
    j.erase("train_seconds");
    j.erase("test_seconds");
    for (auto& [k, v] : j.items()) strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 9. Two identical comparison runs.
Outcome criterion_determinism(const std::string& rssi_exe) {
  Outcome o;
  if (rssi_exe.empty() || !fs::exists(rssi_exe)) {
    o.check(false, "rssi executable not given or missing: '" + rssi_exe + "'");
    return o;
  }
  const fs::path root = fs::temp_directory_path() / ("rssi_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<fs::path> dirs = {root / "run1", root / "run2"};
  for (const auto& d : dirs) {
    const std::string cmd = "\"" + rssi_exe + "\" compare --suite table3 --seed 3 --out-dir \"" +
                            d.string() + "\" > \"" + d.string() + ".log\" 2>&1";
    const int rc = std::system(cmd.c_str());
    o.check(rc == 0, "compare exited with " + std::to_string(rc) + ", see " + d.string() + ".log");
  }
  if (!o.pass) return o;

  nlohmann::json a = nlohmann::json::parse(slurp(dirs[0] / "table.json"));
  nlohmann::json b = nlohmann::json::parse(slurp(dirs[1] / "table.json"));
  strip_timing(a);
  strip_timing(b);
  o.check(a.dump() == b.dump(), "table.json differs outside timing fields");

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0] / "losses")) {
    const fs::path other = dirs[1] / "losses" / entry.path().filename();
    o.check(fs::exists(other) && slurp(entry.path()) == slurp(other),
            "loss history differs: " + entry.path().filename().string());
    ++compared;
  }
  o.check(compared == static_cast<int>(a.at("rows").size()),
          "expected one loss file per row, found " + std::to_string(compared));
  o.note(std::to_string(a.at("rows").size()) + " rows and " + std::to_string(compared) +
         " loss files identical");
  if (o.pass) fs::remove_all(root);
  return o;
}

// 10. Runtime budget.
Outcome criterion_runtime(const std::string&) {
  constexpr double kFeatureBudget = 600.0;
  constexpr double kSequenceBudget = 30.0;
  constexpr double kMinSpeedup = 10.0;
  constexpr std::uint64_t kSeed = 10;
  Outcome o;
  const Dataset data = default_data(kSeed);

  const auto [train, test] = split_random(data, kTrainFraction, derive_seed(kSeed, "split"));
  const FeatureTrainResult f = train_feature_model(train, TrainConfig::feature_defaults(kSeed));
  o.check(f.report.train_seconds <= kFeatureBudget,
          "feature training took " + fixed(f.report.train_seconds, 1) + " s");
  o.note("feature " + fixed(f.report.train_seconds, 1) + " s on " + std::to_string(train.size()) +
         " samples");

  double slowest = 0.0;
  double sequence_300 = 0.0;
  for (const FeatureTriple& key : table3_keys()) {
    const SelectedSequence seq = select_sequence(data, key);
    const SequenceTrainResult s = train_sequence_model(seq, TrainConfig::sequence_defaults(kSeed));
    o.check(s.report.train_seconds <= kSequenceBudget,
            "sequence " + to_string(key) + " took " + fixed(s.report.train_seconds, 2) + " s");
    slowest = std::max(slowest, s.report.train_seconds);
    if (same_key(key, FeatureTriple{3.0, 0, 0})) sequence_300 = s.report.train_seconds;
  }
  o.note("slowest sequence " + fixed(slowest, 2) + " s");

  const SelectedSequence seq = select_sequence(data, FeatureTriple{3.0, 0, 0});
  const SequenceBaselineResult lstm =
      train_baseline(BaselineKind::Lstm, seq, default_train_config(ModelKind::Lstm, true),
                     kDefaultRecurrentWindow);
  const double ratio = lstm.report.train_seconds / std::max(sequence_300, 1e-9);
  o.check(ratio >= kMinSpeedup, "LSTM / SequenceANN time ratio " + fixed(ratio, 1));
  o.note("[3,0,0] SequenceANN " + fixed(sequence_300, 2) + " s, LSTM " +
         fixed(lstm.report.train_seconds, 1) + " s, ratio " + fixed(ratio, 1));
  return o;
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*run)(const std::string&);
};

const Criterion kCriteria[] = {
    {1, "improvement arithmetic", criterion_improvement},
    {2, "RMSE of published MSE values", criterion_rmse},
    {3, "gradient checks", criterion_gradients},
    {4, "optimizer oracles", criterion_optimizers},
    {5, "location encoding and example rows", criterion_encoding},
    {6, "feature-task ordering over 5 seeds", criterion_ordering},
    {7, "noiseless learnability", criterion_noiseless},
    {8, "dropout statistics and inference determinism", criterion_dropout},
    {9, "comparison determinism", criterion_determinism},
    {10, "runtime budget", criterion_runtime},
};

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  const std::string rssi_exe = argc > 2 ? argv[2] : "";
  int selected = 0;
  int failed = 0;
  for (const Criterion& c : kCriteria) {
    if (which != "all" && which != std::to_string(c.id)) continue;
    ++selected;
    Outcome o;
    try {
      o = c.run(rssi_exe);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title;
    if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
    std::cout << std::endl;
    failed += o.pass ? 0 : 1;
  }
  if (selected == 0) {
    std::cerr << "unknown criterion '" << which << "'\n";
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
