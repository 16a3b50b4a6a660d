#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rssi/data/csv.hpp"
#include "rssi/data/sequence.hpp"
#include "rssi/data/synthetic.hpp"
#include "rssi/error.hpp"
#include "rssi/evaluation/compare.hpp"
#include "rssi/evaluation/evaluate.hpp"
#include "rssi/format.hpp"
#include "rssi/models/checkpoint.hpp"
#include "rssi/random.hpp"
#include "rssi/training/train.hpp"

namespace rssi::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestSchema = "rssi-manifest";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("error while writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

json manifest(const std::string& command, const std::vector<std::string>& argv,
              const json& config, const json& seeds, const std::vector<fs::path>& inputs,
              const std::vector<fs::path>& outputs, const fs::path& base) {
  json in = json::object();
  for (const auto& p : inputs) in[p.string()] = file_hash(p);
  json out = json::object();
  for (const auto& p : outputs) out[fs::relative(p, base).generic_string()] = file_hash(p);
  return {{"schema", kManifestSchema}, {"version", 1},     {"command", command},
          {"argv", argv},              {"config", config}, {"seeds", seeds},
          {"inputs", in},              {"outputs", out}};
}

Dataset load_data(const fs::path& path) {
  CleansingReport report;
  Dataset ds = parse_csv(path, &report);
  if (report.rows_dropped_empty > 0) {
    std::cerr << "note: dropped " << report.rows_dropped_empty
              << " row(s) with empty cells from " << path.string() << "\n";
  }
  if (ds.empty()) throw DataError("no usable rows in " + path.string());
  return ds;
}

FeatureTriple parse_key_flag(const std::string& text) {
  try {
    return parse_feature_triple(text);
  } catch (const ValueError& e) {
    throw UsageError(std::string("--sequence-key: ") + e.what());
  }
}

TrainConfig resolve_config(const TrainOptions& opt, ModelKind kind, bool keyed) {
  TrainConfig cfg = default_train_config(kind, keyed);
  cfg.seed = opt.seed;
  if (opt.optimizer) {
    if (*opt.optimizer == "adam") {
      cfg.optimizer = OptimizerKind::Adam;
    } else if (*opt.optimizer == "nadam") {
      cfg.optimizer = OptimizerKind::NAdam;
    } else {
      throw UsageError("--optimizer must be adam or nadam");
    }
  }
  if (opt.learning_rate) cfg.learning_rate = *opt.learning_rate;
  if (opt.epochs) cfg.epochs = *opt.epochs;
  if (opt.dropout) cfg.dropout_rate = *opt.dropout;
  if (opt.batch) {
    if (*opt.batch == "full") {
      cfg.batch = BatchPolicy::full();
    } else {
      try {
        const long long n = parse_int(*opt.batch);
        if (n < 1) throw ValueError("must be positive");
        cfg.batch = BatchPolicy::mini(static_cast<Index>(n));
      } catch (const ValueError&) {
        throw UsageError("--batch must be 'full' or a positive integer");
      }
    }
  }
  try {
    cfg.validate();
  } catch (const ValueError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

// Inputs and targets an evaluation runs on, rebuilt from the checkpoint's
// recorded data slice.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> eval_inputs(const Checkpoint& ckpt,
                                                        const Dataset& data,
                                                        bool test_only) {
  const ModelKind kind = kind_of(ckpt.model);
  const json& tc = ckpt.train_config;
  const double fraction = tc.value("train_fraction", kTrainFraction);
  const std::uint64_t split_seed = tc.value("split_seed", std::uint64_t{0});
  if (ckpt.sequence_key && sequence_scoped(kind)) {
    const SelectedSequence seq = select_sequence(data, *ckpt.sequence_key);
    const Index window = tc.value("window", Index{1});
    if (test_only) {
      Windows w = make_split_windows(seq.rssi, fraction, window).test;
      return {std::move(w.inputs), std::move(w.targets)};
    }
    Windows w = make_windows(seq.rssi, window);
    return {std::move(w.inputs), std::move(w.targets)};
  }
  if (kind == ModelKind::SequenceAnn) {
    throw DataError("sequence checkpoint carries no sequence key");
  }
  const Dataset scope = ckpt.sequence_key ? select_records(data, *ckpt.sequence_key) : data;
  if (test_only) {
    const Dataset test = split_random(scope, fraction, split_seed).second;
    return {feature_matrix(test), rssi_vector(test)};
  }
  return {feature_matrix(scope), rssi_vector(scope)};
}

}  // namespace

fs::path default_out_dir() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return fs::path("runs") / buf;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<std::string> replay_arguments(const json& m,
                                          const std::optional<std::string>& new_out) {
  if (!m.is_object() || m.value("schema", "") != kManifestSchema) {
    throw FormatError("not a manifest file");
  }
  auto args = m.at("argv").get<std::vector<std::string>>();
  if (!new_out) return args;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--out-dir" || args[i] == "--out") {
      args[i + 1] = *new_out;
      return args;
    }
  }
  const std::string flag = !args.empty() && args[0] == "gen-data" ? "--out" : "--out-dir";
  args.push_back(flag);
  args.push_back(*new_out);
  return args;
}

int cmd_gen_data(const GenDataOptions& opt, const std::vector<std::string>& argv) {
  SyntheticConfig cfg;
  try {
    if (opt.config_file) cfg = load_synthetic_config(*opt.config_file, cfg);
    std::string text;
    for (const auto& [key, value] : opt.overrides) text += key + "=" + value + "\n";
    cfg = parse_synthetic_config(text, cfg);
    cfg.validate();
  } catch (const ValueError& e) {
    throw UsageError(std::string("synthetic config: ") + e.what());
  }
  ScenarioCounts counts;
  const std::uint64_t data_seed = derive_seed(opt.seed, "data");
  const Dataset ds = generate_synthetic(cfg, data_seed, &counts);
  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  write_csv(ds, opt.out);

  std::cout << "scenario 1 (fixed location):   " << counts.fixed_location << " rows\n"
            << "scenario 2 (varying location): " << counts.varying_location << " rows\n"
            << "scenario 3 (varying distance): " << counts.varying_distance << " rows\n"
            << "total: " << ds.size() << " rows -> " << opt.out.string() << "\n";

  json config = json::object();
  for (const auto& [k, v] : cfg.to_map()) config[k] = v;
  const fs::path manifest_path = fs::path(opt.out.string() + ".manifest.json");
  const fs::path base = opt.out.has_parent_path() ? opt.out.parent_path() : fs::path(".");
  json m = manifest("gen-data", argv, config, {{"seed", opt.seed}, {"data", data_seed}},
                    opt.config_file ? std::vector<fs::path>{*opt.config_file}
                                    : std::vector<fs::path>{},
                    {opt.out}, base);
  m["scenario_counts"] = {{"fixed_location", counts.fixed_location},
                          {"varying_location", counts.varying_location},
                          {"varying_distance", counts.varying_distance}};
  write_json(manifest_path, m);
  return 0;
}

int cmd_train(const TrainOptions& opt, const std::vector<std::string>& argv) {
  ModelKind kind;
  try {
    kind = parse_model_kind(opt.model);
  } catch (const ValueError& e) {
    throw UsageError(e.what());
  }
  std::optional<FeatureTriple> key;
  if (opt.sequence_key) key = parse_key_flag(*opt.sequence_key);
  if (kind == ModelKind::SequenceAnn && !key) {
    throw UsageError("--model sequence requires --sequence-key s,c,g");
  }
  if (opt.window < 1) throw UsageError("--window must be >= 1");
  if (!(opt.train_fraction > 0.0 && opt.train_fraction < 1.0)) {
    throw UsageError("--train-fraction must be in (0, 1)");
  }
  const TrainConfig cfg = resolve_config(opt, kind, key.has_value());

  const Dataset data = load_data(opt.data);
  const ComparisonEntry entry{std::string(model_kind_name(kind)), kind, cfg, key,
                              static_cast<Index>(opt.window)};
  const std::uint64_t split_seed = derive_seed(opt.seed, "split");
  FittedEntry fitted = fit_entry(data, entry, cfg, opt.train_fraction, split_seed);
  const EvalMetrics test = evaluate(fitted.model, fitted.test_inputs, fitted.test_targets);

  ensure_dir(opt.out_dir);
  json train_config = {{"model", std::string(model_kind_name(kind))},
                       {"config", to_json(cfg)},
                       {"window", entry.window},
                       {"train_fraction", opt.train_fraction},
                       {"split_seed", split_seed},
                       {"sequence_key", key ? json(to_string(*key)) : json()}};
  Checkpoint ckpt{fitted.model, train_config, hash_json(train_config), key};
  const fs::path ckpt_path = opt.out_dir / "checkpoint.json";
  const fs::path report_path = opt.out_dir / "report.json";
  const fs::path loss_path = opt.out_dir / "loss.csv";
  save_checkpoint(ckpt, ckpt_path);
  write_loss_csv(fitted.report, loss_path);
  json report = to_json(fitted.report);
  report["model"] = std::string(model_kind_name(kind));
  report["parameters"] = parameter_count(fitted.model);
  report["train_samples"] = fitted.train_samples;
  report["test_samples"] = fitted.test_targets.size();
  report["test"] = to_json(test);
  report["loss_csv"] = "loss.csv";
  write_json(report_path, report);

  std::cout << "model " << model_kind_name(kind);
  if (key) std::cout << " on " << to_string(*key);
  std::cout << ": " << fitted.report.loss_history.size() << " epoch(s), train MSE "
            << format_fixed(fitted.report.final_train_mse, 4) << ", test MSE "
            << format_fixed(test.mse, 4) << " (RMSE " << format_fixed(test.rmse, 4)
            << "), train " << format_fixed(fitted.report.train_seconds, 3) << " s\n"
            << "outputs in " << opt.out_dir.string() << "\n";

  write_json(opt.out_dir / "manifest.json",
             manifest("train", argv, train_config,
                      {{"seed", opt.seed}, {"split", split_seed},
                       {"init", derive_seed(opt.seed, "init")}},
                      {opt.data}, {ckpt_path, report_path, loss_path}, opt.out_dir));
  return 0;
}

int cmd_eval(const EvalOptions& opt, const std::vector<std::string>& argv) {
  if (opt.split != "all" && opt.split != "test") {
    throw UsageError("--split must be all or test");
  }
  if (!fs::exists(opt.checkpoint)) {
    throw DataError("checkpoint not found: " + opt.checkpoint.string());
  }
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  const Dataset data = load_data(opt.data);
  const auto [inputs, targets] = eval_inputs(ckpt, data, opt.split == "test");
  const EvalMetrics m = evaluate(ckpt.model, inputs, targets);
  json out = to_json(m);
  out["model"] = std::string(model_kind_name(kind_of(ckpt.model)));
  out["samples"] = targets.size();
  out["split"] = opt.split;
  std::cout << out.dump(2) << "\n";
  if (opt.out) {
    if (opt.out->has_parent_path()) ensure_dir(opt.out->parent_path());
    write_json(*opt.out, out);
    const fs::path base = opt.out->has_parent_path() ? opt.out->parent_path() : fs::path(".");
    write_json(fs::path(opt.out->string() + ".manifest.json"),
               manifest("eval", argv, {{"split", opt.split}}, json::object(),
                        {opt.checkpoint, opt.data}, {*opt.out}, base));
  }
  return 0;
}

int cmd_compare(const CompareOptions& opt, const std::vector<std::string>& argv) {
  ComparisonSpec spec;
  if (opt.suite == "table2") {
    spec = table2_suite(opt.seed);
  } else if (opt.suite == "table3") {
    if (opt.recurrent_window < 1) throw UsageError("--recurrent-window must be >= 1");
    spec = table3_suite(opt.seed, opt.recurrent_window);
  } else if (opt.suite == "custom") {
    if (!opt.spec_file) throw UsageError("--suite custom needs a spec file");
    std::ifstream in(*opt.spec_file, std::ios::binary);
    if (!in) throw DataError("cannot read spec file " + opt.spec_file->string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw FormatError("spec file " + opt.spec_file->string() + ": " + e.what());
    }
    spec = comparison_spec_from_json(j);
    if (!j.contains("seed")) spec.seed = opt.seed;
  } else {
    throw UsageError("unknown suite '" + opt.suite + "' (table2, table3, custom)");
  }
  if (!(opt.reference_mse > 0.0)) throw UsageError("--reference-mse must be positive");
  spec.reference_mse = opt.reference_mse;

  std::vector<fs::path> inputs;
  Dataset data;
  if (opt.data) {
    data = load_data(*opt.data);
    inputs.push_back(*opt.data);
  } else {
    data = generate_synthetic(SyntheticConfig{}, derive_seed(spec.seed, "data"));
  }

  const ComparisonTable table = build_comparison(data, spec);

  ensure_dir(opt.out_dir / "losses");
  std::vector<fs::path> outputs;
  std::vector<std::string> loss_paths;
  for (const auto& row : table.rows) {
    const std::string rel = "losses/" + row_slug(row) + ".csv";
    TrainReport r;
    r.loss_history = row.loss_history;
    write_loss_csv(r, opt.out_dir / rel);
    outputs.push_back(opt.out_dir / rel);
    loss_paths.push_back(rel);
  }
  const std::string text = format_table_text(table);
  write_text(opt.out_dir / "table.txt", text);
  write_text(opt.out_dir / "table.csv", format_table_csv(table));
  write_json(opt.out_dir / "table.json", table_to_json(table, loss_paths));
  for (const char* f : {"table.txt", "table.csv", "table.json"}) outputs.push_back(opt.out_dir / f);
  std::cout << text;

  json seeds = {{"seed", spec.seed}, {"split", derive_seed(spec.seed, "split")}};
  if (!opt.data) seeds["data"] = derive_seed(spec.seed, "data");
  json config = to_json(spec);
  config["suite"] = opt.suite;
  write_json(opt.out_dir / "manifest.json",
             manifest("compare", argv, config, seeds, inputs, outputs, opt.out_dir));
  return 0;
}

}  // namespace rssi::cli
