#include "rssi/evaluation/compare.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <map>
#include <sstream>

#include "rssi/data/sequence.hpp"
#include "rssi/error.hpp"
#include "rssi/format.hpp"
#include "rssi/random.hpp"

namespace rssi {

using nlohmann::json;

namespace {

void apply_overrides(const json& j, TrainConfig& cfg) {
  if (!j.is_object()) throw FormatError("comparison spec: config must be an object");
  json merged = to_json(cfg);
  for (const auto& [key, value] : j.items()) {
    if (!merged.contains(key)) throw FormatError("comparison spec: unknown config field '" + key + "'");
    merged[key] = value;
  }
  cfg = train_config_from_json(merged);
}

BaselineKind baseline_kind(ModelKind k) {
  return k == ModelKind::Rnn ? BaselineKind::Rnn : BaselineKind::Lstm;
}

std::string family_display(ModelKind k) {
  switch (k) {
    case ModelKind::FeatureAnn:
      return "FeatureANN";
    case ModelKind::SequenceAnn:
      return "SequenceANN";
    case ModelKind::Ols:
      return "OLS";
    case ModelKind::Rnn:
      return "RNN";
    case ModelKind::Lstm:
      return "LSTM";
  }
  return "?";
}

std::string key_text(const std::optional<FeatureTriple>& key) {
  return key ? to_string(*key) : std::string("all");
}

}  // namespace

bool sequence_scoped(ModelKind k) {
  return k == ModelKind::SequenceAnn || k == ModelKind::Rnn || k == ModelKind::Lstm;
}

TrainConfig default_train_config(ModelKind kind, bool keyed) {
  if (kind == ModelKind::SequenceAnn) return TrainConfig::sequence_defaults();
  if (keyed && sequence_scoped(kind)) {
    TrainConfig cfg = TrainConfig::sequence_defaults();
    cfg.dropout_rate = 0.0;
    return cfg;
  }
  return TrainConfig::feature_defaults();
}

Dataset select_records(const Dataset& data, const FeatureTriple& key) {
  Dataset out{{}, data.source, data.seed};
  for (const auto& r : data.records) {
    if (same_key(feature_triple(r), key)) out.records.push_back(r);
  }
  if (out.empty()) throw DataError("no records match sequence " + to_string(key));
  return out;
}

FittedEntry fit_entry(const Dataset& data, const ComparisonEntry& e,
                      const TrainConfig& cfg, double train_fraction,
                      std::uint64_t split_seed) {
  FittedEntry f;
  const bool windowed = e.sequence_key && sequence_scoped(e.kind);
  if (windowed) {
    const SelectedSequence seq = select_sequence(data, *e.sequence_key);
    if (e.kind == ModelKind::SequenceAnn) {
      auto r = train_sequence_model(seq, cfg, e.window, train_fraction);
      f.model = std::move(r.model);
      f.report = std::move(r.report);
      f.train_samples = r.split.train.count();
      f.test_inputs = std::move(r.split.test.inputs);
      f.test_targets = std::move(r.split.test.targets);
    } else {
      auto r = train_baseline(baseline_kind(e.kind), seq, cfg, e.window, train_fraction);
      f.model = std::move(r.model);
      f.report = std::move(r.report);
      f.train_samples = r.split.train.count();
      f.test_inputs = std::move(r.split.test.inputs);
      f.test_targets = std::move(r.split.test.targets);
    }
    return f;
  }
  if (e.kind == ModelKind::SequenceAnn) {
    throw ValueError("sequence model needs a sequence key");
  }
  const Dataset scope = e.sequence_key ? select_records(data, *e.sequence_key) : data;
  const auto [train, test] =
      split_random(scope, train_fraction, split_seed);
  f.train_samples = static_cast<Index>(train.records.size());
  f.test_inputs = feature_matrix(test);
  f.test_targets = rssi_vector(test);
  switch (e.kind) {
    case ModelKind::FeatureAnn: {
      auto r = train_feature_model(train, cfg);
      f.model = std::move(r.model);
      f.report = std::move(r.report);
      break;
    }
    case ModelKind::Ols: {
      auto r = train_ols(train);
      f.model = std::move(r.model);
      f.report = std::move(r.report);
      break;
    }
    default: {
      auto r = train_baseline(baseline_kind(e.kind), train, cfg);
      f.model = std::move(r.model);
      f.report = std::move(r.report);
      break;
    }
  }
  return f;
}

const std::vector<FeatureTriple>& table3_keys() {
  static const std::vector<FeatureTriple> keys = {
      {3.0, 0, 0}, {3.0, 1, 0}, {0.5, 0, 2}, {0.5, 1, 2},
      {1.0, 0, 2}, {2.0, 0, 2}, {2.0, 1, 2}};
  return keys;
}

ComparisonSpec table2_suite(std::uint64_t seed) {
  ComparisonSpec spec;
  spec.seed = seed;
  for (auto k : {ModelKind::FeatureAnn, ModelKind::Ols, ModelKind::Rnn, ModelKind::Lstm}) {
    spec.entries.push_back({family_display(k), k, TrainConfig::feature_defaults(), {}, 1});
  }
  return spec;
}

ComparisonSpec table3_suite(std::uint64_t seed, Index recurrent_window) {
  if (recurrent_window < 1) throw ValueError("table3 suite: recurrent window must be >= 1");
  ComparisonSpec spec;
  spec.seed = seed;
  for (auto k : {ModelKind::SequenceAnn, ModelKind::Rnn, ModelKind::Lstm}) {
    const Index window = k == ModelKind::SequenceAnn ? 1 : recurrent_window;
    for (const auto& key : table3_keys()) {
      spec.entries.push_back({family_display(k), k, default_train_config(k, true), key, window});
    }
  }
  return spec;
}

ComparisonSpec comparison_spec_from_json(const json& j) {
  try {
    ComparisonSpec spec;
    if (!j.is_object()) throw FormatError("comparison spec must be a JSON object");
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.train_fraction = j.value("train_fraction", kTrainFraction);
    spec.reference_mse = j.value("reference_mse", kDefaultReferenceMse);
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
      throw ValueError("comparison spec: train_fraction must be in (0, 1)");
    }
    for (const json& item : j.at("entries")) {
      ComparisonEntry e;
      e.kind = parse_model_kind(item.at("model").get<std::string>());
      if (item.contains("sequence_key") && !item.at("sequence_key").is_null()) {
        e.sequence_key = parse_feature_triple(item.at("sequence_key").get<std::string>());
      }
      e.name = item.value("name", family_display(e.kind));
      e.window = item.value("window", Index{1});
      if (e.window < 1) throw ValueError("comparison spec: window must be >= 1");
      e.config = default_train_config(e.kind, e.sequence_key.has_value());
      if (item.contains("config")) apply_overrides(item.at("config"), e.config);
      spec.entries.push_back(std::move(e));
    }
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("comparison spec: ") + e.what());
  }
}

json to_json(const ComparisonSpec& spec) {
  json entries = json::array();
  for (const auto& e : spec.entries) {
    entries.push_back({{"name", e.name},
                       {"model", std::string(model_kind_name(e.kind))},
                       {"sequence_key", e.sequence_key ? json(to_string(*e.sequence_key)) : json()},
                       {"window", e.window},
                       {"config", to_json(e.config)}});
  }
  return {{"seed", spec.seed},
          {"train_fraction", spec.train_fraction},
          {"reference_mse", spec.reference_mse},
          {"entries", entries}};
}

std::uint64_t entry_seed(std::uint64_t base, const ComparisonEntry& e) {
  const std::string tag = e.name + "|" + std::string(model_kind_name(e.kind)) + "|" +
                          key_text(e.sequence_key) + "|" + std::to_string(e.window);
  return derive_seed(base, tag);
}

ComparisonTable build_comparison(const Dataset& data, const ComparisonSpec& spec) {
  if (spec.entries.empty()) throw ValueError("build_comparison: empty comparison spec");
  if (!(spec.reference_mse > 0.0)) {
    throw ValueError("build_comparison: reference MSE must be positive");
  }
  ComparisonTable table;
  table.reference_mse = spec.reference_mse;
  for (const auto& e : spec.entries) {
    ComparisonRow row;
    row.name = e.name;
    row.kind = e.kind;
    row.sequence_key = e.sequence_key;
    row.window = e.window;
    row.seed = entry_seed(spec.seed, e);
    TrainConfig cfg = e.config;
    cfg.seed = row.seed;
    try {
      FittedEntry f = fit_entry(data, e, cfg, spec.train_fraction,
                                derive_seed(spec.seed, "split"));
      row.train_samples = f.train_samples;
      row.test_samples = f.test_targets.size();
      row.train_mse = f.report.final_train_mse;
      row.train_rmse = f.report.final_train_rmse;
      row.train_seconds = f.report.train_seconds;
      row.loss_history = std::move(f.report.loss_history);
      row.test = evaluate(f.model, f.test_inputs, f.test_targets);
    } catch (const Error& err) {
      throw Error("comparison entry '" + row_label(row) + "': " + err.what());
    }
    table.rows.push_back(std::move(row));
  }

  std::map<std::string, std::pair<double, Index>> sums;
  for (const auto& row : table.rows) {
    auto [it, fresh] = sums.try_emplace(row.name, 0.0, 0);
    if (fresh) table.families.push_back({row.name, 0, 0.0, 0.0});
    it->second.first += row.test.mse;
    it->second.second += 1;
  }
  for (auto& fam : table.families) {
    const auto& [sum, count] = sums.at(fam.name);
    fam.rows = count;
    fam.mean_test_mse = sum / static_cast<double>(count);
    fam.improvement_pct = improvement_pct(spec.reference_mse, fam.mean_test_mse);
  }
  return table;
}

std::string row_label(const ComparisonRow& row) {
  return row.sequence_key ? row.name + " " + to_string(*row.sequence_key) : row.name;
}

std::string row_slug(const ComparisonRow& row) {
  std::string s = row.name;
  if (row.sequence_key) {
    s += "_" + format_double(row.sequence_key->s) + "_" + std::to_string(row.sequence_key->c) +
         "_" + std::to_string(row.sequence_key->g);
  }
  for (char& ch : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
    if (!ok) ch = '-';
  }
  return s;
}

std::string format_table_text(const ComparisonTable& table) {
  const std::vector<std::string> header = {"Model",     "Sequence",  "Train MSE",
                                           "Train RMSE", "Test MSE", "Test RMSE",
                                           "Train s",   "Test s",    "Improv. %"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : table.rows) {
    cells.push_back({r.name, key_text(r.sequence_key), format_fixed(r.train_mse, 2),
                     format_fixed(r.train_rmse, 2), format_fixed(r.test.mse, 2),
                     format_fixed(r.test.rmse, 2), format_fixed(r.train_seconds, 2),
                     format_fixed(r.test.test_seconds, 2),
                     format_fixed(improvement_pct(table.reference_mse, r.test.mse), 2)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      if (c < 2) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : cells) emit(row);

  out << "\nReference MSE " << format_fixed(table.reference_mse, 2) << " dBm^2\n";
  for (const auto& f : table.families) {
    out << std::left << std::setw(12) << f.name << " mean test MSE over " << f.rows
        << " row(s): " << format_fixed(f.mean_test_mse, 2)
        << "  improvement: " << format_fixed(f.improvement_pct, 2) << " %\n";
  }
  return out.str();
}

std::string format_table_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "model,sequence,window,train_samples,test_samples,train_mse,train_rmse,"
         "test_mse,test_rmse,train_seconds,test_seconds,improvement_pct\n";
  for (const auto& r : table.rows) {
    out << r.name << ',' << '"' << key_text(r.sequence_key) << '"' << ',' << r.window << ','
        << r.train_samples << ',' << r.test_samples << ',' << format_double(r.train_mse) << ','
        << format_double(r.train_rmse) << ',' << format_double(r.test.mse) << ','
        << format_double(r.test.rmse) << ',' << format_double(r.train_seconds) << ','
        << format_double(r.test.test_seconds) << ','
        << format_double(improvement_pct(table.reference_mse, r.test.mse)) << '\n';
  }
  return out.str();
}

json table_to_json(const ComparisonTable& table, const std::vector<std::string>& loss_paths) {
  if (!loss_paths.empty() && loss_paths.size() != table.rows.size()) {
    throw ValueError("table_to_json: one loss path per row required");
  }
  json rows = json::array();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    json row = {{"name", r.name},
                {"model", std::string(model_kind_name(r.kind))},
                {"sequence_key", r.sequence_key ? json(to_string(*r.sequence_key)) : json()},
                {"window", r.window},
                {"seed", r.seed},
                {"train_samples", r.train_samples},
                {"test_samples", r.test_samples},
                {"train_mse", r.train_mse},
                {"train_rmse", r.train_rmse},
                {"test_mse", r.test.mse},
                {"test_rmse", r.test.rmse},
                {"improvement_pct", improvement_pct(table.reference_mse, r.test.mse)},
                {"train_seconds", r.train_seconds},
                {"test_seconds", r.test.test_seconds}};
    if (!loss_paths.empty()) row["loss_csv"] = loss_paths[i];
    rows.push_back(std::move(row));
  }
  json families = json::array();
  for (const auto& f : table.families) {
    families.push_back({{"name", f.name},
                        {"rows", f.rows},
                        {"mean_test_mse", f.mean_test_mse},
                        {"improvement_pct", f.improvement_pct}});
  }
  return {{"schema", "rssi-comparison"},
          {"version", 1},
          {"reference_mse", table.reference_mse},
          {"rows", rows},
          {"families", families}};
}

}  // namespace rssi
