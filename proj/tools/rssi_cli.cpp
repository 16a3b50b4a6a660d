#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "rssi/data/synthetic.hpp"
#include "rssi/error.hpp"

namespace {

using namespace rssi::cli;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int run(const std::vector<std::string>& args);

int replay(const std::string& manifest_path, const std::optional<std::string>& out) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw rssi::DataError("cannot read manifest " + manifest_path);
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw rssi::FormatError("manifest " + manifest_path + ": " + e.what());
  }
  const auto args = replay_arguments(m, out);
  if (!args.empty() && args[0] == "replay") throw UsageError("manifest records a replay");
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"RSSI channel estimation: data generation, training, evaluation, comparison"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic RSSI dataset");
  gen_cmd->add_option("--seed", gen.seed, "Base seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
  std::string gen_config;
  gen_cmd->add_option("--config", gen_config, "key=value synthetic config file");
  std::map<std::string, std::string> gen_flags;
  for (const auto& [key, value] : rssi::SyntheticConfig{}.to_map()) {
    std::string flag = key;
    for (char& ch : flag) {
      if (ch == '_') ch = '-';
    }
    gen_cmd->add_option("--" + flag, gen_flags[key], "Default " + value);
  }

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  train_cmd->add_option("--model", train.model, "feature|sequence|ols|rnn|lstm")
      ->required()
      ->check(CLI::IsMember({"feature", "sequence", "ols", "rnn", "lstm"}));
  train_cmd->add_option("--data", train.data, "Dataset CSV")->required();
  train_cmd->add_option("--sequence-key", train.sequence_key, "Sequence key s,c,g");
  train_cmd->add_option("--seed", train.seed, "Base seed");
  train_cmd->add_option("--optimizer", train.optimizer, "adam|nadam");
  train_cmd->add_option("--lr", train.learning_rate, "Learning rate");
  train_cmd->add_option("--epochs", train.epochs, "Epochs");
  train_cmd->add_option("--batch", train.batch, "'full' or minibatch size");
  train_cmd->add_option("--dropout", train.dropout, "Dropout rate");
  train_cmd->add_option("--window", train.window, "Look-back window for sequence models");
  train_cmd->add_option("--train-fraction", train.train_fraction, "Training fraction");
  std::string train_out;
  train_cmd->add_option("--out-dir", train_out, "Output directory");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint JSON")->required();
  eval_cmd->add_option("--data", eval.data, "Dataset CSV")->required();
  eval_cmd->add_option("--split", eval.split, "all|test")
      ->check(CLI::IsMember({"all", "test"}));
  eval_cmd->add_option("--out", eval.out, "Metrics JSON path");

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Build a comparison table");
  cmp_cmd->add_option("--suite", cmp.suite, "table2|table3|custom")->required();
  cmp_cmd->add_option("spec", cmp.spec_file, "Spec JSON for --suite custom");
  cmp_cmd->add_option("--data", cmp.data, "Dataset CSV (default: synthetic from --seed)");
  cmp_cmd->add_option("--seed", cmp.seed, "Base seed");
  cmp_cmd->add_option("--reference-mse", cmp.reference_mse, "Reference MSE in dBm^2");
  cmp_cmd->add_option("--recurrent-window", cmp.recurrent_window,
                      "Look-back window of recurrent baselines in table3");
  std::string cmp_out;
  cmp_cmd->add_option("--out-dir", cmp_out, "Output directory");

  std::string manifest_path;
  std::optional<std::string> replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", manifest_path, "Manifest JSON")->required();
  replay_cmd->add_option("--out", replay_out, "Replace the recorded output location");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*gen_cmd) {
    if (!gen_config.empty()) gen.config_file = gen_config;
    for (const auto& [key, value] : gen_flags) {
      if (!value.empty()) gen.overrides[key] = value;
    }
    return cmd_gen_data(gen, args);
  }
  if (*train_cmd) {
    train.out_dir = train_out.empty() ? default_out_dir() : std::filesystem::path(train_out);
    return cmd_train(train, args);
  }
  if (*eval_cmd) return cmd_eval(eval, args);
  if (*cmp_cmd) {
    cmp.out_dir = cmp_out.empty() ? default_out_dir() : std::filesystem::path(cmp_out);
    return cmd_compare(cmp, args);
  }
  return replay(manifest_path, replay_out);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
