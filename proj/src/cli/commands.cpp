#include "plan/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plan/cli/trace.hpp"
#include "plan/encoding/features.hpp"
#include "plan/errors.hpp"
#include "plan/shapeworld/dataset_io.hpp"
#include "plan/train/checkpoint.hpp"
#include "plan/train/trainer.hpp"

namespace plan::cli {

namespace fs = std::filesystem;

namespace {

struct GenDataArgs {
  std::uint64_t seed = 0;
  int grid = 4;
  std::string objects = "4:8";
  std::uint64_t count = 100;
  std::string kind = "sentence,dialog";
  int rounds = 0;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string ablation;
  std::string checkpoint;
  std::string metrics_out;
  int epochs = -1;
  long long seed = -1;
  int hidden = -1;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "val";
  std::string ablation;
  std::string predictions;
};

struct TraceArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "val";
  std::size_t instance = 0;
  std::string out;
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void parse_objects(const std::string& text, world::GeneratorConfig& config) {
  auto parts = split_list(text, ':');
  try {
    if (parts.size() == 1) {
      config.min_objects = config.max_objects = std::stoi(parts[0]);
      return;
    }
    if (parts.size() == 2) {
      config.min_objects = std::stoi(parts[0]);
      config.max_objects = std::stoi(parts[1]);
      return;
    }
  } catch (const std::logic_error&) {
  }
  throw InvalidArgument("--objects expects N or MIN:MAX, got '" + text + "'");
}

// A path naming an existing file is used as is; otherwise it is a dataset
// prefix and the split file is chosen.
fs::path resolve_data(const std::string& data, const std::string& split) {
  if (fs::is_regular_file(data)) return data;
  world::Split s = split == "train" ? world::Split::train : split == "test" ? world::Split::test : world::Split::val;
  if (split != "train" && split != "val" && split != "test") throw InvalidArgument("unknown split '" + split + "'");
  return world::split_path(data, s);
}

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  world::GeneratorConfig config;
  config.grid_side = a.grid;
  parse_objects(a.objects, config);
  config.kinds.clear();
  for (const auto& k : split_list(a.kind, ',')) config.kinds.push_back(world::parse_kind(k));
  config.dialog_rounds = a.rounds;
  config.validate();

  const fs::path prefix = a.out;
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const auto& vocab = world::Vocabulary::standard();
  world::write_vocabulary_file(world::vocabulary_path(prefix), vocab);

  nlohmann::ordered_json summary;
  for (world::Split split : {world::Split::train, world::Split::val, world::Split::test}) {
    world::Dataset d;
    d.header.split = std::string(world::name(split));
    d.header.grid_side = a.grid;
    d.header.seed = a.seed;
    d.header.vocabulary_file = world::vocabulary_path(prefix).filename().string();
    d.header.vocabulary_size = vocab.size();
    d.instances = world::generate_range(a.seed, config, world::split_range(split, a.count));
    world::write_dataset_file(world::split_path(prefix, split), d);
    nlohmann::ordered_json counts;
    counts["total"] = d.instances.size();
    for (auto kind : {world::ExpressionKind::phrase, world::ExpressionKind::sentence, world::ExpressionKind::dialog}) {
      auto n = std::count_if(d.instances.begin(), d.instances.end(), [&](const auto& i) { return i.kind == kind; });
      if (n) counts[std::string(world::name(kind))] = n;
    }
    summary[std::string(world::name(split))] = std::move(counts);
  }
  out << summary.dump() << '\n';
  return 0;
}

std::vector<train::PreparedInstance> load_prepared(const fs::path& path) {
  auto dataset = world::read_dataset_file(path);
  return train::prepare_all(dataset.instances);
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  train::TrainConfig config = a.config.empty() ? train::TrainConfig{} : train::TrainConfig::load(a.config);
  if (!a.data.empty()) {
    config.train_data = world::split_path(a.data, world::Split::train).string();
    config.val_data = world::split_path(a.data, world::Split::val).string();
  }
  if (!a.ablation.empty()) config.ablation = model::parse_ablation(a.ablation);
  if (a.epochs >= 0) config.epochs = a.epochs;
  if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
  if (a.hidden > 0) config.hidden = static_cast<std::size_t>(a.hidden);
  config.validate();
  if (config.train_data.empty()) throw InvalidArgument("no training data: pass --data or set train_data");

  auto train_set = load_prepared(config.train_data);
  std::vector<train::PreparedInstance> val_set;
  if (!config.val_data.empty()) val_set = load_prepared(config.val_data);

  std::ofstream file;
  std::ostream* metrics = &out;
  if (!a.metrics_out.empty()) {
    file.open(a.metrics_out, std::ios::binary);
    if (!file) throw IoError("cannot write " + a.metrics_out);
    metrics = &file;
  }
  auto result = train::train(config, train_set, val_set,
                             [&](const train::EpochMetrics& m) { *metrics << train::metrics_lines(m) << std::flush; });

  nlohmann::ordered_json best;
  best["best_epoch"] = result.best_epoch;
  best["best_val_accuracy"] = result.best_val_accuracy;
  if (!a.checkpoint.empty()) {
    train::Checkpoint ckpt{result.best_params, result.best_adam, config.ablation, {}};
    ckpt.metadata["best_epoch"] = std::to_string(result.best_epoch);
    ckpt.metadata["best_val_accuracy"] = world::format_float(result.best_val_accuracy);
    ckpt.metadata["seed"] = std::to_string(config.seed);
    train::save_checkpoint(a.checkpoint, ckpt);
    best["checkpoint"] = a.checkpoint;
  }
  *metrics << best.dump() << '\n';
  return 0;
}

nlohmann::ordered_json bucket_json(const train::Bucket& b) {
  return {{"correct", b.correct}, {"total", b.total}, {"accuracy", b.accuracy()}};
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  auto ckpt = train::load_checkpoint(a.checkpoint);
  if (ckpt.params.dims.visual_dim != enc::kVisualDim || ckpt.params.dims.proposal_dim != enc::kProposalDim ||
      ckpt.params.dims.vocabulary != world::Vocabulary::standard().size()) {
    throw CheckpointError("checkpoint dimensions do not match the shapeworld features");
  }
  model::Ablation ablation = a.ablation.empty() ? ckpt.ablation : model::parse_ablation(a.ablation);
  auto instances = load_prepared(resolve_data(a.data, a.split));
  if (instances.empty()) throw InvalidArgument("dataset is empty");
  auto result = train::evaluate(ckpt.params, instances, ablation);

  nlohmann::ordered_json j;
  j["ablation"] = model::name(ablation);
  j["accuracy"] = result.accuracy();
  j["correct"] = result.overall.correct;
  j["total"] = result.overall.total;
  j["mean_loss"] = result.mean_loss;
  nlohmann::ordered_json kinds = nlohmann::ordered_json::object();
  for (const auto& [kind, b] : result.by_kind) kinds[std::string(world::name(kind))] = bucket_json(b);
  j["by_kind"] = std::move(kinds);
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [n, b] : result.by_proposal_count) counts[std::to_string(n)] = bucket_json(b);
  j["by_proposal_count"] = std::move(counts);
  out << j.dump() << '\n';

  if (!a.predictions.empty()) {
    std::ofstream pred(a.predictions, std::ios::binary);
    if (!pred) throw IoError("cannot write " + a.predictions);
    ad::NoGradGuard no_grad;
    const nn::RunContext ctx{ad::Mode::eval, nullptr, 0.0};
    for (std::size_t i = 0; i < instances.size(); ++i) {
      auto r = train::run_instance(ckpt.params, instances[i], ablation, ctx);
      std::vector<double> p;
      for (double v : r.trace.probabilities) p.push_back(world::round_to_9_digits(v));
      nlohmann::ordered_json line{{"index", i}, {"predicted", r.trace.predicted}, {"target", instances[i].target},
                                  {"probabilities", p}};
      pred << line.dump() << '\n';
    }
  }
  return 0;
}

int cmd_trace(const TraceArgs& a, std::ostream& out) {
  auto ckpt = train::load_checkpoint(a.checkpoint);
  auto dataset = world::read_dataset_file(resolve_data(a.data, a.split));
  if (a.instance >= dataset.instances.size()) {
    throw InvalidArgument("instance " + std::to_string(a.instance) + " outside dataset of " +
                          std::to_string(dataset.instances.size()));
  }
  const auto& inst = dataset.instances[a.instance];
  auto prepared = train::prepare(inst);
  if (ckpt.params.dims.visual_dim != prepared.scene.grid.dim(1) ||
      ckpt.params.dims.proposal_dim != prepared.scene.proposals.dim(1) ||
      ckpt.params.dims.vocabulary != inst.expression.vocabulary_size) {
    throw CheckpointError("instance dimensions do not match the checkpoint");
  }
  auto bundle = build_trace(ckpt.params, prepared, ckpt.ablation, inst.scene.grid_side);
  write_trace(a.out, bundle);
  nlohmann::ordered_json j{{"steps", bundle.steps.size()},
                           {"predicted", bundle.predicted},
                           {"target", bundle.target},
                           {"out", a.out}};
  out << j.dump() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel-attention referring expression grounding on synthetic scenes", "plan"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate train/val/test datasets and the vocabulary file");
  gen_cmd->add_option("--seed", gen.seed, "Base seed");
  gen_cmd->add_option("--grid", gen.grid, "Grid side g")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--objects", gen.objects, "Objects per scene: N or MIN:MAX");
  gen_cmd->add_option("--count", gen.count, "Total instances across the 80/10/10 splits");
  gen_cmd->add_option("--kind", gen.kind, "Comma-separated kinds: phrase, sentence, dialog");
  gen_cmd->add_option("--rounds", gen.rounds, "Exact QA rounds per dialog (0 = any)");
  gen_cmd->add_option("--out", gen.out, "Output prefix")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and keep the best-validation checkpoint");
  train_cmd->add_option("--config", tr.config, "key = value config file");
  train_cmd->add_option("--data", tr.data, "Dataset prefix (uses its train and val splits)");
  train_cmd->add_option("--ablation", tr.ablation, "baseline | image_only | proposal_only | full");
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Where to write the best checkpoint");
  train_cmd->add_option("--out", tr.metrics_out, "Metrics file (default: stdout)");
  train_cmd->add_option("--epochs", tr.epochs, "Override epochs");
  train_cmd->add_option("--seed", tr.seed, "Override seed");
  train_cmd->add_option("--hidden", tr.hidden, "Override hidden size");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required();
  eval_cmd->add_option("--data", ev.data, "Dataset file or prefix")->required();
  eval_cmd->add_option("--split", ev.split, "Split used with a prefix");
  eval_cmd->add_option("--ablation", ev.ablation, "Override the checkpoint's ablation");
  eval_cmd->add_option("--predictions", ev.predictions, "Per-instance probabilities (JSON lines)");

  TraceArgs tc;
  auto* trace_cmd = app.add_subcommand("trace", "Export step-wise attention for one instance");
  trace_cmd->add_option("--checkpoint", tc.checkpoint)->required();
  trace_cmd->add_option("--data", tc.data, "Dataset file or prefix")->required();
  trace_cmd->add_option("--split", tc.split, "Split used with a prefix");
  trace_cmd->add_option("--instance", tc.instance, "Record index within the dataset")->required();
  trace_cmd->add_option("--out", tc.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*trace_cmd) return cmd_trace(tc, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace plan::cli
