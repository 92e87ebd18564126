#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plan/model/plan_model.hpp"
#include "plan/shapeworld/generator.hpp"
#include "plan/train/adam.hpp"

namespace plan::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  int lr_decay_epoch = 15;  // lr is divided after this many epochs
  double lr_decay_factor = 10.0;
  std::size_t batch_size = 32;
  std::size_t hidden = 64;
  double dropout = 0.4;
  int epochs = 30;
  std::uint64_t seed = 1;
  model::Ablation ablation = model::Ablation::full;
  // Stop as soon as validation accuracy reaches this value; 0 disables.
  double stop_accuracy = 0.0;
  std::string train_data;
  std::string val_data;

  /// Rate in effect during `epoch` (1-based).
  double learning_rate_at(int epoch) const;
  void validate() const;

  /// Flat `key = value` text, one pair per line; `#` starts a comment.
  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::string& path);
  std::string to_text() const;
};

/// A grounding instance with its scene features already in tensor form.
struct PreparedInstance {
  model::SceneTensors scene;
  enc::ExpressionSeq expression;
  world::ExpressionKind kind = world::ExpressionKind::phrase;
  std::size_t target = 0;

  std::size_t proposal_count() const { return scene.proposals.dim(0); }
};

PreparedInstance prepare(const world::GroundingInstance& instance);
std::vector<PreparedInstance> prepare_all(std::span<const world::GroundingInstance> instances);

/// Dimensions of a model over the standard vocabulary and synthetic features.
model::ModelDims standard_dims(std::size_t hidden);

std::vector<ParamRef> param_refs(model::PlanParams& params);

/// Expression encoding followed by the configured forward pass.
model::ForwardResult run_instance(const model::PlanParams& params, const PreparedInstance& instance,
                                  model::Ablation ablation, const nn::RunContext& ctx);

struct Bucket {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct EvalResult {
  Bucket overall;
  double mean_loss = 0.0;
  // Only buckets that received at least one instance are present.
  std::map<world::ExpressionKind, Bucket> by_kind;
  std::map<std::size_t, Bucket> by_proposal_count;

  double accuracy() const { return overall.accuracy(); }
};

/// Returns per-proposal scores; the prediction is their lowest-index argmax.
using Scorer = std::function<std::vector<double>(const PreparedInstance&)>;

EvalResult evaluate_with(std::span<const PreparedInstance> instances, const Scorer& scorer);

/// Eval-mode accuracy (dropout off, no graph recording).
EvalResult evaluate(const model::PlanParams& params, std::span<const PreparedInstance> instances,
                    model::Ablation ablation);

struct EpochMetrics {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  model::PlanParams params;       // state after the last epoch
  model::PlanParams best_params;  // highest validation accuracy seen
  AdamState best_adam;
  int best_epoch = 0;
  double best_val_accuracy = -1.0;
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Shuffled mini-batch Adam on the batch-mean cross-entropy. Throws
/// InvalidArgument on an empty training set and InvalidValue on a
/// non-finite loss.
TrainResult train(const TrainConfig& config, std::span<const PreparedInstance> train_set,
                  std::span<const PreparedInstance> val_set, const EpochCallback& on_epoch = {});

/// One averaged mini-batch update; returns the mean loss before the update.
double train_batch(model::PlanParams& params, AdamState& adam, std::span<const PreparedInstance* const> batch,
                   model::Ablation ablation, double learning_rate, const nn::RunContext& ctx,
                   std::size_t* correct = nullptr);

/// Line-delimited metric records, one per epoch and split.
std::string metrics_lines(const EpochMetrics& m);

}  // namespace plan::train
