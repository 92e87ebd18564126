#include "plan/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "plan/encoding/features.hpp"
#include "plan/errors.hpp"
#include "plan/shapeworld/vocabulary.hpp"

namespace plan::train {

double TrainConfig::learning_rate_at(int epoch) const {
  return epoch > lr_decay_epoch ? learning_rate / lr_decay_factor : learning_rate;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning_rate must be >= 0");
  if (!(lr_decay_factor > 0.0)) throw InvalidArgument("lr_decay_factor must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (hidden < 1) throw InvalidArgument("hidden must be at least 1");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw ParseError("config: bad value for " + key + ": '" + value + "'");
  return out;
}

}  // namespace

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
    else if (key == "lr_decay_epoch") c.lr_decay_epoch = parse_number<int>(key, value);
    else if (key == "lr_decay_factor") c.lr_decay_factor = parse_number<double>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "hidden") c.hidden = parse_number<std::size_t>(key, value);
    else if (key == "dropout") c.dropout = parse_number<double>(key, value);
    else if (key == "epochs") c.epochs = parse_number<int>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "ablation") c.ablation = model::parse_ablation(value);
    else if (key == "stop_accuracy") c.stop_accuracy = parse_number<double>(key, value);
    else if (key == "train_data") c.train_data = value;
    else if (key == "val_data") c.val_data = value;
    else throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "learning_rate = " << learning_rate << "\n"
      << "lr_decay_epoch = " << lr_decay_epoch << "\n"
      << "lr_decay_factor = " << lr_decay_factor << "\n"
      << "batch_size = " << batch_size << "\n"
      << "hidden = " << hidden << "\n"
      << "dropout = " << dropout << "\n"
      << "epochs = " << epochs << "\n"
      << "seed = " << seed << "\n"
      << "ablation = " << model::name(ablation) << "\n"
      << "stop_accuracy = " << stop_accuracy << "\n";
  if (!train_data.empty()) out << "train_data = " << train_data << "\n";
  if (!val_data.empty()) out << "val_data = " << val_data << "\n";
  return out.str();
}

PreparedInstance prepare(const world::GroundingInstance& instance) {
  enc::SceneFeatures features = enc::synth_visual_features(instance.scene);
  PreparedInstance out;
  out.scene.grid = features.grid.as_tensor();
  out.scene.proposals = enc::proposal_matrix(features.proposals);
  out.expression = instance.expression;
  out.kind = instance.kind;
  out.target = instance.target_index;
  return out;
}

std::vector<PreparedInstance> prepare_all(std::span<const world::GroundingInstance> instances) {
  std::vector<PreparedInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(prepare(inst));
  return out;
}

model::ModelDims standard_dims(std::size_t hidden) {
  return {world::Vocabulary::standard().size(), enc::kVisualDim, enc::kProposalDim, hidden};
}

std::vector<ParamRef> param_refs(model::PlanParams& params) {
  std::vector<ParamRef> refs;
  params.visit([&](const std::string& name, ad::Tensor& t) { refs.push_back({name, t}); });
  return refs;
}

model::ForwardResult run_instance(const model::PlanParams& params, const PreparedInstance& instance,
                                  model::Ablation ablation, const nn::RunContext& ctx) {
  auto embedding = enc::encode_expression(instance.expression, params.encoder, ctx);
  return model::forward_ablation(ablation, instance.scene, embedding, params, ctx);
}

EvalResult evaluate_with(std::span<const PreparedInstance> instances, const Scorer& scorer) {
  EvalResult r;
  double loss_total = 0.0;
  for (const auto& inst : instances) {
    std::vector<double> scores = scorer(inst);
    if (scores.size() != inst.proposal_count()) throw InvalidShape("scorer returned the wrong number of scores");
    const bool hit = model::argmax(scores) == inst.target;
    // Log-sum-exp of the scores gives the loss of the implied softmax.
    double peak = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - peak);
    loss_total += peak + std::log(z) - scores[inst.target];
    for (Bucket* b : {&r.overall, &r.by_kind[inst.kind], &r.by_proposal_count[inst.proposal_count()]}) {
      b->total += 1;
      b->correct += hit ? 1 : 0;
    }
  }
  if (r.overall.total) r.mean_loss = loss_total / static_cast<double>(r.overall.total);
  return r;
}

EvalResult evaluate(const model::PlanParams& params, std::span<const PreparedInstance> instances,
                    model::Ablation ablation) {
  ad::NoGradGuard no_grad;
  const nn::RunContext ctx{ad::Mode::eval, nullptr, 0.0};
  return evaluate_with(instances, [&](const PreparedInstance& inst) {
    auto result = run_instance(params, inst, ablation, ctx);
    auto v = result.scores.values();
    return std::vector<double>(v.begin(), v.end());
  });
}

double train_batch(model::PlanParams& params, AdamState& adam, std::span<const PreparedInstance* const> batch,
                   model::Ablation ablation, double learning_rate, const nn::RunContext& ctx, std::size_t* correct) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  params.zero_grad();
  const double weight = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const PreparedInstance* inst : batch) {
    auto result = run_instance(params, *inst, ablation, ctx);
    ad::Tensor loss = ad::cross_entropy(result.scores, inst->target);
    if (!std::isfinite(loss.item())) throw InvalidValue("non-finite training loss");
    total += loss.item();
    if (correct && result.trace.predicted == inst->target) ++*correct;
    ad::backward(ad::scale(loss, weight));
  }
  auto refs = param_refs(params);
  adam_step(refs, adam, learning_rate);
  return total * weight;
}

TrainResult train(const TrainConfig& config, std::span<const PreparedInstance> train_set,
                  std::span<const PreparedInstance> val_set, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InvalidArgument("training set is empty");
  TrainResult result;
  result.params = model::PlanParams::init(standard_dims(config.hidden), config.seed);
  auto refs = param_refs(result.params);
  AdamState adam = AdamState::for_params(refs);

  // Separate streams so the shuffle order does not depend on dropout draws.
  ad::Rng shuffle_rng(config.seed ^ 0x5348554646ULL);
  ad::Rng dropout_rng(config.seed ^ 0x44524f50ULL);
  const nn::RunContext ctx{ad::Mode::train, &dropout_rng, config.dropout};

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    m.learning_rate = config.learning_rate_at(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<const PreparedInstance*> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
        batch.push_back(&train_set[order[k]]);
      }
      loss_sum += train_batch(result.params, adam, batch, config.ablation, m.learning_rate, ctx, &correct) *
                  static_cast<double>(batch.size());
    }
    m.train_loss = loss_sum / static_cast<double>(train_set.size());
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      EvalResult val = evaluate(result.params, val_set, config.ablation);
      m.val_loss = val.mean_loss;
      m.val_accuracy = val.accuracy();
    }
    result.history.push_back(m);
    if (m.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = m.val_accuracy;
      result.best_epoch = epoch;
      result.best_params = result.params.clone();
      result.best_adam = adam;
    }
    if (on_epoch) on_epoch(m);
    if (config.stop_accuracy > 0.0 && m.val_accuracy >= config.stop_accuracy) break;
  }
  if (result.history.empty()) {
    result.best_params = result.params.clone();
    result.best_adam = adam;
  }
  return result;
}

std::string metrics_lines(const EpochMetrics& m) {
  nlohmann::ordered_json train{{"epoch", m.epoch},
                               {"split", "train"},
                               {"loss", m.train_loss},
                               {"accuracy", m.train_accuracy},
                               {"lr", m.learning_rate}};
  nlohmann::ordered_json val{{"epoch", m.epoch},
                             {"split", "val"},
                             {"loss", m.val_loss},
                             {"accuracy", m.val_accuracy},
                             {"lr", m.learning_rate}};
  return train.dump() + "\n" + val.dump() + "\n";
}

}  // namespace plan::train
