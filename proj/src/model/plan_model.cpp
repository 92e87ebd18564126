#include "plan/model/plan_model.hpp"

#include <algorithm>
#include <string>

#include "plan/errors.hpp"

namespace plan::model {

using ad::Tensor;

namespace {

AttentionWeights init_attention(std::size_t feature_dim, std::size_t hidden, ad::Rng& rng) {
  return {nn::uniform_param({feature_dim, hidden}, feature_dim, rng), nn::uniform_param({hidden, hidden}, hidden, rng),
          nn::uniform_param({hidden}, hidden, rng), nn::uniform_param({hidden}, hidden, rng)};
}

template <typename Params, typename F>
void visit_impl(Params& p, F&& f) {
  auto lstm = [&](const std::string& prefix, auto& cell) {
    f(prefix + ".w_input", cell.w_input);
    f(prefix + ".w_hidden", cell.w_hidden);
    f(prefix + ".bias", cell.bias);
  };
  auto attention = [&](const std::string& prefix, auto& a) {
    f(prefix + ".w_feature", a.w_feature);
    f(prefix + ".w_hidden", a.w_hidden);
    f(prefix + ".bias", a.bias);
    f(prefix + ".score", a.score);
  };
  f("encoder.embedding", p.encoder.embedding);
  f("encoder.mlp_weight", p.encoder.mlp_weight);
  f("encoder.mlp_bias", p.encoder.mlp_bias);
  lstm("encoder.qa_lstm", p.encoder.qa_lstm);
  lstm("image.lstm", p.image_lstm);
  attention("image.attention", p.image_attention);
  f("proposal.weight", p.proposal_weight);
  f("proposal.bias", p.proposal_bias);
  lstm("proposal.lstm", p.proposal_lstm);
  attention("proposal.attention", p.proposal_attention);
  lstm("plain.lstm", p.plain_lstm);
  f("plain.fuse_weight", p.fuse_weight);
  f("plain.fuse_bias", p.fuse_bias);
}

void record(const Tensor& t, std::vector<double>& out) { out.assign(t.values().begin(), t.values().end()); }

}  // namespace

PlanParams PlanParams::init(const ModelDims& dims, std::uint64_t seed) {
  if (dims.vocabulary == 0 || dims.visual_dim == 0 || dims.proposal_dim == 0 || dims.hidden == 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  ad::Rng rng(seed);
  const std::size_t h = dims.hidden;
  PlanParams p;
  p.dims = dims;
  p.encoder = enc::EncoderParams::init(dims.vocabulary, h, rng);
  p.image_lstm = nn::LstmCell::init(h + dims.visual_dim, h, rng);
  p.image_attention = init_attention(dims.visual_dim, h, rng);
  p.proposal_weight = nn::uniform_param({dims.proposal_dim, h}, dims.proposal_dim, rng);
  p.proposal_bias = nn::uniform_param({h}, dims.proposal_dim, rng);
  p.proposal_lstm = nn::LstmCell::init(2 * h, h, rng);
  p.proposal_attention = init_attention(h, h, rng);
  p.plain_lstm = nn::LstmCell::init(h, h, rng);
  p.fuse_weight = nn::uniform_param({h + dims.visual_dim, h}, h + dims.visual_dim, rng);
  p.fuse_bias = nn::uniform_param({h}, h + dims.visual_dim, rng);
  return p;
}

void PlanParams::visit(const std::function<void(const std::string&, Tensor&)>& f) { visit_impl(*this, f); }

void PlanParams::visit(const std::function<void(const std::string&, const Tensor&)>& f) const {
  visit_impl(*this, f);
}

PlanParams PlanParams::clone() const {
  PlanParams copy = *this;
  copy.visit([](const std::string&, Tensor& t) { t = t.clone(true); });
  return copy;
}

void PlanParams::zero_grad() {
  visit([](const std::string&, Tensor& t) { t.zero_grad(); });
}

std::size_t PlanParams::parameter_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

AttentionSource AttentionSource::make(const Tensor& features, const AttentionWeights& weights) {
  if (features.rank() != 2 || features.dim(0) == 0) throw InvalidShape("attention needs a non-empty [n x F] source");
  return {features, ad::matmul(features, weights.w_feature)};
}

AttentionResult attend(const AttentionSource& source, const Tensor& h_prev, const AttentionWeights& weights) {
  const std::size_t n = source.features.dim(0);
  Tensor query = nn::affine(h_prev, weights.w_hidden, weights.bias);
  Tensor hidden = ad::tanh(ad::add(source.projected, nn::repeat_rows(query, n)));
  Tensor logits = ad::matmul(hidden, weights.score);
  Tensor alpha = ad::softmax(logits);
  return {ad::matmul(alpha, source.features), alpha, logits};
}

AttentionResult image_attend(const Tensor& grid, const Tensor& h_prev, const PlanParams& params) {
  return attend(AttentionSource::make(grid, params.image_attention), h_prev, params.image_attention);
}

AttentionResult proposal_attend(const Tensor& proposals, const Tensor& h_prev, const PlanParams& params) {
  return attend(AttentionSource::make(proposals, params.proposal_attention), h_prev, params.proposal_attention);
}

RecurrentState initial_state(Branch branch, const PlanParams& params) {
  const std::size_t h = params.dims.hidden;
  const std::size_t z = branch == Branch::image ? params.dims.visual_dim : h;
  return {Tensor::zeros({h}), Tensor::zeros({h}), Tensor::zeros({z})};
}

RecurrentState attended_step(Branch branch, const Tensor& m_t, const RecurrentState& state,
                             const AttentionSource& source, const PlanParams& params, AttentionResult* attention_out) {
  const bool image = branch == Branch::image;
  const AttentionWeights& weights = image ? params.image_attention : params.proposal_attention;
  const nn::LstmCell& cell = image ? params.image_lstm : params.proposal_lstm;
  if (m_t.rank() != 1 || m_t.size() != params.dims.hidden) throw InvalidShape("expression vector must have size H");
  AttentionResult att = attend(source, state.h, weights);
  nn::LstmState next = cell.step(ad::concat({m_t, att.context}), {state.h, state.c});
  RecurrentState out{next.h, next.c, att.context};
  if (attention_out) *attention_out = std::move(att);
  return out;
}

Tensor project_proposals(const Tensor& raw_proposals, const PlanParams& params, const nn::RunContext& ctx) {
  if (raw_proposals.rank() != 2 || raw_proposals.dim(1) != params.dims.proposal_dim) {
    throw InvalidShape("raw proposals must be [N x " + std::to_string(params.dims.proposal_dim) + "]");
  }
  return ctx.dropout(ad::tanh(nn::affine(raw_proposals, params.proposal_weight, params.proposal_bias)));
}

std::string_view name(Ablation a) {
  switch (a) {
    case Ablation::baseline: return "baseline";
    case Ablation::image_only: return "image_only";
    case Ablation::proposal_only: return "proposal_only";
    case Ablation::full: return "full";
  }
  return "?";
}

Ablation parse_ablation(std::string_view text) {
  if (text == "baseline") return Ablation::baseline;
  if (text == "image_only" || text == "image-only" || text == "image") return Ablation::image_only;
  if (text == "proposal_only" || text == "proposal-only" || text == "proposal") return Ablation::proposal_only;
  if (text == "full" || text == "parallel") return Ablation::full;
  throw InvalidArgument("unknown ablation '" + std::string(text) +
                        "'; expected one of: baseline, image_only, proposal_only, full");
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of empty range");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

ForwardResult forward_ablation(Ablation config, const SceneTensors& scene, const std::vector<Tensor>& expression,
                               const PlanParams& params, const nn::RunContext& ctx) {
  if (expression.empty()) throw InvalidArgument("expression must have at least one unit");
  if (scene.grid.rank() != 2 || scene.grid.dim(1) != params.dims.visual_dim) {
    throw InvalidShape("grid must be [K x " + std::to_string(params.dims.visual_dim) + "]");
  }
  const bool image_on = config == Ablation::image_only || config == Ablation::full;
  const bool proposal_on = config == Ablation::proposal_only || config == Ablation::full;

  ForwardResult result;
  result.trace.steps.resize(expression.size());
  Tensor proposals = project_proposals(scene.proposals, params, ctx);

  Tensor referent;  // the H-vector each proposal is scored against
  if (image_on) {
    AttentionSource source = AttentionSource::make(scene.grid, params.image_attention);
    RecurrentState state = initial_state(Branch::image, params);
    for (std::size_t t = 0; t < expression.size(); ++t) {
      AttentionResult att;
      state = attended_step(Branch::image, expression[t], state, source, params, &att);
      record(att.weights, result.trace.steps[t].alpha);
      record(att.logits, result.trace.steps[t].image_logits);
    }
    referent = state.h;
  } else {
    nn::LstmState state = params.plain_lstm.zero_state();
    for (const Tensor& m : expression) state = params.plain_lstm.step(m, state);
    const std::size_t k = scene.grid.dim(0);
    Tensor pooled = ad::matmul(Tensor::full({k}, 1.0 / static_cast<double>(k)), scene.grid);
    referent = nn::affine(ad::concat({state.h, pooled}), params.fuse_weight, params.fuse_bias);
  }

  Tensor scores = ad::matmul(proposals, referent);
  if (proposal_on) {
    AttentionSource source = AttentionSource::make(proposals, params.proposal_attention);
    RecurrentState state = initial_state(Branch::proposal, params);
    Tensor last_beta;
    for (std::size_t t = 0; t < expression.size(); ++t) {
      AttentionResult att;
      state = attended_step(Branch::proposal, expression[t], state, source, params, &att);
      record(att.weights, result.trace.steps[t].beta);
      record(att.logits, result.trace.steps[t].proposal_logits);
      last_beta = att.weights;
    }
    // h_L . (beta_Li p_i) == beta_Li (p_i . h_L)
    scores = ad::mul(last_beta, scores);
  }

  result.scores = scores;
  result.probabilities = ad::softmax(scores);
  record(result.probabilities, result.trace.probabilities);
  result.trace.predicted = argmax(result.trace.probabilities);
  return result;
}

ForwardResult forward(const SceneTensors& scene, const std::vector<Tensor>& expression, const PlanParams& params,
                      const nn::RunContext& ctx) {
  return forward_ablation(Ablation::full, scene, expression, params, ctx);
}

}  // namespace plan::model
