#pragma once

// Parallel-attention referring model.
//
// Two recurrent encoders read the expression units m_1..m_L. The image
// branch attends over the K grid cells, the proposal branch over the N
// projected proposals; both feed the attended context back into their LSTM
// together with m_t. The referring score of proposal i is the dot product of
// the image branch's final hidden state with the proposal vector scaled by
// its last-step proposal weight.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plan/autodiff/tensor.hpp"
#include "plan/encoding/embedding.hpp"
#include "plan/nn/layers.hpp"

namespace plan::model {

struct ModelDims {
  std::size_t vocabulary = 0;
  std::size_t visual_dim = 0;    // D_v
  std::size_t proposal_dim = 0;  // width of the raw [u; s; c] rows
  std::size_t hidden = 64;       // H (also the word-embedding and attention width)

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// tanh(W_f f_i + W_h h + b) reduced to a scalar score by `score`.
struct AttentionWeights {
  ad::Tensor w_feature;  // [F x H]
  ad::Tensor w_hidden;   // [H x H]
  ad::Tensor bias;       // [H]
  ad::Tensor score;      // [H]
};

struct PlanParams {
  ModelDims dims;
  enc::EncoderParams encoder;

  nn::LstmCell image_lstm;  // input [m; z], H + D_v
  AttentionWeights image_attention;

  ad::Tensor proposal_weight;  // [D_p x H]
  ad::Tensor proposal_bias;    // [H]
  nn::LstmCell proposal_lstm;  // input [m; z'], 2H
  AttentionWeights proposal_attention;

  // Attention-free counterparts used by the ablations.
  nn::LstmCell plain_lstm;  // input m, H
  ad::Tensor fuse_weight;   // [(H + D_v) x H]
  ad::Tensor fuse_bias;     // [H]

  static PlanParams init(const ModelDims& dims, std::uint64_t seed);

  /// Calls f(name, tensor) for every trainable tensor in a fixed order.
  void visit(const std::function<void(const std::string&, ad::Tensor&)>& f);
  void visit(const std::function<void(const std::string&, const ad::Tensor&)>& f) const;

  /// Deep copy; the result shares no storage with *this.
  PlanParams clone() const;
  void zero_grad();
  std::size_t parameter_count() const;
};

struct RecurrentState {
  ad::Tensor h;
  ad::Tensor c;
  ad::Tensor z;
};

struct AttentionResult {
  ad::Tensor context;  // sum_i w_i f_i
  ad::Tensor weights;  // softmax over the items
  ad::Tensor logits;   // pre-softmax scalar scores
};

/// Features attended over by one branch, with the step-invariant W_f f_i
/// product precomputed.
struct AttentionSource {
  ad::Tensor features;   // [n x F]
  ad::Tensor projected;  // [n x H]

  static AttentionSource make(const ad::Tensor& features, const AttentionWeights& weights);
};

AttentionResult attend(const AttentionSource& source, const ad::Tensor& h_prev, const AttentionWeights& weights);

AttentionResult image_attend(const ad::Tensor& grid, const ad::Tensor& h_prev, const PlanParams& params);
AttentionResult proposal_attend(const ad::Tensor& proposals, const ad::Tensor& h_prev, const PlanParams& params);

enum class Branch { image, proposal };

/// Attend with state.h, then one LSTM step on [m_t; z_t].
/// `attention_out`, when given, receives the attention result of this step.
RecurrentState attended_step(Branch branch, const ad::Tensor& m_t, const RecurrentState& state,
                             const AttentionSource& source, const PlanParams& params,
                             AttentionResult* attention_out = nullptr);

RecurrentState initial_state(Branch branch, const PlanParams& params);

/// p_i = dropout(tanh(W [u_i; s_i; c_i] + b)), row-wise.
ad::Tensor project_proposals(const ad::Tensor& raw_proposals, const PlanParams& params, const nn::RunContext& ctx);

struct StepTrace {
  std::vector<double> alpha;            // K, empty when the image branch is off
  std::vector<double> beta;             // N, empty when the proposal branch is off
  std::vector<double> image_logits;
  std::vector<double> proposal_logits;
};

struct AttentionTrace {
  std::vector<StepTrace> steps;       // one per expression unit
  std::vector<double> probabilities;  // P
  std::size_t predicted = 0;
};

struct ForwardResult {
  ad::Tensor scores;         // pre-softmax referring scores
  ad::Tensor probabilities;  // P = softmax(scores)
  AttentionTrace trace;
};

/// Inputs for one grounding instance, already in tensor form.
struct SceneTensors {
  ad::Tensor grid;       // [K x D_v]
  ad::Tensor proposals;  // raw [N x D_p]
};

ForwardResult forward(const SceneTensors& scene, const std::vector<ad::Tensor>& expression,
                      const PlanParams& params, const nn::RunContext& ctx);

enum class Ablation { baseline, image_only, proposal_only, full };

std::string_view name(Ablation a);
/// Accepts the canonical names plus hyphenated spellings and "parallel".
Ablation parse_ablation(std::string_view text);

ForwardResult forward_ablation(Ablation config, const SceneTensors& scene, const std::vector<ad::Tensor>& expression,
                               const PlanParams& params, const nn::RunContext& ctx);

/// Lowest index among the maximal entries.
std::size_t argmax(std::span<const double> values);

}  // namespace plan::model
