#pragma once

#include <vector>

#include "plan/autodiff/tensor.hpp"
#include "plan/encoding/expression.hpp"
#include "plan/nn/layers.hpp"

namespace plan::enc {

/// Word table and MLP shared by the word path and the QA-pair LSTM path.
struct EncoderParams {
  ad::Tensor embedding;  // [V x H]
  ad::Tensor mlp_weight; // [H x H]
  ad::Tensor mlp_bias;   // [H]
  nn::LstmCell qa_lstm;  // H -> H

  static EncoderParams init(std::size_t vocabulary, std::size_t hidden, ad::Rng& rng);
  std::size_t vocabulary() const { return embedding.dim(0); }
  std::size_t hidden() const { return embedding.dim(1); }
};

/// one-hot(token) x table, then tanh(affine), then dropout.
ad::Tensor embed_word(int token, const EncoderParams& params, const nn::RunContext& ctx);

/// Final hidden state of the QA LSTM run over the pair's word embeddings.
ad::Tensor encode_qa_pair(const ExpressionUnit& pair, const EncoderParams& params, const nn::RunContext& ctx);

/// One H-vector per expression unit, in order.
std::vector<ad::Tensor> encode_expression(const ExpressionSeq& seq, const EncoderParams& params,
                                          const nn::RunContext& ctx);

}  // namespace plan::enc
