#include "plan/encoding/embedding.hpp"

#include <string>

#include "plan/errors.hpp"

namespace plan::enc {

using ad::Tensor;

void ExpressionSeq::validate() const {
  if (units.empty()) throw InvalidArgument("expression has no units");
  const UnitKind kind = units.front().kind;
  for (const auto& unit : units) {
    if (unit.kind != kind) throw InvalidArgument("expression mixes words and QA pairs");
    if (unit.tokens.empty()) throw InvalidArgument("expression unit has no tokens");
    if (unit.kind == UnitKind::word && unit.tokens.size() != 1) throw InvalidArgument("word unit must hold one token");
    for (int t : unit.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocabulary_size) {
        throw InvalidArgument("token " + std::to_string(t) + " outside vocabulary");
      }
    }
  }
}

EncoderParams EncoderParams::init(std::size_t vocabulary, std::size_t hidden, ad::Rng& rng) {
  EncoderParams p;
  // A one-hot input has a single active entry.
  p.embedding = nn::uniform_param({vocabulary, hidden}, 1, rng);
  p.mlp_weight = nn::uniform_param({hidden, hidden}, hidden, rng);
  p.mlp_bias = nn::uniform_param({hidden}, hidden, rng);
  p.qa_lstm = nn::LstmCell::init(hidden, hidden, rng);
  return p;
}

Tensor embed_word(int token, const EncoderParams& params, const nn::RunContext& ctx) {
  if (token < 0 || static_cast<std::size_t>(token) >= params.vocabulary()) {
    throw InvalidArgument("token " + std::to_string(token) + " outside vocabulary");
  }
  std::vector<double> one_hot(params.vocabulary(), 0.0);
  one_hot[static_cast<std::size_t>(token)] = 1.0;
  Tensor dense = ad::matmul(Tensor::vector(std::move(one_hot)), params.embedding);
  return ctx.dropout(ad::tanh(nn::affine(dense, params.mlp_weight, params.mlp_bias)));
}

Tensor encode_qa_pair(const ExpressionUnit& pair, const EncoderParams& params, const nn::RunContext& ctx) {
  if (pair.tokens.empty()) throw InvalidArgument("empty QA pair");
  nn::LstmState state = params.qa_lstm.zero_state();
  for (int token : pair.tokens) state = params.qa_lstm.step(embed_word(token, params, ctx), state);
  return state.h;
}

std::vector<Tensor> encode_expression(const ExpressionSeq& seq, const EncoderParams& params,
                                      const nn::RunContext& ctx) {
  seq.validate();
  std::vector<Tensor> out;
  out.reserve(seq.length());
  for (const auto& unit : seq.units) {
    out.push_back(unit.kind == UnitKind::word ? embed_word(unit.tokens.front(), params, ctx)
                                              : encode_qa_pair(unit, params, ctx));
  }
  return out;
}

}  // namespace plan::enc
