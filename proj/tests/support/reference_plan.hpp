#pragma once

// Straight-line re-implementation of the referring model over plain
// std::vector<double>, reading weights straight out of PlanParams. It shares
// no code with the autodiff ops and serves as the transcription oracle.

#include <algorithm>
#include <cmath>
#include <vector>

#include "plan/model/plan_model.hpp"

namespace plan::testing::reference {

using Vec = std::vector<double>;

struct Mat {
  std::size_t rows = 0, cols = 0;
  Vec data;
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  Vec row(std::size_t r) const { return Vec(data.begin() + r * cols, data.begin() + (r + 1) * cols); }
};

inline Mat mat(const ad::Tensor& t) {
  return {t.dim(0), t.dim(1), Vec(t.values().begin(), t.values().end())};
}
inline Vec vec(const ad::Tensor& t) { return Vec(t.values().begin(), t.values().end()); }

// x^T W for x of length W.rows
inline Vec times(const Vec& x, const Mat& w) {
  Vec out(w.cols, 0.0);
  for (std::size_t j = 0; j < w.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) s += x[i] * w.at(i, j);
    out[j] = s;
  }
  return out;
}

inline Vec plus(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec apply_tanh(Vec a) {
  for (double& v : a) v = std::tanh(v);
  return a;
}

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(const Vec& x) {
  double peak = *std::max_element(x.begin(), x.end());
  Vec out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += (out[i] = std::exp(x[i] - peak));
  for (double& v : out) v /= total;
  return out;
}

inline Vec join(const Vec& a, const Vec& b) {
  Vec out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

struct State {
  Vec h, c;
};

// i, f, g, o gate blocks.
inline State lstm(const nn::LstmCell& cell, const Vec& x, const State& s) {
  const Mat wx = mat(cell.w_input), wh = mat(cell.w_hidden);
  const Vec b = vec(cell.bias);
  const std::size_t n = s.h.size();
  State out{Vec(n), Vec(n)};
  for (std::size_t k = 0; k < n; ++k) {
    double a[4];
    for (int gate = 0; gate < 4; ++gate) {
      std::size_t col = gate * n + k;
      double acc = b[col];
      for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * wx.at(i, col);
      for (std::size_t i = 0; i < n; ++i) acc += s.h[i] * wh.at(i, col);
      a[gate] = acc;
    }
    const double in = sigm(a[0]), forget = sigm(a[1]), cand = std::tanh(a[2]), outg = sigm(a[3]);
    out.c[k] = forget * s.c[k] + in * cand;
    out.h[k] = outg * std::tanh(out.c[k]);
  }
  return out;
}

struct Attention {
  Vec weights;
  Vec context;
};

// e_i = w . tanh(W_f f_i + W_h h + b); alpha = softmax(e); z = sum alpha_i f_i
inline Attention attend(const Mat& features, const Vec& h, const model::AttentionWeights& w) {
  const Mat wf = mat(w.w_feature), wh = mat(w.w_hidden);
  const Vec b = vec(w.bias), score = vec(w.score);
  const Vec query = plus(times(h, wh), b);
  Vec logits(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    logits[i] = dot(score, apply_tanh(plus(times(features.row(i), wf), query)));
  }
  Attention out{softmax(logits), Vec(features.cols, 0.0)};
  for (std::size_t i = 0; i < features.rows; ++i) {
    for (std::size_t j = 0; j < features.cols; ++j) out.context[j] += out.weights[i] * features.at(i, j);
  }
  return out;
}

inline Mat project(const Mat& raw, const model::PlanParams& p) {
  const Mat w = mat(p.proposal_weight);
  const Vec b = vec(p.proposal_bias);
  Mat out{raw.rows, w.cols, {}};
  for (std::size_t i = 0; i < raw.rows; ++i) {
    Vec row = apply_tanh(plus(times(raw.row(i), w), b));
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

struct Output {
  Vec probabilities;
  std::vector<Vec> alphas, betas;
};

inline Output forward(model::Ablation config, const Mat& grid, const Mat& raw_proposals, const std::vector<Vec>& m,
                      const model::PlanParams& p) {
  const std::size_t hsize = p.dims.hidden;
  const bool image_on = config == model::Ablation::image_only || config == model::Ablation::full;
  const bool proposal_on = config == model::Ablation::proposal_only || config == model::Ablation::full;
  Output out;
  const Mat props = project(raw_proposals, p);

  Vec referent;
  if (image_on) {
    State s{Vec(hsize, 0.0), Vec(hsize, 0.0)};
    for (const Vec& mt : m) {
      Attention a = attend(grid, s.h, p.image_attention);
      out.alphas.push_back(a.weights);
      s = lstm(p.image_lstm, join(mt, a.context), s);
    }
    referent = s.h;
  } else {
    State s{Vec(hsize, 0.0), Vec(hsize, 0.0)};
    for (const Vec& mt : m) s = lstm(p.plain_lstm, mt, s);
    Vec pooled(grid.cols, 0.0);
    for (std::size_t i = 0; i < grid.rows; ++i) {
      for (std::size_t j = 0; j < grid.cols; ++j) pooled[j] += grid.at(i, j) / static_cast<double>(grid.rows);
    }
    referent = plus(times(join(s.h, pooled), mat(p.fuse_weight)), vec(p.fuse_bias));
  }

  Vec beta_last(props.rows, 1.0);
  if (proposal_on) {
    State s{Vec(hsize, 0.0), Vec(hsize, 0.0)};
    for (const Vec& mt : m) {
      Attention a = attend(props, s.h, p.proposal_attention);
      out.betas.push_back(a.weights);
      beta_last = a.weights;
      s = lstm(p.proposal_lstm, join(mt, a.context), s);
    }
  }
  Vec scores(props.rows);
  for (std::size_t i = 0; i < props.rows; ++i) {
    Vec attended = props.row(i);
    for (double& v : attended) v *= beta_last[i];  // p~_i = beta_Li p_i
    scores[i] = dot(referent, attended);
  }
  out.probabilities = softmax(scores);
  return out;
}

inline Vec embed_word(int token, const enc::EncoderParams& e) {
  const Mat table = mat(e.embedding);
  return apply_tanh(plus(times(table.row(static_cast<std::size_t>(token)), mat(e.mlp_weight)), vec(e.mlp_bias)));
}

inline Vec encode_qa(const std::vector<int>& tokens, const enc::EncoderParams& e) {
  State s{Vec(e.hidden(), 0.0), Vec(e.hidden(), 0.0)};
  for (int t : tokens) s = lstm(e.qa_lstm, embed_word(t, e), s);
  return s.h;
}

}  // namespace plan::testing::reference
