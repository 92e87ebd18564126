#include "plan/cli/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "plan/errors.hpp"
#include "plan/shapeworld/dataset_io.hpp"
#include "plan/shapeworld/vocabulary.hpp"

namespace plan::cli {

namespace {

std::vector<double> rounded(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), world::round_to_9_digits);
  return out;
}

void check_normalized(const std::vector<double>& w, const char* what, std::size_t step) {
  if (w.empty()) return;
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) {
    throw InvalidValue(std::string(what) + " at step " + std::to_string(step) + " sums to " + std::to_string(total));
  }
}

}  // namespace

TraceBundle build_trace(const model::PlanParams& params, const train::PreparedInstance& instance,
                        model::Ablation ablation, int grid_side) {
  ad::NoGradGuard no_grad;
  const nn::RunContext ctx{ad::Mode::eval, nullptr, 0.0};
  auto embedding = enc::encode_expression(instance.expression, params.encoder, ctx);
  TraceBundle bundle;
  bundle.grid_side = grid_side;
  bundle.target = instance.target;
  for (std::size_t t = 1; t <= embedding.size(); ++t) {
    std::vector<ad::Tensor> prefix(embedding.begin(), embedding.begin() + static_cast<std::ptrdiff_t>(t));
    auto result = model::forward_ablation(ablation, instance.scene, prefix, params, ctx);
    TraceStep step;
    step.tokens = instance.expression.units[t - 1].tokens;
    step.alpha = result.trace.steps.back().alpha;
    step.beta = result.trace.steps.back().beta;
    step.probabilities = result.trace.probabilities;
    bundle.steps.push_back(std::move(step));
    if (t == embedding.size()) {
      bundle.final_probabilities = result.trace.probabilities;
      bundle.predicted = result.trace.predicted;
    }
  }
  return bundle;
}

std::string render_pgm(const std::vector<double>& weights, int grid_side, int cell_px) {
  if (grid_side < 1 || cell_px < 1) throw InvalidArgument("bad image geometry");
  if (weights.size() != static_cast<std::size_t>(grid_side * grid_side)) {
    throw InvalidShape("weights do not cover the grid");
  }
  const double peak = *std::max_element(weights.begin(), weights.end());
  const int side = grid_side * cell_px;
  std::ostringstream out;
  out << "P2\n" << side << ' ' << side << "\n255\n";
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      double w = weights[static_cast<std::size_t>((y / cell_px) * grid_side + x / cell_px)];
      int level = peak > 0.0 ? static_cast<int>(std::lround(255.0 * w / peak)) : 0;
      out << level << (x + 1 == side ? '\n' : ' ');
    }
  }
  return out.str();
}

void write_trace(const std::filesystem::path& dir, const TraceBundle& bundle) {
  for (std::size_t t = 0; t < bundle.steps.size(); ++t) {
    check_normalized(bundle.steps[t].alpha, "alpha", t + 1);
    check_normalized(bundle.steps[t].beta, "beta", t + 1);
  }
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "trace.jsonl", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "trace.jsonl").string());
  const auto& vocab = world::Vocabulary::standard();
  for (std::size_t t = 0; t < bundle.steps.size(); ++t) {
    const TraceStep& s = bundle.steps[t];
    nlohmann::ordered_json j;
    j["step"] = t + 1;
    j["unit"] = vocab.text(s.tokens);
    j["tokens"] = s.tokens;
    if (!s.alpha.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%02zu.pgm", t + 1);
      j["grid_side"] = bundle.grid_side;
      j["alpha"] = rounded(s.alpha);
      j["alpha_image"] = name;
      std::ofstream img(dir / name, std::ios::binary);
      if (!img) throw IoError("cannot write " + (dir / name).string());
      img << render_pgm(s.alpha, bundle.grid_side);
    }
    if (!s.beta.empty()) {
      std::vector<std::size_t> order(s.beta.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.beta[a] > s.beta[b]; });
      nlohmann::ordered_json top = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < std::min<std::size_t>(5, order.size()); ++k) {
        top.push_back({{"proposal", order[k]}, {"weight", world::round_to_9_digits(s.beta[order[k]])}});
      }
      j["beta"] = rounded(s.beta);
      j["top_beta"] = std::move(top);
    }
    j["probabilities"] = rounded(s.probabilities);
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json fin;
  fin["final"] = true;
  fin["predicted"] = bundle.predicted;
  fin["target"] = bundle.target;
  fin["correct"] = bundle.predicted == bundle.target;
  fin["probabilities"] = rounded(bundle.final_probabilities);
  out << fin.dump() << '\n';
  if (!out) throw IoError("write failed for trace");
}

}  // namespace plan::cli
