// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [name ...]
// With no arguments every criterion runs; otherwise only the named ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plan/cli/commands.hpp"
#include "plan/encoding/embedding.hpp"
#include "plan/errors.hpp"
#include "plan/model/plan_model.hpp"
#include "plan/shapeworld/generator.hpp"
#include "plan/shapeworld/oracle.hpp"
#include "plan/train/checkpoint.hpp"
#include "plan/train/trainer.hpp"
#include "support/finite_diff.hpp"
#include "support/reference_plan.hpp"

using namespace plan;
using ad::Tensor;
using plan::testing::random_tensor;
namespace fs = std::filesystem;
namespace ref = plan::testing::reference;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const nn::RunContext kEval{};
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

// Weighted sum of every entry, turning any tensor into a scalar loss.
Tensor probe(const Tensor& t, const Tensor& weights) { return ad::sum(ad::mul(t, weights)); }

// ---------------------------------------------------------------------------
// Gradient suite

struct GradCase {
  std::string op;
  double error;
};

std::vector<GradCase> op_gradient_cases() {
  std::vector<GradCase> cases;
  auto run = [&](const std::string& op, std::vector<Tensor> in,
                 const std::function<Tensor(const std::vector<Tensor>&)>& fn) {
    cases.push_back({op, plan::testing::max_gradient_error(std::move(in), fn)});
  };
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    const std::size_t r = dim(rng), k = dim(rng), c = dim(rng);
    const Tensor w_rc = random_tensor({r, c}, rng, false);
    const Tensor w_c = random_tensor({c}, rng, false);
    const Tensor w_r = random_tensor({r}, rng, false);
    const Tensor w_rk = random_tensor({r, k}, rng, false);

    run("matmul", {random_tensor({r, k}, rng), random_tensor({k, c}, rng)},
        [&](const auto& x) { return probe(ad::matmul(x[0], x[1]), w_rc); });
    run("matmul_row", {random_tensor({k}, rng), random_tensor({k, c}, rng)},
        [&](const auto& x) { return probe(ad::matmul(x[0], x[1]), w_c); });
    run("matmul_col", {random_tensor({r, k}, rng), random_tensor({k}, rng)},
        [&](const auto& x) { return probe(ad::matmul(x[0], x[1]), w_r); });
    run("add", {random_tensor({r, k}, rng), random_tensor({r, k}, rng), random_tensor({}, rng)},
        [&](const auto& x) { return probe(ad::add(ad::add(x[0], x[1]), x[2]), w_rk); });
    run("sub", {random_tensor({r, k}, rng), random_tensor({r, k}, rng), random_tensor({}, rng)},
        [&](const auto& x) { return probe(ad::sub(ad::sub(x[0], x[1]), x[2]), w_rk); });
    run("mul", {random_tensor({r, k}, rng), random_tensor({r, k}, rng), random_tensor({}, rng)},
        [&](const auto& x) { return probe(ad::mul(ad::mul(x[0], x[1]), x[2]), w_rk); });
    run("scale", {random_tensor({r, k}, rng)}, [&](const auto& x) { return probe(ad::scale(x[0], -1.7), w_rk); });
    run("tanh", {random_tensor({r, k}, rng, true, -3, 3)},
        [&](const auto& x) { return probe(ad::tanh(x[0]), w_rk); });
    run("sigmoid", {random_tensor({r, k}, rng, true, -4, 4)},
        [&](const auto& x) { return probe(ad::sigmoid(x[0]), w_rk); });
    run("softmax", {random_tensor({c}, rng, true, -3, 3)},
        [&](const auto& x) { return probe(ad::softmax(x[0]), w_c); });
    const std::size_t target = std::uniform_int_distribution<std::size_t>(0, c - 1)(rng);
    run("cross_entropy", {random_tensor({c}, rng, true, -3, 3)},
        [&, target](const auto& x) { return ad::cross_entropy(x[0], target); });
    const Tensor w_cat0 = random_tensor({r + 2, k}, rng, false);
    run("concat_rows", {random_tensor({r, k}, rng), random_tensor({2, k}, rng)},
        [&](const auto& x) { return probe(ad::concat({x[0], x[1]}, 0), w_cat0); });
    const Tensor w_cat1 = random_tensor({r, k + c}, rng, false);
    run("concat_cols", {random_tensor({r, k}, rng), random_tensor({r, c}, rng)},
        [&](const auto& x) { return probe(ad::concat({x[0], x[1]}, 1), w_cat1); });
    const Tensor w_slice = random_tensor({1, k}, rng, false);
    run("slice", {random_tensor({r, k}, rng)},
        [&](const auto& x) { return probe(ad::slice(x[0], r - 1, r), w_slice); });
    const Tensor w_flat = random_tensor({r * k}, rng, false);
    run("reshape", {random_tensor({r, k}, rng)},
        [&](const auto& x) { return probe(ad::reshape(x[0], {r * k}), w_flat); });
    run("sum", {random_tensor({r, k}, rng)}, [&](const auto& x) { return ad::mul(ad::sum(x[0]), ad::sum(x[0])); });
    run("dropout", {random_tensor({r, k}, rng)}, [&, seed](const auto& x) {
      ad::Rng mask_rng(seed);
      return probe(ad::dropout(x[0], 0.4, ad::Mode::train, mask_rng), w_rk);
    });
  }
  return cases;
}

std::vector<train::PreparedInstance> small_instances(std::uint64_t seed, std::size_t count) {
  world::GeneratorConfig config;
  config.min_objects = 3;
  config.max_objects = 5;
  config.kinds = {world::ExpressionKind::sentence, world::ExpressionKind::dialog};
  auto raw = world::generate_range(seed, config, {0, count});
  return train::prepare_all(raw);
}

std::vector<GradCase> model_gradient_cases() {
  std::vector<GradCase> cases;
  auto instances = small_instances(77, 6);
  std::uint64_t seed = 0;
  for (auto config : {model::Ablation::baseline, model::Ablation::image_only, model::Ablation::proposal_only,
                      model::Ablation::full}) {
    for (std::size_t i = 0; i < 3; ++i, ++seed) {
      auto p = model::PlanParams::init(train::standard_dims(3), 500 + seed);
      const auto& inst = instances[(seed * 5) % instances.size()];
      const bool train_mode = i == 2;
      auto loss = [&] {
        ad::Rng rng(seed);
        nn::RunContext ctx = train_mode ? nn::RunContext{ad::Mode::train, &rng, 0.4} : kEval;
        return ad::cross_entropy(train::run_instance(p, inst, config, ctx).scores, inst.target);
      };
      p.zero_grad();
      ad::backward(loss());
      double worst = 0.0;
      p.visit([&](const std::string&, Tensor& t) {
        std::vector<double> analytic(t.grad().begin(), t.grad().end());
        analytic.resize(t.size(), 0.0);
        auto numeric = plan::testing::numeric_gradient(t, [&] {
          ad::NoGradGuard guard;
          return loss().item();
        });
        worst = std::max(worst, plan::testing::relative_error(numeric, analytic));
      });
      cases.push_back({"plan_loss_" + std::string(model::name(config)) + (train_mode ? "_dropout" : ""), worst});
    }
  }
  return cases;
}

Outcome gradient_suite() {
  const auto start = Clock::now();
  auto cases = op_gradient_cases();
  auto more = model_gradient_cases();
  cases.insert(cases.end(), more.begin(), more.end());
  double worst = 0.0;
  std::string worst_op;
  for (const auto& c : cases) {
    if (!(c.error <= worst)) {
      worst = c.error;
      worst_op = c.op;
    }
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = cases.size() >= 100 && worst < 1e-4 && elapsed < 120.0;
  o.detail = std::to_string(cases.size()) + " cases, max relative error " + sci(worst) + " (" + worst_op + "), " +
             fixed(elapsed, 1) + " s";
  return o;
}

// ---------------------------------------------------------------------------
// Forward transcription

model::SceneTensors random_scene(std::mt19937_64& rng, std::size_t k, std::size_t n, const model::ModelDims& d) {
  return {random_tensor({k, d.visual_dim}, rng, false), random_tensor({n, d.proposal_dim}, rng, false)};
}

std::vector<Tensor> random_expression(std::mt19937_64& rng, std::size_t length, std::size_t hidden) {
  std::vector<Tensor> m;
  for (std::size_t t = 0; t < length; ++t) m.push_back(random_tensor({hidden}, rng, false));
  return m;
}

double max_abs_diff(std::span<const double> a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

Outcome transcription() {
  double worst = 0.0;
  const std::size_t instances = 50;
  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    std::mt19937_64 rng(seed + 9000);
    std::uniform_int_distribution<std::size_t> pick(1, 6);
    const std::size_t hidden = 2 + pick(rng), n = 1 + pick(rng), k = 1 + pick(rng), len = pick(rng);
    const model::ModelDims d{27, 3 + pick(rng), 2 + pick(rng), hidden};
    auto p = model::PlanParams::init(d, seed);
    auto scene = random_scene(rng, k, n, d);
    auto m = random_expression(rng, len, hidden);
    auto got = model::forward(scene, m, p, kEval);
    std::vector<ref::Vec> mv;
    for (const auto& t : m) mv.push_back(ref::vec(t));
    auto want = ref::forward(model::Ablation::full, ref::mat(scene.grid), ref::mat(scene.proposals), mv, p);
    worst = std::max(worst, max_abs_diff(got.probabilities.values(), want.probabilities));
    if (want.alphas.size() != len || want.betas.size() != len) worst = INFINITY;
    for (std::size_t t = 0; t < len && t < want.alphas.size(); ++t) {
      worst = std::max(worst, max_abs_diff(got.trace.steps[t].alpha, want.alphas[t]));
      worst = std::max(worst, max_abs_diff(got.trace.steps[t].beta, want.betas[t]));
    }
  }
  return {worst < 1e-8, std::to_string(instances) + " instances, max abs diff " + sci(worst)};
}

// ---------------------------------------------------------------------------
// Normalization and permutation properties

Outcome normalization() {
  const std::size_t seeds = 200;
  double norm_err = 0.0, perm_err = 0.0;
  std::size_t positivity_failures = 0, shift_failures = 0;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(seed + 20000);
    const std::size_t n = 1 + seed % 8, k = 1 + (seed / 8) % 16, len = 1 + seed % 5;
    const model::ModelDims d{27, 6, 9, 3 + seed % 6};
    auto p = model::PlanParams::init(d, seed);
    auto scene = random_scene(rng, k, n, d);
    auto m = random_expression(rng, len, d.hidden);
    auto r = model::forward(scene, m, p, kEval);
    auto check = [&](const std::vector<double>& w, std::size_t expected) {
      if (w.size() != expected) {
        norm_err = INFINITY;
        return;
      }
      double s = 0.0;
      for (double v : w) {
        positivity_failures += !(v >= 0.0 && v <= 1.0);
        s += v;
      }
      norm_err = std::max(norm_err, std::abs(s - 1.0));
    };
    for (const auto& step : r.trace.steps) {
      check(step.alpha, k);
      check(step.beta, n);
    }
    check(r.trace.probabilities, n);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Tensor> rows;
    for (std::size_t i : perm) rows.push_back(ad::slice(scene.proposals, i, i + 1));
    auto q = model::forward({scene.grid, ad::concat(rows, 0)}, m, p, kEval);
    for (std::size_t i = 0; i < n; ++i) {
      perm_err = std::max(perm_err, std::abs(q.trace.probabilities[i] - r.trace.probabilities[perm[i]]));
      for (std::size_t t = 0; t < len; ++t) {
        perm_err = std::max(perm_err, std::abs(q.trace.steps[t].beta[i] - r.trace.steps[t].beta[perm[i]]));
      }
    }

    const double shift = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    Tensor shifted = ad::add(r.scores, Tensor::scalar(shift));
    auto sp = ad::softmax(shifted);
    if (model::argmax(sp.values()) != r.trace.predicted || model::argmax(shifted.values()) != r.trace.predicted) {
      ++shift_failures;
    }
  }
  Outcome o;
  o.pass = norm_err <= 1e-6 && perm_err <= 1e-9 && positivity_failures == 0 && shift_failures == 0;
  o.detail = std::to_string(seeds) + " seeds, max |sum-1| " + sci(norm_err) + ", permutation error " + sci(perm_err) +
             ", shift changes " + std::to_string(shift_failures);
  return o;
}

// ---------------------------------------------------------------------------
// Training runs shared by the learning and ablation criteria

struct Split {
  std::vector<train::PreparedInstance> train, val;
};

Split make_split(std::uint64_t seed, const world::GeneratorConfig& config, std::uint64_t total) {
  auto tr = world::generate_range(seed, config, world::split_range(world::Split::train, total));
  auto va = world::generate_range(seed, config, world::split_range(world::Split::val, total));
  return {train::prepare_all(tr), train::prepare_all(va)};
}

world::GeneratorConfig mixed_config() {
  world::GeneratorConfig c;
  c.grid_side = 4;
  c.min_objects = 4;
  c.max_objects = 8;
  c.kinds = {world::ExpressionKind::sentence, world::ExpressionKind::dialog};
  return c;
}

train::TrainConfig learning_config(std::uint64_t seed, model::Ablation ablation) {
  train::TrainConfig c;
  c.hidden = 64;
  c.epochs = 30;
  c.batch_size = 16;
  c.seed = seed;
  c.ablation = ablation;
  return c;
}

struct Runs {
  std::map<std::uint64_t, Split> data;
  std::map<std::pair<model::Ablation, std::uint64_t>, double> best;
  double full_seconds = 0.0;

  const Split& split(std::uint64_t seed) {
    auto it = data.find(seed);
    if (it == data.end()) it = data.emplace(seed, make_split(seed, mixed_config(), 2500)).first;
    return it->second;
  }

  double best_val(model::Ablation ablation, std::uint64_t seed) {
    auto key = std::make_pair(ablation, seed);
    if (auto it = best.find(key); it != best.end()) return it->second;
    const auto& s = split(seed);
    const auto start = Clock::now();
    auto result = train::train(learning_config(seed, ablation), s.train, s.val);
    if (ablation == model::Ablation::full) full_seconds += seconds_since(start);
    std::printf("  [%s seed %llu] best val %.3f at epoch %d\n", std::string(model::name(ablation)).c_str(),
                static_cast<unsigned long long>(seed), result.best_val_accuracy, result.best_epoch);
    std::fflush(stdout);
    return best[key] = result.best_val_accuracy;
  }

  double mean(model::Ablation ablation) {
    double s = 0.0;
    for (auto seed : kSeeds) s += best_val(ablation, seed);
    return s / static_cast<double>(kSeeds.size());
  }
};

Runs& runs() {
  static Runs r;
  return r;
}

Outcome learning() {
  const auto data_start = Clock::now();
  for (auto seed : kSeeds) runs().split(seed);
  const double data_seconds = seconds_since(data_start);
  std::size_t reached = 0;
  std::string per_seed;
  double chance = 0.0;
  std::size_t val_total = 0;
  for (auto seed : kSeeds) {
    const double acc = runs().best_val(model::Ablation::full, seed);
    reached += acc >= 0.90;
    per_seed += (per_seed.empty() ? "" : " ") + fixed(acc);
    for (const auto& inst : runs().split(seed).val) chance += 1.0 / static_cast<double>(inst.proposal_count());
    val_total += runs().split(seed).val.size();
  }
  chance /= static_cast<double>(val_total);
  const double elapsed = data_seconds + runs().full_seconds;
  Outcome o;
  o.pass = reached >= 4 && chance <= 0.25 && elapsed < 15 * 60.0;
  o.detail = "best val per seed [" + per_seed + "], " + std::to_string(reached) + "/5 seeds >= 0.90, chance " +
             fixed(chance) + ", " + fixed(elapsed / 60.0, 1) + " min";
  return o;
}

Outcome ablation_trend() {
  const double full = runs().mean(model::Ablation::full);
  const double image = runs().mean(model::Ablation::image_only);
  const double proposal = runs().mean(model::Ablation::proposal_only);
  const double baseline = runs().mean(model::Ablation::baseline);
  const double tol = -0.005;
  Outcome o;
  o.pass = full - proposal >= tol && proposal - baseline >= tol && full - image >= tol && image - baseline >= tol &&
           proposal - image >= tol;
  o.detail = "mean val full " + fixed(full) + ", proposal_only " + fixed(proposal) + ", image_only " + fixed(image) +
             ", baseline " + fixed(baseline);
  return o;
}

Outcome dialog_length() {
  world::GeneratorConfig config = mixed_config();
  config.kinds = {world::ExpressionKind::dialog};
  config.dialog_rounds = 5;
  double full = 0.0, baseline = 0.0;
  for (auto seed : kSeeds) {
    auto s = make_split(100 + seed, config, 2500);
    for (auto ablation : {model::Ablation::full, model::Ablation::baseline}) {
      auto result = train::train(learning_config(seed, ablation), s.train, s.val);
      std::printf("  [dialog L=5 %s seed %llu] best val %.3f at epoch %d\n", std::string(model::name(ablation)).c_str(),
                  static_cast<unsigned long long>(seed), result.best_val_accuracy, result.best_epoch);
      std::fflush(stdout);
      (ablation == model::Ablation::full ? full : baseline) += result.best_val_accuracy / kSeeds.size();
    }
  }
  return {full - baseline >= 0.03, "mean val full " + fixed(full) + ", baseline " + fixed(baseline) + ", gap " +
                                       fixed(100 * (full - baseline), 1) + " points"};
}

// ---------------------------------------------------------------------------
// Oracle self-consistency

Outcome oracle() {
  world::GeneratorConfig config = mixed_config();
  config.kinds = {world::ExpressionKind::phrase, world::ExpressionKind::sentence, world::ExpressionKind::dialog};
  const std::uint64_t count = 10000;
  auto instances = world::generate_range(4242, config, {0, count});
  std::size_t bad = 0;
  for (const auto& inst : instances) {
    auto hits = world::oracle_resolve(inst.scene, inst.expression);
    bad += !(hits.size() == 1 && hits.front() == inst.target_index && inst.scene.target_index == inst.target_index);
  }
  return {bad == 0 && instances.size() == count,
          std::to_string(instances.size()) + " instances, " + std::to_string(bad) + " not resolving to the target"};
}

// ---------------------------------------------------------------------------
// Determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "plan_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> problems;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    std::ofstream(dir / "c.cfg") << "hidden = 16\nepochs = 3\nbatch_size = 8\nseed = 5\n";
    if (cli({"gen-data", "--seed", "11", "--count", "300", "--out", (dir / "d").string()}) != 0 ||
        cli({"train", "--config", (dir / "c.cfg").string(), "--data", (dir / "d").string(), "--checkpoint",
             (dir / "m.ckpt").string(), "--out", (dir / "m.metrics").string()}) != 0) {
      problems.push_back("command failed");
    }
  }
  for (const char* file : {"d.train.jsonl", "d.val.jsonl", "d.test.jsonl", "d.vocab.json", "m.ckpt"}) {
    if (slurp(root / "a" / file) != slurp(root / "b" / file) || slurp(root / "a" / file).empty()) {
      problems.push_back(file);
    }
  }
  // The summary line names the checkpoint path, which differs by directory.
  auto epochs_only = [](const std::string& text) { return text.substr(0, text.rfind("{\"best_epoch\"")); };
  const std::string metrics_a = slurp(root / "a" / "m.metrics");
  if (epochs_only(metrics_a) != epochs_only(slurp(root / "b" / "m.metrics")) || metrics_a.empty()) {
    problems.push_back("metrics");
  }

  auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  const auto original = bytes(slurp(root / "a" / "m.ckpt"));
  try {
    auto loaded = train::decode_checkpoint(original);
    if (train::encode_checkpoint(loaded) != original) problems.push_back("checkpoint re-encode");
    std::vector<double> before, after;
    auto fresh = train::decode_checkpoint(original);
    fresh.params.visit([&](const std::string&, const Tensor& t) { before.insert(before.end(), t.values().begin(), t.values().end()); });
    train::save_checkpoint(root / "rt.ckpt", fresh);
    train::load_checkpoint(root / "rt.ckpt").params.visit(
        [&](const std::string&, const Tensor& t) { after.insert(after.end(), t.values().begin(), t.values().end()); });
    if (std::memcmp(before.data(), after.data(), before.size() * sizeof(double)) != 0 || before.size() != after.size()) {
      problems.push_back("checkpoint round trip");
    }
  } catch (const std::exception& e) {
    problems.push_back(std::string("checkpoint: ") + e.what());
  }
  fs::remove_all(root);
  std::string detail = "datasets, metrics, checkpoints and round trip";
  if (!problems.empty()) {
    detail = "differences in:";
    for (const auto& p : problems) detail += " " + p;
  }
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------------------
// Full-size configuration smoke test

Outcome parity_smoke() {
  world::GeneratorConfig config = mixed_config();
  config.grid_side = 7;
  auto s = make_split(31, config, 320);
  train::TrainConfig c;
  c.hidden = 512;
  c.batch_size = 32;
  c.epochs = 2;
  c.learning_rate = 1e-3;
  c.lr_decay_epoch = 15;
  c.seed = 31;
  const std::size_t k = s.train.front().scene.grid.dim(0);
  const bool schedule = c.learning_rate_at(15) == 1e-3 && std::abs(c.learning_rate_at(16) - 1e-4) < 1e-18;
  const auto start = Clock::now();
  try {
    auto result = train::train(c, s.train, s.val);
    bool finite = result.history.size() == 2;
    for (const auto& m : result.history) {
      finite = finite && std::isfinite(m.train_loss) && std::isfinite(m.val_loss);
    }
    return {finite && schedule && k == 49,
            "H=512, K=" + std::to_string(k) + ", batch 32, " + std::to_string(s.train.size()) +
                " instances, final train loss " + fixed(result.history.back().train_loss) + ", " +
                fixed(seconds_since(start), 1) + " s"};
  } catch (const std::exception& e) {
    return {false, std::string("training failed: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient_suite", gradient_suite},   {"forward_transcription", transcription},
      {"normalization_permutation", normalization}, {"oracle_self_consistency", oracle},
      {"determinism", determinism},         {"parity_smoke", parity_smoke},
      {"learning", learning},               {"ablation_trend", ablation_trend},
      {"dialog_length", dialog_length},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
