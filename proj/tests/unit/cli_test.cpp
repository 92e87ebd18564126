#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "plan/cli/commands.hpp"
#include "plan/cli/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = plan::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("plan_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small dataset plus a briefly trained checkpoint.
  void prepare_model(const std::string& extra_config = "") {
    ASSERT_EQ(run({"gen-data", "--seed", "3", "--count", "60", "--out", path("d")}).code, 0);
    std::ofstream(path("c.cfg")) << "hidden = 8\nepochs = 2\nbatch_size = 8\n" << extra_config;
    auto r = run({"train", "--config", path("c.cfg"), "--data", path("d"), "--checkpoint", path("m.ckpt"), "--out",
                  path("m.metrics")});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenDataWritesSplitsAndVocabulary) {
  auto r = run({"gen-data", "--seed", "1", "--count", "50", "--kind", "phrase,sentence,dialog", "--out", path("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* split : {"train", "val", "test"}) {
    auto text = lines(slurp(path(std::string("d.") + split + ".jsonl")));
    ASSERT_FALSE(text.empty());
    auto header = json::parse(text[0]);
    EXPECT_EQ(header["format"], "plan-shapeworld");
    EXPECT_EQ(header["split"], split);
    EXPECT_EQ(header["count"].get<std::size_t>(), text.size() - 1);
  }
  EXPECT_EQ(json::parse(slurp(path("d.vocab.json")))["tokens"].size(), 27u);
  auto summary = json::parse(r.out);
  EXPECT_EQ(summary["train"]["total"], 40);
  EXPECT_EQ(summary["val"]["total"], 5);
  EXPECT_EQ(summary["test"]["total"], 5);
}

TEST_F(CliTest, GenDataCountZeroGivesHeaderOnlyFiles) {
  auto r = run({"gen-data", "--count", "0", "--out", path("z")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto text = lines(slurp(path("z.train.jsonl")));
  ASSERT_EQ(text.size(), 1u);
  EXPECT_EQ(json::parse(text[0])["count"], 0);
}

TEST_F(CliTest, GenDataIsByteIdentical) {
  ASSERT_EQ(run({"gen-data", "--seed", "9", "--count", "40", "--out", path("a/d")}).code, 0);
  ASSERT_EQ(run({"gen-data", "--seed", "9", "--count", "40", "--out", path("b/d")}).code, 0);
  for (const char* ext : {".train.jsonl", ".val.jsonl", ".test.jsonl", ".vocab.json"}) {
    EXPECT_EQ(slurp(path(std::string("a/d") + ext)), slurp(path(std::string("b/d") + ext))) << ext;
  }
}

TEST_F(CliTest, GenDataRejectsImpossibleRequests) {
  auto r = run({"gen-data", "--objects", "100", "--grid", "4", "--out", path("x")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("grid"), std::string::npos) << r.err;
  EXPECT_NE(run({"gen-data", "--kind", "poem", "--out", path("x")}).code, 0);
  EXPECT_NE(run({"gen-data", "--objects", "5:3", "--out", path("x")}).code, 0);
  EXPECT_NE(run({"gen-data"}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
}

TEST_F(CliTest, UnknownAblationListsChoices) {
  ASSERT_EQ(run({"gen-data", "--count", "20", "--out", path("d")}).code, 0);
  auto r = run({"train", "--data", path("d"), "--ablation", "everything", "--epochs", "1"});
  EXPECT_NE(r.code, 0);
  for (const char* choice : {"baseline", "image_only", "proposal_only", "full"}) {
    EXPECT_NE(r.err.find(choice), std::string::npos) << r.err;
  }
}

TEST_F(CliTest, AblationFullMatchesDefault) {
  ASSERT_EQ(run({"gen-data", "--count", "40", "--out", path("d")}).code, 0);
  std::ofstream(path("c.cfg")) << "hidden = 8\nepochs = 1\n";
  auto a = run({"train", "--config", path("c.cfg"), "--data", path("d"), "--checkpoint", path("a.ckpt")});
  auto b = run({"train", "--config", path("c.cfg"), "--data", path("d"), "--ablation", "full", "--checkpoint",
                path("b.ckpt")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  auto strip = [](const std::string& s) { return s.substr(0, s.rfind("{\"best_epoch\"")); };
  EXPECT_EQ(strip(a.out), strip(b.out));
  EXPECT_EQ(slurp(path("a.ckpt")), slurp(path("b.ckpt")));
}

TEST_F(CliTest, TrainIsDeterministic) {
  prepare_model();
  auto metrics = slurp(path("m.metrics"));
  auto ckpt = slurp(path("m.ckpt"));
  ASSERT_EQ(run({"train", "--config", path("c.cfg"), "--data", path("d"), "--checkpoint", path("m2.ckpt"), "--out",
                 path("m2.metrics")})
                .code,
            0);
  EXPECT_EQ(slurp(path("m2.ckpt")), ckpt);
  auto records = lines(metrics);
  auto again = lines(slurp(path("m2.metrics")));
  ASSERT_EQ(records.size(), 5u);
  ASSERT_EQ(again.size(), 5u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(again[i], records[i]);
  auto a = json::parse(records.back()), b = json::parse(again.back());
  EXPECT_EQ(a["best_epoch"], b["best_epoch"]);
  EXPECT_EQ(a["best_val_accuracy"], b["best_val_accuracy"]);
  auto first = json::parse(records[0]);
  for (const char* key : {"epoch", "split", "loss", "accuracy", "lr"}) EXPECT_TRUE(first.contains(key)) << key;
}

TEST_F(CliTest, EvalReproducesBestValidationAccuracy) {
  prepare_model();
  auto records = lines(slurp(path("m.metrics")));
  auto summary = json::parse(records.back());
  auto r = run({"eval", "--checkpoint", path("m.ckpt"), "--data", path("d"), "--split", "val"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto result = json::parse(r.out);
  EXPECT_EQ(result["accuracy"].get<double>(), summary["best_val_accuracy"].get<double>());
  EXPECT_EQ(result["total"], 6);
}

TEST_F(CliTest, EvalRejectsMissingFiles) {
  prepare_model();
  EXPECT_NE(run({"eval", "--checkpoint", path("nope.ckpt"), "--data", path("d")}).code, 0);
  EXPECT_NE(run({"eval", "--checkpoint", path("m.ckpt"), "--data", path("nope")}).code, 0);
}

TEST_F(CliTest, TraceWritesOneImageAndRecordPerStep) {
  prepare_model();
  auto val = lines(slurp(path("d.val.jsonl")));
  for (std::size_t index = 0; index < 3; ++index) {
    const auto instance = json::parse(val[index + 1]);
    const std::size_t steps = instance["expression"].size();
    const std::string out = path("trace" + std::to_string(index));
    auto r = run({"trace", "--checkpoint", path("m.ckpt"), "--data", path("d"), "--split", "val", "--instance",
                  std::to_string(index), "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t images = 0;
    for (const auto& entry : fs::directory_iterator(out)) images += entry.path().extension() == ".pgm";
    EXPECT_EQ(images, steps);
    auto records = lines(slurp(fs::path(out) / "trace.jsonl"));
    ASSERT_EQ(records.size(), steps + 1);
    for (std::size_t t = 0; t < steps; ++t) {
      auto rec = json::parse(records[t]);
      EXPECT_EQ(rec["step"], t + 1);
      double a = 0, b = 0;
      for (double v : rec["alpha"]) a += v;
      for (double v : rec["beta"]) b += v;
      EXPECT_NEAR(a, 1.0, 1e-6);
      EXPECT_NEAR(b, 1.0, 1e-6);
      EXPECT_LE(rec["top_beta"].size(), 5u);
    }
    auto last = json::parse(records.back());
    EXPECT_EQ(last["target"], instance["target_index"]);
  }
}

TEST_F(CliTest, TraceFinalProbabilitiesEqualEvalProbabilities) {
  prepare_model();
  ASSERT_EQ(run({"eval", "--checkpoint", path("m.ckpt"), "--data", path("d"), "--split", "val", "--predictions",
                 path("p.jsonl")})
                .code,
            0);
  auto preds = lines(slurp(path("p.jsonl")));
  for (std::size_t index = 0; index < preds.size(); ++index) {
    const std::string out = path("t" + std::to_string(index));
    ASSERT_EQ(run({"trace", "--checkpoint", path("m.ckpt"), "--data", path("d"), "--split", "val", "--instance",
                   std::to_string(index), "--out", out})
                  .code,
              0);
    auto records = lines(slurp(fs::path(out) / "trace.jsonl"));
    auto final = json::parse(records.back());
    auto pred = json::parse(preds[index]);
    EXPECT_EQ(final["probabilities"], pred["probabilities"]);
    EXPECT_EQ(final["predicted"], pred["predicted"]);
    EXPECT_EQ(json::parse(records[records.size() - 2])["probabilities"], pred["probabilities"]);
  }
}

TEST_F(CliTest, TraceRejectsOutOfRangeInstance) {
  prepare_model();
  EXPECT_NE(run({"trace", "--checkpoint", path("m.ckpt"), "--data", path("d"), "--split", "val", "--instance", "999",
                 "--out", path("t")})
                .code,
            0);
}

TEST(RenderPgm, ScalesLinearlyWithMaxAt255) {
  std::vector<double> w{0.1, 0.2, 0.4, 0.3};
  auto text = plan::cli::render_pgm(w, 2, 1);
  std::istringstream in(text);
  std::string magic;
  int width, height, maxval;
  in >> magic >> width >> height >> maxval;
  EXPECT_EQ(magic, "P2");
  EXPECT_EQ(width, 2);
  EXPECT_EQ(height, 2);
  EXPECT_EQ(maxval, 255);
  std::vector<int> pixels;
  for (int v; in >> v;) pixels.push_back(v);
  EXPECT_EQ(pixels, (std::vector<int>{64, 128, 255, 191}));
}

TEST(RenderPgm, CellsBecomeSquares) {
  auto text = plan::cli::render_pgm({1.0, 0.0, 0.0, 0.0}, 2, 3);
  std::istringstream in(text);
  std::string magic;
  int width, height, maxval;
  in >> magic >> width >> height >> maxval;
  EXPECT_EQ(width, 6);
  EXPECT_EQ(height, 6);
  std::vector<int> pixels;
  for (int v; in >> v;) pixels.push_back(v);
  ASSERT_EQ(pixels.size(), 36u);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) EXPECT_EQ(pixels[y * 6 + x], (x < 3 && y < 3) ? 255 : 0);
  }
}
