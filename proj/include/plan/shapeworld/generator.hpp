#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "plan/encoding/expression.hpp"
#include "plan/shapeworld/scene.hpp"

namespace plan::world {

using Rng = std::mt19937_64;

enum class ExpressionKind { phrase, sentence, dialog };

std::string_view name(ExpressionKind kind);
ExpressionKind parse_kind(std::string_view text);

struct SceneConfig {
  int grid_side = 4;
  int n_objects = 4;
};

struct GroundingInstance {
  Scene scene;
  enc::ExpressionSeq expression;
  ExpressionKind kind = ExpressionKind::phrase;
  std::size_t target_index = 0;
  friend bool operator==(const GroundingInstance&, const GroundingInstance&) = default;
};

/// Objects on distinct cells with uniform attributes and a uniform target.
/// Throws InvalidArgument when n_objects exceeds the grid or is below 2.
Scene generate_scene(Rng& rng, const SceneConfig& config);

struct ExpressionOptions {
  int dialog_rounds = 0;  // exact number of QA rounds; 0 accepts any
  int max_attempts = 64;
};

/// Builds an expression of the requested kind that the symbolic resolver
/// maps to exactly the scene's target. nullopt when none was found within
/// the attempt budget; callers then draw a new scene.
std::optional<GroundingInstance> generate_expression(const Scene& scene, Rng& rng, ExpressionKind kind,
                                                     const ExpressionOptions& options = {});

struct GeneratorConfig {
  int grid_side = 4;
  int min_objects = 4;
  int max_objects = 8;
  std::vector<ExpressionKind> kinds{ExpressionKind::sentence, ExpressionKind::dialog};
  int dialog_rounds = 0;

  void validate() const;
};

/// One instance; kind is drawn uniformly from config.kinds.
GroundingInstance generate_instance(Rng& rng, const GeneratorConfig& config);

/// Per-instance generator state derived from (seed, index) only.
Rng instance_rng(std::uint64_t seed, std::uint64_t index);

enum class Split { train, val, test };
std::string_view name(Split split);

/// Instance index range of a split: the first 80% of `total` indices are
/// train, the next 10% val, the remainder test.
struct IndexRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::uint64_t size() const { return end - begin; }
};
IndexRange split_range(Split split, std::uint64_t total);

std::vector<GroundingInstance> generate_range(std::uint64_t seed, const GeneratorConfig& config, IndexRange range);

}  // namespace plan::world
