#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "plan/autodiff/tensor.hpp"
#include "plan/shapeworld/scene.hpp"

namespace plan::enc {

/// [x_min, y_min, x_max, y_max, x_center, y_center, w_box, h_box] with the
/// image centre at the origin and both image axes spanning [-1, 1].
using SpatialVector = std::array<double, 8>;

struct ImageDims {
  double width = 1.0;
  double height = 1.0;
};

/// Throws InvalidArgument for zero-area boxes or boxes outside the image.
SpatialVector encode_spatial(const world::Box& box, const ImageDims& image);

// Layout of the synthetic visual signature: colour, shape and size one-hots
// followed by two cell-coordinate scalars.
inline constexpr std::size_t kColorOffset = 0;
inline constexpr std::size_t kShapeOffset = kColorOffset + world::kColorCount;
inline constexpr std::size_t kSizeOffset = kShapeOffset + world::kShapeCount;
inline constexpr std::size_t kCoordOffset = kSizeOffset + world::kSizeCount;
inline constexpr std::size_t kVisualDim = kCoordOffset + 2;
inline constexpr std::size_t kCategoryDim = world::kShapeCount;
inline constexpr std::size_t kProposalDim = kVisualDim + 8 + kCategoryDim;

struct VisualGrid {
  std::size_t grid_side = 0;
  std::vector<std::vector<double>> cells;  // K = grid_side^2 rows, row-major over the grid

  std::size_t cell_count() const { return cells.size(); }
  std::size_t feature_dim() const { return cells.empty() ? 0 : cells.front().size(); }
  ad::Tensor as_tensor() const;  // [K x D_v]
};

struct ProposalFeature {
  std::vector<double> visual;    // u_i, D_v entries
  SpatialVector spatial{};       // s_i
  std::vector<double> category;  // c_i one-hot, may be empty

  std::vector<double> concatenated() const;  // [u; s; c]
};

/// Raw proposal matrix [N x (D_v + 8 + C)].
ad::Tensor proposal_matrix(std::span<const ProposalFeature> proposals);

struct SceneFeatures {
  VisualGrid grid;
  std::vector<ProposalFeature> proposals;
};

/// Deterministic attribute signatures standing in for CNN features.
SceneFeatures synth_visual_features(const world::Scene& scene);

/// Argmax decoding of the attribute blocks of a signature.
struct DecodedAttributes {
  world::Color color;
  world::ShapeKind shape;
  world::Size size;
};
DecodedAttributes decode_attributes(std::span<const double> signature);

}  // namespace plan::enc
