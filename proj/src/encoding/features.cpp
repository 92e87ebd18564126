#include "plan/encoding/features.hpp"

#include <algorithm>
#include <cmath>

#include "plan/errors.hpp"

namespace plan::enc {

SpatialVector encode_spatial(const world::Box& box, const ImageDims& image) {
  if (!(image.width > 0.0 && image.height > 0.0)) throw InvalidArgument("image dimensions must be positive");
  if (!(box.x_max > box.x_min && box.y_max > box.y_min)) throw InvalidArgument("degenerate box (zero area)");
  if (box.x_min < 0.0 || box.y_min < 0.0 || box.x_max > image.width || box.y_max > image.height) {
    throw InvalidArgument("box lies outside the image");
  }
  auto nx = [&](double x) { return 2.0 * x / image.width - 1.0; };
  auto ny = [&](double y) { return 2.0 * y / image.height - 1.0; };
  double x0 = nx(box.x_min), y0 = ny(box.y_min), x1 = nx(box.x_max), y1 = ny(box.y_max);
  return {x0, y0, x1, y1, (x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0};
}

ad::Tensor VisualGrid::as_tensor() const {
  std::vector<double> flat;
  flat.reserve(cell_count() * feature_dim());
  for (const auto& cell : cells) flat.insert(flat.end(), cell.begin(), cell.end());
  return ad::Tensor::from({cell_count(), feature_dim()}, std::move(flat));
}

std::vector<double> ProposalFeature::concatenated() const {
  std::vector<double> out(visual);
  out.insert(out.end(), spatial.begin(), spatial.end());
  out.insert(out.end(), category.begin(), category.end());
  return out;
}

ad::Tensor proposal_matrix(std::span<const ProposalFeature> proposals) {
  if (proposals.empty()) throw InvalidArgument("no proposals");
  std::vector<double> flat;
  std::size_t width = 0;
  for (const auto& p : proposals) {
    auto row = p.concatenated();
    if (width == 0) width = row.size();
    if (row.size() != width) throw InvalidShape("proposal feature widths differ");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return ad::Tensor::from({proposals.size(), width}, std::move(flat));
}

namespace {

std::vector<double> attribute_signature(const world::Object& o) {
  std::vector<double> v(kVisualDim, 0.0);
  v[kColorOffset + static_cast<std::size_t>(o.color)] = 1.0;
  v[kShapeOffset + static_cast<std::size_t>(o.shape)] = 1.0;
  v[kSizeOffset + static_cast<std::size_t>(o.size)] = 1.0;
  return v;
}

template <typename E>
E block_argmax(std::span<const double> sig, std::size_t offset, std::size_t count) {
  auto begin = sig.begin() + static_cast<std::ptrdiff_t>(offset);
  return static_cast<E>(std::max_element(begin, begin + static_cast<std::ptrdiff_t>(count)) - begin);
}

}  // namespace

SceneFeatures synth_visual_features(const world::Scene& scene) {
  const int g = scene.grid_side;
  SceneFeatures out;
  out.grid.grid_side = static_cast<std::size_t>(g);
  out.grid.cells.assign(static_cast<std::size_t>(g * g), std::vector<double>(kVisualDim, 0.0));
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      auto& cell = out.grid.cells[static_cast<std::size_t>(r * g + c)];
      cell[kCoordOffset] = 2.0 * (c + 0.5) / g - 1.0;
      cell[kCoordOffset + 1] = 2.0 * (r + 0.5) / g - 1.0;
    }
  }
  const ImageDims image{scene.image_extent(), scene.image_extent()};
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const world::Object& o = scene.objects[i];
    auto signature = attribute_signature(o);
    auto& cell = out.grid.cells[static_cast<std::size_t>(o.cell.row * g + o.cell.col)];
    std::copy_n(signature.begin(), kCoordOffset, cell.begin());

    ProposalFeature p;
    p.visual = signature;
    p.spatial = encode_spatial(scene.proposal_box(i), image);
    p.category.assign(kCategoryDim, 0.0);
    p.category[static_cast<std::size_t>(o.shape)] = 1.0;
    out.proposals.push_back(std::move(p));
  }
  return out;
}

DecodedAttributes decode_attributes(std::span<const double> signature) {
  if (signature.size() < kCoordOffset) throw InvalidShape("signature too short");
  return {block_argmax<world::Color>(signature, kColorOffset, world::kColorCount),
          block_argmax<world::ShapeKind>(signature, kShapeOffset, world::kShapeCount),
          block_argmax<world::Size>(signature, kSizeOffset, world::kSizeCount)};
}

}  // namespace plan::enc
