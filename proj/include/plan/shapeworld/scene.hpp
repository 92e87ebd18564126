#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace plan::world {

enum class Color { red, green, blue, yellow };
enum class ShapeKind { circle, square, triangle };
enum class Size { small, large };

inline constexpr std::size_t kColorCount = 4;
inline constexpr std::size_t kShapeCount = 3;
inline constexpr std::size_t kSizeCount = 2;

std::string_view name(Color c);
std::string_view name(ShapeKind s);
std::string_view name(Size s);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Object {
  Color color = Color::red;
  ShapeKind shape = ShapeKind::circle;
  Size size = Size::small;
  Cell cell;
  friend bool operator==(const Object&, const Object&) = default;
};

/// Axis-aligned box in image pixel coordinates, origin at the top-left.
struct Box {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

/// Objects on a g x g grid, at most one per cell. Each object has one
/// proposal box: the box of its cell, with the image spanning g x g units.
struct Scene {
  int grid_side = 4;
  std::vector<Object> objects;
  std::size_t target_index = 0;

  std::size_t proposal_count() const { return objects.size(); }
  Box proposal_box(std::size_t i) const;
  double image_extent() const { return static_cast<double>(grid_side); }
  friend bool operator==(const Scene&, const Scene&) = default;
};

// Grid-coordinate location predicates shared by the expression grammar.
bool is_left(const Cell& c, int grid_side);
bool is_top(const Cell& c, int grid_side);
bool is_middle(const Cell& c, int grid_side);

}  // namespace plan::world
