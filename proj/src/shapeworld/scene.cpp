#include "plan/shapeworld/scene.hpp"

#include <cmath>

namespace plan::world {

std::string_view name(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::yellow: return "yellow";
  }
  return "?";
}

std::string_view name(ShapeKind s) {
  switch (s) {
    case ShapeKind::circle: return "circle";
    case ShapeKind::square: return "square";
    case ShapeKind::triangle: return "triangle";
  }
  return "?";
}

std::string_view name(Size s) { return s == Size::small ? "small" : "large"; }

Box Scene::proposal_box(std::size_t i) const {
  const Cell& c = objects.at(i).cell;
  return {static_cast<double>(c.col), static_cast<double>(c.row), static_cast<double>(c.col + 1),
          static_cast<double>(c.row + 1)};
}

bool is_left(const Cell& c, int grid_side) { return 2 * c.col + 1 < grid_side; }
bool is_top(const Cell& c, int grid_side) { return 2 * c.row + 1 < grid_side; }

// Cell centre within a quarter of the grid extent of the image centre on
// both axes: the central 2x2 block for g=4, the central 3x3 block for g=7.
bool is_middle(const Cell& c, int grid_side) {
  double half = grid_side / 2.0;
  double quarter = grid_side / 4.0;
  return std::abs(c.row + 0.5 - half) < quarter && std::abs(c.col + 0.5 - half) < quarter;
}

}  // namespace plan::world
