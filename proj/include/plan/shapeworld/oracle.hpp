#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "plan/encoding/expression.hpp"
#include "plan/shapeworld/scene.hpp"

namespace plan::world {

/// Attribute filter; an unset field matches anything ("object").
struct Description {
  std::optional<Size> size;
  std::optional<Color> color;
  std::optional<ShapeKind> shape;

  bool matches(const Object& o) const;
};

enum class Relation { left_of, right_of, above, below };

bool relation_holds(Relation rel, const Cell& subject, const Cell& landmark);

/// description [in the middle | <relation> description]
struct Referring {
  Description head;
  bool middle = false;
  std::optional<std::pair<Relation, Description>> relation;
};

enum class Question { color, shape, size, left, top, middle };

/// "is it ... ? yes|no"
struct QaConstraint {
  Question question = Question::color;
  Color color = Color::red;
  ShapeKind shape = ShapeKind::circle;
  Size size = Size::small;
  bool answer = true;

  bool truth_for(const Object& o, int grid_side) const;
};

std::vector<int> tokens(const Description& d);
std::vector<int> tokens(const Referring& r);
std::vector<int> tokens(const QaConstraint& qa);

/// Throws ParseError on anything outside the grammar.
Referring parse_referring(const std::vector<int>& tokens);
QaConstraint parse_question(const std::vector<int>& tokens);

/// Objects satisfying a parsed referring description in the scene.
std::vector<std::size_t> resolve(const Scene& scene, const Referring& r);

/// Brute-force filter of all objects against every constraint carried by the
/// expression. Word units are read together as one referring description;
/// each QA unit is one constraint. An expression without units leaves every
/// object. Throws ParseError on malformed token sequences.
std::vector<std::size_t> oracle_resolve(const Scene& scene, const enc::ExpressionSeq& expression);

}  // namespace plan::world
