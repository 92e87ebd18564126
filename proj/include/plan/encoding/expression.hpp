#pragma once

#include <cstddef>
#include <vector>

namespace plan::enc {

enum class UnitKind { word, qa_pair };

/// One stepwise language unit: a single word, or a whole question-answer
/// pair (question tokens followed by the answer token).
struct ExpressionUnit {
  UnitKind kind = UnitKind::word;
  std::vector<int> tokens;

  static ExpressionUnit word(int token) { return {UnitKind::word, {token}}; }
  static ExpressionUnit qa_pair(std::vector<int> tokens) { return {UnitKind::qa_pair, std::move(tokens)}; }
  friend bool operator==(const ExpressionUnit&, const ExpressionUnit&) = default;
};

struct ExpressionSeq {
  std::vector<ExpressionUnit> units;
  std::size_t vocabulary_size = 0;

  std::size_t length() const { return units.size(); }
  /// Throws InvalidArgument unless nonempty, homogeneous, and in-vocabulary.
  void validate() const;
  friend bool operator==(const ExpressionSeq&, const ExpressionSeq&) = default;
};

}  // namespace plan::enc
