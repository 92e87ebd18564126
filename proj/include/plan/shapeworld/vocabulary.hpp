#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace plan::world {

/// Closed vocabulary of the scene grammar: attribute words, relation words,
/// question scaffolding and answers.
class Vocabulary {
 public:
  static const Vocabulary& standard();

  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  /// Throws ParseError for unknown words.
  int id(std::string_view word) const;
  /// Throws ParseError for out-of-range ids.
  const std::string& word(int id) const;
  const std::vector<std::string>& words() const { return words_; }

  std::vector<int> ids(std::string_view sentence) const;  // whitespace-separated
  std::string text(const std::vector<int>& tokens) const;

 private:
  std::vector<std::string> words_;
};

}  // namespace plan::world
