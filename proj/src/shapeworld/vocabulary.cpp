#include "plan/shapeworld/vocabulary.hpp"

#include <algorithm>
#include <sstream>

#include "plan/errors.hpp"

namespace plan::world {

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary vocab({"red",   "green", "blue",  "yellow", "circle", "square", "triangle",
                                 "object", "small", "large", "left",   "right",  "of",     "above",
                                 "below", "in",    "the",   "middle", "is",     "it",     "a",
                                 "on",    "at",    "top",   "?",      "yes",    "no"});
  return vocab;
}

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {}

int Vocabulary::id(std::string_view word) const {
  auto it = std::find(words_.begin(), words_.end(), word);
  if (it == words_.end()) throw ParseError("unknown word '" + std::string(word) + "'");
  return static_cast<int>(it - words_.begin());
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw ParseError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return words_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::ids(std::string_view sentence) const {
  std::istringstream in{std::string(sentence)};
  std::vector<int> out;
  for (std::string w; in >> w;) out.push_back(id(w));
  return out;
}

std::string Vocabulary::text(const std::vector<int>& tokens) const {
  std::string out;
  for (int t : tokens) {
    if (!out.empty()) out += ' ';
    out += word(t);
  }
  return out;
}

}  // namespace plan::world
