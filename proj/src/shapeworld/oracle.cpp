#include "plan/shapeworld/oracle.hpp"

#include <string>

#include "plan/errors.hpp"
#include "plan/shapeworld/vocabulary.hpp"

namespace plan::world {

namespace {

const Vocabulary& vocab() { return Vocabulary::standard(); }

int tok(std::string_view w) { return vocab().id(w); }

template <typename E, std::size_t N>
std::optional<E> lookup(int token, const E (&values)[N]) {
  for (E v : values) {
    if (tok(name(v)) == token) return v;
  }
  return std::nullopt;
}

constexpr Color kColors[] = {Color::red, Color::green, Color::blue, Color::yellow};
constexpr ShapeKind kShapes[] = {ShapeKind::circle, ShapeKind::square, ShapeKind::triangle};
constexpr Size kSizes[] = {Size::small, Size::large};

// Cursor over a token list with grammar-level helpers.
class Reader {
 public:
  explicit Reader(const std::vector<int>& tokens) : tokens_(tokens) {}

  bool done() const { return pos_ == tokens_.size(); }
  int peek() const { return done() ? -1 : tokens_[pos_]; }
  bool accept(std::string_view word) {
    if (!done() && tokens_[pos_] == tok(word)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view word) {
    if (!accept(word)) fail("expected '" + std::string(word) + "'");
  }
  int next() {
    if (done()) fail("unexpected end of expression");
    return tokens_[pos_++];
  }
  [[noreturn]] void fail(const std::string& what) const {
    std::string text;
    for (int t : tokens_) {
      text += (t >= 0 && static_cast<std::size_t>(t) < vocab().size()) ? vocab().word(t) : "<" + std::to_string(t) + ">";
      text += ' ';
    }
    throw ParseError(what + " at token " + std::to_string(pos_) + " in: " + text);
  }

 private:
  const std::vector<int>& tokens_;
  std::size_t pos_ = 0;
};

Description read_description(Reader& in) {
  Description d;
  if (auto s = lookup(in.peek(), kSizes)) {
    d.size = s;
    in.next();
  }
  if (auto c = lookup(in.peek(), kColors)) {
    d.color = c;
    in.next();
  }
  if (in.accept("object")) return d;
  if (auto s = lookup(in.peek(), kShapes)) {
    d.shape = s;
    in.next();
    return d;
  }
  in.fail("expected a shape word or 'object'");
}

}  // namespace

bool Description::matches(const Object& o) const {
  return (!size || *size == o.size) && (!color || *color == o.color) && (!shape || *shape == o.shape);
}

bool relation_holds(Relation rel, const Cell& subject, const Cell& landmark) {
  switch (rel) {
    case Relation::left_of: return subject.col < landmark.col;
    case Relation::right_of: return subject.col > landmark.col;
    case Relation::above: return subject.row < landmark.row;
    case Relation::below: return subject.row > landmark.row;
  }
  return false;
}

bool QaConstraint::truth_for(const Object& o, int grid_side) const {
  bool fact = false;
  switch (question) {
    case Question::color: fact = o.color == color; break;
    case Question::shape: fact = o.shape == shape; break;
    case Question::size: fact = o.size == size; break;
    case Question::left: fact = is_left(o.cell, grid_side); break;
    case Question::top: fact = is_top(o.cell, grid_side); break;
    case Question::middle: fact = is_middle(o.cell, grid_side); break;
  }
  return fact == answer;
}

std::vector<int> tokens(const Description& d) {
  std::vector<int> out;
  if (d.size) out.push_back(tok(name(*d.size)));
  if (d.color) out.push_back(tok(name(*d.color)));
  out.push_back(d.shape ? tok(name(*d.shape)) : tok("object"));
  return out;
}

std::vector<int> tokens(const Referring& r) {
  std::vector<int> out = tokens(r.head);
  auto append = [&](std::initializer_list<std::string_view> words) {
    for (auto w : words) out.push_back(tok(w));
  };
  if (r.middle) append({"in", "the", "middle"});
  if (r.relation) {
    switch (r.relation->first) {
      case Relation::left_of: append({"left", "of"}); break;
      case Relation::right_of: append({"right", "of"}); break;
      case Relation::above: append({"above"}); break;
      case Relation::below: append({"below"}); break;
    }
    auto landmark = tokens(r.relation->second);
    out.insert(out.end(), landmark.begin(), landmark.end());
  }
  return out;
}

std::vector<int> tokens(const QaConstraint& qa) {
  std::vector<int> out{tok("is"), tok("it")};
  auto append = [&](std::initializer_list<std::string_view> words) {
    for (auto w : words) out.push_back(tok(w));
  };
  switch (qa.question) {
    case Question::color: append({name(qa.color)}); break;
    case Question::shape: append({"a", name(qa.shape)}); break;
    case Question::size: append({name(qa.size)}); break;
    case Question::left: append({"on", "the", "left"}); break;
    case Question::top: append({"at", "the", "top"}); break;
    case Question::middle: append({"in", "the", "middle"}); break;
  }
  append({"?", qa.answer ? "yes" : "no"});
  return out;
}

Referring parse_referring(const std::vector<int>& toks) {
  Reader in(toks);
  Referring r;
  r.head = read_description(in);
  if (in.accept("in")) {
    in.expect("the");
    in.expect("middle");
    r.middle = true;
  } else if (in.accept("left")) {
    in.expect("of");
    r.relation.emplace(Relation::left_of, read_description(in));
  } else if (in.accept("right")) {
    in.expect("of");
    r.relation.emplace(Relation::right_of, read_description(in));
  } else if (in.accept("above")) {
    r.relation.emplace(Relation::above, read_description(in));
  } else if (in.accept("below")) {
    r.relation.emplace(Relation::below, read_description(in));
  }
  if (!in.done()) in.fail("trailing tokens");
  return r;
}

QaConstraint parse_question(const std::vector<int>& toks) {
  Reader in(toks);
  QaConstraint qa;
  in.expect("is");
  in.expect("it");
  if (in.accept("a")) {
    auto s = lookup(in.next(), kShapes);
    if (!s) in.fail("expected a shape");
    qa.question = Question::shape;
    qa.shape = *s;
  } else if (in.accept("on")) {
    in.expect("the");
    in.expect("left");
    qa.question = Question::left;
  } else if (in.accept("at")) {
    in.expect("the");
    in.expect("top");
    qa.question = Question::top;
  } else if (in.accept("in")) {
    in.expect("the");
    in.expect("middle");
    qa.question = Question::middle;
  } else {
    int t = in.next();
    if (auto c = lookup(t, kColors)) {
      qa.question = Question::color;
      qa.color = *c;
    } else if (auto s = lookup(t, kSizes)) {
      qa.question = Question::size;
      qa.size = *s;
    } else {
      in.fail("unknown question");
    }
  }
  in.expect("?");
  if (in.accept("yes")) {
    qa.answer = true;
  } else if (in.accept("no")) {
    qa.answer = false;
  } else {
    in.fail("expected 'yes' or 'no'");
  }
  if (!in.done()) in.fail("trailing tokens");
  return qa;
}

std::vector<std::size_t> resolve(const Scene& scene, const Referring& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const Object& o = scene.objects[i];
    if (!r.head.matches(o)) continue;
    if (r.middle && !is_middle(o.cell, scene.grid_side)) continue;
    if (r.relation) {
      bool found = false;
      for (std::size_t j = 0; j < scene.objects.size() && !found; ++j) {
        found = j != i && r.relation->second.matches(scene.objects[j]) &&
                relation_holds(r.relation->first, o.cell, scene.objects[j].cell);
      }
      if (!found) continue;
    }
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> oracle_resolve(const Scene& scene, const enc::ExpressionSeq& expression) {
  std::vector<int> words;
  std::vector<QaConstraint> questions;
  for (const auto& unit : expression.units) {
    if (unit.kind == enc::UnitKind::word) {
      words.insert(words.end(), unit.tokens.begin(), unit.tokens.end());
    } else {
      questions.push_back(parse_question(unit.tokens));
    }
  }
  std::vector<std::size_t> out;
  if (words.empty()) {
    for (std::size_t i = 0; i < scene.objects.size(); ++i) out.push_back(i);
  } else {
    out = resolve(scene, parse_referring(words));
  }
  std::erase_if(out, [&](std::size_t i) {
    for (const auto& qa : questions) {
      if (!qa.truth_for(scene.objects[i], scene.grid_side)) return true;
    }
    return false;
  });
  return out;
}

}  // namespace plan::world
