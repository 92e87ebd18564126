#include "plan/shapeworld/generator.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "plan/errors.hpp"
#include "plan/shapeworld/oracle.hpp"
#include "plan/shapeworld/vocabulary.hpp"

namespace plan::world {

std::string_view name(ExpressionKind kind) {
  switch (kind) {
    case ExpressionKind::phrase: return "phrase";
    case ExpressionKind::sentence: return "sentence";
    case ExpressionKind::dialog: return "dialog";
  }
  return "?";
}

ExpressionKind parse_kind(std::string_view text) {
  if (text == "phrase") return ExpressionKind::phrase;
  if (text == "sentence") return ExpressionKind::sentence;
  if (text == "dialog") return ExpressionKind::dialog;
  throw InvalidArgument("unknown expression kind '" + std::string(text) + "'; expected phrase, sentence or dialog");
}

std::string_view name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

namespace {

template <typename E>
E uniform_enum(Rng& rng, std::size_t count) {
  return static_cast<E>(std::uniform_int_distribution<std::size_t>(0, count - 1)(rng));
}

bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

// Random subset of the object's attributes; the noun slot falls back to
// "object" when the shape is left out.
Description describe(const Object& o, Rng& rng) {
  Description d;
  if (coin(rng)) d.size = o.size;
  if (coin(rng, 0.6)) d.color = o.color;
  if (coin(rng, 0.6)) d.shape = o.shape;
  return d;
}

enc::ExpressionSeq word_sequence(const std::vector<int>& toks) {
  enc::ExpressionSeq seq;
  seq.vocabulary_size = Vocabulary::standard().size();
  for (int t : toks) seq.units.push_back(enc::ExpressionUnit::word(t));
  return seq;
}

bool resolves_to(const Scene& scene, const enc::ExpressionSeq& seq, std::size_t target) {
  auto hits = oracle_resolve(scene, seq);
  return hits.size() == 1 && hits.front() == target;
}

std::optional<enc::ExpressionSeq> try_phrase(const Scene& scene, Rng& rng) {
  Referring r;
  r.head = describe(scene.objects[scene.target_index], rng);
  auto seq = word_sequence(tokens(r));
  if (resolves_to(scene, seq, scene.target_index)) return seq;
  return std::nullopt;
}

std::optional<enc::ExpressionSeq> try_sentence(const Scene& scene, Rng& rng) {
  const std::size_t t = scene.target_index;
  const Object& target = scene.objects[t];
  Referring r;
  r.head = describe(target, rng);
  if (is_middle(target.cell, scene.grid_side) && coin(rng, 0.25)) {
    r.middle = true;
  } else {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < scene.objects.size(); ++j) {
      if (j != t) others.push_back(j);
    }
    const Object& landmark = scene.objects[pick(rng, others)];
    std::vector<Relation> valid;
    for (Relation rel : {Relation::left_of, Relation::right_of, Relation::above, Relation::below}) {
      if (relation_holds(rel, target.cell, landmark.cell)) valid.push_back(rel);
    }
    r.relation.emplace(pick(rng, valid), describe(landmark, rng));
  }
  auto seq = word_sequence(tokens(r));
  if (resolves_to(scene, seq, t)) return seq;
  return std::nullopt;
}

// Greedy elimination in the fixed order colour, shape, size, left, top,
// middle. Within an attribute the questioner either confirms the target's
// value (and moves on) or rules out a value still held by some remaining
// distractor (and may ask again). Questions that eliminate nothing are never
// asked.
std::optional<enc::ExpressionSeq> try_dialog(const Scene& scene, Rng& rng) {
  const std::size_t t = scene.target_index;
  const Object& target = scene.objects[t];
  const int g = scene.grid_side;
  std::vector<std::size_t> remaining(scene.objects.size());
  std::iota(remaining.begin(), remaining.end(), 0);

  enc::ExpressionSeq seq;
  seq.vocabulary_size = Vocabulary::standard().size();
  auto ask = [&](const QaConstraint& qa) {
    std::erase_if(remaining, [&](std::size_t i) { return !qa.truth_for(scene.objects[i], g); });
    seq.units.push_back(enc::ExpressionUnit::qa_pair(tokens(qa)));
  };

  auto categorical = [&](Question question, auto value_of, auto assign) {
    while (remaining.size() > 1) {
      std::vector<std::size_t> distractor_values;
      for (std::size_t i : remaining) {
        std::size_t v = value_of(scene.objects[i]);
        if (v != value_of(target) && std::find(distractor_values.begin(), distractor_values.end(), v) ==
                                         distractor_values.end()) {
          distractor_values.push_back(v);
        }
      }
      if (distractor_values.empty()) return;
      std::sort(distractor_values.begin(), distractor_values.end());
      QaConstraint qa;
      qa.question = question;
      if (coin(rng)) {
        assign(qa, value_of(target));
        qa.answer = true;
        ask(qa);
        return;
      }
      assign(qa, pick(rng, distractor_values));
      qa.answer = false;
      ask(qa);
    }
  };

  categorical(
      Question::color, [](const Object& o) { return static_cast<std::size_t>(o.color); },
      [](QaConstraint& qa, std::size_t v) { qa.color = static_cast<Color>(v); });
  categorical(
      Question::shape, [](const Object& o) { return static_cast<std::size_t>(o.shape); },
      [](QaConstraint& qa, std::size_t v) { qa.shape = static_cast<ShapeKind>(v); });
  categorical(
      Question::size, [](const Object& o) { return static_cast<std::size_t>(o.size); },
      [](QaConstraint& qa, std::size_t v) { qa.size = static_cast<Size>(v); });

  for (Question q : {Question::left, Question::top, Question::middle}) {
    if (remaining.size() <= 1) break;
    QaConstraint qa;
    qa.question = q;
    qa.answer = qa.truth_for(target, g);  // answer=true here, so this is the plain fact
    bool splits = std::any_of(remaining.begin(), remaining.end(),
                              [&](std::size_t i) { return !qa.truth_for(scene.objects[i], g); });
    if (splits) ask(qa);
  }

  if (remaining.size() != 1 || remaining.front() != t) return std::nullopt;
  return seq;
}

}  // namespace

Scene generate_scene(Rng& rng, const SceneConfig& config) {
  const int cells = config.grid_side * config.grid_side;
  if (config.grid_side < 1) throw InvalidArgument("grid side must be positive");
  if (config.n_objects > cells) {
    throw InvalidArgument("cannot place " + std::to_string(config.n_objects) + " objects on a " +
                          std::to_string(config.grid_side) + "x" + std::to_string(config.grid_side) + " grid");
  }
  if (config.n_objects < 2) throw InvalidArgument("a scene needs at least two objects");

  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Scene scene;
  scene.grid_side = config.grid_side;
  for (int k = 0; k < config.n_objects; ++k) {
    Object o;
    o.cell = {order[static_cast<std::size_t>(k)] / config.grid_side, order[static_cast<std::size_t>(k)] % config.grid_side};
    o.color = uniform_enum<Color>(rng, kColorCount);
    o.shape = uniform_enum<ShapeKind>(rng, kShapeCount);
    o.size = uniform_enum<Size>(rng, kSizeCount);
    scene.objects.push_back(o);
  }
  scene.target_index = std::uniform_int_distribution<std::size_t>(0, scene.objects.size() - 1)(rng);
  return scene;
}

std::optional<GroundingInstance> generate_expression(const Scene& scene, Rng& rng, ExpressionKind kind,
                                                     const ExpressionOptions& options) {
  if (scene.objects.empty() || scene.target_index >= scene.objects.size()) {
    throw InvalidArgument("scene has no valid target");
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::optional<enc::ExpressionSeq> seq;
    switch (kind) {
      case ExpressionKind::phrase: seq = try_phrase(scene, rng); break;
      case ExpressionKind::sentence: seq = try_sentence(scene, rng); break;
      case ExpressionKind::dialog: seq = try_dialog(scene, rng); break;
    }
    if (!seq) continue;
    if (kind == ExpressionKind::dialog && options.dialog_rounds > 0 &&
        seq->length() != static_cast<std::size_t>(options.dialog_rounds)) {
      continue;
    }
    return GroundingInstance{scene, std::move(*seq), kind, scene.target_index};
  }
  return std::nullopt;
}

void GeneratorConfig::validate() const {
  if (grid_side < 1) throw InvalidArgument("grid side must be positive");
  if (min_objects < 2 || max_objects < min_objects) throw InvalidArgument("object range must satisfy 2 <= min <= max");
  if (max_objects > grid_side * grid_side) {
    throw InvalidArgument("cannot place " + std::to_string(max_objects) + " objects on a " + std::to_string(grid_side) +
                          "x" + std::to_string(grid_side) + " grid");
  }
  if (kinds.empty()) throw InvalidArgument("no expression kinds requested");
  if (dialog_rounds < 0) throw InvalidArgument("dialog rounds must be non-negative");
}

GroundingInstance generate_instance(Rng& rng, const GeneratorConfig& config) {
  config.validate();
  ExpressionOptions options;
  options.dialog_rounds = config.dialog_rounds;
  for (;;) {
    ExpressionKind kind = pick(rng, config.kinds);
    int n = std::uniform_int_distribution<int>(config.min_objects, config.max_objects)(rng);
    Scene scene = generate_scene(rng, {config.grid_side, n});
    if (auto instance = generate_expression(scene, rng, kind, options)) return *std::move(instance);
  }
}

Rng instance_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

IndexRange split_range(Split split, std::uint64_t total) {
  const std::uint64_t train = total * 8 / 10;
  const std::uint64_t val = total / 10;
  switch (split) {
    case Split::train: return {0, train};
    case Split::val: return {train, train + val};
    case Split::test: return {train + val, total};
  }
  return {};
}

std::vector<GroundingInstance> generate_range(std::uint64_t seed, const GeneratorConfig& config, IndexRange range) {
  config.validate();
  std::vector<GroundingInstance> out;
  out.reserve(range.size());
  for (std::uint64_t k = range.begin; k < range.end; ++k) {
    Rng rng = instance_rng(seed, k);
    out.push_back(generate_instance(rng, config));
  }
  return out;
}

}  // namespace plan::world
