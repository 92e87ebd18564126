#include "plan/shapeworld/dataset_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "plan/encoding/features.hpp"
#include "plan/errors.hpp"

namespace plan::world {

using nlohmann::ordered_json;

namespace {

template <typename E, std::size_t N>
E enum_from(const std::string& text, const E (&values)[N], const char* what) {
  for (E v : values) {
    if (name(v) == text) return v;
  }
  throw ParseError(std::string("unknown ") + what + " '" + text + "'");
}

constexpr Color kColors[] = {Color::red, Color::green, Color::blue, Color::yellow};
constexpr ShapeKind kShapes[] = {ShapeKind::circle, ShapeKind::square, ShapeKind::triangle};
constexpr Size kSizes[] = {Size::small, Size::large};

double rounded(double v) { return round_to_9_digits(v); }

ordered_json header_json(const DatasetHeader& h) {
  ordered_json j;
  j["format"] = "plan-shapeworld";
  j["version"] = kDatasetFormatVersion;
  j["split"] = h.split;
  j["grid_side"] = h.grid_side;
  j["count"] = h.count;
  j["seed"] = h.seed;
  j["vocabulary_file"] = h.vocabulary_file;
  j["vocabulary_size"] = h.vocabulary_size;
  return j;
}

}  // namespace

std::string format_float(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double round_to_9_digits(double value) { return std::strtod(format_float(value).c_str(), nullptr); }

std::string instance_to_line(const GroundingInstance& instance, std::uint64_t index) {
  const Scene& scene = instance.scene;
  ordered_json j;
  j["index"] = index;
  j["kind"] = name(instance.kind);
  j["grid_side"] = scene.grid_side;
  ordered_json objects = ordered_json::array();
  ordered_json proposals = ordered_json::array();
  const enc::ImageDims image{scene.image_extent(), scene.image_extent()};
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const Object& o = scene.objects[i];
    objects.push_back({{"color", name(o.color)}, {"shape", name(o.shape)}, {"size", name(o.size)},
                       {"row", o.cell.row}, {"col", o.cell.col}});
    auto s = enc::encode_spatial(scene.proposal_box(i), image);
    proposals.push_back({rounded(s[0]), rounded(s[1]), rounded(s[2]), rounded(s[3])});
  }
  j["objects"] = std::move(objects);
  j["proposals"] = std::move(proposals);
  const bool dialog = !instance.expression.units.empty() && instance.expression.units.front().kind == enc::UnitKind::qa_pair;
  j["unit_kind"] = dialog ? "qa_pair" : "word";
  ordered_json units = ordered_json::array();
  for (const auto& unit : instance.expression.units) units.push_back(unit.tokens);
  j["expression"] = std::move(units);
  j["target_index"] = instance.target_index;
  return j.dump();
}

GroundingInstance instance_from_line(const std::string& line, std::size_t vocabulary_size) {
  GroundingInstance out;
  try {
    auto j = ordered_json::parse(line);
    out.kind = parse_kind(j.at("kind").get<std::string>());
    out.scene.grid_side = j.at("grid_side").get<int>();
    for (const auto& o : j.at("objects")) {
      Object obj;
      obj.color = enum_from(o.at("color").get<std::string>(), kColors, "color");
      obj.shape = enum_from(o.at("shape").get<std::string>(), kShapes, "shape");
      obj.size = enum_from(o.at("size").get<std::string>(), kSizes, "size");
      obj.cell = {o.at("row").get<int>(), o.at("col").get<int>()};
      if (obj.cell.row < 0 || obj.cell.col < 0 || obj.cell.row >= out.scene.grid_side ||
          obj.cell.col >= out.scene.grid_side) {
        throw ParseError("object cell outside the grid");
      }
      out.scene.objects.push_back(obj);
    }
    const auto unit_kind = j.at("unit_kind").get<std::string>();
    if (unit_kind != "word" && unit_kind != "qa_pair") throw ParseError("unknown unit_kind '" + unit_kind + "'");
    out.expression.vocabulary_size = vocabulary_size;
    for (const auto& u : j.at("expression")) {
      auto toks = u.get<std::vector<int>>();
      out.expression.units.push_back(unit_kind == "word" ? enc::ExpressionUnit{enc::UnitKind::word, toks}
                                                         : enc::ExpressionUnit::qa_pair(toks));
    }
    out.target_index = j.at("target_index").get<std::size_t>();
    out.scene.target_index = out.target_index;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed dataset record: ") + e.what());
  }
  if (out.scene.objects.size() < 1 || out.target_index >= out.scene.objects.size()) {
    throw ParseError("target_index outside the object list");
  }
  try {
    out.expression.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid expression: ") + e.what());
  }
  return out;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  DatasetHeader h = dataset.header;
  h.count = dataset.instances.size();
  out << header_json(h).dump() << '\n';
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) out << instance_to_line(dataset.instances[i], i) << '\n';
}

Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset file is empty (missing header)");
  try {
    auto j = ordered_json::parse(line);
    if (j.at("format").get<std::string>() != "plan-shapeworld") throw ParseError("not a shapeworld dataset");
    if (j.at("version").get<int>() != kDatasetFormatVersion) throw ParseError("unsupported dataset version");
    d.header.split = j.at("split").get<std::string>();
    d.header.grid_side = j.at("grid_side").get<int>();
    d.header.count = j.at("count").get<std::uint64_t>();
    d.header.seed = j.at("seed").get<std::uint64_t>();
    d.header.vocabulary_file = j.at("vocabulary_file").get<std::string>();
    d.header.vocabulary_size = j.at("vocabulary_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed dataset header: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    d.instances.push_back(instance_from_line(line, d.header.vocabulary_size));
  }
  if (d.instances.size() != d.header.count) throw ParseError("dataset record count differs from header");
  return d;
}

void write_dataset_file(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_dataset(out, dataset);
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_dataset(in);
}

void write_vocabulary_file(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  ordered_json j;
  j["format"] = "plan-vocabulary";
  j["version"] = kDatasetFormatVersion;
  j["tokens"] = vocab.words();
  out << j.dump() << '\n';
}

Vocabulary read_vocabulary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    auto j = ordered_json::parse(in);
    if (j.at("format").get<std::string>() != "plan-vocabulary") throw ParseError("not a vocabulary file");
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed vocabulary file: ") + e.what());
  }
}

std::filesystem::path split_path(const std::filesystem::path& prefix, Split split) {
  return prefix.string() + "." + std::string(name(split)) + ".jsonl";
}

std::filesystem::path vocabulary_path(const std::filesystem::path& prefix) { return prefix.string() + ".vocab.json"; }

}  // namespace plan::world
