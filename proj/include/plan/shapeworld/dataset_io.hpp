#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "plan/shapeworld/generator.hpp"
#include "plan/shapeworld/vocabulary.hpp"

namespace plan::world {

inline constexpr int kDatasetFormatVersion = 1;

/// First line of every dataset file.
struct DatasetHeader {
  std::string split;
  int grid_side = 4;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  std::string vocabulary_file;
  std::size_t vocabulary_size = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<GroundingInstance> instances;
};

/// Shortest decimal text with at most 9 significant digits.
std::string format_float(double value);
/// The double nearest to format_float(value).
double round_to_9_digits(double value);

std::string instance_to_line(const GroundingInstance& instance, std::uint64_t index);
GroundingInstance instance_from_line(const std::string& line, std::size_t vocabulary_size);

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

void write_dataset_file(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_file(const std::filesystem::path& path);

void write_vocabulary_file(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary_file(const std::filesystem::path& path);

/// `<prefix>.<split>.jsonl` and `<prefix>.vocab.json`.
std::filesystem::path split_path(const std::filesystem::path& prefix, Split split);
std::filesystem::path vocabulary_path(const std::filesystem::path& prefix);

}  // namespace plan::world
