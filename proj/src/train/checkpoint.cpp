// Binary layout, all integers and floats little-endian:
//
//   "PLANCKPT"                      8-byte magic
//   u32 version
//   u32 crc32(config fingerprint)
//   u32 n, then n x { str key, str value }     metadata (includes dims, ablation)
//   u32 t, then t x { str name, u32 rank, u32 extents[rank] }   shape manifest
//   t tensors of f64 values, in manifest order
//   u64 adam step, f64 beta1, f64 beta2, f64 epsilon
//   t first-moment arrays, t second-moment arrays (f64)
//   u32 crc32 of every preceding byte
//
// where str is u32 length followed by raw bytes.

#include "plan/train/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "plan/errors.hpp"

namespace plan::train {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'A', 'N', 'C', 'K', 'P', 'T'};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::size_t end) : in_(in), end_(end) {}
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw CheckpointError("checkpoint ends prematurely");
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    auto n = uint<std::uint32_t>();
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::string dims_text(const model::ModelDims& d) {
  return std::to_string(d.vocabulary) + "," + std::to_string(d.visual_dim) + "," + std::to_string(d.proposal_dim) +
         "," + std::to_string(d.hidden);
}

std::size_t to_size(const std::string& key, const std::map<std::string, std::string>& meta) {
  auto it = meta.find(key);
  if (it == meta.end()) throw CheckpointError("checkpoint lacks '" + key + "'");
  try {
    return static_cast<std::size_t>(std::stoull(it->second));
  } catch (const std::exception&) {
    throw CheckpointError("checkpoint has a malformed '" + key + "'");
  }
}

}  // namespace

std::string config_fingerprint(const model::ModelDims& dims, model::Ablation ablation) {
  return "plan-model;dims=" + dims_text(dims) + ";ablation=" + std::string(model::name(ablation));
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
  const model::PlanParams& params = checkpoint.params;
  const std::string fingerprint = config_fingerprint(params.dims, checkpoint.ablation);
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint(kCheckpointVersion);
  w.uint(crc32_of(reinterpret_cast<const std::uint8_t*>(fingerprint.data()), fingerprint.size()));

  std::map<std::string, std::string> meta = checkpoint.metadata;
  meta["vocabulary"] = std::to_string(params.dims.vocabulary);
  meta["visual_dim"] = std::to_string(params.dims.visual_dim);
  meta["proposal_dim"] = std::to_string(params.dims.proposal_dim);
  meta["hidden"] = std::to_string(params.dims.hidden);
  meta["ablation"] = std::string(model::name(checkpoint.ablation));
  w.uint(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    w.str(k);
    w.str(v);
  }

  std::vector<ad::Tensor> tensors;
  std::vector<std::string> names;
  params.visit([&](const std::string& name, const ad::Tensor& t) {
    names.push_back(name);
    tensors.push_back(t);
  });
  w.uint(static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    w.str(names[i]);
    w.uint(static_cast<std::uint32_t>(tensors[i].rank()));
    for (std::size_t extent : tensors[i].shape()) w.uint(static_cast<std::uint32_t>(extent));
  }
  for (const auto& t : tensors) {
    for (double v : t.values()) w.f64(v);
  }

  // A default-constructed optimizer state is stored as a fresh one.
  AdamState adam = checkpoint.adam;
  if (adam.step == 0 && adam.first_moment.empty() && adam.second_moment.empty()) {
    for (const auto& t : tensors) {
      adam.first_moment.emplace_back(t.size(), 0.0);
      adam.second_moment.emplace_back(t.size(), 0.0);
    }
  }
  if (adam.first_moment.size() != tensors.size() || adam.second_moment.size() != tensors.size()) {
    throw CheckpointError("optimizer state does not match the parameters");
  }
  w.uint(adam.step);
  w.f64(adam.beta1);
  w.f64(adam.beta2);
  w.f64(adam.epsilon);
  for (const auto* moments : {&adam.first_moment, &adam.second_moment}) {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if ((*moments)[i].size() != tensors[i].size()) throw CheckpointError("optimizer moment shape mismatch");
      for (double v : (*moments)[i]) w.f64(v);
    }
  }
  auto& bytes = w.data();
  w.uint(crc32_of(bytes.data(), bytes.size()));
  return std::move(bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::optional<model::ModelDims>& expected) {
  if (bytes.size() < sizeof kMagic + 12) throw CheckpointError("checkpoint truncated (checksum failure)");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) throw CheckpointError("not a checkpoint file");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_crc = 0;
  for (std::size_t i = 0; i < 4; ++i) stored_crc |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  if (crc32_of(bytes.data(), body) != stored_crc) throw CheckpointError("checkpoint checksum failure");

  Reader r(bytes, body);
  for (std::size_t i = 0; i < sizeof kMagic; ++i) r.uint<std::uint8_t>();
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto config_crc = r.uint<std::uint32_t>();

  Checkpoint out;
  const auto n_meta = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    out.metadata[k] = r.str();
  }
  model::ModelDims dims{to_size("vocabulary", out.metadata), to_size("visual_dim", out.metadata),
                        to_size("proposal_dim", out.metadata), to_size("hidden", out.metadata)};
  try {
    out.ablation = model::parse_ablation(out.metadata.at("ablation"));
  } catch (const std::exception&) {
    throw CheckpointError("checkpoint has no valid ablation entry");
  }
  const std::string fingerprint = config_fingerprint(dims, out.ablation);
  if (crc32_of(reinterpret_cast<const std::uint8_t*>(fingerprint.data()), fingerprint.size()) != config_crc) {
    throw CheckpointError("checkpoint config hash mismatch");
  }
  if (expected && !(*expected == dims)) {
    throw CheckpointError("checkpoint shape manifest (" + dims_text(dims) + ") does not match the requested model (" +
                          dims_text(*expected) + ")");
  }

  out.params = model::PlanParams::init(dims, 0);
  std::vector<std::pair<std::string, ad::Tensor>> slots;
  out.params.visit([&](const std::string& name, ad::Tensor& t) { slots.emplace_back(name, t); });
  const auto n_tensors = r.uint<std::uint32_t>();
  if (n_tensors != slots.size()) throw CheckpointError("checkpoint tensor count mismatch");
  for (auto& [name, tensor] : slots) {
    if (r.str() != name) throw CheckpointError("checkpoint tensor order mismatch at " + name);
    const auto rank = r.uint<std::uint32_t>();
    ad::Shape shape(rank);
    for (auto& e : shape) e = r.uint<std::uint32_t>();
    if (shape != tensor.shape()) throw CheckpointError("shape manifest mismatch for " + name);
  }
  for (auto& [name, tensor] : slots) {
    for (double& v : tensor.values_mut()) v = r.f64();
  }
  out.adam.step = r.uint<std::uint64_t>();
  out.adam.beta1 = r.f64();
  out.adam.beta2 = r.f64();
  out.adam.epsilon = r.f64();
  for (auto* moments : {&out.adam.first_moment, &out.adam.second_moment}) {
    for (auto& [name, tensor] : slots) {
      std::vector<double> m(tensor.size());
      for (double& v : m) v = r.f64();
      moments->push_back(std::move(m));
    }
  }
  if (!r.done()) throw CheckpointError("trailing bytes in checkpoint");
  for (const char* key : {"vocabulary", "visual_dim", "proposal_dim", "hidden", "ablation"}) out.metadata.erase(key);
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<model::ModelDims>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, expected);
}

}  // namespace plan::train
