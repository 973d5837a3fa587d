#include "evnet/io/checkpoint.hpp"

#include "evnet/io/atomic_file.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace evnet::io {

using nlohmann::json;

json model_config_to_json(const ModelConfig& cfg) {
  return {
      {"transform", std::string(to_string(cfg.transform))},
      {"task",
       {{"kind", std::string(to_string(cfg.task.kind))},
        {"obs_steps", cfg.task.obs_steps},
        {"pred_steps", cfg.task.pred_steps},
        {"frame_interval", cfg.task.frame_interval}}},
      {"keypoints", cfg.keypoints.times},
      {"width", cfg.width},
      {"heads", cfg.heads},
      {"layers", cfg.layers},
      {"hidden", cfg.hidden},
      {"noise_dim", cfg.noise_dim},
      {"context_dim", cfg.context_dim},
      {"bilinear", cfg.use_bilinear},
      {"interpolation", std::string(to_string(cfg.interpolation))},
      {"cross_order", std::string(to_string(cfg.cross_order))},
  };
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.transform = parse_transform_kind(j.at("transform").get<std::string>());
  const json& t = j.at("task");
  cfg.task.kind = parse_task_kind(t.at("kind").get<std::string>());
  cfg.task.obs_steps = t.at("obs_steps").get<int>();
  cfg.task.pred_steps = t.at("pred_steps").get<int>();
  cfg.task.frame_interval = t.at("frame_interval").get<int>();
  cfg.keypoints.times = j.at("keypoints").get<std::vector<int>>();
  cfg.width = j.at("width").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.noise_dim = j.at("noise_dim").get<int>();
  cfg.context_dim = j.at("context_dim").get<int>();
  cfg.use_bilinear = j.at("bilinear").get<bool>();
  cfg.interpolation = parse_interpolation_mode(j.at("interpolation").get<std::string>());
  cfg.cross_order = parse_cross_attention_order(j.at("cross_order").get<std::string>());
  return cfg;
}

namespace {

template <typename T>
void put(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string text(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ModelParams& params, const ModelConfig& cfg, const json& extra) {
  json header = {{"model", model_config_to_json(cfg)}};
  if (!extra.is_null()) header["extra"] = extra;
  const std::string config = header.dump();

  std::string out = "EVN1";
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
  out += config;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, value] : params.tensors()) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw CheckpointError("tensor name too long");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put<std::uint8_t>(out, 2);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(value.cols()));
    for (Eigen::Index r = 0; r < value.rows(); ++r)
      for (Eigen::Index c = 0; c < value.cols(); ++c) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(value(r, c)));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || bytes.compare(0, 4, "EVN1") != 0) throw CheckpointError("not a checkpoint (bad magic)");
  in.text(4);
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ck;
  const std::string config = in.text(in.get<std::uint32_t>());
  try {
    const json header = json::parse(config);
    ck.config = model_config_from_json(header.at("model"));
    if (header.contains("extra")) ck.extra = header.at("extra");
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }

  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = in.text(in.get<std::uint16_t>());
    const auto rank = in.get<std::uint8_t>();
    if (rank < 1 || rank > 2) throw CheckpointError("tensor '" + name + "' has unsupported rank");
    const Eigen::Index rows = rank == 2 ? in.get<std::uint32_t>() : 1;
    const Eigen::Index cols = in.get<std::uint32_t>();
    nn::Matrix value(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) value(r, c) = std::bit_cast<double>(in.get<std::uint64_t>());
    ck.params.set(name, std::move(value));
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint tensors");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ModelConfig& cfg,
                     const json& extra) {
  write_file_atomic(path, encode_checkpoint(params, cfg, extra));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void require_same_shapes(const ModelParams& loaded, const ModelParams& expected) {
  auto shape = [](const nn::Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  };
  for (const auto& [name, value] : expected.tensors()) {
    if (!loaded.contains(name)) throw CheckpointError("checkpoint is missing tensor '" + name + "'");
    const nn::Matrix& got = loaded.get(name);
    if (got.rows() != value.rows() || got.cols() != value.cols())
      throw CheckpointError("shape mismatch for tensor '" + name + "': checkpoint " + shape(got) + ", model " +
                            shape(value));
  }
  for (const auto& [name, value] : loaded.tensors())
    if (!expected.contains(name)) throw CheckpointError("checkpoint has unexpected tensor '" + name + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ck = load_checkpoint(path);
  require_same_shapes(ck.params, init_model(expected, 0));
  return ck;
}

}  // namespace evnet::io
