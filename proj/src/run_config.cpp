#include "evnet/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace evnet {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean '" + value + "' for " + key);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ",";
    if constexpr (std::is_same_v<T, std::string>) out += item;
    else if constexpr (std::is_same_v<T, io::SynthKind>) out += to_string(item);
    else out += std::to_string(item);
  }
  return out;
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Table = std::vector<std::pair<std::string, Key>>;

// Enum parsers throw std::invalid_argument; rethrow with the key attached.
template <typename F>
auto with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

const Table& table() {
  static const Table keys = [] {
    Table t;
    auto add = [&](std::string name, auto set, auto get) { t.push_back({std::move(name), Key{set, get}}); };
    add("task.kind", [](RunConfig& c, const std::string& v) { c.model.task.kind = with_key("task.kind", [&] { return parse_task_kind(v); }); },
        [](const RunConfig& c) { return std::string(to_string(c.model.task.kind)); });
    add("task.obs_steps", [](RunConfig& c, const std::string& v) { c.model.task.obs_steps = parse_number<int>("task.obs_steps", v); },
        [](const RunConfig& c) { return std::to_string(c.model.task.obs_steps); });
    add("task.pred_steps", [](RunConfig& c, const std::string& v) { c.model.task.pred_steps = parse_number<int>("task.pred_steps", v); },
        [](const RunConfig& c) { return std::to_string(c.model.task.pred_steps); });
    add("task.frame_interval", [](RunConfig& c, const std::string& v) { c.model.task.frame_interval = parse_number<int>("task.frame_interval", v); },
        [](const RunConfig& c) { return std::to_string(c.model.task.frame_interval); });

    add("transform.kind", [](RunConfig& c, const std::string& v) { c.model.transform = with_key("transform.kind", [&] { return parse_transform_kind(v); }); },
        [](const RunConfig& c) { return std::string(to_string(c.model.transform)); });

    add("model.keypoints",
        [](RunConfig& c, const std::string& v) {
          if (v == "auto") {
            c.auto_keypoints = true;
            return;
          }
          c.auto_keypoints = false;
          c.model.keypoints.times.clear();
          for (const auto& item : split_list(v)) c.model.keypoints.times.push_back(parse_number<int>("model.keypoints", item));
        },
        [](const RunConfig& c) { return c.auto_keypoints ? std::string("auto") : join(c.model.keypoints.times); });
    add("model.width", [](RunConfig& c, const std::string& v) { c.model.width = parse_number<int>("model.width", v); },
        [](const RunConfig& c) { return std::to_string(c.model.width); });
    add("model.heads", [](RunConfig& c, const std::string& v) { c.model.heads = parse_number<int>("model.heads", v); },
        [](const RunConfig& c) { return std::to_string(c.model.heads); });
    add("model.layers", [](RunConfig& c, const std::string& v) { c.model.layers = parse_number<int>("model.layers", v); },
        [](const RunConfig& c) { return std::to_string(c.model.layers); });
    add("model.hidden", [](RunConfig& c, const std::string& v) { c.model.hidden = parse_number<int>("model.hidden", v); },
        [](const RunConfig& c) { return std::to_string(c.model.hidden); });
    add("model.noise_dim", [](RunConfig& c, const std::string& v) { c.model.noise_dim = parse_number<int>("model.noise_dim", v); },
        [](const RunConfig& c) { return std::to_string(c.model.noise_dim); });
    add("model.context_dim", [](RunConfig& c, const std::string& v) { c.model.context_dim = parse_number<int>("model.context_dim", v); },
        [](const RunConfig& c) { return std::to_string(c.model.context_dim); });
    add("model.bilinear", [](RunConfig& c, const std::string& v) { c.model.use_bilinear = parse_bool("model.bilinear", v); },
        [](const RunConfig& c) { return std::string(c.model.use_bilinear ? "true" : "false"); });
    add("model.interpolation", [](RunConfig& c, const std::string& v) { c.model.interpolation = with_key("model.interpolation", [&] { return parse_interpolation_mode(v); }); },
        [](const RunConfig& c) { return std::string(to_string(c.model.interpolation)); });
    add("model.cross_attention_order", [](RunConfig& c, const std::string& v) { c.model.cross_order = with_key("model.cross_attention_order", [&] { return parse_cross_attention_order(v); }); },
        [](const RunConfig& c) { return std::string(to_string(c.model.cross_order)); });

    add("train.lr", [](RunConfig& c, const std::string& v) { c.train.lr = parse_number<double>("train.lr", v); },
        [](const RunConfig& c) { return format_double(c.train.lr); });
    add("train.batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = parse_number<int>("train.batch_size", v); },
        [](const RunConfig& c) { return std::to_string(c.train.batch_size); });
    add("train.epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = parse_number<int>("train.epochs", v); },
        [](const RunConfig& c) { return std::to_string(c.train.epochs); });
    add("train.k_train", [](RunConfig& c, const std::string& v) { c.train.k_train = parse_number<int>("train.k_train", v); },
        [](const RunConfig& c) { return std::to_string(c.train.k_train); });
    add("train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = parse_number<std::uint64_t>("train.seed", v); },
        [](const RunConfig& c) { return std::to_string(c.train.seed); });

    add("metrics.k", [](RunConfig& c, const std::string& v) { c.metrics.k = parse_number<int>("metrics.k", v); },
        [](const RunConfig& c) { return std::to_string(c.metrics.k); });
    add("metrics.iou_selection", [](RunConfig& c, const std::string& v) { c.metrics.iou_selection = with_key("metrics.iou_selection", [&] { return parse_iou_selection(v); }); },
        [](const RunConfig& c) { return std::string(to_string(c.metrics.iou_selection)); });

    add("data.source",
        [](RunConfig& c, const std::string& v) {
          if (v != "synth" && v != "files") throw ConfigError("data.source must be synth or files");
          c.data.source = v;
        },
        [](const RunConfig& c) { return c.data.source; });
    add("data.path", [](RunConfig& c, const std::string& v) { c.data.paths = split_list(v); },
        [](const RunConfig& c) { return join(c.data.paths); });
    add("data.synth",
        [](RunConfig& c, const std::string& v) {
          c.data.synth.clear();
          for (const auto& item : split_list(v))
            c.data.synth.push_back(with_key("data.synth", [&] { return io::parse_synth_kind(item); }));
        },
        [](const RunConfig& c) { return join(c.data.synth); });
    add("data.count", [](RunConfig& c, const std::string& v) { c.data.count = parse_number<int>("data.count", v); },
        [](const RunConfig& c) { return std::to_string(c.data.count); });
    add("data.steps", [](RunConfig& c, const std::string& v) { c.data.steps = parse_number<int>("data.steps", v); },
        [](const RunConfig& c) { return std::to_string(c.data.steps); });
    add("data.sigma", [](RunConfig& c, const std::string& v) { c.data.sigma = parse_number<double>("data.sigma", v); },
        [](const RunConfig& c) { return format_double(c.data.sigma); });
    add("data.stride", [](RunConfig& c, const std::string& v) { c.data.stride = parse_number<int>("data.stride", v); },
        [](const RunConfig& c) { return std::to_string(c.data.stride); });
    add("data.scale", [](RunConfig& c, const std::string& v) { c.data.scale = parse_number<double>("data.scale", v); },
        [](const RunConfig& c) { return format_double(c.data.scale); });
    add("data.anchor",
        [](RunConfig& c, const std::string& v) {
          if (v == "first") c.data.anchor = AnchorMode::first;
          else if (v == "last") c.data.anchor = AnchorMode::last;
          else throw ConfigError("data.anchor must be first or last");
        },
        [](const RunConfig& c) { return std::string(c.data.anchor == AnchorMode::first ? "first" : "last"); });
    add("data.split", [](RunConfig& c, const std::string& v) { c.data.split = with_key("data.split", [&] { return io::parse_split_mode(v); }); },
        [](const RunConfig& c) { return std::string(to_string(c.data.split)); });
    add("data.leave_out", [](RunConfig& c, const std::string& v) { c.data.leave_out = v; },
        [](const RunConfig& c) { return c.data.leave_out; });
    add("data.val_fraction", [](RunConfig& c, const std::string& v) { c.data.val_fraction = parse_number<double>("data.val_fraction", v); },
        [](const RunConfig& c) { return format_double(c.data.val_fraction); });
    add("data.test_fraction", [](RunConfig& c, const std::string& v) { c.data.test_fraction = parse_number<double>("data.test_fraction", v); },
        [](const RunConfig& c) { return format_double(c.data.test_fraction); });

    add("output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
        [](const RunConfig& c) { return c.output_dir; });
    return t;
  }();
  return keys;
}

const Key* find_key(const std::string& raw) {
  // older spellings still accepted on input
  const std::string name = raw == "decoder.cross_attention_order" ? "model.cross_attention_order"
                           : raw == "normalize.anchor"            ? "data.anchor"
                                                                  : raw;
  for (const auto& [k, key] : table())
    if (k == name) return &key;
  return nullptr;
}

void resolve(RunConfig& cfg) {
  if (cfg.auto_keypoints)
    cfg.model.keypoints = default_keypoints(cfg.model.transform, cfg.model.task.obs_steps, cfg.model.task.pred_steps);
}

}  // namespace

ModelConfig desk_model_config() {
  ModelConfig cfg;
  cfg.width = 32;
  cfg.heads = 4;
  cfg.layers = 2;
  cfg.hidden = 128;
  cfg.noise_dim = 32;
  cfg.context_dim = 16;
  cfg.keypoints = default_keypoints(cfg.transform, cfg.task.obs_steps, cfg.task.pred_steps);
  return cfg;
}

TrainConfig desk_train_config() {
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = 100;
  return cfg;
}

void RunConfig::validate() const {
  try {
    model.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (metrics.k < 1) throw ConfigError("metrics.k must be positive");
  if (data.count < 1) throw ConfigError("data.count must be positive");
  if (data.stride < 1) throw ConfigError("data.stride must be positive");
  if (!(data.scale > 0)) throw ConfigError("data.scale must be positive");
  if (data.steps != 0 && data.steps < model.task.total_steps())
    throw ConfigError("data.steps shorter than one window");
  if (data.source == "files" && data.paths.empty()) throw ConfigError("data.source = files needs data.path");
  if (data.source == "synth" && data.synth.empty()) throw ConfigError("data.synth is empty");
  if (data.split == io::SplitMode::leave_one_out && data.leave_out.empty())
    throw ConfigError("leave-one-out split needs data.leave_out");
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + key + "'");
  k->set(cfg, value);
  resolve(cfg);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, key] : table()) out.emplace_back(name, key.get(cfg));
  return out;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  resolve(cfg);
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_run_config(in);
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : config_entries(cfg)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace evnet
