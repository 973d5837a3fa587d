#pragma once

// Run configuration: one `key = value` document with dotted namespaces
// (task, transform, model, train, metrics, data, output). '#' starts a
// comment line. Unknown keys are rejected; every key has a default, and the
// all-default document describes a synthetic-data run.

#include "evnet/io/splits.hpp"
#include "evnet/io/synth.hpp"
#include "evnet/metrics.hpp"
#include "evnet/model.hpp"
#include "evnet/training.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace evnet {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataConfig {
  std::string source = "synth";             // synth | files
  std::vector<std::string> paths;           // files or directories (one clip per file)
  std::vector<io::SynthKind> synth{io::SynthKind::linear};
  int count = 32;                           // tracks per synthetic kind
  int steps = 0;                            // synthetic track length; 0 = t_h + t_f
  double sigma = 1.0;                       // random-walk step deviation
  int stride = 1;
  double scale = 1.0;
  AnchorMode anchor = AnchorMode::last;
  io::SplitMode split = io::SplitMode::none;
  std::string leave_out;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
};

struct MetricsConfig {
  int k = 20;
  IouSelection iou_selection = IouSelection::ade_tied;
};

/// Desk-scale model defaults for command-line runs (the paper-scale values
/// stay the ModelConfig defaults).
ModelConfig desk_model_config();
TrainConfig desk_train_config();

struct RunConfig {
  ModelConfig model = desk_model_config();
  bool auto_keypoints = true;  // model.keypoints = auto
  TrainConfig train = desk_train_config();
  DataConfig data;
  MetricsConfig metrics;
  std::string output_dir = "out";

  void validate() const;
};

/// Keys in document order with their current values.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

/// Parses and validates a document; errors carry the offending line.
RunConfig parse_run_config(std::istream& in);
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical document; parse_run_config_text(to_text(c)) reproduces c.
std::string to_text(const RunConfig& cfg);

/// Sets one key. Throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace evnet
