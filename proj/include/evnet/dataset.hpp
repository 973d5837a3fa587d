#pragma once

#include "evnet/io/splits.hpp"
#include "evnet/run_config.hpp"

#include <cstdint>
#include <vector>

namespace evnet {

/// Values per frame in data files: co2bb data are boxes even though the
/// model predicts points.
int data_dims(TaskKind kind);

/// Clips described by `cfg.data`: one clip per annotation file (named by
/// the file stem), or one clip per synthetic track.
std::vector<io::Clip> load_clips(const RunConfig& cfg, std::uint64_t seed);

io::SplitSet load_splits(const RunConfig& cfg, std::uint64_t seed);

struct NormalizedWindow {
  Window window;  // normalized obs and future
  NormalizationState state;
};

NormalizedWindow normalize_window(const Window& w, double scale, AnchorMode anchor);

/// Normalized training windows for the model. co2bb box windows become
/// two corner windows each.
std::vector<Window> model_windows(const std::vector<Window>& windows, const RunConfig& cfg);

}  // namespace evnet
