#include "evnet/dataset.hpp"

#include "evnet/io/annotations.hpp"
#include "evnet/io/synth.hpp"

#include <algorithm>
#include <filesystem>

namespace evnet {

int data_dims(TaskKind kind) { return kind == TaskKind::co2bb ? 4 : task_dims(kind); }

namespace {

std::vector<std::filesystem::path> expand_paths(const std::vector<std::string>& paths) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(p))
        if (entry.is_regular_file()) files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (std::filesystem::exists(p)) {
      out.emplace_back(p);
    } else {
      throw std::invalid_argument("dataset path not found: " + p);
    }
  }
  return out;
}

}  // namespace

std::vector<io::Clip> load_clips(const RunConfig& cfg, std::uint64_t seed) {
  const PredictionTask& task = cfg.model.task;
  std::vector<io::Clip> clips;
  if (cfg.data.source == "files") {
    for (const auto& path : expand_paths(cfg.data.paths)) {
      io::Clip clip{path.stem().string(), {}};
      for (auto& track : io::load_annotations(path, data_dims(task.kind), task.frame_interval))
        clip.tracks.push_back(std::move(track.values));
      clips.push_back(std::move(clip));
    }
    return clips;
  }
  io::SynthOptions opts;
  opts.steps = cfg.data.steps > 0 ? cfg.data.steps : task.total_steps();
  opts.sigma = cfg.data.sigma;
  for (io::SynthKind kind : cfg.data.synth) {
    auto tracks = io::synth_generate(kind, cfg.data.count, task.kind, seed, opts);
    for (std::size_t i = 0; i < tracks.size(); ++i)
      clips.push_back({std::string(to_string(kind)) + "_" + std::to_string(i), {std::move(tracks[i])}});
  }
  return clips;
}

io::SplitSet load_splits(const RunConfig& cfg, std::uint64_t seed) {
  io::DatasetSpec spec;
  spec.task = cfg.model.task;
  spec.mode = cfg.data.split;
  spec.leave_out = cfg.data.leave_out;
  spec.val_fraction = cfg.data.val_fraction;
  spec.test_fraction = cfg.data.test_fraction;
  spec.stride = cfg.data.stride;
  spec.seed = seed;
  return io::make_splits(load_clips(cfg, seed), spec);
}

NormalizedWindow normalize_window(const Window& w, double scale, AnchorMode anchor) {
  auto [obs, state] = normalize(w.obs, scale, anchor);
  return {{std::move(obs), apply_normalization(w.future, state)}, state};
}

std::vector<Window> model_windows(const std::vector<Window>& windows, const RunConfig& cfg) {
  std::vector<Window> out;
  for (const Window& w : windows) {
    Window n = normalize_window(w, cfg.data.scale, cfg.data.anchor).window;
    if (cfg.model.task.kind == TaskKind::co2bb) {
      auto obs = split_box_to_points(n.obs);
      auto fut = split_box_to_points(n.future);
      for (std::size_t i = 0; i < obs.size(); ++i) out.push_back({obs[i], fut[i]});
    } else {
      out.push_back(std::move(n));
    }
  }
  return out;
}

}  // namespace evnet
