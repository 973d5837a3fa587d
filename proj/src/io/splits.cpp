#include "evnet/io/splits.hpp"

#include "evnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evnet::io {

std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::none: return "none";
    case SplitMode::leave_one_out: return "leave_one_out";
    case SplitMode::ratio: return "ratio";
  }
  return "none";
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "none") return SplitMode::none;
  if (name == "leave_one_out") return SplitMode::leave_one_out;
  if (name == "ratio") return SplitMode::ratio;
  throw std::invalid_argument("unknown split mode '" + std::string(name) + "'");
}

namespace {

void append_windows(const Clip& clip, const DatasetSpec& spec, std::vector<Window>& out) {
  for (const Trajectory& track : clip.tracks) {
    auto windows = window_split(track, spec.task, spec.stride);
    out.insert(out.end(), std::make_move_iterator(windows.begin()), std::make_move_iterator(windows.end()));
  }
}

}  // namespace

SplitSet make_splits(const std::vector<Clip>& clips, const DatasetSpec& spec) {
  SplitSet out;
  switch (spec.mode) {
    case SplitMode::none:
      for (const Clip& c : clips) {
        append_windows(c, spec, out.train);
        append_windows(c, spec, out.test);
        out.train_clips.push_back(c.name);
        out.test_clips.push_back(c.name);
      }
      break;
    case SplitMode::leave_one_out: {
      const bool found = std::any_of(clips.begin(), clips.end(), [&](const Clip& c) { return c.name == spec.leave_out; });
      if (!found) throw std::invalid_argument("unknown subset '" + spec.leave_out + "' for leave-one-out");
      for (const Clip& c : clips) {
        if (c.name == spec.leave_out) {
          append_windows(c, spec, out.test);
          out.test_clips.push_back(c.name);
        } else {
          append_windows(c, spec, out.train);
          out.train_clips.push_back(c.name);
        }
      }
      break;
    }
    case SplitMode::ratio: {
      if (spec.val_fraction < 0 || spec.test_fraction < 0 || spec.val_fraction + spec.test_fraction > 1.0)
        throw std::invalid_argument("split fractions must be non-negative and sum to at most 1");
      std::vector<std::size_t> order(clips.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      auto rng = substream(spec.seed, "split");
      std::shuffle(order.begin(), order.end(), rng);
      const auto n = static_cast<double>(clips.size());
      const auto n_val = static_cast<std::size_t>(std::floor(n * spec.val_fraction + 1e-9));
      const auto n_test = static_cast<std::size_t>(std::floor(n * spec.test_fraction + 1e-9));
      for (std::size_t i = 0; i < order.size(); ++i) {
        const Clip& c = clips[order[i]];
        if (i < n_val) {
          append_windows(c, spec, out.val);
          out.val_clips.push_back(c.name);
        } else if (i < n_val + n_test) {
          append_windows(c, spec, out.test);
          out.test_clips.push_back(c.name);
        } else {
          append_windows(c, spec, out.train);
          out.train_clips.push_back(c.name);
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace evnet::io
