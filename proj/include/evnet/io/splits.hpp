#pragma once

#include "evnet/trajectory.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evnet::io {

/// A named group of tracks (one scene, video, or subset) that is always
/// assigned to a single split.
struct Clip {
  std::string name;
  std::vector<Trajectory> tracks;
};

enum class SplitMode { none, leave_one_out, ratio };

std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view name);

struct DatasetSpec {
  PredictionTask task;
  SplitMode mode = SplitMode::none;
  std::string leave_out;  // clip name for leave-one-out
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  int stride = 1;
  std::uint64_t seed = 0;
};

struct SplitSet {
  std::vector<Window> train, val, test;
  std::vector<std::string> train_clips, val_clips, test_clips;
};

/// Assigns whole clips to splits and windows every track.
///   none:           every clip lands in train and test.
///   leave_one_out:  the named clip is the test set, the others train.
///   ratio:          a seeded shuffle of the clips; floor(n * fraction)
///                   clips each go to val and test, the rest to train.
SplitSet make_splits(const std::vector<Clip>& clips, const DatasetSpec& spec);

}  // namespace evnet::io
