#pragma once

#include "evnet/trajectory.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace evnet::io {

enum class SynthKind { linear, circular, random_walk, box_turn };

std::string_view to_string(SynthKind kind);
SynthKind parse_synth_kind(std::string_view name);

struct SynthOptions {
  int steps = 20;
  double min_speed = 0.2;  // distance per step
  double max_speed = 0.6;
  double sigma = 1.0;      // random-walk increment standard deviation
};

/// Deterministic synthetic tracks. Coordinates (M = 2) follow the path
/// itself; boxes (M = 4 or 6) are corner pairs around a moving center.
/// box_turn rotates the box with its heading through a half turn, so the
/// corner order flips along the track. box_turn requires a box task.
std::vector<Trajectory> synth_generate(SynthKind kind, int count, TaskKind task, std::uint64_t seed,
                                       const SynthOptions& opts = {});

}  // namespace evnet::io
