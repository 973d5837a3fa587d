#include "evnet/io/synth.hpp"

#include "evnet/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace evnet::io {

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::linear: return "linear";
    case SynthKind::circular: return "circular";
    case SynthKind::random_walk: return "random_walk";
    case SynthKind::box_turn: return "box_turn";
  }
  return "linear";
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "linear") return SynthKind::linear;
  if (name == "circular") return SynthKind::circular;
  if (name == "random_walk") return SynthKind::random_walk;
  if (name == "box_turn") return SynthKind::box_turn;
  throw std::invalid_argument("unknown synthetic kind '" + std::string(name) + "'");
}

namespace {

/// Corner pair around each center row; 3-D boxes get a fixed height.
Trajectory boxes_around(const Trajectory& centers, const Trajectory& half_extent, int dims) {
  Trajectory out(centers.rows(), dims);
  const int half = dims / 2;
  for (Eigen::Index t = 0; t < centers.rows(); ++t) {
    for (int k = 0; k < half; ++k) {
      const double c = k < 2 ? centers(t, k) : 0.0;
      out(t, k) = c + half_extent(t, k);
      out(t, half + k) = c - half_extent(t, k);
    }
  }
  return out;
}

}  // namespace

std::vector<Trajectory> synth_generate(SynthKind kind, int count, TaskKind task, std::uint64_t seed,
                                       const SynthOptions& opts) {
  if (count < 1) throw std::invalid_argument("synth_generate: count must be positive");
  if (opts.steps < 2) throw std::invalid_argument("synth_generate: need at least 2 steps");
  const int dims = task_dims(task == TaskKind::co2bb ? TaskKind::bb : task);
  const bool box = dims > 2;
  if (kind == SynthKind::box_turn && !box) throw std::invalid_argument("box_turn needs a box task (M = 4 or 6)");

  auto rng = substream(seed, std::string("synth/") + std::string(to_string(kind)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const int n = opts.steps;
  const int half = dims / 2;

  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Trajectory path(n, 2);
    Trajectory extent(n, std::max(half, 1));
    const double x0 = -5.0 + 10.0 * unit(rng);
    const double y0 = -5.0 + 10.0 * unit(rng);
    const double speed = opts.min_speed + (opts.max_speed - opts.min_speed) * unit(rng);
    const double heading = two_pi * unit(rng);
    for (int k = 0; k < extent.cols(); ++k) extent.col(k).setConstant(0.3 + 0.5 * unit(rng));

    switch (kind) {
      case SynthKind::linear:
        for (int t = 0; t < n; ++t) {
          path(t, 0) = x0 + speed * t * std::cos(heading);
          path(t, 1) = y0 + speed * t * std::sin(heading);
        }
        break;
      case SynthKind::circular: {
        const double radius = 2.0 + 4.0 * unit(rng);
        const double turn = unit(rng) < 0.5 ? 1.0 : -1.0;
        const double omega = turn * speed / radius;
        const double cx = x0 - radius * std::cos(heading), cy = y0 - radius * std::sin(heading);
        for (int t = 0; t < n; ++t) {
          path(t, 0) = cx + radius * std::cos(heading + omega * t);
          path(t, 1) = cy + radius * std::sin(heading + omega * t);
        }
        break;
      }
      case SynthKind::random_walk:
        path.row(0) << x0, y0;
        for (int t = 1; t < n; ++t) {
          path(t, 0) = path(t - 1, 0) + opts.sigma * normal(rng);
          path(t, 1) = path(t - 1, 1) + opts.sigma * normal(rng);
        }
        break;
      case SynthKind::box_turn: {
        // Half turn over the track; the half-diagonal turns with the box.
        const double omega = std::numbers::pi / double(n - 1);
        const double radius = speed / omega;
        const double length = 0.6 + 0.6 * unit(rng), width = 0.3 + 0.3 * unit(rng);
        const double cx = x0 - radius * std::cos(heading), cy = y0 - radius * std::sin(heading);
        for (int t = 0; t < n; ++t) {
          const double theta = heading + omega * t;
          path(t, 0) = cx + radius * std::cos(theta);
          path(t, 1) = cy + radius * std::sin(theta);
          // Box axes follow the tangent direction.
          const double tx = -std::sin(theta), ty = std::cos(theta);
          extent(t, 0) = length * tx - width * ty;
          extent(t, 1) = length * ty + width * tx;
        }
        break;
      }
    }
    out.push_back(box ? boxes_around(path, extent, dims) : path);
  }
  return out;
}

}  // namespace evnet::io
