#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evnet {

/// N-step, M-dimensional trajectory. Row t holds the values of frame t.
template <typename Scalar>
using TrajectoryT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Trajectory = TrajectoryT<double>;

enum class TaskKind { co, co2bb, bb, bb3d };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

/// Values per frame for each prediction type: co and co2bb models work on
/// points (2), bb on 2D boxes (4), bb3d on 3D boxes (6).
int task_dims(TaskKind kind);

/// Number of corner points per frame (1 for coordinates, 2 for boxes).
int task_points(TaskKind kind);

struct PredictionTask {
  TaskKind kind = TaskKind::co;
  int obs_steps = 8;      // t_h
  int pred_steps = 12;    // t_f
  int frame_interval = 1;

  int dims() const { return task_dims(kind); }
  int total_steps() const { return obs_steps + pred_steps; }

  /// Throws std::invalid_argument when the horizons are out of range.
  void validate() const;
};

/// Absolute step indices (1-based, in (t_h, t_h + t_f]) of the supervised
/// future keypoints.
struct KeypointSchedule {
  std::vector<int> times;

  int count() const { return static_cast<int>(times.size()); }
  void validate(const PredictionTask& task) const;

  /// Row indices into a t_f-row future trajectory.
  std::vector<int> future_rows(const PredictionTask& task) const;
};

enum class AnchorMode { first, last };

struct NormalizationState {
  Eigen::RowVectorXd anchor;
  double scale = 1.0;
};

struct Window {
  Trajectory obs;
  Trajectory future;
};

/// Contiguous (observation, future) slices of one track, ordered by start
/// index. Tracks shorter than t_h + t_f produce no windows.
std::vector<Window> window_split(const Trajectory& track, const PredictionTask& task, int stride);

/// Moves `obs` so that the anchor row sits at the origin and divides by
/// `scale`.
std::pair<Trajectory, NormalizationState> normalize(const Trajectory& obs, double scale,
                                                    AnchorMode anchor = AnchorMode::last);

/// Applies an existing state, e.g. to the ground-truth future of a window.
Trajectory apply_normalization(const Trajectory& traj, const NormalizationState& state);

Trajectory denormalize(const Trajectory& traj, const NormalizationState& state);

/// Splits a 4- or 6-column box trajectory into its two corner streams.
std::vector<Trajectory> split_box_to_points(const Trajectory& traj);
Trajectory merge_points_to_box(const Trajectory& corner_a, const Trajectory& corner_b);

/// Throws std::invalid_argument if any value is NaN or infinite.
void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& values, std::string_view what);

}  // namespace evnet
