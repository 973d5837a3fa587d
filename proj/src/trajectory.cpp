#include "evnet/trajectory.hpp"

#include <stdexcept>

namespace evnet {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::co: return "co";
    case TaskKind::co2bb: return "co2bb";
    case TaskKind::bb: return "bb";
    case TaskKind::bb3d: return "3Dbb";
  }
  return "co";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "co") return TaskKind::co;
  if (name == "co2bb") return TaskKind::co2bb;
  if (name == "bb") return TaskKind::bb;
  if (name == "3Dbb" || name == "3dbb") return TaskKind::bb3d;
  throw std::invalid_argument("unknown prediction type '" + std::string(name) + "'");
}

int task_dims(TaskKind kind) {
  switch (kind) {
    case TaskKind::co:
    case TaskKind::co2bb: return 2;
    case TaskKind::bb: return 4;
    case TaskKind::bb3d: return 6;
  }
  return 2;
}

int task_points(TaskKind kind) { return (kind == TaskKind::bb || kind == TaskKind::bb3d) ? 2 : 1; }

void PredictionTask::validate() const {
  if (obs_steps < 2) throw std::invalid_argument("t_h must be at least 2");
  if (pred_steps < 1) throw std::invalid_argument("t_f must be at least 1");
  if (frame_interval < 1) throw std::invalid_argument("frame_interval must be positive");
}

void KeypointSchedule::validate(const PredictionTask& task) const {
  if (times.empty() || count() > task.pred_steps)
    throw std::invalid_argument("keypoint count must be in [1, t_f]");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] <= task.obs_steps || times[i] > task.total_steps())
      throw std::invalid_argument("keypoint time outside (t_h, t_h + t_f]");
    if (i > 0 && times[i] <= times[i - 1])
      throw std::invalid_argument("keypoint times must be strictly increasing");
  }
  if (times.back() != task.total_steps())
    throw std::invalid_argument("last keypoint must be the final predicted step");
}

std::vector<int> KeypointSchedule::future_rows(const PredictionTask& task) const {
  std::vector<int> rows;
  rows.reserve(times.size());
  for (int t : times) rows.push_back(t - task.obs_steps - 1);
  return rows;
}

std::vector<Window> window_split(const Trajectory& track, const PredictionTask& task, int stride) {
  if (stride <= 0) throw std::invalid_argument("window stride must be positive");
  const int th = task.obs_steps;
  const int tf = task.pred_steps;
  std::vector<Window> out;
  const Eigen::Index n = track.rows();
  if (n < th + tf) return out;
  for (Eigen::Index start = 0; start + th + tf <= n; start += stride) {
    out.push_back({track.middleRows(start, th), track.middleRows(start + th, tf)});
  }
  return out;
}

std::pair<Trajectory, NormalizationState> normalize(const Trajectory& obs, double scale,
                                                    AnchorMode anchor) {
  if (obs.rows() == 0 || obs.cols() == 0) throw std::invalid_argument("cannot normalize an empty trajectory");
  if (!(scale > 0.0)) throw std::invalid_argument("normalization scale must be positive");
  NormalizationState state;
  state.anchor = anchor == AnchorMode::last ? obs.row(obs.rows() - 1) : obs.row(0);
  state.scale = scale;
  return {apply_normalization(obs, state), state};
}

Trajectory apply_normalization(const Trajectory& traj, const NormalizationState& state) {
  if (traj.cols() != state.anchor.size())
    throw std::invalid_argument("trajectory dims do not match normalization anchor");
  return (traj.rowwise() - state.anchor) / state.scale;
}

Trajectory denormalize(const Trajectory& traj, const NormalizationState& state) {
  if (traj.cols() != state.anchor.size())
    throw std::invalid_argument("trajectory dims do not match normalization anchor");
  return (traj * state.scale).rowwise() + state.anchor;
}

std::vector<Trajectory> split_box_to_points(const Trajectory& traj) {
  const Eigen::Index m = traj.cols();
  if (m != 4 && m != 6) throw std::invalid_argument("box trajectories must have 4 or 6 columns");
  const Eigen::Index half = m / 2;
  return {traj.leftCols(half), traj.rightCols(half)};
}

Trajectory merge_points_to_box(const Trajectory& corner_a, const Trajectory& corner_b) {
  if (corner_a.rows() != corner_b.rows() || corner_a.cols() != corner_b.cols())
    throw std::invalid_argument("corner streams differ in shape");
  if (corner_a.cols() != 2 && corner_a.cols() != 3)
    throw std::invalid_argument("corner streams must have 2 or 3 columns");
  Trajectory out(corner_a.rows(), corner_a.cols() * 2);
  out << corner_a, corner_b;
  return out;
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& values, std::string_view what) {
  if (!values.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

}  // namespace evnet
