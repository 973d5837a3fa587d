#pragma once

#include "evnet/trajectory.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace evnet {

/// Raised when a box metric is requested for a coordinate task.
class UnsupportedMetric : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Whether predictions of this task are boxes (two corner points per frame).
/// co2bb predictions are merged boxes.
bool is_box_task(TaskKind kind);

struct Displacement {
  double ade = 0.0;
  double fde = 0.0;
};

/// ADE = 1/(m t_f) sum_t sum_i |p_t^i - p̂_t^i|, FDE the same at the last
/// step, with m = 1 for coordinates and m = 2 corners for boxes.
Displacement displacement_errors(const Trajectory& pred, const Trajectory& truth, TaskKind kind);

/// Box centers (mean of the corners) per frame, as a t_f x (M/2) trajectory.
Trajectory box_centers(const Trajectory& boxes);

/// ADE/FDE of the box centers.
Displacement center_errors(const Trajectory& pred, const Trajectory& truth, TaskKind kind);

/// Axis-aligned IoU of two boxes given as corner pairs (a0.., a1..). Each
/// axis is normalized to [min, max] of the two corners first. Zero-volume
/// unions give 0.
double box_iou(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b);

struct IouPair {
  double aiou = 0.0;
  double fiou = 0.0;
  int degenerate_frames = 0;  // ground-truth boxes with zero volume
};

IouPair iou_metrics(const Trajectory& pred, const Trajectory& truth, TaskKind kind);

enum class IouSelection { ade_tied, independent_max };

std::string_view to_string(IouSelection sel);
IouSelection parse_iou_selection(std::string_view name);

struct MetricReport {
  double ade = 0.0;
  double fde = 0.0;
  std::optional<double> cade, cfde, aiou, fiou;
  int k_selected = 0;
};

/// Metrics of the sample with the lowest ADE (ties: lowest index). With
/// `independent_max`, AIoU and FIoU are instead maximized over all samples.
MetricReport best_of_k(const std::vector<Trajectory>& samples, const Trajectory& truth, TaskKind kind,
                       IouSelection selection = IouSelection::ade_tied);

}  // namespace evnet
