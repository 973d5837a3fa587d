#include "evnet/metrics.hpp"

#include <algorithm>
#include <string>

namespace evnet {

namespace {

void require_same_shape(const Trajectory& a, const Trajectory& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0)
    throw std::invalid_argument("prediction and ground truth differ in shape");
}

void require_box(const Trajectory& t, TaskKind kind) {
  if (!is_box_task(kind)) throw UnsupportedMetric("box metrics are undefined for coordinate predictions");
  if (t.cols() != 4 && t.cols() != 6) throw std::invalid_argument("box trajectories need 4 or 6 columns");
}

}  // namespace

bool is_box_task(TaskKind kind) { return kind == TaskKind::bb || kind == TaskKind::bb3d || kind == TaskKind::co2bb; }

Displacement displacement_errors(const Trajectory& pred, const Trajectory& truth, TaskKind kind) {
  require_same_shape(pred, truth);
  const int m = is_box_task(kind) ? 2 : 1;
  if (pred.cols() % m != 0) throw std::invalid_argument("column count not divisible into points");
  const Eigen::Index point_dims = pred.cols() / m;
  const Eigen::Index tf = pred.rows();
  const Trajectory diff = pred - truth;
  Displacement out;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd dist = diff.middleCols(i * point_dims, point_dims).rowwise().norm();
    out.ade += dist.sum();
    out.fde += dist(tf - 1);
  }
  out.ade /= double(m * tf);
  out.fde /= double(m);
  return out;
}

Trajectory box_centers(const Trajectory& boxes) {
  const Eigen::Index half = boxes.cols() / 2;
  return (boxes.leftCols(half) + boxes.rightCols(half)) / 2.0;
}

Displacement center_errors(const Trajectory& pred, const Trajectory& truth, TaskKind kind) {
  require_box(pred, kind);
  require_same_shape(pred, truth);
  return displacement_errors(box_centers(pred), box_centers(truth), TaskKind::co);
}

double box_iou(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  const Eigen::Index dims = a.size() / 2;
  double inter = 1.0, vol_a = 1.0, vol_b = 1.0;
  for (Eigen::Index k = 0; k < dims; ++k) {
    const double a_lo = std::min(a(k), a(dims + k)), a_hi = std::max(a(k), a(dims + k));
    const double b_lo = std::min(b(k), b(dims + k)), b_hi = std::max(b(k), b(dims + k));
    vol_a *= a_hi - a_lo;
    vol_b *= b_hi - b_lo;
    inter *= std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
  }
  const double uni = vol_a + vol_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return inter / uni;
}

IouPair iou_metrics(const Trajectory& pred, const Trajectory& truth, TaskKind kind) {
  require_box(pred, kind);
  require_same_shape(pred, truth);
  const Eigen::Index half = truth.cols() / 2;
  IouPair out;
  for (Eigen::Index t = 0; t < pred.rows(); ++t) {
    const double iou = box_iou(pred.row(t), truth.row(t));
    const double gt_volume =
        (truth.row(t).head(half) - truth.row(t).tail(half)).cwiseAbs().prod();
    if (!(gt_volume > 0.0)) ++out.degenerate_frames;
    out.aiou += iou;
    if (t == pred.rows() - 1) out.fiou = iou;
  }
  out.aiou /= double(pred.rows());
  return out;
}

std::string_view to_string(IouSelection sel) {
  return sel == IouSelection::independent_max ? "independent_max" : "ade_tied";
}

IouSelection parse_iou_selection(std::string_view name) {
  if (name == "ade_tied") return IouSelection::ade_tied;
  if (name == "independent_max") return IouSelection::independent_max;
  throw std::invalid_argument("unknown IoU selection '" + std::string(name) + "'");
}

MetricReport best_of_k(const std::vector<Trajectory>& samples, const Trajectory& truth, TaskKind kind,
                       IouSelection selection) {
  if (samples.empty()) throw std::invalid_argument("best_of_k: empty prediction set");
  int best = 0;
  Displacement best_d = displacement_errors(samples[0], truth, kind);
  for (int k = 1; k < static_cast<int>(samples.size()); ++k) {
    const Displacement d = displacement_errors(samples[k], truth, kind);
    if (d.ade < best_d.ade) {
      best = k;
      best_d = d;
    }
  }
  MetricReport report;
  report.k_selected = best;
  report.ade = best_d.ade;
  report.fde = best_d.fde;
  if (!is_box_task(kind)) return report;

  const Displacement c = center_errors(samples[best], truth, kind);
  report.cade = c.ade;
  report.cfde = c.fde;
  if (selection == IouSelection::ade_tied) {
    const IouPair iou = iou_metrics(samples[best], truth, kind);
    report.aiou = iou.aiou;
    report.fiou = iou.fiou;
  } else {
    double aiou = 0.0, fiou = 0.0;
    for (const Trajectory& s : samples) {
      const IouPair iou = iou_metrics(s, truth, kind);
      aiou = std::max(aiou, iou.aiou);
      fiou = std::max(fiou, iou.fiou);
    }
    report.aiou = aiou;
    report.fiou = fiou;
  }
  return report;
}

}  // namespace evnet
