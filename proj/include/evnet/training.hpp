#pragma once

#include "evnet/model.hpp"
#include "evnet/nn/adam.hpp"
#include "evnet/nn/tape.hpp"
#include "evnet/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace evnet {

/// Raised when a loss or gradient stops being finite.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lr = 3e-4;
  int batch_size = 32;
  int epochs = 100;
  int k_train = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossReport {
  double akl = 0.0;
  double apl = 0.0;
  double total = 0.0;
  int argmin_k = 0;
};

/// min over k of the mean row distance between the k-th spatial keypoints
/// and the target. Ties go to the lowest k.
std::pair<double, int> akl_loss(const std::vector<Trajectory>& spatial_keypoints, const Trajectory& target);

/// Mean Euclidean row distance.
double apl_loss(const Trajectory& pred, const Trajectory& truth);

/// Keypoint targets: future rows at the scheduled times.
Trajectory keypoint_targets(const Trajectory& future, const ModelConfig& cfg);

/// One batch of normalized windows with fixed noise draws.
struct Batch {
  std::vector<Window> windows;
  std::vector<std::vector<Eigen::RowVectorXd>> noise;  // [agent][k]
};

Batch make_batch(std::vector<Window> windows, const ModelConfig& cfg, int k_train, std::mt19937_64& noise_rng);

struct StepOptions {
  bool use_akl = true;
  bool use_apl = true;
  /// When set, these keypoint spectra are fed to stage 2 instead of the
  /// arg-min samples (used to evaluate the loss with the stage boundary
  /// frozen).
  const std::vector<Spectrum>* stage2_inputs = nullptr;
  /// Defaults to the zero context of the model's width.
  std::optional<ContextFeature> context;
};

struct StepResult {
  LossReport report;  // batch means; argmin_k of the first agent
  std::vector<int> argmins;
  std::vector<Spectrum> stage2_inputs;
  double objective = 0.0;  // value that was differentiated
  nn::Gradients grads;
};

/// Keypoint loss over K samples (gradients reach stage 1 only), the
/// arg-min keypoint spectrum passed with a stopped gradient into stage 2,
/// and the point-wise loss of the reconstructed future (stage 2 only).
StepResult combined_step(const Batch& batch, const ModelParams& params, const ModelConfig& cfg,
                         const StepOptions& opts = {});

struct EpochLog {
  int epoch = 0;
  double akl = 0.0;
  double apl = 0.0;
  double total = 0.0;
};

struct FitResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

/// Adam training over normalized windows. Deterministic for a fixed seed.
/// `on_epoch` (optional) sees each epoch's log row and the current params.
FitResult fit(const std::vector<Window>& dataset, const ModelConfig& cfg, ModelParams params,
              const TrainConfig& train,
              const std::function<void(const EpochLog&, const ModelParams&)>& on_epoch = {});

/// Mean best-of-K ADE (normalized units) of the model over the windows.
double mean_best_of_k_ade(const std::vector<Window>& windows, const ModelParams& params, const ModelConfig& cfg,
                          int samples, std::uint64_t seed);

}  // namespace evnet
