#include "evnet/training.hpp"

#include "evnet/metrics.hpp"
#include "evnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace evnet {

using nn::Tape;
using nn::Var;

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
  if (batch_size < 1 || epochs < 1) throw std::invalid_argument("batch size and epochs must be positive");
  if (k_train < 1) throw std::invalid_argument("k_train must be at least 1");
}

std::pair<double, int> akl_loss(const std::vector<Trajectory>& spatial_keypoints, const Trajectory& target) {
  if (spatial_keypoints.empty()) throw std::invalid_argument("akl_loss: no samples");
  double best = 0.0;
  int arg = -1;
  for (int k = 0; k < static_cast<int>(spatial_keypoints.size()); ++k) {
    const Trajectory& s = spatial_keypoints[k];
    if (s.rows() != target.rows() || s.cols() != target.cols())
      throw std::invalid_argument("akl_loss: keypoint shape mismatch");
    const double v = (s - target).rowwise().norm().mean();
    if (arg < 0 || v < best) {
      best = v;
      arg = k;
    }
  }
  return {best, arg};
}

double apl_loss(const Trajectory& pred, const Trajectory& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || pred.rows() == 0)
    throw std::invalid_argument("apl_loss: shape mismatch");
  return (pred - truth).rowwise().norm().mean();
}

Trajectory keypoint_targets(const Trajectory& future, const ModelConfig& cfg) {
  const auto rows = cfg.keypoints.future_rows(cfg.task);
  Trajectory out(static_cast<Eigen::Index>(rows.size()), future.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = future.row(rows[i]);
  return out;
}

Batch make_batch(std::vector<Window> windows, const ModelConfig& cfg, int k_train, std::mt19937_64& noise_rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch batch;
  batch.windows = std::move(windows);
  for (std::size_t i = 0; i < batch.windows.size(); ++i) {
    std::vector<Eigen::RowVectorXd> draws;
    for (int k = 0; k < k_train; ++k) {
      Eigen::RowVectorXd z(cfg.noise_dim);
      for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(noise_rng);
      draws.push_back(std::move(z));
    }
    batch.noise.push_back(std::move(draws));
  }
  return batch;
}

StepResult combined_step(const Batch& batch, const ModelParams& params, const ModelConfig& cfg,
                         const StepOptions& opts) {
  if (batch.windows.empty()) throw std::invalid_argument("combined_step: empty batch");
  if (batch.noise.size() != batch.windows.size()) throw std::invalid_argument("combined_step: noise per agent missing");
  if (opts.stage2_inputs && opts.stage2_inputs->size() != batch.windows.size())
    throw std::invalid_argument("combined_step: frozen stage-2 inputs do not match the batch");

  const double n_agents = double(batch.windows.size());
  const ContextFeature ctx = opts.context.value_or(ContextFeature::zero(cfg.context_dim));
  Tape tape;
  std::vector<Var> akl_terms, apl_terms;
  StepResult result;
  double akl_sum = 0.0, apl_sum = 0.0;

  for (std::size_t i = 0; i < batch.windows.size(); ++i) {
    const Window& w = batch.windows[i];
    if (w.obs.rows() != cfg.task.obs_steps || w.future.rows() != cfg.task.pred_steps || w.obs.cols() != cfg.dims())
      throw std::invalid_argument("combined_step: window shape does not match the task");
    Var spectrum = tape.constant(forward_transform(cfg.transform, w.obs));
    Var target = tape.constant(keypoint_targets(w.future, cfg));

    std::vector<Var> kspecs, distances;
    int best = -1;
    double best_value = 0.0;
    for (const auto& z : batch.noise[i]) {
      Var kspec = keypoints_subnet(tape, params, cfg, spectrum, tape.constant(z));
      Var d = nn::mean(nn::row_norms(nn::sub(keypoints_to_spatial(kspec, cfg.transform), target)));
      const double v = d.value()(0, 0);
      if (best < 0 || v < best_value) {
        best = static_cast<int>(kspecs.size());
        best_value = v;
      }
      kspecs.push_back(kspec);
      distances.push_back(d);
    }
    akl_terms.push_back(distances[best]);
    akl_sum += best_value;
    result.argmins.push_back(best);

    const Spectrum stage2_in = opts.stage2_inputs ? (*opts.stage2_inputs)[i] : kspecs[best].value();
    result.stage2_inputs.push_back(stage2_in);
    Var full = interpolation_subnet(tape, params, cfg, tape.constant(stage2_in), ctx);
    Var pred = spectrum_to_future(full, cfg);
    Var apl = nn::mean(nn::row_norms(nn::sub(pred, tape.constant(w.future))));
    apl_terms.push_back(apl);
    apl_sum += apl.value()(0, 0);
  }

  result.report.akl = akl_sum / n_agents;
  result.report.apl = apl_sum / n_agents;
  result.report.total = result.report.akl + result.report.apl;
  result.report.argmin_k = result.argmins.front();
  if (!std::isfinite(result.report.total)) throw NumericFailure("non-finite training loss");

  std::vector<Var> terms;
  if (opts.use_akl) terms.insert(terms.end(), akl_terms.begin(), akl_terms.end());
  if (opts.use_apl) terms.insert(terms.end(), apl_terms.begin(), apl_terms.end());
  if (terms.empty()) return result;
  Var objective = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) objective = nn::add(objective, terms[i]);
  objective = nn::scale(objective, 1.0 / n_agents);
  result.objective = objective.value()(0, 0);
  tape.backward(objective);
  result.grads = tape.param_grads();
  return result;
}

FitResult fit(const std::vector<Window>& dataset, const ModelConfig& cfg, ModelParams params,
              const TrainConfig& train, const std::function<void(const EpochLog&, const ModelParams&)>& on_epoch) {
  if (dataset.empty()) throw std::invalid_argument("fit: empty dataset");
  train.validate();
  cfg.validate();

  auto shuffle_rng = substream(train.seed, "shuffle");
  auto noise_rng = substream(train.seed, "train_noise");
  nn::AdamState adam;
  adam.lr = train.lr;

  FitResult out;
  std::vector<std::size_t> order(dataset.size());
  for (int epoch = 1; epoch <= train.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog row{epoch, 0.0, 0.0, 0.0};
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(train.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(train.batch_size));
      std::vector<Window> windows;
      for (std::size_t j = start; j < stop; ++j) windows.push_back(dataset[order[j]]);
      const Batch batch = make_batch(std::move(windows), cfg, train.k_train, noise_rng);
      StepResult step = combined_step(batch, params, cfg);
      try {
        nn::adam_step(params, step.grads, adam);
      } catch (const std::domain_error& e) {
        throw NumericFailure(e.what());
      }
      row.akl += step.report.akl;
      row.apl += step.report.apl;
      ++steps;
    }
    row.akl /= steps;
    row.apl /= steps;
    row.total = row.akl + row.apl;
    out.log.push_back(row);
    if (on_epoch) on_epoch(row, params);
  }
  out.params = std::move(params);
  return out;
}

double mean_best_of_k_ade(const std::vector<Window>& windows, const ModelParams& params, const ModelConfig& cfg,
                          int samples, std::uint64_t seed) {
  if (windows.empty()) throw std::invalid_argument("mean_best_of_k_ade: no windows");
  double total = 0.0;
  const ContextFeature ctx = ContextFeature::zero(cfg.context_dim);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const PredictionSet set = evnet_forward(windows[i].obs, ctx, params, cfg, samples, seed + i);
    total += best_of_k(set.samples, windows[i].future, cfg.task.kind).ade;
  }
  return total / double(windows.size());
}

}  // namespace evnet
