// evnet: train, evaluate and run the spectral trajectory predictor.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.

#include "evnet/baselines.hpp"
#include "evnet/dataset.hpp"
#include "evnet/io/annotations.hpp"
#include "evnet/io/atomic_file.hpp"
#include "evnet/io/checkpoint.hpp"
#include "evnet/metrics.hpp"
#include "evnet/model.hpp"
#include "evnet/run_config.hpp"
#include "evnet/training.hpp"
#include "evnet/transforms.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evnet;

namespace {

constexpr int kUsage = 2;
constexpr int kNumeric = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) cfg.train.seed = *g.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  cfg.validate();
  return cfg;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double round6(double v) { return std::stod(num(v)); }

void apply_thread_cap() {
  const char* env = std::getenv("EVNET_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("EVNET_THREADS must be a positive integer");
  Eigen::setNbThreads(static_cast<int>(n));
}

json normalization_json(const RunConfig& cfg) {
  return {{"scale", cfg.data.scale}, {"anchor", cfg.data.anchor == AnchorMode::first ? "first" : "last"}};
}

std::uint64_t window_seed(std::uint64_t seed, std::size_t index) {
  return seed * 0x9E3779B97F4A7C15ULL + index;
}

/// K denormalized samples for one raw observation.
std::vector<Trajectory> predict_samples(const Trajectory& obs, const ModelParams& params, const ModelConfig& model,
                                        double scale, AnchorMode anchor, int k, std::uint64_t seed, bool boxes) {
  auto [nobs, state] = normalize(obs, scale, anchor);
  const auto ctx = ContextFeature::zero(model.context_dim);
  PredictionSet set = boxes ? co2bb_predict(nobs, ctx, params, model, k, seed)
                            : evnet_forward(nobs, ctx, params, model, k, seed);
  std::vector<Trajectory> out;
  for (const auto& s : set.samples) {
    if (!s.allFinite()) throw NumericFailure("prediction is not finite");
    out.push_back(denormalize(s, state));
  }
  return out;
}

int cmd_train(const Globals& g) {
  const RunConfig cfg = load_config(g);
  const auto splits = load_splits(cfg, cfg.train.seed);
  const auto windows = model_windows(splits.train, cfg);
  if (windows.empty()) throw UsageError("training set has no windows");

  const fs::path out = cfg.output_dir;
  std::ostringstream log;
  log << "epoch,akl,apl,total\n";
  ModelParams init = init_model(cfg.model, cfg.train.seed);
  FitResult result = fit(windows, cfg.model, std::move(init), cfg.train, [&](const EpochLog& e, const ModelParams&) {
    log << e.epoch << ',' << num(e.akl) << ',' << num(e.apl) << ',' << num(e.total) << '\n';
  });
  io::write_file_atomic(out / "train_log.csv", log.str());
  io::save_checkpoint(out / "model.evn", result.params, cfg.model, normalization_json(cfg));
  io::write_file_atomic(out / "config.txt", to_text(cfg));
  std::cout << "trained " << windows.size() << " windows for " << cfg.train.epochs << " epochs -> " << out.string()
            << "\n";
  return 0;
}

enum class Predictor { model, lls, zero_vel };

int run_eval(const Globals& g, Predictor predictor, const std::string& checkpoint, int k_override,
             const std::string& split) {
  RunConfig cfg = load_config(g);
  const int k = k_override > 0 ? k_override : cfg.metrics.k;
  const TaskKind kind = cfg.model.task.kind;

  ModelParams params;
  double scale = cfg.data.scale;
  AnchorMode anchor = cfg.data.anchor;
  if (predictor == Predictor::model) {
    if (checkpoint.empty()) throw UsageError("--checkpoint is required for the model predictor");
    io::Checkpoint ck = io::load_checkpoint(checkpoint);
    if (!g.config.empty() && io::model_config_to_json(ck.config) != io::model_config_to_json(cfg.model))
      throw UsageError("checkpoint model config does not match the run config");
    io::require_same_shapes(ck.params, init_model(ck.config, 0));
    cfg.model = ck.config;
    params = std::move(ck.params);
    if (ck.extra.contains("scale")) scale = ck.extra.at("scale").get<double>();
    if (ck.extra.contains("anchor")) anchor = ck.extra.at("anchor") == "first" ? AnchorMode::first : AnchorMode::last;
  }

  const auto splits = load_splits(cfg, cfg.train.seed);
  const std::vector<Window>& windows = split == "train" ? splits.train : split == "val" ? splits.val : splits.test;
  if (windows.empty()) throw UsageError("evaluation split '" + split + "' has no windows");

  const bool boxes = is_box_task(kind);
  std::ostringstream rows;
  rows << "agent,ade,fde" << (boxes ? ",cade,cfde,aiou,fiou" : "") << ",k_selected\n";
  double sum[6] = {0, 0, 0, 0, 0, 0};
  const int t_f = cfg.model.task.pred_steps;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Window& w = windows[i];
    std::vector<Trajectory> samples;
    switch (predictor) {
      case Predictor::model:
        samples = predict_samples(w.obs, params, cfg.model, scale, anchor, k, window_seed(cfg.train.seed, i),
                                  kind == TaskKind::co2bb);
        break;
      case Predictor::lls: samples.push_back(lls_fit_predict(w.obs, t_f)); break;
      case Predictor::zero_vel: samples.push_back(zero_vel_predict(w.obs, t_f)); break;
    }
    const MetricReport r = best_of_k(samples, w.future, kind, cfg.metrics.iou_selection);
    if (!std::isfinite(r.ade) || !std::isfinite(r.fde)) throw NumericFailure("metric is not finite");
    rows << i << ',' << num(r.ade) << ',' << num(r.fde);
    sum[0] += r.ade;
    sum[1] += r.fde;
    if (boxes) {
      rows << ',' << num(*r.cade) << ',' << num(*r.cfde) << ',' << num(*r.aiou) << ',' << num(*r.fiou);
      sum[2] += *r.cade;
      sum[3] += *r.cfde;
      sum[4] += *r.aiou;
      sum[5] += *r.fiou;
    }
    rows << ',' << r.k_selected << '\n';
  }

  const double n = double(windows.size());
  json agg = {{"ade", round6(sum[0] / n)}, {"fde", round6(sum[1] / n)}};
  if (boxes) {
    agg["cade"] = round6(sum[2] / n);
    agg["cfde"] = round6(sum[3] / n);
    agg["aiou"] = round6(sum[4] / n);
    agg["fiou"] = round6(sum[5] / n);
  }
  agg["n_agents"] = windows.size();

  const fs::path out = cfg.output_dir;
  io::write_file_atomic(out / "eval_agents.csv", rows.str());
  io::write_file_atomic(out / "eval.json", agg.dump(2) + "\n");
  std::cout << agg.dump() << "\n";
  return 0;
}

Predictor parse_predictor(const std::string& s) {
  if (s == "model") return Predictor::model;
  if (s == "lls") return Predictor::lls;
  if (s == "zero_vel") return Predictor::zero_vel;
  throw UsageError("unknown predictor '" + s + "'");
}

int cmd_predict(const Globals& g, const std::string& checkpoint, const std::string& input, int k, bool co2bb) {
  if (checkpoint.empty() || input.empty()) throw UsageError("predict needs --checkpoint and --input");
  RunConfig cfg = load_config(g);
  io::Checkpoint ck = io::load_checkpoint(checkpoint);
  io::require_same_shapes(ck.params, init_model(ck.config, 0));
  const ModelConfig& model = ck.config;
  const double scale = ck.extra.value("scale", cfg.data.scale);
  const AnchorMode anchor = ck.extra.value("anchor", std::string("last")) == "first" ? AnchorMode::first : AnchorMode::last;

  // Box files are predicted corner-wise by coordinate models.
  const bool boxes = co2bb || model.task.kind == TaskKind::co2bb;
  if (boxes && model.dims() != 2) throw UsageError("co2bb prediction needs a coordinate (M=2) checkpoint");
  const int dims = boxes ? 4 : model.dims();
  const int samples = k > 0 ? k : cfg.metrics.k;

  std::vector<io::Track> tracks;
  try {
    tracks = io::load_annotations(input, dims, model.task.frame_interval);
  } catch (const io::ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("input does not match the checkpoint task: ") + e.what());
  }

  const int t_h = model.task.obs_steps;
  std::ostringstream rows;
  rows << "agent_id,k,t";
  for (int c = 1; c <= dims; ++c) rows << ",v" << c;
  rows << '\n';
  int agents = 0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const io::Track& track = tracks[i];
    if (track.values.rows() < t_h) continue;
    const Trajectory obs = track.values.bottomRows(t_h);
    const auto preds = predict_samples(obs, ck.params, model, scale, anchor, samples, window_seed(cfg.train.seed, i), boxes);
    for (int s = 0; s < samples; ++s)
      for (Eigen::Index t = 0; t < preds[s].rows(); ++t) {
        rows << track.agent_id << ',' << s << ',' << t;
        for (Eigen::Index c = 0; c < preds[s].cols(); ++c) rows << ',' << num(preds[s](t, c));
        rows << '\n';
      }
    ++agents;
  }
  io::write_file_atomic(fs::path(cfg.output_dir) / "predictions.csv", rows.str());
  std::cout << "predicted " << agents << " agents x " << samples << " samples\n";
  return 0;
}

int cmd_energy(const Globals& g) {
  const RunConfig cfg = load_config(g);
  const auto clips = load_clips(cfg, cfg.train.seed);
  const int t_h = cfg.model.task.obs_steps;
  Eigen::VectorXd time = Eigen::VectorXd::Zero(t_h), freq = Eigen::VectorXd::Zero(t_h);
  int count = 0;
  for (const auto& clip : clips)
    for (const auto& track : clip.tracks)
      for (const Window& w : window_split(track, cfg.model.task, cfg.data.stride)) {
        const EnergyProfile p = energy_profile(w.obs);
        time += p.time_fractions;
        freq += p.freq_fractions;
        ++count;
      }
  if (count == 0) throw UsageError("dataset has no observation windows");
  time /= count;
  freq /= count;
  std::ostringstream rows;
  rows << "index,time_fraction,freq_fraction\n";
  for (int n = 0; n < t_h; ++n) rows << n << ',' << num(time(n)) << ',' << num(freq(n)) << '\n';
  io::write_file_atomic(fs::path(cfg.output_dir) / "energy.csv", rows.str());
  std::cout << "energy profile over " << count << " windows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral trajectory prediction"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "run configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides train.seed)");
  app.add_option("--out", g.out, "output directory (overrides output.dir)");

  auto* train = app.add_subcommand("train", "train a model; writes model.evn and train_log.csv");

  std::string checkpoint, predictor = "model", split = "test", input;
  int k = 0;
  auto* eval = app.add_subcommand("eval", "best-of-K evaluation; writes eval_agents.csv and eval.json");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint");
  eval->add_option("--predictor", predictor, "model, lls or zero_vel");
  eval->add_option("--k", k, "samples per agent (default metrics.k)");
  eval->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  bool co2bb = false;
  auto* predict = app.add_subcommand("predict", "K samples per agent; writes predictions.csv");
  predict->add_option("--checkpoint", checkpoint, "model checkpoint");
  predict->add_option("--input", input, "annotation file");
  predict->add_option("--k", k, "samples per agent (default metrics.k)");
  predict->add_flag("--co2bb", co2bb, "predict 4-column boxes corner-wise with a coordinate model");

  auto* energy = app.add_subcommand("energy", "energy profile of the observations; writes energy.csv");

  std::string baseline = "lls";
  auto* base = app.add_subcommand("baseline", "evaluate a non-learned predictor");
  base->add_option("--predictor", baseline, "lls or zero_vel")->check(CLI::IsMember({"lls", "zero_vel"}));
  base->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    apply_thread_cap();
    if (*train) return cmd_train(g);
    if (*eval) return run_eval(g, parse_predictor(predictor), checkpoint, k, split);
    if (*predict) return cmd_predict(g, checkpoint, input, k, co2bb);
    if (*energy) return cmd_energy(g);
    if (*base) return run_eval(g, parse_predictor(baseline), "", 1, split);
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
