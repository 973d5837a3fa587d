#include "evnet/baselines.hpp"
#include "evnet/io/annotations.hpp"
#include "evnet/io/checkpoint.hpp"
#include "evnet/io/splits.hpp"
#include "evnet/io/synth.hpp"
#include "evnet/metrics.hpp"

#include "toy.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace evnet;
using namespace evnet::io;

namespace {

std::vector<Track> parse(const std::string& text, int dims, int interval = 1) {
  std::istringstream in(text);
  return group_tracks(parse_annotations(in, dims), interval);
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("evnet_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Annotations, TwoAgents) {
  std::ostringstream s;
  for (int f = 0; f < 20; ++f)
    for (int a : {1, 2}) s << f << ' ' << a << ' ' << f * 0.5 << ' ' << -a << '\n';
  const auto tracks = parse(s.str(), 2);
  ASSERT_EQ(tracks.size(), 2u);
  for (const auto& t : tracks) {
    EXPECT_EQ(t.values.rows(), 20);
    EXPECT_EQ(t.values.cols(), 2);
    EXPECT_EQ(t.first_frame, 0);
  }
  EXPECT_EQ(tracks[0].agent_id, 1);
  EXPECT_EQ(tracks[1].values(19, 0), 9.5);
  EXPECT_EQ(tracks[1].values(3, 1), -2.0);
}

TEST(Annotations, GapSplitsTrack) {
  std::ostringstream s;
  for (int f = 1; f <= 10; ++f) s << f << " 7 " << f << " 0\n";
  for (int f = 20; f <= 29; ++f) s << f << " 7 " << f << " 0\n";
  const auto tracks = parse(s.str(), 2);
  ASSERT_EQ(tracks.size(), 2u);
  EXPECT_EQ(tracks[0].first_frame, 1);
  EXPECT_EQ(tracks[0].values.rows(), 10);
  EXPECT_EQ(tracks[1].first_frame, 20);
  EXPECT_EQ(tracks[1].values.rows(), 10);
}

TEST(Annotations, FrameInterval) {
  std::ostringstream s;
  for (int f = 0; f <= 60; ++f) s << f << ",3," << f << ",1\n";
  const auto tracks = parse(s.str(), 2, 6);
  ASSERT_EQ(tracks.size(), 1u);
  ASSERT_EQ(tracks[0].values.rows(), 11);
  for (int i = 0; i < 11; ++i) EXPECT_EQ(tracks[0].values(i, 0), 6.0 * i);
}

TEST(Annotations, Delimiters) {
  const std::string space = "# header\n1 1 0.5 2\n\n2 1 1.5 3\n";
  const std::string comma = "1,1,0.5,2\n2,1,1.5,3\n";
  const std::string tab = "1\t1\t0.5\t2\n2\t1\t1.5\t3\n";
  const auto a = parse(space, 2), b = parse(comma, 2), c = parse(tab, 2);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].values, b[0].values);
  EXPECT_EQ(a[0].values, c[0].values);
  EXPECT_EQ(a[0].values(1, 1), 3.0);
}

TEST(Annotations, Errors) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_annotations(in, 2);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("1 1 0 0\n# c\n2 1 x 0\n"), 3);
  EXPECT_EQ(line_of("1 1 0 0\n1.5 1 0 0\n"), 2);
  EXPECT_EQ(line_of("1 1 0 0\n1 1 2 2\n"), 2);  // duplicate (frame, agent)
  EXPECT_EQ(line_of("1 1 nan 0\n"), 1);
  std::istringstream wrong("1 1 0 0 0 0\n");
  EXPECT_THROW(parse_annotations(wrong, 2), std::invalid_argument);
  EXPECT_THROW(load_annotations("/nonexistent/file.txt", 2), std::exception);
}

TEST(Annotations, OrderInsensitiveAndIdempotent) {
  std::vector<std::string> lines;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int a = 0; a < 3; ++a)
    for (int f = 0; f < 12; ++f) {
      std::ostringstream l;
      l.precision(17);
      l << f << ' ' << a << ' ' << n(rng) << ' ' << n(rng);
      lines.push_back(l.str());
    }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l + "\n";
    return s;
  };
  const auto ref = parse(join(lines), 2);
  std::shuffle(lines.begin(), lines.end(), rng);
  const auto shuffled = parse(join(lines), 2);
  ASSERT_EQ(ref.size(), shuffled.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(ref[i].values, shuffled[i].values);

  const auto dir = temp_dir("idem");
  save_annotations(dir / "a.txt", ref);
  const auto again = load_annotations(dir / "a.txt", 2);
  ASSERT_EQ(again.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_EQ(again[i].values, ref[i].values);
    EXPECT_EQ(again[i].agent_id, ref[i].agent_id);
  }
}

namespace {

std::vector<Clip> named_clips(const std::vector<std::string>& names) {
  std::vector<Clip> clips;
  int i = 0;
  for (const auto& n : names) {
    Clip c{n, {}};
    Trajectory t(25, 2);
    t.col(0).setConstant(i++);  // tag each clip's windows
    t.col(1).setLinSpaced(0, 1);
    c.tracks.push_back(t);
    clips.push_back(c);
  }
  return clips;
}

std::set<double> tags(const std::vector<Window>& ws) {
  std::set<double> s;
  for (const auto& w : ws) s.insert(w.obs(0, 0));
  return s;
}

}  // namespace

TEST(Splits, LeaveOneOut) {
  const auto clips = named_clips({"eth", "hotel", "univ", "zara1", "zara2"});
  DatasetSpec spec;
  spec.mode = SplitMode::leave_one_out;
  spec.leave_out = "zara1";
  const SplitSet s = make_splits(clips, spec);
  EXPECT_EQ(s.test_clips, std::vector<std::string>{"zara1"});
  EXPECT_EQ(s.train_clips.size(), 4u);
  EXPECT_EQ(tags(s.test), std::set<double>{3.0});
  EXPECT_EQ(s.test.size(), 6u);
  EXPECT_EQ(s.train.size(), 24u);
  EXPECT_TRUE(s.val.empty());
  spec.leave_out = "nowhere";
  EXPECT_THROW(make_splits(clips, spec), std::invalid_argument);
}

TEST(Splits, RatioIsDeterministicAndDisjoint) {
  std::vector<std::string> names;
  for (int i = 0; i < 10; ++i) names.push_back("clip" + std::to_string(i));
  const auto clips = named_clips(names);
  DatasetSpec spec;
  spec.mode = SplitMode::ratio;
  spec.seed = 42;
  const SplitSet a = make_splits(clips, spec);
  EXPECT_EQ(a.train_clips.size(), 6u);
  EXPECT_EQ(a.val_clips.size(), 2u);
  EXPECT_EQ(a.test_clips.size(), 2u);
  const SplitSet b = make_splits(clips, spec);
  EXPECT_EQ(a.train_clips, b.train_clips);
  EXPECT_EQ(a.test_clips, b.test_clips);

  std::set<std::string> all;
  for (const auto* v : {&a.train_clips, &a.val_clips, &a.test_clips}) all.insert(v->begin(), v->end());
  EXPECT_EQ(all.size(), 10u);
  const auto tr = tags(a.train), va = tags(a.val), te = tags(a.test);
  for (double t : va) EXPECT_FALSE(tr.count(t));
  for (double t : te) EXPECT_FALSE(tr.count(t) || va.count(t));
  EXPECT_EQ(tr.size() + va.size() + te.size(), 10u);

  spec.seed = 43;
  bool differs = false;
  for (std::uint64_t seed = 43; seed < 53 && !differs; ++seed) {
    spec.seed = seed;
    differs = make_splits(clips, spec).test_clips != a.test_clips;
  }
  EXPECT_TRUE(differs);
}

TEST(Synth, LinearTracksAreAffine) {
  const PredictionTask task;
  for (auto t : synth_generate(SynthKind::linear, 20, TaskKind::co, 3)) {
    ASSERT_EQ(t.rows(), 20);
    const Trajectory obs = t.topRows(8), fut = t.bottomRows(12);
    EXPECT_LT(displacement_errors(lls_fit_predict(obs, 12), fut, TaskKind::co).ade, 1e-9);
  }
  for (auto t : synth_generate(SynthKind::linear, 5, TaskKind::bb, 3)) {
    EXPECT_EQ(t.cols(), 4);
    EXPECT_LT(displacement_errors(lls_fit_predict(t.topRows(8), 12), t.bottomRows(12), TaskKind::bb).ade, 1e-9);
  }
}

TEST(Synth, RandomWalkIncrementVariance) {
  SynthOptions opts;
  opts.steps = 10001;
  const auto t = synth_generate(SynthKind::random_walk, 1, TaskKind::co, 9, opts).front();
  for (int m = 0; m < 2; ++m) {
    const Eigen::VectorXd inc = t.col(m).tail(10000) - t.col(m).head(10000);
    const double mean = inc.mean();
    const double var = (inc.array() - mean).square().sum() / (inc.size() - 1);
    EXPECT_NEAR(var, 1.0, 0.1);
  }
}

TEST(Synth, BoxTurnInvertsCorners) {
  for (TaskKind kind : {TaskKind::bb, TaskKind::bb3d}) {
    for (const auto& t : synth_generate(SynthKind::box_turn, 4, kind, 5)) {
      const int half = int(t.cols()) / 2;
      const bool start = t(0, 0) < t(0, half);
      const bool end = t(t.rows() - 1, 0) < t(t.rows() - 1, half);
      EXPECT_NE(start, end);
    }
  }
  EXPECT_THROW(synth_generate(SynthKind::box_turn, 1, TaskKind::co, 1), std::invalid_argument);
}

TEST(Synth, PureFunctionOfInputs) {
  for (SynthKind k : {SynthKind::linear, SynthKind::circular, SynthKind::random_walk}) {
    const auto a = synth_generate(k, 3, TaskKind::co, 11), b = synth_generate(k, 3, TaskKind::co, 11);
    const auto c = synth_generate(k, 3, TaskKind::co, 12);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(a[i], b[i]);
      EXPECT_NE(a[i], c[i]);
    }
  }
  EXPECT_EQ(synth_generate(SynthKind::circular, 2, TaskKind::co2bb, 1).front().cols(), 4);
  EXPECT_EQ(synth_generate(SynthKind::circular, 2, TaskKind::bb3d, 1).front().cols(), 6);
  EXPECT_THROW(synth_generate(SynthKind::linear, 0, TaskKind::co, 1), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const ModelConfig cfg = toy_config(TransformKind::haar, TaskKind::bb);
  const ModelParams p = init_model(cfg, 3);
  const auto dir = temp_dir("ckpt");
  save_checkpoint(dir / "m.evn", p, cfg, {{"scale", 2.5}});
  const Checkpoint c = load_checkpoint(dir / "m.evn", cfg);
  EXPECT_EQ(c.params.size(), p.size());
  for (const auto& [name, t] : p.tensors()) {
    const auto& u = c.params.get(name);
    ASSERT_EQ(u.rows(), t.rows());
    ASSERT_EQ(u.cols(), t.cols());
    EXPECT_EQ(std::memcmp(u.data(), t.data(), sizeof(double) * t.size()), 0) << name;
  }
  EXPECT_EQ(model_config_to_json(c.config), model_config_to_json(cfg));
  EXPECT_EQ(c.extra["scale"], 2.5);
  EXPECT_EQ(encode_checkpoint(p, cfg, {{"scale", 2.5}}), encode_checkpoint(c.params, c.config, c.extra));
}

TEST(Checkpoint, LayoutHeader) {
  const ModelConfig cfg = toy_config();
  const std::string bytes = encode_checkpoint(init_model(cfg, 1), cfg);
  EXPECT_EQ(bytes.substr(0, 4), "EVN1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
}

TEST(Checkpoint, CorruptInputRejected) {
  const ModelConfig cfg = toy_config();
  std::string bytes = encode_checkpoint(init_model(cfg, 1), cfg);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
  for (std::size_t cut : {std::size_t(2), std::size_t(10), bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, cut)), CheckpointError) << cut;
  EXPECT_THROW(decode_checkpoint(bytes + "x"), CheckpointError);
}

TEST(Checkpoint, ShapeMismatchNamesTensor) {
  ModelConfig small = toy_config();
  ModelConfig big = small;
  big.width = 16;
  const auto dir = temp_dir("mismatch");
  save_checkpoint(dir / "m.evn", init_model(small, 1), small);
  try {
    load_checkpoint(dir / "m.evn", big);
    FAIL() << "expected a shape mismatch";
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("shape mismatch for tensor '"), std::string::npos) << msg;
  }
}
