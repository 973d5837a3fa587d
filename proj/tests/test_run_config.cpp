#include "evnet/dataset.hpp"
#include "evnet/run_config.hpp"

#include <gtest/gtest.h>

using namespace evnet;

TEST(RunConfig, DefaultsAreValidForSyntheticData) {
  const RunConfig cfg = parse_run_config_text("");
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.data.source, "synth");
  EXPECT_EQ(cfg.model.keypoints.times, default_keypoints(cfg.model.transform, 8, 12).times);
  const auto splits = load_splits(cfg, cfg.train.seed);
  EXPECT_FALSE(splits.train.empty());
}

TEST(RunConfig, UnknownKeyRejected) {
  EXPECT_THROW(parse_run_config_text("model.widht = 16\n"), ConfigError);
  EXPECT_THROW(parse_run_config_text("decoder.order = conventional\n"), ConfigError);
}

TEST(RunConfig, AliasKeys) {
  const RunConfig cfg = parse_run_config_text("decoder.cross_attention_order = conventional\nnormalize.anchor = first\n");
  EXPECT_EQ(cfg.model.cross_order, nn::CrossAttentionOrder::conventional);
  EXPECT_EQ(cfg.data.anchor, AnchorMode::first);
  const std::string text = to_text(cfg);
  EXPECT_NE(text.find("model.cross_attention_order = conventional"), std::string::npos);
  EXPECT_EQ(text.find("normalize.anchor"), std::string::npos);
}

TEST(RunConfig, ErrorsCarryLineNumbers) {
  try {
    parse_run_config_text("# comment\ntask.obs_steps = 8\nmodel.width = wide\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_run_config_text("no equals sign\n"), ConfigError);
}

TEST(RunConfig, BadValuesRejected) {
  for (const char* doc : {"transform.kind = fft", "task.kind = polygon", "model.bilinear = maybe",
                          "model.width = 30\nmodel.heads = 4", "metrics.k = 0", "data.scale = -1",
                          "data.source = files", "data.split = leave_one_out", "train.lr = 1e-3x",
                          "model.keypoints = 3,9", "data.anchor = middle"})
    EXPECT_THROW(parse_run_config_text(doc), std::invalid_argument) << doc;
}

TEST(RunConfig, TextRoundTrip) {
  const RunConfig a = parse_run_config_text(
      "task.kind = bb\ntransform.kind = haar\nmodel.keypoints = 12,15,18,20\nmodel.width = 16\nmodel.heads = 2\n"
      "train.lr = 0.00123\ntrain.seed = 77\ndata.synth = linear,box_turn\nmetrics.iou_selection = independent_max\n"
      "model.cross_attention_order = conventional\noutput.dir = /tmp/x\n");
  EXPECT_EQ(a.model.task.kind, TaskKind::bb);
  EXPECT_EQ(a.model.transform, TransformKind::haar);
  EXPECT_FALSE(a.auto_keypoints);
  EXPECT_EQ(a.model.keypoints.times, (std::vector<int>{12, 15, 18, 20}));
  EXPECT_EQ(a.train.lr, 0.00123);
  EXPECT_EQ(a.train.seed, 77u);
  EXPECT_EQ(a.data.synth.size(), 2u);
  EXPECT_EQ(a.metrics.iou_selection, IouSelection::independent_max);
  EXPECT_EQ(a.model.cross_order, nn::CrossAttentionOrder::conventional);
  EXPECT_EQ(a.output_dir, "/tmp/x");
  const RunConfig b = parse_run_config_text(to_text(a));
  EXPECT_EQ(to_text(b), to_text(a));
  EXPECT_EQ(config_entries(b), config_entries(a));
}

TEST(RunConfig, LaterKeysOverrideAndKeypointsFollowTransform) {
  const RunConfig a = parse_run_config_text("transform.kind = haar\n");
  EXPECT_EQ(a.model.keypoints.times, (std::vector<int>{11, 14, 17, 20}));
  const RunConfig b = parse_run_config_text("model.width = 16\nmodel.width = 24\n");
  EXPECT_EQ(b.model.width, 24);
}
