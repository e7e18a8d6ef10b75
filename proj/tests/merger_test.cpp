#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "clinassert/jsonl.hpp"
#include "clinassert/pipeline.hpp"
#include "properties.hpp"

namespace clinassert {
namespace {

Annotation ann(std::string doc, std::size_t b, std::size_t e, Assertion label, double conf, std::string src = "s") {
  return make_annotation(Chunk{std::move(doc), "x", b, e, {}, {}}, AssertionLabel(label), conf, std::move(src));
}

MergerConfig config(std::vector<std::string> inputs, bool voting) {
  MergerConfig c;
  c.name = "m";
  c.inputs = std::move(inputs);
  c.majority_voting = voting;
  return c;
}

TEST(Merge, StrictMajority) {
  const StreamMap s = {{"a", {ann("d", 0, 4, Assertion::present, 0.5)}},
                       {"b", {ann("d", 0, 4, Assertion::present, 0.6)}},
                       {"c", {ann("d", 0, 4, Assertion::absent, 0.99)}}};
  const auto out = merge(s, config({"a", "b", "c"}, true));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label.canonical(), Assertion::present);
  EXPECT_DOUBLE_EQ(out[0].confidence, 0.6);
  EXPECT_EQ(out[0].source, "merger:m");
}

TEST(Merge, TieBrokenByConfidence) {
  const StreamMap s = {{"a", {ann("d", 0, 4, Assertion::present, 0.8)}},
                       {"b", {ann("d", 0, 4, Assertion::absent, 0.9)}}};
  const auto out = merge(s, config({"a", "b"}, true));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label.canonical(), Assertion::absent);
}

TEST(Merge, TieBrokenByStreamOrder) {
  const StreamMap s = {{"a", {ann("d", 0, 4, Assertion::present, 0.8)}},
                       {"b", {ann("d", 0, 4, Assertion::absent, 0.8)}}};
  EXPECT_EQ(merge(s, config({"a", "b"}, true))[0].label.canonical(), Assertion::present);
  EXPECT_EQ(merge(s, config({"b", "a"}, true))[0].label.canonical(), Assertion::absent);
}

TEST(Merge, WhitelistBeforeMerge) {
  const StreamMap s = {{"a", {ann("d", 0, 4, Assertion::present, 0.9), ann("d", 10, 14, Assertion::absent, 0.5)}}};
  auto c = config({"a"}, false);
  c.whitelist = std::set<AssertionLabel>{AssertionLabel(Assertion::absent), AssertionLabel(Assertion::hypothetical)};
  c.apply_filter_before_merge = true;
  const auto out = merge(s, c);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label.canonical(), Assertion::absent);
}

TEST(Merge, FilterTimingMatters) {
  // Overlapping present(0.9) and absent(0.5): filtering first keeps absent,
  // filtering after drops the group because present wins it.
  const StreamMap s = {{"a", {ann("d", 0, 4, Assertion::present, 0.9)}}, {"b", {ann("d", 2, 6, Assertion::absent, 0.5)}}};
  auto c = config({"a", "b"}, false);
  c.whitelist = std::set<AssertionLabel>{AssertionLabel(Assertion::absent)};
  c.apply_filter_before_merge = true;
  ASSERT_EQ(merge(s, c).size(), 1u);
  c.apply_filter_before_merge = false;
  EXPECT_TRUE(merge(s, c).empty());
}

TEST(Merge, ConfidenceOrderingWithoutVoting) {
  const StreamMap s = {{"a", {ann("d", 0, 4, Assertion::possible, 0.7)}}, {"b", {ann("d", 0, 4, Assertion::present, 0.95)}}};
  const auto out = merge(s, config({"a", "b"}, false));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label.canonical(), Assertion::present);
}

TEST(Merge, OverlapIsTransitiveAndSpanComesFromWinner) {
  const StreamMap s = {{"a", {ann("d", 0, 5, Assertion::present, 0.5), ann("d", 4, 9, Assertion::present, 0.6)}},
                       {"b", {ann("d", 8, 12, Assertion::absent, 0.7)}}};
  const auto out = merge(s, config({"a", "b"}, false));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].chunk.begin, 8u);
  EXPECT_EQ(out[0].chunk.end, 12u);
  // touching spans do not overlap
  const StreamMap t = {{"a", {ann("d", 0, 4, Assertion::present, 0.5), ann("d", 4, 8, Assertion::absent, 0.5)}}};
  EXPECT_EQ(merge(t, config({"a"}, false)).size(), 2u);
}

TEST(Merge, ExactSpanGrouping) {
  const StreamMap s = {{"a", {ann("d", 0, 5, Assertion::present, 0.5), ann("d", 2, 5, Assertion::absent, 0.6)}}};
  auto c = config({"a"}, false);
  c.merge_overlapping = false;
  EXPECT_EQ(merge(s, c).size(), 2u);
  c.merge_overlapping = true;
  EXPECT_EQ(merge(s, c).size(), 1u);
}

TEST(Merge, ConfigErrors) {
  EXPECT_THROW(merge({}, config({}, false)), ConfigError);
  EXPECT_THROW(merge({}, config({"missing"}, false)), ConfigError);
  auto c = config({"a"}, false);
  c.whitelist = std::set<AssertionLabel>{};
  EXPECT_THROW(merge({{"a", {}}}, c), ConfigError);
  c = config({"a"}, false);
  c.ordering_features = {"length"};
  EXPECT_THROW(merge({{"a", {}}}, c), ConfigError);
}

StreamMap load_a8_streams() {
  StreamMap s;
  for (const auto& [name, file] : std::vector<std::pair<std::string, std::string>>{
           {"assertion_fewshot", "fewshot"}, {"assertionDL", "dl"}, {"ca_possible", "ca_possible"},
           {"ca_conditional", "ca_conditional"}})
    s[name] = read_annotations(testing::path_in_fixtures("a8/" + file + ".jsonl"), name);
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Pipeline, BundledGraphReproducesHandTrace) {
  const auto pipeline = load_pipeline(testing::path_in_data("pipelines/combined.json"));
  const auto out = run_pipeline(load_a8_streams(), pipeline);
  std::ostringstream ss;
  write_annotations(ss, out);
  EXPECT_EQ(ss.str(), slurp(testing::path_in_fixtures("a8/expected.jsonl")));
}

TEST(Pipeline, SingleStagePassThrough) {
  PipelineConfig p;
  p.stages.push_back(config({"a"}, false));
  p.stages.back().merge_overlapping = false;
  const std::vector<Annotation> a = {ann("d", 0, 4, Assertion::present, 0.5), ann("d", 6, 9, Assertion::absent, 0.7)};
  const auto out = run_pipeline({{"a", a}}, p);
  ASSERT_EQ(out.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(out[i].chunk, a[i].chunk);
    EXPECT_EQ(out[i].label, a[i].label);
  }
}

TEST(Pipeline, StructuralErrors) {
  const StreamMap s = {{"a", {}}};
  auto stage = [](std::string name, std::vector<std::string> in) {
    MergerConfig c;
    c.name = std::move(name);
    c.inputs = std::move(in);
    return c;
  };
  PipelineConfig cycle{{stage("x", {"y"}), stage("y", {"x"}), stage("z", {"x"})}, "z"};
  EXPECT_THROW(run_pipeline(s, cycle), ConfigError);
  PipelineConfig dangling{{stage("x", {"nope"})}, ""};
  EXPECT_THROW(run_pipeline(s, dangling), ConfigError);
  PipelineConfig duplicate{{stage("x", {"a"}), stage("x", {"a"})}, "x"};
  EXPECT_THROW(run_pipeline(s, duplicate), ConfigError);
  PipelineConfig collides{{stage("a", {"a"})}, ""};
  EXPECT_THROW(run_pipeline(s, collides), ConfigError);
  PipelineConfig two_sinks{{stage("x", {"a"}), stage("y", {"a"})}, ""};
  EXPECT_THROW(run_pipeline(s, two_sinks), ConfigError);
  EXPECT_THROW(parse_pipeline(nlohmann::json::parse(R"({"stages": [{"name": "x"}]})")), ConfigError);
  EXPECT_THROW(parse_pipeline(nlohmann::json::parse(R"({"stages": [{"name": "x", "inputs": ["a"], "whitelist": ["maybe"]}]})")),
               ConfigError);
}

TEST(MergeProperties, AgreesWithReferenceAndStrictMajorityWins) {
  const auto r = testing::merge_majority_property(10000, 7);
  EXPECT_TRUE(r) << *r.counterexample;
}

TEST(MergeProperties, WhitelistSoundness) {
  const auto r = testing::merge_whitelist_property(10000, 9);
  EXPECT_TRUE(r) << *r.counterexample;
}

TEST(MergeProperties, SingleStreamIdempotence) {
  const auto r = testing::merge_idempotence_property(10000, 10);
  EXPECT_TRUE(r) << *r.counterexample;
}

TEST(MergeProperties, StreamNamesDoNotAffectOrder) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 2000; ++iter) {
    const auto streams = testing::random_stream_triple(rng);
    // renaming reverses map iteration order but keeps declared order
    StreamMap renamed;
    MergerConfig c = testing::triple_config(true);
    MergerConfig r = c;
    r.inputs = {"z9", "z8", "z7"};
    for (std::size_t k = 0; k < 3; ++k) renamed[r.inputs[k]] = streams.at(c.inputs[k]);
    ASSERT_EQ(merge(streams, c), merge(renamed, r));
  }
}

}  // namespace
}  // namespace clinassert
