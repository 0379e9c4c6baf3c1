// Copyright 2026 The SBF Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "sbf/frame.hpp"
#include "sbf/frame_json.hpp"
#include "test_util.hpp"

namespace sbf {
namespace {

FrameAnnotation with_offensive(const std::string& worker, Label off) {
  FrameAnnotation a;
  a.post_id = "p1";
  a.worker_id = worker;
  a.offensive = off;
  return a;
}

bool has_rule(const ValidationResult& r, const std::string& rule) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

TEST(Binarize, FootnoteMapping) {
  EXPECT_EQ(binarize({Variable::kIntent, Label::kProbably}), 1);
  EXPECT_EQ(binarize({Variable::kIntent, Label::kProbablyNot}), 0);
  EXPECT_EQ(binarize({Variable::kOffensive, Label::kMaybe}), 1);
  EXPECT_EQ(binarize({Variable::kOffensive, Label::kYes}), 1);
  EXPECT_EQ(binarize({Variable::kLewd, Label::kNo}), 0);
  EXPECT_EQ(binarize({Variable::kGroup, Label::kYes}), 1);
}

TEST(Binarize, TotalOnLegalLabelsAndRejectsIllegal) {
  for (Variable v : kAllVariables) {
    for (Label l : {Label::kYes, Label::kMaybe, Label::kNo, Label::kProbably, Label::kProbablyNot}) {
      if (is_legal(v, l)) {
        const bool positive = l == Label::kYes || l == Label::kProbably || l == Label::kMaybe;
        EXPECT_EQ(binarize(v, l), positive ? 1 : 0);
      } else {
        EXPECT_THROW(binarize(v, l), ValidationError);
      }
    }
  }
  EXPECT_THROW(CategoricalAnswer::parse(Variable::kIntent, "maybe"), ValidationError);
  EXPECT_THROW(CategoricalAnswer::parse(Variable::kGroup, "maybe"), ValidationError);
  EXPECT_THROW(CategoricalAnswer::parse(Variable::kOffensive, "sure"), ValidationError);
}

TEST(Aggregate, AveragingRule) {
  auto off = [](std::vector<Label> labels) {
    std::vector<FrameAnnotation> v;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      v.push_back(with_offensive("w" + std::to_string(i), labels[i]));
    }
    return aggregate(v).label(Variable::kOffensive);
  };
  EXPECT_EQ(off({Label::kYes, Label::kMaybe, Label::kNo}), 1);
  EXPECT_EQ(off({Label::kNo, Label::kNo, Label::kYes}), 0);
  EXPECT_EQ(off({Label::kYes, Label::kNo}), 1);  // tie at 0.5 is positive
}

TEST(Aggregate, MissingHierarchicalAnswersCountAsZero) {
  FrameAnnotation a = with_offensive("w1", Label::kYes);
  a.group = Label::kYes;
  a.targets = {TargetPair("Women ", {"are less qualified"})};
  a.ingroup = Label::kNo;
  FrameAnnotation b = with_offensive("w2", Label::kNo);
  FrameAnnotation c = with_offensive("w3", Label::kNo);
  const auto agg = aggregate({a, b, c});
  EXPECT_EQ(agg.label(Variable::kGroup), 0);  // 1/3
  EXPECT_EQ(agg.reference_groups, std::set<std::string>{"women"});
  EXPECT_EQ(agg.reference_statements.size(), 1u);
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate({}), InvalidArgument);
  FrameAnnotation a = with_offensive("w1", Label::kYes);
  FrameAnnotation b = with_offensive("w2", Label::kYes);
  b.post_id = "p2";
  EXPECT_THROW(aggregate({a, b}), InvalidArgument);
}

TEST(Aggregate, PermutationInvariantAndSingleton) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FrameAnnotation> anns;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      auto a = testing_util::random_annotation(rng);
      a.post_id = "p";
      a.worker_id = "w" + std::to_string(i);
      anns.push_back(a);
    }
    const auto ref = aggregate(anns);
    std::shuffle(anns.begin(), anns.end(), rng);
    EXPECT_EQ(aggregate(anns), ref);

    const auto single = aggregate({anns.front()});
    for (Variable v : kAllVariables) EXPECT_EQ(single.label(v), anns.front().bit(v));
  }
}

TEST(Validate, Examples) {
  FrameAnnotation a = with_offensive("w1", Label::kNo);
  a.targets = {TargetPair("women", {"are weak"})};
  const auto r = validate(a);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, "targets require group=yes"));

  FrameAnnotation ok = with_offensive("w1", Label::kYes);
  ok.intent = Label::kProbably;
  ok.group = Label::kYes;
  ok.targets = {TargetPair("korean folks", {"have weird names", "are foreign"})};
  ok.ingroup = Label::kNo;
  const auto r2 = validate(ok);
  EXPECT_TRUE(r2.ok());
  EXPECT_TRUE(r2.warnings.empty());

  FrameAnnotation empty_targets = with_offensive("w1", Label::kMaybe);
  empty_targets.group = Label::kYes;
  EXPECT_TRUE(has_rule(validate(empty_targets), "group=yes requires at least one target"));
}

TEST(Validate, OtherRules) {
  FrameAnnotation a = with_offensive("w1", Label::kNo);
  a.group = Label::kNo;
  EXPECT_TRUE(has_rule(validate(a), "group requires offensive in {yes, maybe}"));

  FrameAnnotation b = with_offensive("w1", Label::kYes);
  b.group = Label::kNo;
  b.ingroup = Label::kYes;
  EXPECT_TRUE(has_rule(validate(b), "ingroup requires non-empty targets"));

  FrameAnnotation c = with_offensive("w1", Label::kYes);
  c.group = Label::kYes;
  c.targets = {TargetPair("men", {"a", "b", "c", "d", "e"})};
  EXPECT_TRUE(has_rule(validate(c), "at most 4 statements per group"));

  FrameAnnotation d = with_offensive("w1", Label::kYes);
  d.group = Label::kYes;
  d.targets = {TargetPair("men", {"are loud"})};
  const auto rd = validate(d);
  EXPECT_TRUE(rd.ok());
  ASSERT_EQ(rd.warnings.size(), 1u);  // fewer than two statements is legal

  FrameAnnotation e = with_offensive("w1", Label::kYes);
  e.intent = Label::kMaybe;  // not on the intent scale
  EXPECT_FALSE(validate(e).ok());
}

TEST(TargetPair, GroupNameNormalized) {
  EXPECT_EQ(TargetPair("  Black   Folks ", {}).group_name, "black folks");
}

TEST(FrameJson, RoundTripAndSchema) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto a = testing_util::random_valid_annotation(rng);
    const json j = to_json(a);
    for (const char* key : {"post_id", "worker_id", "offensive", "intent", "lewd", "group",
                            "targets", "ingroup"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(annotation_from_json(json::parse(j.dump())), a);
  }
}

TEST(FrameJson, RejectsIllegalLabels) {
  json j = {{"post_id", "p"}, {"worker_id", "w"}, {"offensive", "probably"},
            {"intent", "no"}, {"lewd", "no"}};
  EXPECT_THROW(annotation_from_json(j), ValidationError);
  j["offensive"] = "no";
  EXPECT_NO_THROW(annotation_from_json(j));
  j.erase("lewd");
  EXPECT_THROW(annotation_from_json(j), ValidationError);
}

}  // namespace
}  // namespace sbf
