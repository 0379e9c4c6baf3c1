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
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sbf/corpus.hpp"
#include "test_util.hpp"

namespace sbf {
namespace {

const char* kHeader =
    "post_id\tworker_id\tpost\tsource\toffensive\tintent\tlewd\tgroup\ttarget_group\t"
    "target_statement\tingroup\n";

Corpus ingest_string(const std::string& text, InputFormat fmt = InputFormat::kTsv,
                     ColumnMap map = ColumnMap::identity()) {
  std::istringstream in(text);
  return ingest(in, IngestOptions{fmt, std::move(map), false});
}

// Corpus where post i has the given binarized offensive labels.
Corpus offensive_corpus(const std::vector<std::vector<int>>& labels) {
  Corpus c;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const std::string id = "p" + std::to_string(p);
    c.posts[id] = Post{id, "text " + id, Source::kOther};
    for (std::size_t w = 0; w < labels[p].size(); ++w) {
      FrameAnnotation a;
      a.post_id = id;
      a.worker_id = "w" + std::to_string(w);
      a.offensive = labels[p][w] ? Label::kYes : Label::kNo;
      c.annotations.push_back(a);
    }
  }
  return c;
}

// Krippendorff's alpha through the full coincidence matrix for nominal
// data, independent of the closed binary form used by the library.
double alpha_by_coincidence(const std::vector<std::vector<int>>& units) {
  std::map<std::pair<int, int>, double> o;
  std::map<int, double> nc;
  double n = 0;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) o[{u[i], u[j]}] += 1.0 / (u.size() - 1.0);
      }
    }
  }
  for (const auto& [ck, w] : o) {
    nc[ck.first] += w;
    n += w;
  }
  double d_o = 0, d_e = 0;
  for (const auto& [ck, w] : o) d_o += ck.first != ck.second ? w : 0;
  for (const auto& [c, a] : nc) {
    for (const auto& [k, b] : nc) d_e += c != k ? a * b : 0;
  }
  d_o /= n;
  d_e /= n * (n - 1);
  return 1.0 - d_o / d_e;
}

TEST(Ingest, ValidThreeRows) {
  const std::string tsv = std::string(kHeader) +
      "p1\tw1\tWomen are EQUAL!\treddit\tno\tno\tno\t\t\t\t\n"
      "p1\tw2\tWomen are EQUAL!\treddit\tyes\tyes\tno\tyes\twomen\tare inferior\tno\n"
      "p2\tw1\tanother post\tgab\tmaybe\tprobably\tno\tno\t\t\t\n";
  const Corpus c = ingest_string(tsv);
  EXPECT_EQ(c.annotations.size(), 3u);
  EXPECT_TRUE(c.rejects.empty());
  EXPECT_EQ(c.posts.size(), 2u);
  EXPECT_EQ(c.posts.at("p2").source, Source::kHateSite);
  EXPECT_EQ(c.provenance.at(Source::kReddit), 1u);
}

TEST(Ingest, IllegalLabelIsRejectedWithReason) {
  const std::string tsv = std::string(kHeader) +
      "p1\tw1\tpost one\treddit\tno\tno\tno\t\t\t\t\n"
      "p1\tw2\tpost one\treddit\tsure\tno\tno\t\t\t\t\n"
      "p2\tw1\tpost two\treddit\tno\tno\tno\t\t\t\t\n";
  const Corpus c = ingest_string(tsv);
  EXPECT_EQ(c.annotations.size(), 2u);
  ASSERT_EQ(c.rejects.size(), 1u);
  EXPECT_EQ(c.rejects[0].record, 2u);
  EXPECT_NE(c.rejects[0].reason.find("illegal label"), std::string::npos);
}

TEST(Ingest, EmptyFileHasNoRecords) {
  try {
    ingest_string("");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_STREQ(e.what(), "no records");
  }
  EXPECT_THROW(ingest_string(kHeader), IoError);
  EXPECT_THROW(ingest_string("", InputFormat::kJsonl), IoError);
}

TEST(Ingest, UnmappedRequiredColumn) {
  EXPECT_THROW(ingest_string("post_id\tworker_id\npa\tw\n"), InvalidArgument);
}

TEST(Ingest, ReleaseStyleCsvWithColumnMapAndNumericCodes) {
  // One row per tuple; numeric answer codes; quoted text with a comma.
  const std::string csv =
      "HITId,WorkerId,post,dataSource,offensiveYN,intentYN,sexYN,whoTarget,targetMinority,"
      "targetStereotype,speakerMinorityYN\n"
      "h1,w1,\"so, why are [SEP] they\",r/jokes,1.0,0.66,0.0,1.0,women,are weak,0.0\n"
      "h1,w1,\"so, why are [SEP] they\",r/jokes,1.0,0.66,0.0,1.0,women,are loud,0.0\n"
      "h1,w2,\"so, why are [SEP] they\",r/jokes,0.0,0.33,0.0,,,,\n";
  std::istringstream map_in(
      "post_id=HITId\nworker_id=WorkerId\npost=post\nsource=dataSource\n"
      "offensive=offensiveYN\nintent=intentYN\nlewd=sexYN\ngroup=whoTarget\n"
      "target_group=targetMinority\ntarget_statement=targetStereotype\n"
      "ingroup=speakerMinorityYN\n");
  const Corpus c = ingest_string(csv, InputFormat::kCsv, ColumnMap::parse(map_in));
  ASSERT_TRUE(c.rejects.empty()) << c.rejects[0].reason;
  ASSERT_EQ(c.annotations.size(), 2u);
  const auto& a = c.annotations[0];
  EXPECT_EQ(a.intent, Label::kProbably);
  ASSERT_EQ(a.targets.size(), 1u);
  EXPECT_EQ(a.targets[0].statements.size(), 2u);
  EXPECT_EQ(c.annotations[1].intent, Label::kProbablyNot);
  EXPECT_EQ(c.posts.at("h1").text, "so, why are [\\SEP] they");
  EXPECT_EQ(c.posts.at("h1").source, Source::kReddit);
  EXPECT_EQ(stats(c).total_tuples, 3u);
}

TEST(Ingest, JsonlRecordsAndHierarchyRejects) {
  const std::string jsonl =
      R"({"post_id":"p1","worker_id":"w1","post":"x y","offensive":"no","intent":"no","lewd":"no","group":null,"targets":[],"ingroup":null})"
      "\n"
      R"({"post_id":"p1","worker_id":"w2","post":"x y","offensive":"no","intent":"no","lewd":"no","group":null,"targets":[{"group":"men","statements":[]}],"ingroup":null})"
      "\n{not json}\n";
  const Corpus c = ingest_string(jsonl, InputFormat::kJsonl);
  EXPECT_EQ(c.annotations.size(), 1u);
  ASSERT_EQ(c.rejects.size(), 2u);
  EXPECT_NE(c.rejects[0].reason.find("targets require group=yes"), std::string::npos);
}

TEST(Stats, SingleAnnotationNoTargets) {
  const Corpus c = offensive_corpus({{0}});
  const auto s = stats(c);
  EXPECT_EQ(s.total_tuples, 1u);
  EXPECT_EQ(s.unique_groups, 0u);
  EXPECT_EQ(s.unique_posts, 1u);
}

TEST(Stats, TupleConventionAndUniques) {
  Corpus c = offensive_corpus({{1, 1}, {0}});
  c.annotations[0].group = Label::kYes;
  c.annotations[0].targets = {TargetPair("Women", {"are weak", "are loud"}), TargetPair("men", {})};
  c.annotations[0].ingroup = Label::kNo;
  c.annotations[1].group = Label::kYes;
  c.annotations[1].targets = {TargetPair("women ", {"Are  weak"})};
  c.annotations[1].ingroup = Label::kYes;
  const auto s = stats(c);
  EXPECT_EQ(s.total_tuples, 2u + 1u + 1u + 1u);
  EXPECT_EQ(s.unique_groups, 2u);
  EXPECT_EQ(s.unique_implications, 2u);
  EXPECT_EQ(s.unique_post_group, 2u);
  EXPECT_EQ(s.unique_post_group_implication, 2u);
  EXPECT_EQ(s.unique_group_implication, 2u);
  EXPECT_DOUBLE_EQ(s.skew_per_annotation[static_cast<int>(Variable::kOffensive)], 100.0 * 2 / 3);
  EXPECT_DOUBLE_EQ(s.skew_per_annotation[static_cast<int>(Variable::kIngroup)], 100.0 / 3);
  EXPECT_DOUBLE_EQ(s.skew_per_tuple[static_cast<int>(Variable::kIngroup)], 100.0 / 5);
  EXPECT_DOUBLE_EQ(s.skew_per_post_consensus[static_cast<int>(Variable::kOffensive)], 50.0);
}

TEST(Stats, InvariantUnderReordering) {
  std::mt19937_64 rng(3);
  Corpus c;
  for (int i = 0; i < 200; ++i) c.annotations.push_back(testing_util::random_valid_annotation(rng));
  const auto s = stats(c);
  std::shuffle(c.annotations.begin(), c.annotations.end(), rng);
  const auto t = stats(c);
  EXPECT_EQ(s.total_tuples, t.total_tuples);
  EXPECT_EQ(s.unique_post_group_implication, t.unique_post_group_implication);
  EXPECT_EQ(s.skew_per_annotation, t.skew_per_annotation);
  EXPECT_EQ(s.skew_per_post_consensus, t.skew_per_post_consensus);
}

TEST(Agreement, Examples) {
  auto off = [](const AgreementReport& r) { return r[Variable::kOffensive]; };
  EXPECT_NEAR(off(agreement(offensive_corpus({{1, 1, 0}}))).pairwise, 1.0 / 3, 1e-12);

  const auto r2 = off(agreement(offensive_corpus({{1, 1}, {0, 0}})));
  EXPECT_DOUBLE_EQ(r2.pairwise, 1.0);
  ASSERT_TRUE(r2.alpha);
  EXPECT_DOUBLE_EQ(*r2.alpha, 1.0);

  // Oracle: coincidence matrix o_01 = o_10 = 2, n = 4, n_0 = n_1 = 2:
  // D_o = 4/4 = 1, D_e = 2*2*2/(4*3) = 2/3, alpha = 1 - 3/2 = -1/2.
  const auto r3 = off(agreement(offensive_corpus({{1, 0}, {0, 1}})));
  ASSERT_TRUE(r3.alpha);
  EXPECT_NEAR(*r3.alpha, alpha_by_coincidence({{1, 0}, {0, 1}}), 1e-12);
  EXPECT_NEAR(*r3.alpha, -0.5, 1e-12);
}

TEST(Agreement, AlphaUndefinedWithoutVariation) {
  const auto r = agreement(offensive_corpus({{1, 1}, {1, 1, 1}}));
  EXPECT_FALSE(r[Variable::kOffensive].alpha.has_value());
  EXPECT_DOUBLE_EQ(r[Variable::kOffensive].pairwise, 1.0);
}

TEST(Agreement, MatchesBruteForceOnSmallCorpora) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<int>> labels(1 + rng() % 20);
    for (auto& u : labels) {
      u.resize(1 + rng() % 5);
      for (auto& x : u) x = static_cast<int>(rng() % 2);
    }
    const auto r = agreement(offensive_corpus(labels))[Variable::kOffensive];

    double sum = 0, posts = 0, agree = 0, pairs = 0;
    for (const auto& u : labels) {
      if (u.size() < 2) continue;
      double a = 0, p = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < u.size(); ++j) {
          if (i >= j) continue;
          p += 1;
          a += u[i] == u[j];
        }
      }
      sum += a / p;
      posts += 1;
      agree += a;
      pairs += p;
    }
    if (posts == 0) continue;
    EXPECT_NEAR(r.pairwise, sum / posts, 1e-12);
    EXPECT_NEAR(r.pairwise_micro, agree / pairs, 1e-12);
    if (r.alpha) {
      EXPECT_NEAR(*r.alpha, alpha_by_coincidence(labels), 1e-9);
    }
  }
}

TEST(Agreement, PerfectAgreementGivesAlphaOne) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<int>> labels(2 + rng() % 10);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const int v = i < 2 ? static_cast<int>(i) : static_cast<int>(rng() % 2);
      labels[i].assign(2 + rng() % 3, v);
    }
    const auto r = agreement(offensive_corpus(labels))[Variable::kOffensive];
    ASSERT_TRUE(r.alpha);
    EXPECT_DOUBLE_EQ(*r.alpha, 1.0);
  }
}

TEST(Agreement, ExactGroup) {
  Corpus c = offensive_corpus({{1, 1, 1}});
  for (auto& a : c.annotations) a.group = Label::kYes;
  c.annotations[0].targets = {TargetPair("Women", {})};
  c.annotations[1].targets = {TargetPair("women", {})};
  c.annotations[2].targets = {TargetPair("men", {})};
  EXPECT_NEAR(agreement(c).exact_group, 1.0 / 3, 1e-12);
}

TEST(Split, EightPosts) {
  const Corpus c = offensive_corpus(std::vector<std::vector<int>>(8, {0}));
  const auto s = split(c, {}, 7);
  EXPECT_EQ(s.count(Split::kTrain), 6u);
  EXPECT_EQ(s.count(Split::kDev), 1u);
  EXPECT_EQ(s.count(Split::kTest), 1u);
  std::ostringstream a, b;
  s.write(a);
  split(c, {}, 7).write(b);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  const auto back = SplitAssignment::read(in);
  EXPECT_EQ(back.assignment, s.assignment);
  EXPECT_EQ(back.seed, 7u);
}

TEST(Split, PostLevelAndProportions) {
  std::vector<std::vector<int>> labels(1200, {0, 1, 1});
  const Corpus c = offensive_corpus(labels);
  const auto s = split(c, {}, 123);
  EXPECT_EQ(s.assignment.size(), 1200u);
  const double n = 1200;
  EXPECT_NEAR(s.count(Split::kTrain) / n, 0.75, 0.01);
  EXPECT_NEAR(s.count(Split::kDev) / n, 0.125, 0.01);
  EXPECT_NEAR(s.count(Split::kTest) / n, 0.125, 0.01);
  // Every annotation of a post lands in the post's split.
  std::size_t total = 0;
  for (Split which : {Split::kTrain, Split::kDev, Split::kTest}) {
    const Corpus part = select_split(c, s, which);
    total += part.annotations.size();
    for (const auto& a : part.annotations) EXPECT_EQ(s.assignment.at(a.post_id), which);
  }
  EXPECT_EQ(total, c.annotations.size());
  EXPECT_NE(split(c, {}, 124).assignment, s.assignment);
}

TEST(Split, RatiosMustSumToOne) {
  const Corpus c = offensive_corpus({{0}});
  EXPECT_THROW(split(c, {0.5, 0.2, 0.2}, 1), InvalidArgument);
}

}  // namespace
}  // namespace sbf
