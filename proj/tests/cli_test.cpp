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

#include "sbf/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

namespace sbf {
namespace {

using testing_util::scratch_dir;

const std::string kData = SBF_TEST_DATA;
const std::string kSample = kData + "/sample.csv";
const std::string kMap = kData + "/release.map";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Corpus sample() {
  LoadOptions o;
  o.map_path = kMap;
  return load_corpus(kSample, o);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"stats"}).code, cli::kExitUsage);  // --in is required
  EXPECT_EQ(run({"stats", "--in", kSample, "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({"train", "--help"}).code, cli::kExitOk);

  const auto missing = run({"stats", "--in", "/nonexistent/file.tsv"});
  EXPECT_EQ(missing.code, cli::kExitFailure);
  const auto err = nlohmann::json::parse(missing.err);
  EXPECT_EQ(err["error"]["code"], "io");
  EXPECT_FALSE(err["error"]["message"].get<std::string>().empty());

  EXPECT_EQ(run({"split", "--in", kSample, "--map", kMap, "--ratios", "0.5,0.5"}).code,
            cli::kExitFailure);
}

TEST(Cli, BinaryExitCodes) {
  const std::string cli = SBF_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status(""), 2);
  EXPECT_EQ(status("stats --in /nonexistent.tsv"), 1);
  EXPECT_EQ(status("validate --in " + kSample + " --map " + kMap), 0);
}

TEST(Cli, ValidateFlagsHierarchyViolations) {
  const auto dir = scratch_dir("cli_validate");
  const auto path = dir / "bad.jsonl";
  std::ofstream(path)
      << R"({"post_id":"p1","worker_id":"w1","post":"x","offensive":"no","intent":"no","lewd":"no"})"
         "\n"
      << R"({"post_id":"p1","worker_id":"w2","post":"x","offensive":"no","intent":"no","lewd":"no","group":"yes"})"
         "\n";
  const auto r = run({"validate", "--in", path.string(), "--json"});
  EXPECT_EQ(r.code, cli::kExitFailure);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t bad = 0, total = 0;
  while (std::getline(lines, line)) {
    ++total;
    bad += nlohmann::json::parse(line)["ok"].get<bool>() ? 0 : 1;
  }
  EXPECT_EQ(total, 2u);
  EXPECT_EQ(bad, 1u);

  // ingest drops the bad row unless lenient.
  EXPECT_EQ(run({"ingest", "--in", path.string()}).out.find("w2"), std::string::npos);
  EXPECT_NE(run({"ingest", "--in", path.string(), "--lenient"}).out.find("w2"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, IngestRoundTripsThroughJsonl) {
  const auto dir = scratch_dir("cli_ingest");
  const auto out = dir / "sample.jsonl";
  ASSERT_EQ(run({"ingest", "--in", kSample, "--map", kMap, "--out", out.string()}).code, 0);
  const Corpus a = sample();
  const Corpus b = load_corpus(out.string());
  EXPECT_EQ(a.annotations, b.annotations);
  EXPECT_EQ(a.posts, b.posts);
  EXPECT_EQ(to_json(stats(a)), to_json(stats(b)));
  std::filesystem::remove_all(dir);
}

TEST(Cli, SplitIsByteIdenticalAcrossRuns) {
  const auto dir = scratch_dir("cli_split");
  const std::vector<std::string> base = {"split", "--in", kSample, "--map", kMap, "--seed", "17"};
  auto with_out = [&](const std::string& name) {
    auto a = base;
    a.push_back("--out");
    a.push_back((dir / name).string());
    return a;
  };
  ASSERT_EQ(run(with_out("a.tsv")).code, 0);
  ASSERT_EQ(run(with_out("b.tsv")).code, 0);
  EXPECT_EQ(slurp(dir / "a.tsv"), slurp(dir / "b.tsv"));

  const std::string via_cli = slurp(dir / "a.tsv");
  std::ostringstream lib;
  split(sample(), {0.75, 0.125, 0.125}, 17).write(lib);
  EXPECT_EQ(via_cli, lib.str());

  auto other = with_out("c.tsv");
  other[6] = "18";
  ASSERT_EQ(run(other).code, 0);
  EXPECT_NE(slurp(dir / "c.tsv"), via_cli);
  std::filesystem::remove_all(dir);
}

TEST(Cli, StatsAndAgreementMatchLibrary) {
  const Corpus c = sample();
  const auto s = run({"stats", "--in", kSample, "--map", kMap, "--json"});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto j = nlohmann::json::parse(s.out);
  auto expected = to_json(stats(c));
  for (const auto& [k, v] : expected.items()) EXPECT_EQ(j[k], v) << k;
  EXPECT_EQ(j["rejects"], 0);

  const auto text = run({"stats", "--in", kSample, "--map", kMap});
  EXPECT_NE(text.out.find("total # tuples"), std::string::npos);
  EXPECT_NE(text.out.find("convention: "), std::string::npos);

  const auto a = run({"agreement", "--in", kSample, "--map", kMap, "--json"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(nlohmann::json::parse(a.out), to_json(agreement(c)));
}

TEST(Cli, TrainDecodeEvalPipelineMatchesLibrary) {
  const auto dir = scratch_dir("cli_pipeline");
  const auto split_file = (dir / "split.tsv").string();
  const auto model_file = (dir / "model.json").string();
  const auto pred_file = (dir / "dev.jsonl").string();
  ASSERT_EQ(run({"split", "--in", kSample, "--map", kMap, "--out", split_file}).code, 0);
  const auto t = run({"train", "--in", kSample, "--map", kMap, "--split", split_file, "--out",
                      model_file, "--json"});
  ASSERT_EQ(t.code, 0) << t.err;
  const auto report = nlohmann::json::parse(t.out);
  EXPECT_LT(report["dev_loss"].get<double>(), report["uniform_loss"].get<double>());

  const auto d = run({"decode", "--model", model_file, "--in", kData + "/posts.jsonl", "--split",
                      split_file, "--split-name", "dev", "--out", pred_file});
  ASSERT_EQ(d.code, 0) << d.err;
  const auto e = run({"eval", "--pred", pred_file, "--gold", kSample, "--map", kMap, "--split",
                      split_file, "--split-name", "dev", "--emb", kData + "/embeddings.txt",
                      "--json"});
  ASSERT_EQ(e.code, 0) << e.err;

  // Same steps through the library.
  const Corpus all = sample();
  std::ifstream sin(split_file);
  const auto assignment = SplitAssignment::read(sin);
  const auto model = train(frames_of(instances(select_split(all, assignment, Split::kTrain))));
  const Corpus dev = select_split(all, assignment, Split::kDev);
  const auto decoded = decode_all(model, posts_of(dev), DecodeConfig{});
  const auto emb = EmbeddingTable::load(kData + "/embeddings.txt");
  const auto lib = evaluate_run(decoded, aggregate_corpus(dev), &emb);
  EXPECT_EQ(nlohmann::json::parse(e.out), to_json(lib));

  const auto text = run({"eval", "--pred", pred_file, "--gold", kSample, "--map", kMap, "--split",
                         split_file});
  EXPECT_NE(text.out.find("% pos. (dev.)"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, SampledDecodeIsSeedDeterministic) {
  const auto dir = scratch_dir("cli_sample");
  const auto model_file = (dir / "model.json").string();
  ASSERT_EQ(run({"train", "--in", kSample, "--map", kMap, "--out", model_file}).code, 0);
  const auto posts = (dir / "posts.txt").string();
  std::ofstream(posts) << "women are too emotional\nlove this song\n";
  auto decode = [&](const std::string& seed) {
    return run({"decode", "--model", model_file, "--in", posts, "--mode", "sample",
                "--candidates", "5", "--seed", seed, "--constrained"})
        .out;
  };
  EXPECT_EQ(decode("3"), decode("3"));
  std::istringstream lines(decode("4"));
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto [id, d] = decoded_from_json(j);
    EXPECT_TRUE(validate(to_annotation(d, id)).ok()) << line;
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sbf
