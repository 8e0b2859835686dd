#include <gtest/gtest.h>

#include <sstream>

#include "commands.hpp"
#include "test_support.hpp"
#include "uaweight/corpus.hpp"
#include "uaweight/text_io.hpp"
#include "uaweight/trainer.hpp"

using namespace uaweight;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = (dir_ / "corpus").string();
    const auto r = run({"synth", "--out", corpus_, "--n", "40", "--width", "64", "--height", "64", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::string path(const std::string& name) const { return (dir_.path() / name).string(); }
  std::string in_corpus(const std::string& name) const { return corpus_ + "/" + name; }

  std::vector<std::string> assess_args(const std::string& out) const {
    return {"assess",       "--manifest", in_corpus("manifest.tsv"), "--images", in_corpus("images"),
            "--ocr",        in_corpus("ocr.json"),                   "--embeddings",
            in_corpus("emb_image.jsonl"),                            in_corpus("emb_text.jsonl"),
            in_corpus("emb_aspect.jsonl"),                           "--out",    out};
  }

  testkit::TempDir dir_;
  std::string corpus_;
};

}  // namespace

TEST_F(CliTest, AssessWritesReportsDeterministically) {
  auto r = run(assess_args(path("a")));
  ASSERT_EQ(r.code, 0) << r.err;
  r = run(assess_args(path("b")));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto* f : {"scores.jsonl", "scores.csv", "weights.csv"}) {
    EXPECT_EQ(read_file(path("a") + "/" + f), read_file(path("b") + "/" + f)) << f;
  }
  const auto weights = read_file(path("a") + "/weights.csv");
  EXPECT_EQ(weights.substr(0, 10), "id,weight\n");
  EXPECT_NE(read_file(path("a") + "/run.json").find("created_utc"), std::string::npos);
}

TEST_F(CliTest, ParallelAssessMatches) {
  auto args = assess_args(path("serial"));
  ASSERT_EQ(run(args).code, 0);
  args = assess_args(path("parallel"));
  args.insert(args.end(), {"--jobs", "3"});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(read_file(path("serial") + "/scores.jsonl"), read_file(path("parallel") + "/scores.jsonl"));
}

TEST_F(CliTest, MissingEmbeddingFailsNamingTheSample) {
  const auto text = read_file(in_corpus("emb_text.jsonl"));
  std::string kept;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.find("\"s00007\"") == std::string::npos) kept += line + "\n";
  }
  write_file(in_corpus("emb_text.jsonl"), kept);
  const auto r = run(assess_args(path("out")));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("s00007"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("MissingEmbedding"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingManifestIsAnIoFailure) {
  auto args = assess_args(path("out"));
  args[2] = path("nowhere.tsv");
  EXPECT_EQ(run(args).code, 2);
}

TEST_F(CliTest, MissingImageIsAnIoFailure) {
  std::filesystem::remove(in_corpus("images/img_00002.png"));
  const auto r = run(assess_args(path("out")));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("s00002"), std::string::npos) << r.err;
}

TEST_F(CliTest, AssessHonoursFlags) {
  auto args = assess_args(path("abl"));
  args.insert(args.end(), {"--components", "coarse", "fine", "--mode", "contrastive", "--negatives", "4"});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto jsonl = read_file(path("abl") + "/run.json");
  EXPECT_NE(jsonl.find("\"contrastive\""), std::string::npos);

  args = assess_args(path("bad"));
  args.insert(args.end(), {"--components", "sound"});
  EXPECT_EQ(run(args).code, 1);
}

TEST_F(CliTest, StatsOnReports) {
  ASSERT_EQ(run(assess_args(path("a"))).code, 0);
  auto r = run({"stats", "--report", path("a") + "/scores.jsonl", "--bins", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("samples: 40"), std::string::npos) << r.out;
  const auto csv = run({"stats", "--report", path("a") + "/weights.csv", "--bins", "5"});
  EXPECT_EQ(csv.out, r.out);
}

TEST_F(CliTest, StatsOnEmptyAndConstantReports) {
  write_file(path("empty.csv"), "id,weight\n");
  auto r = run({"stats", "--report", path("empty.csv")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "no samples\n");

  std::string rows = "id,weight\n";
  for (int i = 0; i < 20; ++i) rows += "s" + std::to_string(i) + ",0.5\n";
  write_file(path("half.csv"), rows);
  r = run({"stats", "--report", path("half.csv"), "--bins", "10"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("mean: 0.5\n"), std::string::npos) << r.out;
  std::size_t occupied = 0;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.find('#') != std::string::npos) ++occupied;
  }
  EXPECT_EQ(occupied, 1u);
}

TEST_F(CliTest, TrainWithAndWithoutWeights) {
  ASSERT_EQ(run(assess_args(path("a"))).code, 0);
  auto r = run({"train", "--features", in_corpus("features.jsonl"), "--model", path("u.json"), "--epochs", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("unweighted"), std::string::npos);

  // The unweighted run equals training with explicit unit weights.
  std::string ones = "id,weight\n";
  for (const auto& key : load_features(in_corpus("features.jsonl")).keys) ones += key + ",1\n";
  write_file(path("ones.csv"), ones);
  r = run({"train", "--features", in_corpus("features.jsonl"), "--weights", path("ones.csv"), "--model",
           path("o.json"), "--epochs", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("u.json")), read_file(path("o.json")));

  r = run({"train", "--features", in_corpus("features.jsonl"), "--weights", path("a") + "/weights.csv", "--model",
           path("w.json"), "--holdout", "10", "--compare", "--report", path("rep.json"), "--epochs", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("delta"), std::string::npos);
  EXPECT_NE(read_file(path("rep.json")).find("unweighted"), std::string::npos);
}

TEST_F(CliTest, TrainRejectsIncompleteWeights) {
  write_file(path("partial.csv"), "id,weight\ns00001,0.5\n");
  const auto r = run({"train", "--features", in_corpus("features.jsonl"), "--weights", path("partial.csv"),
                      "--model", path("m.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("s00002"), std::string::npos);
}

TEST(Cli, EvalPerfectPredictions) {
  testkit::TempDir dir;
  LinearModel m{{"negative", "positive"}, Matrix(2, 2), {0.0, 0.0}};
  m.weights(0, 0) = 1.0;
  m.weights(1, 1) = 1.0;
  save_model(dir / "m.json", m);
  write_file(dir / "f.jsonl",
             "{\"key\":\"a\",\"vec\":[3,0],\"label\":\"negative\"}\n"
             "{\"key\":\"b\",\"vec\":[0,2],\"label\":\"positive\"}\n"
             "{\"key\":\"c\",\"vec\":[1,-1],\"label\":\"negative\"}\n");
  const auto r = run({"eval", "--model", (dir / "m.json").string(), "--features", (dir / "f.jsonl").string(), "--out",
                      (dir / "e.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy: 1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("macro_f1: 1\n"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "e.json"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"stats"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  testkit::TempDir dir;
  EXPECT_EQ(run({"synth", "--out", dir.path().string(), "--degrade", "smudge:1"}).code, 1);
  EXPECT_EQ(run({"synth", "--out", dir.path().string(), "--classes", "4"}).code, 1);
}

TEST(Cli, BadConfigIsAValidationFailure) {
  testkit::TempDir dir;
  write_file(dir / "c.json", R"({"train": {"momentum": 0.9}})");
  write_file(dir / "f.jsonl", "{\"key\":\"a\",\"vec\":[1],\"label\":\"negative\"}\n");
  const auto r = run({"train", "--features", (dir / "f.jsonl").string(), "--config", (dir / "c.json").string(),
                      "--model", (dir / "m.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("momentum"), std::string::npos);
}
