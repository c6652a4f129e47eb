#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "bigraph/io.hpp"
#include "testutil.hpp"

extern const char* g_cli_binary;

namespace {

struct RunResult {
  int code = -1;
  std::string out;  // stdout and stderr merged
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(g_cli_binary) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult r;
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

nlohmann::json manifest(const std::string& dir) {
  return nlohmann::json::parse(bigraph::io::read_text_file(dir + "/manifest.json"));
}

int count_lines(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

// 12 + 12 users, 24 + 24 tweets: big enough for 2-fold evaluation, small
// enough that train finishes in seconds
const char* kSynthArgs =
    "--users-per-community 12 --tweets-per-community 24 --p-in 0.25 --p-out 0.05 "
    "--text-dim 16 --image-dim 12 --seed 5";
const char* kEncArgs = " --text-dim 16 --image-dim 12";

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("synth").code == 1);  // --out is required
  CHECK(run_cli("synth --bogus 3 --out /tmp/never").code == 1);
  CHECK(run_cli("train --data /tmp/never").code == 1);  // --out is required
  CHECK(run_cli("baseline --data /tmp/never --variant nope").code == 2);  // parses, bad variant
}

TEST_CASE("help exits 0 and names the subcommands") {
  const RunResult r = run_cli("--help");
  CHECK(r.code == 0);
  for (const char* sub : {"synth", "ingest", "sample", "train", "embed", "baseline",
                          "evaluate", "analyze", "gradcheck"})
    CHECK(r.out.find(sub) != std::string::npos);
}

TEST_CASE("gradcheck passes by default and signals numeric failure") {
  const RunResult ok = run_cli("gradcheck --seed 3");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("max relative error") != std::string::npos);

  const RunResult bad = run_cli("gradcheck --seed 3 --threshold 1e-30");
  CHECK(bad.code == 3);
}

TEST_CASE("broken data exits 2") {
  testutil::TempDir tmp;
  CHECK(run_cli("ingest --data " + tmp.file("missing")).code == 2);

  SUBCASE("malformed json") {
    std::ofstream(tmp.file("users.jsonl")) << "{\"id\": \"u0\"\n";
    std::ofstream(tmp.file("tweets.jsonl")) << "";
    std::ofstream(tmp.file("edges.jsonl")) << "";
    const RunResult r = run_cli("ingest --data " + tmp.str());
    CHECK(r.code == 2);
    CHECK(r.out.find("users.jsonl:1") != std::string::npos);
  }

  SUBCASE("duplicate edge") {
    std::ofstream(tmp.file("users.jsonl"))
        << R"({"id":"u0","followers":1,"friends":1,"listed":0,"statuses":2,"favorites":0,"verified":false,"description":"hi"})"
        << '\n';
    std::ofstream(tmp.file("tweets.jsonl"))
        << R"({"id":"t0","author_id":"u0","text":"hello","has_image":false})" << '\n';
    std::ofstream edges(tmp.file("edges.jsonl"));
    edges << R"({"user_id":"u0","tweet_id":"t0","relation":"retweet"})" << '\n'
          << R"({"user_id":"u0","tweet_id":"t0","relation":"retweet"})" << '\n';
    edges.close();
    const RunResult r = run_cli("ingest --data " + tmp.str());
    CHECK(r.code == 2);
    CHECK(r.out.find("duplicate") != std::string::npos);
  }
}

TEST_CASE("pipeline smoke: synth through analyze") {
  testutil::TempDir tmp;
  const std::string data = tmp.file("data");

  const RunResult synth = run_cli("synth --out " + data + " " + kSynthArgs);
  REQUIRE(synth.code == 0);
  CHECK(synth.out.find("users 24 tweets 48") != std::string::npos);
  CHECK(manifest(data)["command"] == "synth");

  const RunResult ingest =
      run_cli("ingest --data " + data + " --out " + tmp.file("ing") + kEncArgs);
  REQUIRE(ingest.code == 0);
  CHECK(ingest.out.find("users 24 tweets 48") != std::string::npos);
  CHECK(ingest.out.find("synthetic-authors 0") != std::string::npos);
  CHECK(count_lines(tmp.file("ing") + "/graph.txt") > 24);

  const RunResult sample =
      run_cli("sample --data " + data + " --out " + tmp.file("smp") + " --seed 3" + kEncArgs);
  REQUIRE(sample.code == 0);
  // one user line and one tweet line per node
  CHECK(count_lines(tmp.file("smp") + "/neighbors.tsv") == 2 * 72);

  const std::string run1 = tmp.file("run1");
  const RunResult train =
      run_cli("train --data " + data + " --out " + run1 +
              " --dim 8 --epochs 1 --seed 3 --pairs-per-epoch 200" + kEncArgs);
  REQUIRE(train.code == 0);
  CHECK(train.out.find("final-loss") != std::string::npos);
  CHECK(first_line(run1 + "/embeddings.tsv") == "72 8");
  CHECK(first_line(run1 + "/train_log.txt").find("epoch 0 loss") != std::string::npos);
  CHECK(manifest(run1)["config"]["dim"] == "8");

  // embeddings recomputed from the checkpoint are byte-identical
  const RunResult embed = run_cli("embed --checkpoint " + run1 + "/checkpoint.bin --data " +
                                  data + " --out " + tmp.file("emb"));
  REQUIRE(embed.code == 0);
  CHECK(bigraph::io::file_digest(tmp.file("emb") + "/embeddings.tsv") ==
        bigraph::io::file_digest(run1 + "/embeddings.tsv"));

  const RunResult eval =
      run_cli("evaluate --embeddings " + run1 + "/embeddings.tsv --data " + data +
              " --k 2 --seed 1 --out " + tmp.file("ev") + kEncArgs);
  REQUIRE(eval.code == 0);
  CHECK(eval.out.find("auroc") != std::string::npos);
  {
    const auto j = nlohmann::json::parse(
        bigraph::io::read_text_file(tmp.file("ev") + "/metrics.json"));
    const double auroc = j["auroc"]["mean"].get<double>();
    CHECK(auroc >= 0.0);
    CHECK(auroc <= 1.0);
    CHECK(manifest(tmp.file("ev"))["inputs"].contains("embeddings.tsv"));
  }

  const RunResult base = run_cli("baseline --variant userinfo --data " + data +
                                 " --k 2 --seed 1 --out " + tmp.file("bl") + kEncArgs);
  REQUIRE(base.code == 0);
  CHECK(base.out.find("auroc") != std::string::npos);

  const RunResult an =
      run_cli("analyze --embeddings " + run1 + "/embeddings.tsv --data " + data + " --out " +
              tmp.file("an") + " --k-min 2 --k-max 3 --seed 1" + kEncArgs);
  REQUIRE(an.code == 0);
  {
    const auto j = nlohmann::json::parse(
        bigraph::io::read_text_file(tmp.file("an") + "/clusters.json"));
    const int k = j["chosen_k"].get<int>();
    CHECK(k >= 2);
    CHECK(k <= 3);
    int total = 0;
    for (const auto& s : j["cluster_sizes"]) total += s.get<int>();
    CHECK(total == 24);
  }
  CHECK(count_lines(tmp.file("an") + "/coords.tsv") == 24);
}

TEST_CASE("config file fills in, flags win, unknown keys are rejected") {
  testutil::TempDir tmp;
  const std::string data = tmp.file("data");
  REQUIRE(run_cli("synth --out " + data + " " + kSynthArgs).code == 0);

  std::ofstream(tmp.file("train.cfg")) << "dim=6\nepochs=1\npairs-per-epoch=64\n";
  const std::string out = tmp.file("cfgrun");
  const RunResult r = run_cli("train --data " + data + " --out " + out + " --config " +
                              tmp.file("train.cfg") + " --dim 8 --seed 3" + kEncArgs);
  REQUIRE(r.code == 0);
  const auto m = manifest(out);
  CHECK(m["config"]["dim"] == "8");  // the flag beats the file
  CHECK(m["config"]["epochs"] == "1");
  CHECK(m["config"]["pairs-per-epoch"] == "64");
  CHECK(first_line(out + "/embeddings.tsv") == "72 8");

  std::ofstream(tmp.file("bad.cfg")) << "frobs=3\n";
  CHECK(run_cli("train --data " + data + " --out " + tmp.file("never") + " --config " +
                tmp.file("bad.cfg") + kEncArgs)
            .code == 1);
}
