// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// nonzero when anything fails. The determinism criterion shells out to the
// CLI binary given as argv[1]; everything else runs in process.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bigraph/analysis.hpp"
#include "bigraph/baselines.hpp"
#include "bigraph/eval.hpp"
#include "bigraph/graph.hpp"
#include "bigraph/io.hpp"
#include "bigraph/model.hpp"
#include "bigraph/pipeline.hpp"
#include "bigraph/rng.hpp"
#include "bigraph/sampling.hpp"
#include "bigraph/synth.hpp"
#include "testutil.hpp"

using namespace bigraph;

namespace {

int g_failed = 0;

void report(int num, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %2d  %-20s %s  %s\n", num, name, ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double elapsed_s(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec random_vec(int d, rng::Engine& gen, double scale = 1.0) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng::next_normal(gen);
  return v;
}

bool run_cmd(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

// 1. gradients against central differences, 20 seeds, under 30 s
void criterion1() {
  const auto t0 = Clock::now();
  EncoderConfig enc;
  enc.text_dim = 12;
  enc.image_dim = 16;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ModelParams params = init_params(8, enc, rng::derive(seed, "params"));
    const CheckScenario scen = make_check_scenario(enc, rng::derive(seed, "scenario"));
    worst = std::max(worst, gradient_check(params, scen, 1e-5));
  }
  const double secs = elapsed_s(t0);
  report(1, "gradient check", worst <= 1e-4 && secs < 30.0,
         "max rel err " + fmt(worst) + " over 20 seeds in " + fmt(secs) + "s");
}

// 2. attention weights form a simplex; isolated nodes keep alpha_self = 1
void criterion2() {
  rng::Engine gen(rng::derive(2, "accept-attn"));
  EncoderConfig enc;
  enc.text_dim = 6;
  enc.image_dim = 4;
  const int d = 8;
  double worst_sum = 0.0;
  bool nonneg = true;
  int isolated = 0, isolated_exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ModelParams params = init_params(d, enc, rng::derive(2, "attn-params", trial));
    const Vec f1 = random_vec(d, gen, 2.0);
    std::optional<Vec> f2u, f2t;
    if (trial & 1) f2u = random_vec(d, gen, 2.0);
    if (trial & 2) f2t = random_vec(d, gen, 2.0);
    AttentionCache cache;
    attention_combine(params, f1, f2u, f2t, &cache);
    double sum = 0.0;
    for (const double a : cache.alpha) {
      sum += a;
      if (a < 0.0) nonneg = false;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    if (!f2u && !f2t) {
      ++isolated;
      if (cache.alpha.size() == 1 && cache.alpha[0] == 1.0) ++isolated_exact;
    }
  }
  report(2, "attention simplex",
         worst_sum <= 1e-6 && nonneg && isolated > 0 && isolated_exact == isolated,
         "max |sum-1| " + fmt(worst_sum) + ", " + std::to_string(isolated_exact) + "/" +
             std::to_string(isolated) + " isolated exact");
}

// 3. zero-embedding loss anchor; raising the positive dot lowers the loss
void criterion3() {
  const double anchor = nce_loss(Vec::Zero(8), Vec::Zero(8), Vec::Zero(8));
  const double expected = 2.0 * std::log(2.0);
  const bool anchor_ok = std::abs(anchor - expected) <= 1e-9;

  rng::Engine gen(rng::derive(3, "accept-loss"));
  int decreased = 0;
  for (int t = 0; t < 100; ++t) {
    const Vec v = random_vec(8, gen);
    const Vec pos = random_vec(8, gen);
    const Vec neg = random_vec(8, gen);
    const double before = nce_loss(v, pos, neg);
    const double after = nce_loss(v, pos + 0.05 * v, neg);  // pos.v strictly larger
    if (after < before) ++decreased;
  }
  report(3, "loss anchors", anchor_ok && decreased == 100,
         "anchor " + fmt(anchor) + ", " + std::to_string(decreased) + "/100 decreased");
}

// 4. negative sampler matches (statuses+1) weights; RWR matches the chain
void criterion4() {
  const auto t0 = Clock::now();

  const std::vector<std::int64_t> statuses = {0, 4, 9, 19, 49};
  Dataset ds;
  for (std::size_t i = 0; i < statuses.size(); ++i) {
    UserRecord u;
    u.external_id = "u" + std::to_string(i);
    u.statuses = statuses[i];
    ds.users.push_back(u);
  }
  TweetRecord t;
  t.external_id = "t0";
  t.author_external_id = "u0";
  t.text = "x";
  ds.tweets.push_back(t);
  const BipartiteGraph g = build_graph(ds);
  const TrainView view(g);
  const NegativeSampler sampler(view);

  rng::Engine gen(rng::derive(4, "accept-neg"));
  std::vector<std::int64_t> counts(statuses.size(), 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[sampler.sample(NodeKind::User, gen)]++;
  double weight_sum = 0.0;
  for (const auto s : statuses) weight_sum += static_cast<double>(s + 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < statuses.size(); ++i) {
    const double target = static_cast<double>(statuses[i] + 1) / weight_sum;
    worst = std::max(worst, std::abs(static_cast<double>(counts[i]) / draws - target));
  }

  // star: one user posting three tweets; global indices 0 (center), 1..3
  Dataset star;
  UserRecord center;
  center.external_id = "u0";
  star.users.push_back(center);
  for (int i = 0; i < 3; ++i) {
    TweetRecord leaf;
    leaf.external_id = "t" + std::to_string(i);
    leaf.author_external_id = "u0";
    leaf.text = "x";
    star.tweets.push_back(leaf);
    star.edges.push_back({"u0", leaf.external_id, Relation::Post});
  }
  const BipartiteGraph sg = build_graph(star);
  const TrainView sview(sg);
  WalkConfig wcfg;  // walk_length 30, restart 0.5

  // exact chain from the center: center -> center w.p. r, each leaf
  // w.p. (1-r)/3; a leaf always returns to the center (restart and the
  // single neighbor coincide)
  std::array<double, 4> state{1.0, 0.0, 0.0, 0.0};
  std::array<double, 4> expect{};
  for (int pos = 0; pos < wcfg.walk_length; ++pos) {
    for (int i = 0; i < 4; ++i) expect[i] += state[i];
    const double leaves = state[1] + state[2] + state[3];
    std::array<double, 4> next{};
    next[0] = wcfg.restart_prob * state[0] + leaves;
    for (int i = 1; i < 4; ++i) next[i] = (1.0 - wcfg.restart_prob) / 3.0 * state[0];
    state = next;
  }
  for (auto& e : expect) e /= wcfg.walk_length;

  rng::Engine wgen(rng::derive(4, "accept-rwr"));
  std::array<std::int64_t, 4> visits{};
  const int n_walks = 5000;
  for (int w = 0; w < n_walks; ++w)
    for (const int node : rwr_walk(sview, 0, wcfg, wgen)) visits[node]++;
  double tv = 0.0;
  const double total = static_cast<double>(n_walks) * wcfg.walk_length;
  for (int i = 0; i < 4; ++i)
    tv += std::abs(static_cast<double>(visits[i]) / total - expect[i]);
  tv *= 0.5;

  const double secs = elapsed_s(t0);
  report(4, "sampler dists", worst <= 0.02 && tv <= 0.02 && secs < 60.0,
         "negative max dev " + fmt(worst) + ", rwr tv " + fmt(tv) + " in " + fmt(secs) + "s");
}

// 5. metrics equal brute-force oracles on small tie-heavy sets
void criterion5() {
  rng::Engine gen(rng::derive(5, "accept-metrics"));
  const double grid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  bool all = true;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng::next_below(gen, 11));
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng::next_below(gen, 2));
      s[i] = grid[rng::next_below(gen, 5)];
    }
    y[0] = 0;
    y[1] = 1;  // both classes present

    double credit = 0.0;
    long np = 0, nn = 0, tp = 0, tn = 0, fp = 0, fn = 0;
    for (int i = 0; i < n; ++i) {
      if (y[i] == 1) {
        ++np;
        (s[i] >= 0.5 ? tp : fn)++;
      } else {
        ++nn;
        (s[i] >= 0.5 ? fp : tn)++;
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        if (s[i] > s[j])
          credit += 1.0;
        else if (s[i] == s[j])
          credit += 0.5;
      }
    const double auroc = credit / (static_cast<double>(np) * static_cast<double>(nn));
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(n);
    const double prec = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;

    const FoldMetrics m = compute_metrics(y, s);
    if (m.auroc != auroc || m.accuracy != acc || m.precision != prec || m.recall != rec ||
        m.f1 != f1)
      all = false;
  }
  report(5, "metric oracles", all, "200 random sets, exact match incl. ties");
}

// 6. headline analogue on synthetic-small: model beats the concatenation
//    baseline by 0.05 AUROC and at least ties the GCN, inside 10 minutes
void criterion6() {
  const auto t0 = Clock::now();
  testutil::TempDir tmp;
  SynthConfig scfg = synth_profile_small();
  scfg.seed = 1;
  synth_generate(scfg, tmp.str());

  const LoadedData data = load_data_dir(tmp.str(), EncoderConfig{});
  TrainConfig tcfg;
  tcfg.seed = 1;
  const TrainOutputs outs = run_training(data, tcfg, "");

  CvConfig cv;
  cv.k = 10;
  cv.seed = 1;
  const MetricReport model_rep = evaluate_embeddings(data.graph, outs.result.embeddings, cv);
  const BaselineInputs inputs = make_baseline_inputs(data.graph, data.norm, data.enc);
  const MetricReport utv_rep =
      evaluate_baseline(BaselineVariant::UserTextualVisual, inputs, cv);
  GcnConfig gcn;
  gcn.seed = rng::derive(cv.seed, "gcn");
  const MetricReport gcn_rep = evaluate_baseline(BaselineVariant::Gcn, inputs, cv, gcn);

  const double secs = elapsed_s(t0);
  const double m = model_rep.auroc.mean;
  const double u = utv_rep.auroc.mean;
  const double g = gcn_rep.auroc.mean;
  report(6, "headline analogue",
         m >= 0.90 && m >= u + 0.05 && m >= g && secs < 600.0,
         "model " + fmt(m) + " utv " + fmt(u) + " gcn " + fmt(g) + " in " + fmt(secs) + "s");
}

// 7. political score closed form, eligibility and inclusive-zero labeling
void criterion7() {
  bool all = true;
  for (std::int64_t r = 0; r <= 20; ++r)
    for (std::int64_t l = 0; l <= 20; ++l) {
      const PoliticalScore p = political_score(r, l);
      if (p.eligible != (r >= 5 || l >= 5)) all = false;
      if (r + l == 0) {
        if (p.score || p.label) all = false;
        continue;
      }
      const double expected = static_cast<double>(r - l) / static_cast<double>(r + l);
      if (!p.score || *p.score != expected) all = false;
      const Leaning want = expected >= 0.0 ? Leaning::Right : Leaning::Left;
      if (!p.label || *p.label != want) all = false;
    }
  report(7, "political score", all, "exhaustive over [0,20]^2");
}

// 8. silhouette-selected k on three tight, well-separated blobs
void criterion8() {
  int correct = 0;
  const double cx[3] = {0.0, 10.0, 5.0};
  const double cy[3] = {0.0, 0.0, 5.0 * std::sqrt(3.0)};  // pairwise distance 10
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    rng::Engine gen(rng::derive(8, "accept-blobs", seed));
    Mat X(60, 2);
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 20; ++i) {
        X(c * 20 + i, 0) = cx[c] + 0.1 * rng::next_normal(gen);
        X(c * 20 + i, 1) = cy[c] + 0.1 * rng::next_normal(gen);
      }
    const ClusterReport rep = cluster_embeddings(X, 2, 6, seed);
    if (rep.chosen_k == 3) ++correct;
  }
  report(8, "cluster selection", correct == 10, std::to_string(correct) + "/10 picked k=3");
}

// 9. two CLI pipeline runs with one root seed agree byte for byte
void criterion9(const std::string& cli) {
  if (cli.empty()) {
    report(9, "determinism", false, "no CLI binary argument");
    return;
  }
  testutil::TempDir tmp;
  bool ran = true;
  const auto one = [&](const std::string& tag) {
    const std::string d = tmp.file("data" + tag);
    const std::string r = tmp.file("run" + tag);
    const std::string e = tmp.file("eval" + tag);
    ran = ran &&
          run_cmd(cli + " synth --out " + d +
                  " --seed 7 --users-per-community 12 --tweets-per-community 24"
                  " --p-in 0.25 --p-out 0.05 --text-dim 16 --image-dim 12");
    ran = ran && run_cmd(cli + " train --data " + d + " --out " + r +
                         " --seed 7 --dim 16 --epochs 2 --pairs-per-epoch 512"
                         " --text-dim 16 --image-dim 12");
    ran = ran && run_cmd(cli + " evaluate --embeddings " + r + "/embeddings.tsv --data " + d +
                         " --k 5 --seed 7 --out " + e + " --text-dim 16 --image-dim 12");
    return std::pair<std::string, std::string>(
        ran ? io::file_digest(r + "/embeddings.tsv") : "",
        ran ? io::read_text_file(e + "/metrics.json") : "");
  };
  const auto a = one("A");
  const auto b = one("B");
  const bool ok = ran && !a.first.empty() && a.first == b.first && a.second == b.second;
  report(9, "determinism", ok,
         ran ? ("embeddings digest " + a.first + (ok ? " twice" : " != " + b.first))
             : "pipeline command failed");
}

// 10. PCA variances equal a dense eigendecomposition
void criterion10() {
  rng::Engine gen(rng::derive(10, "accept-pca"));
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng::next_below(gen, 19));  // [2, 20]
    const int d = 1 + static_cast<int>(rng::next_below(gen, 10));  // [1, 10]
    Mat X(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) X(i, j) = rng::next_normal(gen);
    const int r = std::min(d, n - 1);
    const PcaModel m = pca_fit(X, r);

    const Mat centered = X.rowwise() - X.colwise().mean();
    const Mat cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    for (Eigen::Index i = 0; i < m.explained_variance.size(); ++i)
      worst = std::max(worst,
                       std::abs(m.explained_variance[i] - es.eigenvalues()[d - 1 - i]));
  }
  report(10, "pca oracle", worst <= 1e-8, "max variance dev " + fmt(worst));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const auto guarded = [](int num, const char* name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(num, name, false, std::string("exception: ") + e.what());
    }
  };
  guarded(1, "gradient check", criterion1);
  guarded(2, "attention simplex", criterion2);
  guarded(3, "loss anchors", criterion3);
  guarded(4, "sampler dists", criterion4);
  guarded(5, "metric oracles", criterion5);
  guarded(6, "headline analogue", criterion6);
  guarded(7, "political score", criterion7);
  guarded(8, "cluster selection", criterion8);
  guarded(9, "determinism", [&] { criterion9(cli); });
  guarded(10, "pca oracle", criterion10);

  std::printf("%d/10 criteria passed\n", 10 - g_failed);
  return g_failed == 0 ? 0 : 1;
}
