#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bigraph/baselines.hpp"

using namespace bigraph;

namespace {

EncoderConfig small_enc() {
  EncoderConfig enc;
  enc.text_dim = 10;
  enc.image_dim = 14;
  return enc;
}

/// Two-community interaction graph with labels, usable by every variant.
struct BaselineFixture {
  BipartiteGraph graph;
  EncoderConfig enc = small_enc();
  ScalarNormalizer norm;

  BaselineFixture(int users_per_side = 8, int tweets_per_side = 10) {
    Dataset d;
    rng::Engine gen(rng::derive(777, "bfix"));
    const int nu = 2 * users_per_side;
    for (int i = 0; i < nu; ++i) {
      UserRecord u;
      u.external_id = "u" + std::to_string(i);
      const bool right = i < users_per_side;
      u.statuses = 1 + static_cast<long long>(rng::next_below(gen, 40));
      u.followers = static_cast<long long>(rng::next_below(gen, 300));
      u.friends = static_cast<long long>(rng::next_below(gen, 200));
      u.description_text = right ? "sunrise party patriot" : "moonlight union ally";
      d.users.push_back(u);
    }
    for (int i = 0; i < 2 * tweets_per_side; ++i) {
      TweetRecord t;
      t.external_id = "t" + std::to_string(i);
      const bool right = i < tweets_per_side;
      const int author = (right ? 0 : users_per_side) +
                         static_cast<int>(rng::next_below(gen, users_per_side));
      t.author_external_id = "u" + std::to_string(author);
      t.text = right ? "sunrise rally tonight" : "moonlight march tonight";
      if (rng::next_double(gen) < 0.5) {
        Vec img(enc.image_dim);
        for (int j = 0; j < img.size(); ++j)
          img[j] = rng::next_normal(gen) + (right ? 1.0 : -1.0);
        t.image_vec = img;
        t.has_image = true;
      }
      d.tweets.push_back(t);
      d.edges.push_back({t.author_external_id, t.external_id, Relation::Post});
      for (int u = 0; u < nu; ++u) {
        if (d.users[u].external_id == t.author_external_id) continue;
        const bool same = (u < users_per_side) == right;
        if (rng::next_double(gen) < (same ? 0.45 : 0.04))
          d.edges.push_back({d.users[u].external_id, t.external_id, Relation::Retweet});
      }
    }
    for (int i = 0; i < nu; ++i)
      d.labels.push_back({"u" + std::to_string(i), i < users_per_side ? 0.8 : -0.8});
    graph = build_graph(d);
    norm = fit_normalizer(graph.users);
  }
};

}  // namespace

TEST_CASE("variant names round trip") {
  for (const auto v : {BaselineVariant::UserInfo, BaselineVariant::Textual,
                       BaselineVariant::Visual, BaselineVariant::TextualVisual,
                       BaselineVariant::UserTextualVisual, BaselineVariant::LateFusion,
                       BaselineVariant::Gcn})
    CHECK(baseline_variant_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(baseline_variant_from_string("nonsense"), ParseError);
}

TEST_CASE("concatenation dimensions follow the variant") {
  const EncoderConfig enc = small_enc();
  const int user_dim = kScalarVecLen + enc.text_dim;  // scalars + description
  CHECK(concat_dim(BaselineVariant::UserInfo, enc) == user_dim);
  CHECK(concat_dim(BaselineVariant::Textual, enc) == enc.text_dim);
  CHECK(concat_dim(BaselineVariant::Visual, enc) == enc.image_dim);
  CHECK(concat_dim(BaselineVariant::TextualVisual, enc) == enc.text_dim + enc.image_dim);
  CHECK(concat_dim(BaselineVariant::UserTextualVisual, enc) ==
        user_dim + enc.text_dim + enc.image_dim);
  CHECK_THROWS_AS(concat_dim(BaselineVariant::LateFusion, enc), DataError);
  CHECK_THROWS_AS(concat_dim(BaselineVariant::Gcn, enc), DataError);
}

TEST_CASE("concat_features zero-fills missing modalities") {
  const BaselineFixture fx;
  const UserRecord& user = fx.graph.users[0];

  TweetRecord bare;
  bare.external_id = "x";
  bare.author_external_id = user.external_id;
  bare.text = "plain words";
  bare.has_image = false;

  const Vec tv = concat_features(BaselineVariant::TextualVisual, user, bare, fx.norm, fx.enc);
  REQUIRE(tv.size() == fx.enc.text_dim + fx.enc.image_dim);
  CHECK(tv.head(fx.enc.text_dim).norm() > 0.0);
  CHECK(tv.tail(fx.enc.image_dim).norm() == 0.0);  // image slot zero-filled

  const Vec vis = concat_features(BaselineVariant::Visual, user, bare, fx.norm, fx.enc);
  CHECK(vis.norm() == 0.0);

  // user-only variant ignores the tweet entirely
  const Vec ui = concat_features(BaselineVariant::UserInfo, user, std::nullopt, fx.norm, fx.enc);
  REQUIRE(ui.size() == kScalarVecLen + fx.enc.text_dim);
  CHECK(ui.tail(fx.enc.text_dim).norm() > 0.0);  // description present

  UserRecord quiet = user;
  quiet.description_text.reset();
  quiet.description_vec.reset();
  const Vec ui2 = concat_features(BaselineVariant::UserInfo, quiet, std::nullopt, fx.norm, fx.enc);
  CHECK(ui2.tail(fx.enc.text_dim).norm() == 0.0);

  const Vec utv = concat_features(BaselineVariant::UserTextualVisual, user, bare, fx.norm, fx.enc);
  REQUIRE(utv.size() == concat_dim(BaselineVariant::UserTextualVisual, fx.enc));
  CHECK((utv.head(ui.size()) - ui).norm() == 0.0);  // user block leads
}

TEST_CASE("pca matches a dense eigendecomposition") {
  rng::Engine gen(rng::derive(12, "pca"));
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + static_cast<int>(rng::next_below(gen, 15));
    const int d = 3 + static_cast<int>(rng::next_below(gen, 8));
    Mat X(n, d);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = rng::next_normal(gen);

    const int r = std::min(3, d);
    const PcaModel m = pca_fit(X, r);
    REQUIRE(m.components.rows() == r);
    REQUIRE(m.components.cols() == d);

    // orthonormal rows
    const Mat gram = m.components * m.components.transpose();
    CHECK((gram - Mat::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-10);

    // explained variances equal the top covariance eigenvalues
    const Mat centered = X.rowwise() - X.colwise().mean();
    const Mat cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);
    const Vec ev = es.eigenvalues();  // ascending
    for (int i = 0; i < r; ++i) {
      CHECK(m.explained_variance[i] ==
            doctest::Approx(ev[d - 1 - i]).epsilon(1e-8));
      if (i > 0) CHECK(m.explained_variance[i] <= m.explained_variance[i - 1] + 1e-12);
    }

    // projecting the training data reproduces centered dot products
    const Mat proj = pca_transform(m, X);
    CHECK(proj.rows() == n);
    CHECK(proj.cols() == r);
    const Mat manual = centered * m.components.transpose();
    CHECK((proj - manual).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pca flags rank truncation") {
  // rank-2 data in 5 dimensions
  rng::Engine gen(rng::derive(13, "rank"));
  Mat basis(2, 5);
  for (int i = 0; i < basis.size(); ++i) basis.data()[i] = rng::next_normal(gen);
  Mat coef(20, 2);
  for (int i = 0; i < coef.size(); ++i) coef.data()[i] = rng::next_normal(gen);
  const Mat X = coef * basis;

  const PcaModel m = pca_fit(X, 4);
  CHECK(m.truncated_to_rank);
  CHECK(m.components.rows() == 2);

  const PcaModel full = pca_fit(X, 2);
  CHECK_FALSE(full.truncated_to_rank);

  CHECK_THROWS_AS(pca_fit(X, 0), DataError);
  CHECK_THROWS_AS(pca_fit(Mat(0, 0), 1), DataError);
}

TEST_CASE("normalized adjacency of a single edge is all one half") {
  Dataset d;
  UserRecord u;
  u.external_id = "u0";
  d.users.push_back(u);
  TweetRecord t;
  t.external_id = "t0";
  t.author_external_id = "u0";
  t.text = "x";
  d.tweets.push_back(t);
  d.edges.push_back({"u0", "t0", Relation::Post});
  const BipartiteGraph g = build_graph(d);

  const Mat a = normalized_adjacency(TrainView(g));
  REQUIRE(a.rows() == 2);
  // A + I is all ones, degrees are 2: every entry becomes 1/2
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5).epsilon(1e-12));

  // rows of D^{-1/2}(A+I)D^{-1/2} keep symmetric structure
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalized adjacency collapses parallel relations") {
  Dataset d;
  UserRecord u;
  u.external_id = "u0";
  d.users.push_back(u);
  TweetRecord t;
  t.external_id = "t0";
  t.author_external_id = "u0";
  t.text = "x";
  d.tweets.push_back(t);
  d.edges.push_back({"u0", "t0", Relation::Retweet});
  d.edges.push_back({"u0", "t0", Relation::Quote});
  const BipartiteGraph g = build_graph(d);

  const Mat a = normalized_adjacency(TrainView(g));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("late fusion weights probabilities by model quality") {
  // weights 2 and 1: fused = (2*0.9 + 1*0.3) / 3 = 0.7
  CHECK(late_fusion_proba({0.9, 0.3}, {2.0, 1.0}) == doctest::Approx(0.7).epsilon(1e-12));
  // zero-weight model drops out
  CHECK(late_fusion_proba({0.9, 0.3}, {1.0, 0.0}) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(late_fusion_predict({0.9, 0.3}, {2.0, 1.0}) == 1);
  CHECK(late_fusion_predict({0.2, 0.3}, {1.0, 1.0}) == 0);
  CHECK_THROWS_AS(late_fusion_proba({0.5, 0.5}, {0.0, 0.0}), DataError);
  CHECK_THROWS_AS(late_fusion_proba({0.5}, {1.0, 1.0}), DataError);
}

TEST_CASE("tweet votes decide users, ties go to the majority class") {
  CHECK(vote_user_label({1, 1, 0}, 0) == 1);
  CHECK(vote_user_label({0, 0, 1}, 1) == 0);
  CHECK(vote_user_label({1, 0}, 0) == 0);  // tie
  CHECK(vote_user_label({1, 0}, 1) == 1);  // tie, other majority
  CHECK_THROWS_AS(vote_user_label({}, 0), DataError);
}

TEST_CASE("baseline inputs list labeled users in index order") {
  const BaselineFixture fx;
  const BaselineInputs in = make_baseline_inputs(fx.graph, fx.norm, fx.enc);
  REQUIRE(in.labeled_users.size() == 16);
  for (std::size_t i = 1; i < in.labeled_users.size(); ++i)
    CHECK(in.labeled_users[i - 1] < in.labeled_users[i]);
  for (std::size_t i = 0; i < in.labeled_users.size(); ++i) {
    const bool right = fx.graph.label_map.at(in.labeled_users[i]) == Leaning::Right;
    CHECK(in.y[i] == (right ? 1 : 0));
  }
}

TEST_CASE("gcn embeddings are finite, sized and deterministic") {
  const BaselineFixture fx;
  const TrainView view(fx.graph);

  GcnConfig cfg;
  cfg.pca_dim = 8;
  cfg.hidden_dim = 8;
  cfg.output_dim = 8;
  cfg.steps = 20;
  cfg.batch_pairs = 32;
  cfg.seed = 5;

  WalkConfig wc;
  wc.seed = 6;
  wc.walk_length = 8;
  wc.walks_per_node = 2;
  const auto pairs = positive_pairs(generate_walks(view, wc), wc.window);
  REQUIRE(!pairs.empty());

  const Mat feats = gcn_node_features(fx.graph, fx.norm, fx.enc, cfg.pca_dim);
  CHECK(feats.rows() == view.n_nodes());
  CHECK(feats.cols() == cfg.pca_dim);
  CHECK(feats.allFinite());

  const Mat h1 = gcn_embed(view, feats, cfg, pairs);
  CHECK(h1.rows() == view.n_nodes());
  CHECK(h1.cols() == cfg.output_dim);
  CHECK(h1.allFinite());

  const Mat h2 = gcn_embed(view, feats, cfg, pairs);
  CHECK((h1 - h2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("userinfo baseline separates the synthetic communities") {
  const BaselineFixture fx;
  const BaselineInputs in = make_baseline_inputs(fx.graph, fx.norm, fx.enc);

  CvConfig cv;
  cv.k = 2;
  cv.seed = 3;
  const MetricReport r = evaluate_baseline(BaselineVariant::UserInfo, in, cv);
  CHECK(r.folds.size() == 2);
  CHECK(r.auroc.mean > 0.8);  // descriptions alone separate the two sides

  // determinism across invocations
  const MetricReport r2 = evaluate_baseline(BaselineVariant::UserInfo, in, cv);
  CHECK(r.auroc.mean == r2.auroc.mean);
  CHECK(r.accuracy.mean == r2.accuracy.mean);
}

TEST_CASE("voted textual baseline runs end to end") {
  const BaselineFixture fx;
  const BaselineInputs in = make_baseline_inputs(fx.graph, fx.norm, fx.enc);
  CvConfig cv;
  cv.k = 2;
  cv.seed = 4;
  const MetricReport r = evaluate_baseline(BaselineVariant::Textual, in, cv);
  CHECK(r.folds.size() == 2);
  CHECK(r.auroc.mean > 0.8);
  CHECK(r.accuracy.mean > 0.0);
}

TEST_CASE("late fusion baseline runs end to end") {
  const BaselineFixture fx;
  const BaselineInputs in = make_baseline_inputs(fx.graph, fx.norm, fx.enc);
  CvConfig cv;
  cv.k = 2;
  cv.seed = 5;
  const MetricReport r = evaluate_baseline(BaselineVariant::LateFusion, in, cv);
  CHECK(r.folds.size() == 2);
  CHECK(r.auroc.mean >= 0.0);
  CHECK(r.auroc.mean <= 1.0);
}

TEST_CASE("gcn baseline runs end to end") {
  const BaselineFixture fx(6, 8);
  const BaselineInputs in = make_baseline_inputs(fx.graph, fx.norm, fx.enc);
  CvConfig cv;
  cv.k = 2;
  cv.seed = 6;
  GcnConfig gcn;
  gcn.pca_dim = 8;
  gcn.hidden_dim = 8;
  gcn.output_dim = 8;
  gcn.steps = 15;
  gcn.batch_pairs = 32;
  gcn.seed = 7;
  const MetricReport r = evaluate_baseline(BaselineVariant::Gcn, in, cv, gcn);
  CHECK(r.folds.size() == 2);
  CHECK(r.auroc.mean >= 0.0);
  CHECK(r.auroc.mean <= 1.0);
}
