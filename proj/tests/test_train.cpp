#include <doctest.h>

#include <cmath>
#include <vector>

#include "bigraph/model.hpp"

using namespace bigraph;

namespace {

struct TrainFixture {
  BipartiteGraph graph;
  EncoderConfig enc;
  ScalarNormalizer norm;
  std::vector<AttributeSet> attrs;
  NeighborSets neighbors;

  TrainFixture() {
    enc.text_dim = 6;
    enc.image_dim = 8;

    // two loose communities of 4 users / 6 tweets
    Dataset d;
    rng::Engine gen(rng::derive(404, "fixture"));
    for (int i = 0; i < 8; ++i) {
      UserRecord u;
      u.external_id = "u" + std::to_string(i);
      u.statuses = 1 + static_cast<long long>(rng::next_below(gen, 50));
      u.followers = static_cast<long long>(rng::next_below(gen, 500));
      u.description_text = i < 4 ? "alpha talk daily" : "beta talk daily";
      d.users.push_back(u);
    }
    for (int i = 0; i < 12; ++i) {
      TweetRecord t;
      t.external_id = "t" + std::to_string(i);
      const int author = (i < 6 ? 0 : 4) + static_cast<int>(rng::next_below(gen, 4));
      t.author_external_id = "u" + std::to_string(author);
      t.text = i < 6 ? "alpha news item" : "beta news item";
      d.tweets.push_back(t);
      d.edges.push_back({t.author_external_id, t.external_id, Relation::Post});
    }
    for (int i = 0; i < 12; ++i)
      for (int u = 0; u < 8; ++u) {
        const bool same = (i < 6) == (u < 4);
        if (d.tweets[i].author_external_id == "u" + std::to_string(u)) continue;
        const double p = same ? 0.5 : 0.05;
        if (rng::next_double(gen) < p)
          d.edges.push_back({"u" + std::to_string(u), "t" + std::to_string(i),
                             Relation::Retweet});
      }
    graph = build_graph(d);

    norm = fit_normalizer(graph.users);
    for (const auto& u : graph.users) attrs.push_back(encode_user(u, norm, enc));
    for (const auto& t : graph.tweets)
      attrs.push_back(
          encode_tweet(t, attrs[graph.user_index.at(t.author_external_id)], enc));

    WalkConfig wc;
    wc.seed = rng::derive(404, "walk");
    wc.walk_length = 10;
    wc.walks_per_node = 4;
    neighbors = build_neighbor_sets(TrainView(graph), wc);
  }

  TrainConfig config() const {
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.learning_rate = 5e-3;
    cfg.seed = 404;
    cfg.pairs_per_epoch = 256;
    cfg.walk.seed = rng::derive(404, "walk");
    cfg.walk.walk_length = 10;
    cfg.walk.walks_per_node = 4;
    return cfg;
  }
};

}  // namespace

TEST_CASE("training runs, reports losses and embeds every node") {
  const TrainFixture fx;
  const TrainView view(fx.graph);
  const TrainResult r = train(view, fx.neighbors, fx.attrs, fx.enc, fx.config());

  REQUIRE(r.epoch_loss.size() == 2);
  for (const double l : r.epoch_loss) {
    CHECK(std::isfinite(l));
    CHECK(l > 0.0);  // standard sign is a positive quantity
  }
  CHECK(r.embeddings.dim == 8);
  CHECK(r.embeddings.ids.size() == static_cast<std::size_t>(view.n_nodes()));
  CHECK(r.embeddings.rows.allFinite());
  CHECK(r.embeddings.contains("u0"));
  CHECK(r.embeddings.contains("t11"));
}

TEST_CASE("loss improves from the random initialization") {
  const TrainFixture fx;
  const TrainView view(fx.graph);
  TrainConfig cfg = fx.config();
  cfg.epochs = 6;
  const TrainResult r = train(view, fx.neighbors, fx.attrs, fx.enc, cfg);
  REQUIRE(r.epoch_loss.size() == 6);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
}

TEST_CASE("training is bitwise deterministic") {
  const TrainFixture fx;
  const TrainView view(fx.graph);
  const TrainResult a = train(view, fx.neighbors, fx.attrs, fx.enc, fx.config());
  const TrainResult b = train(view, fx.neighbors, fx.attrs, fx.enc, fx.config());

  REQUIRE(a.epoch_loss.size() == b.epoch_loss.size());
  for (std::size_t i = 0; i < a.epoch_loss.size(); ++i)
    CHECK(a.epoch_loss[i] == b.epoch_loss[i]);
  CHECK((a.embeddings.rows - b.embeddings.rows).cwiseAbs().maxCoeff() == 0.0);

  TrainConfig other = fx.config();
  other.seed = 405;
  const TrainResult c = train(view, fx.neighbors, fx.attrs, fx.enc, other);
  CHECK((a.embeddings.rows - c.embeddings.rows).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero epochs yields the untouched initialization") {
  const TrainFixture fx;
  const TrainView view(fx.graph);
  TrainConfig cfg = fx.config();
  cfg.epochs = 0;
  const TrainResult r = train(view, fx.neighbors, fx.attrs, fx.enc, cfg);

  CHECK(r.epoch_loss.empty());
  const ModelParams fresh = init_params(cfg.dim, fx.enc, cfg.seed);
  CHECK((r.params.attention - fresh.attention).cwiseAbs().maxCoeff() == 0.0);

  const EmbeddingTable direct =
      compute_embeddings(view, fx.neighbors, fx.attrs, fresh);
  CHECK((r.embeddings.rows - direct.rows).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid configurations are rejected") {
  const TrainFixture fx;
  const TrainView view(fx.graph);

  TrainConfig odd = fx.config();
  odd.dim = 7;
  CHECK_THROWS_AS(train(view, fx.neighbors, fx.attrs, fx.enc, odd), DataError);

  TrainConfig bad_lr = fx.config();
  bad_lr.learning_rate = 0.0;
  CHECK_THROWS_AS(train(view, fx.neighbors, fx.attrs, fx.enc, bad_lr), DataError);

  TrainConfig bad_batch = fx.config();
  bad_batch.batch_size = 0;
  CHECK_THROWS_AS(train(view, fx.neighbors, fx.attrs, fx.enc, bad_batch), DataError);

  const std::vector<AttributeSet> short_attrs(fx.attrs.begin(), fx.attrs.end() - 1);
  CHECK_THROWS_AS(train(view, fx.neighbors, short_attrs, fx.enc, fx.config()), DataError);
}

TEST_CASE("paper-literal sign trains with mirrored losses") {
  const TrainFixture fx;
  const TrainView view(fx.graph);
  TrainConfig cfg = fx.config();
  cfg.epochs = 1;
  cfg.loss_sign = LossSign::PaperLiteral;
  const TrainResult r = train(view, fx.neighbors, fx.attrs, fx.enc, cfg);
  REQUIRE(r.epoch_loss.size() == 1);
  CHECK(r.epoch_loss[0] < 0.0);  // mirrored objective is negative
  CHECK(r.embeddings.rows.allFinite());
}
