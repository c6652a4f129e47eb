#include "bigraph/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include "bigraph/rng.hpp"

namespace bigraph {

const char* to_string(BaselineVariant v) {
  switch (v) {
    case BaselineVariant::UserInfo: return "userinfo";
    case BaselineVariant::Textual: return "textual";
    case BaselineVariant::Visual: return "visual";
    case BaselineVariant::TextualVisual: return "tv";
    case BaselineVariant::UserTextualVisual: return "utv";
    case BaselineVariant::LateFusion: return "latefusion";
    case BaselineVariant::Gcn: return "gcn";
  }
  return "?";
}

BaselineVariant baseline_variant_from_string(const std::string& s) {
  if (s == "userinfo") return BaselineVariant::UserInfo;
  if (s == "textual") return BaselineVariant::Textual;
  if (s == "visual") return BaselineVariant::Visual;
  if (s == "tv") return BaselineVariant::TextualVisual;
  if (s == "utv") return BaselineVariant::UserTextualVisual;
  if (s == "latefusion") return BaselineVariant::LateFusion;
  if (s == "gcn") return BaselineVariant::Gcn;
  throw ParseError("unknown baseline variant '" + s +
                   "' (expected userinfo|textual|visual|tv|utv|latefusion|gcn)");
}

namespace {

Vec user_block(const UserRecord& user, const ScalarNormalizer& norm, const EncoderConfig& cfg) {
  Vec v = Vec::Zero(kScalarVecLen + cfg.text_dim);
  v.head(kScalarVecLen) = scalar_features(user, norm);
  if (user.description_vec)
    v.tail(cfg.text_dim) = *user.description_vec;
  else if (user.description_text && !user.description_text->empty())
    v.tail(cfg.text_dim) = hash_embed(*user.description_text, cfg.text_dim, cfg.hash_seed);
  return v;
}

Vec text_block(const TweetRecord& tweet, const EncoderConfig& cfg) {
  if (tweet.text_vec) return *tweet.text_vec;
  if (tweet.text) return hash_embed(*tweet.text, cfg.text_dim, cfg.hash_seed);
  return Vec::Zero(cfg.text_dim);
}

Vec image_block(const TweetRecord& tweet, const EncoderConfig& cfg) {
  if (tweet.image_vec) return *tweet.image_vec;
  return Vec::Zero(cfg.image_dim);  // missing image zero-fills in the baseline path
}

}  // namespace

int concat_dim(BaselineVariant v, const EncoderConfig& cfg) {
  const int user = kScalarVecLen + cfg.text_dim;
  switch (v) {
    case BaselineVariant::UserInfo: return user;
    case BaselineVariant::Textual: return cfg.text_dim;
    case BaselineVariant::Visual: return cfg.image_dim;
    case BaselineVariant::TextualVisual: return cfg.text_dim + cfg.image_dim;
    case BaselineVariant::UserTextualVisual: return user + cfg.text_dim + cfg.image_dim;
    default: throw DataError("concat_dim: variant has no direct feature vector");
  }
}

Vec concat_features(BaselineVariant v, const UserRecord& user,
                    const std::optional<TweetRecord>& tweet, const ScalarNormalizer& norm,
                    const EncoderConfig& cfg) {
  const auto need_tweet = [&]() -> const TweetRecord& {
    if (!tweet) throw DataError("concat_features: variant needs a tweet record");
    return *tweet;
  };
  switch (v) {
    case BaselineVariant::UserInfo: return user_block(user, norm, cfg);
    case BaselineVariant::Textual: return text_block(need_tweet(), cfg);
    case BaselineVariant::Visual: return image_block(need_tweet(), cfg);
    case BaselineVariant::TextualVisual: {
      const TweetRecord& t = need_tweet();
      Vec out(cfg.text_dim + cfg.image_dim);
      out << text_block(t, cfg), image_block(t, cfg);
      return out;
    }
    case BaselineVariant::UserTextualVisual: {
      const TweetRecord& t = need_tweet();
      Vec out(kScalarVecLen + cfg.text_dim + cfg.text_dim + cfg.image_dim);
      out << user_block(user, norm, cfg), text_block(t, cfg), image_block(t, cfg);
      return out;
    }
    default: throw DataError("concat_features: variant has no direct feature vector");
  }
}

// -- PCA ------------------------------------------------------------------------

PcaModel pca_fit(const Mat& X, int r) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 1 || d < 1) throw DataError("pca_fit: empty matrix");
  if (r < 1) throw DataError("pca_fit: need r >= 1");

  PcaModel m;
  m.mean = X.colwise().mean().transpose();
  const Mat centered = X.rowwise() - m.mean.transpose();

  Eigen::BDCSVD<Mat> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();

  int rank = 0;
  const double tol = std::max(1e-12, sv.size() > 0 ? sv[0] * 1e-12 : 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;

  const int keep = std::min(r, std::max(rank, 1));
  m.truncated_to_rank = keep < r;
  m.components = svd.matrixV().leftCols(keep).transpose();
  m.explained_variance.resize(keep);
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (int i = 0; i < keep; ++i) m.explained_variance[i] = sv[i] * sv[i] / denom;
  return m;
}

Mat pca_transform(const PcaModel& model, const Mat& X) {
  if (X.cols() != model.mean.size()) throw DataError("pca_transform: dimension mismatch");
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

// -- GCN --------------------------------------------------------------------------

Mat normalized_adjacency(const TrainView& g) {
  const int n = g.n_nodes();
  Mat a = Mat::Identity(n, n);
  for (int u = 0; u < g.n_users(); ++u)
    for (const auto& e : g.adjacency({NodeKind::User, u})) {
      // parallel relations collapse onto one structural edge
      a(u, g.n_users() + e.counterpart) = 1.0;
      a(g.n_users() + e.counterpart, u) = 1.0;
    }
  Vec dinv(n);
  for (int i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(a.row(i).sum());
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

namespace {

Eigen::SparseMatrix<double> sparse_normalized_adjacency(const TrainView& g) {
  const int n = g.n_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < n; ++i) seen.insert({i, i});
  for (int u = 0; u < g.n_users(); ++u)
    for (const auto& e : g.adjacency({NodeKind::User, u})) {
      const int t = g.n_users() + e.counterpart;
      seen.insert({u, t});
      seen.insert({t, u});
    }
  Vec degree = Vec::Zero(n);
  for (const auto& [i, j] : seen) degree[i] += 1.0;
  for (const auto& [i, j] : seen)
    trip.emplace_back(i, j, 1.0 / std::sqrt(degree[i] * degree[j]));
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

struct GcnLayerGrads {
  Mat w1, w2;
  Vec b1, b2;
};

}  // namespace

Mat gcn_embed(const TrainView& g, const Mat& node_features, const GcnConfig& cfg,
              const std::vector<std::pair<int, int>>& positive_pairs) {
  if (node_features.rows() != g.n_nodes()) throw DataError("gcn_embed: feature rows != nodes");
  if (cfg.layers != 2) throw DataError("gcn_embed: only the two-layer form is implemented");
  if (positive_pairs.empty()) throw DataError("gcn_embed: no positive pairs");

  const auto a = sparse_normalized_adjacency(g);
  const auto F = node_features.cols();
  rng::Engine gen(rng::derive(cfg.seed, "gcn-init"));
  const auto init = [&gen](Mat& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index k = 0; k < m.size(); ++k)
      m.data()[k] = rng::next_uniform(gen, -bound, bound);
  };
  Mat w1(F, cfg.hidden_dim), w2(cfg.hidden_dim, cfg.output_dim);
  init(w1, static_cast<int>(F));
  init(w2, cfg.hidden_dim);
  Vec b1 = Vec::Zero(cfg.hidden_dim), b2 = Vec::Zero(cfg.output_dim);

  const Mat a_x = a * node_features;  // layer-1 propagation is input-constant

  GcnLayerGrads m{Mat::Zero(F, cfg.hidden_dim), Mat::Zero(cfg.hidden_dim, cfg.output_dim),
                  Vec::Zero(cfg.hidden_dim), Vec::Zero(cfg.output_dim)};
  GcnLayerGrads v = m;

  rng::Engine pair_gen(rng::derive(cfg.seed, "gcn-pairs"));
  const double inv_tau = 1.0 / cfg.temperature;

  for (int step = 1; step <= cfg.steps; ++step) {
    const Mat z1 = (a_x * w1).rowwise() + b1.transpose();
    const Mat h1 = z1.cwiseMax(0.0);
    const Mat a_h1 = a * h1;
    const Mat h2 = (a_h1 * w2).rowwise() + b2.transpose();

    const int B = cfg.batch_pairs;
    std::vector<int> anchors(B), positives(B);
    for (int k = 0; k < B; ++k) {
      const auto& pr = positive_pairs[rng::next_below(pair_gen, positive_pairs.size())];
      anchors[k] = pr.first;
      positives[k] = pr.second;
    }

    Mat za(B, cfg.output_dim), zp(B, cfg.output_dim);
    Vec na(B), np(B);
    for (int k = 0; k < B; ++k) {
      na[k] = std::max(h2.row(anchors[k]).norm(), 1e-12);
      np[k] = std::max(h2.row(positives[k]).norm(), 1e-12);
      za.row(k) = h2.row(anchors[k]) / na[k];
      zp.row(k) = h2.row(positives[k]) / np[k];
    }

    Mat logits = za * zp.transpose() * inv_tau;
    Mat soft(B, B);
    for (int r = 0; r < B; ++r) {
      const double mx = logits.row(r).maxCoeff();
      soft.row(r) = (logits.row(r).array() - mx).exp();
      soft.row(r) /= soft.row(r).sum();
    }
    Mat dlogits = soft;
    for (int r = 0; r < B; ++r) dlogits(r, r) -= 1.0;
    dlogits /= static_cast<double>(B);

    const Mat dza = dlogits * zp * inv_tau;
    const Mat dzp = dlogits.transpose() * za * inv_tau;

    Mat dh2 = Mat::Zero(h2.rows(), h2.cols());
    for (int k = 0; k < B; ++k) {
      const Vec dz = dza.row(k).transpose();
      const Vec zrow = za.row(k).transpose();
      dh2.row(anchors[k]) += ((dz - zrow * zrow.dot(dz)) / na[k]).transpose();
      const Vec dzq = dzp.row(k).transpose();
      const Vec zq = zp.row(k).transpose();
      dh2.row(positives[k]) += ((dzq - zq * zq.dot(dzq)) / np[k]).transpose();
    }

    GcnLayerGrads grad;
    grad.w2 = a_h1.transpose() * dh2;
    grad.b2 = dh2.colwise().sum().transpose();
    const Mat dh1 = (a * (dh2 * w2.transpose())).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    grad.w1 = a_x.transpose() * dh1;
    grad.b1 = dh1.colwise().sum().transpose();

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, step);
    const double bc2 = 1.0 - std::pow(beta2, step);
    const auto adam = [&](Mat& p, const Mat& gr, Mat& m1, Mat& m2) {
      m1 = beta1 * m1 + (1.0 - beta1) * gr;
      m2 = beta2 * m2.array().matrix() + (1.0 - beta2) * gr.array().square().matrix();
      p.array() -= cfg.learning_rate * (m1.array() / bc1) / ((m2.array() / bc2).sqrt() + eps);
    };
    adam(w1, grad.w1, m.w1, v.w1);
    adam(w2, grad.w2, m.w2, v.w2);
    Mat b1m(1, cfg.hidden_dim);  // reuse the matrix rule for the bias rows
    b1m = b1.transpose();
    Mat gb1 = grad.b1.transpose(), mb1 = m.b1.transpose(), vb1 = v.b1.transpose();
    adam(b1m, gb1, mb1, vb1);
    b1 = b1m.transpose();
    m.b1 = mb1.transpose();
    v.b1 = vb1.transpose();
    Mat b2m = b2.transpose();
    Mat gb2 = grad.b2.transpose(), mb2 = m.b2.transpose(), vb2 = v.b2.transpose();
    adam(b2m, gb2, mb2, vb2);
    b2 = b2m.transpose();
    m.b2 = mb2.transpose();
    v.b2 = vb2.transpose();
  }

  const Mat z1 = (a_x * w1).rowwise() + b1.transpose();
  return ((a * z1.cwiseMax(0.0)) * w2).rowwise() + b2.transpose();
}

Mat gcn_node_features(const BipartiteGraph& g, const ScalarNormalizer& norm,
                      const EncoderConfig& enc, int pca_dim) {
  const EncoderConfig& cfg = enc;
  Mat users(g.n_users(), kScalarVecLen + cfg.text_dim);
  for (int i = 0; i < g.n_users(); ++i)
    users.row(i) = user_block(g.users[i], norm, cfg).transpose();
  Mat tweets(g.n_tweets(), cfg.text_dim + cfg.image_dim);
  for (int i = 0; i < g.n_tweets(); ++i) {
    tweets.row(i).head(cfg.text_dim) = text_block(g.tweets[i], cfg).transpose();
    tweets.row(i).tail(cfg.image_dim) = image_block(g.tweets[i], cfg).transpose();
  }

  Mat out = Mat::Zero(g.n_nodes(), pca_dim);
  const auto reduce = [&](const Mat& x, int row_offset) {
    const int r = std::min<int>(pca_dim, std::min(x.rows(), x.cols()));
    const PcaModel m = pca_fit(x, r);
    const Mat y = pca_transform(m, x);
    out.block(row_offset, 0, y.rows(), y.cols()) = y;
  };
  reduce(users, 0);
  reduce(tweets, g.n_users());
  return out;
}

// -- fusion and voting ---------------------------------------------------------------

double late_fusion_proba(const std::vector<double>& probs, const std::vector<double>& f1_weights) {
  if (probs.size() != f1_weights.size() || probs.empty())
    throw DataError("late_fusion: bad shapes");
  double wsum = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (f1_weights[i] < 0.0) throw DataError("late_fusion: negative weight");
    wsum += f1_weights[i];
    acc += f1_weights[i] * probs[i];
  }
  if (wsum <= 0.0) throw DataError("late_fusion: every model has zero weight");
  return acc / wsum;
}

int late_fusion_predict(const std::vector<double>& probs, const std::vector<double>& f1_weights,
                        double threshold) {
  return late_fusion_proba(probs, f1_weights) >= threshold ? 1 : 0;
}

int vote_user_label(const std::vector<int>& tweet_labels, int majority_class) {
  if (tweet_labels.empty()) throw DataError("vote_user_label: no predictions");
  long ones = std::count(tweet_labels.begin(), tweet_labels.end(), 1);
  const long zeros = static_cast<long>(tweet_labels.size()) - ones;
  if (ones > zeros) return 1;
  if (zeros > ones) return 0;
  return majority_class;
}

// -- evaluation drivers -----------------------------------------------------------------

BaselineInputs make_baseline_inputs(const BipartiteGraph& g, const ScalarNormalizer& norm,
                                    const EncoderConfig& enc) {
  BaselineInputs in{g, norm, enc, {}, {}};
  std::vector<int> users;
  for (const auto& [idx, label] : g.label_map) users.push_back(idx);
  std::sort(users.begin(), users.end());
  for (const int u : users) {
    in.labeled_users.push_back(u);
    in.y.push_back(g.label_map.at(u) == Leaning::Right ? 1 : 0);
  }
  return in;
}

namespace {

std::vector<int> distinct_tweets(const BipartiteGraph& g, int user) {
  std::vector<int> out;
  for (const auto& e : g.user_adj[user])
    if (out.empty() || out.back() != e.counterpart) out.push_back(e.counterpart);
  return out;
}

struct TweetLevelModel {
  std::optional<LogRegModel> logreg;
  std::optional<ForestModel> forest;

  double proba(const Vec& x) const {
    return logreg ? logreg->predict_proba(x) : forest->predict_proba(x);
  }
};

TweetLevelModel fit_examples(const Mat& X, const std::vector<int>& y, const CvConfig& cv,
                             std::uint64_t fold_salt) {
  TweetLevelModel m;
  if (cv.model == ClassifierKind::LogReg) {
    m.logreg = logreg_fit(X, y, cv.logreg);
  } else {
    ForestConfig fc = cv.forest;
    fc.seed = fold_salt;
    m.forest = forest_fit(X, y, fc);
  }
  return m;
}

// Tweet-level variant driver: classify each (user, distinct tweet)
// interaction, vote hard labels per user, score = mean tweet probability.
MetricReport evaluate_voted(BaselineVariant v, const BaselineInputs& in, const CvConfig& cv) {
  const BipartiteGraph& g = in.graph;
  const std::vector<int> fold = stratified_folds(in.y, cv.k, cv.seed);
  const int dim = concat_dim(v, in.enc);

  std::vector<FoldMetrics> metrics;
  for (int f = 0; f < cv.k; ++f) {
    std::vector<Vec> train_rows;
    std::vector<int> train_labels;
    long train_pos_users = 0, train_users = 0;
    for (std::size_t i = 0; i < in.labeled_users.size(); ++i) {
      if (fold[i] == f) continue;
      ++train_users;
      train_pos_users += in.y[i];
      const int u = in.labeled_users[i];
      for (const int t : distinct_tweets(g, u)) {
        train_rows.push_back(concat_features(v, g.users[u], g.tweets[t], in.norm, in.enc));
        train_labels.push_back(in.y[i]);
      }
    }
    if (train_rows.empty()) throw DataError("evaluate_baseline: training fold has no tweets");
    Mat X_train(train_rows.size(), dim);
    for (std::size_t i = 0; i < train_rows.size(); ++i) X_train.row(i) = train_rows[i].transpose();
    const int majority = 2 * train_pos_users > train_users ? 1 : 0;
    const TweetLevelModel model = fit_examples(
        X_train, train_labels, cv, rng::derive(cv.seed, "fold-forest", static_cast<std::uint64_t>(f)));

    std::vector<int> y_test, y_hat;
    std::vector<double> scores;
    for (std::size_t i = 0; i < in.labeled_users.size(); ++i) {
      if (fold[i] != f) continue;
      const int u = in.labeled_users[i];
      std::vector<int> votes;
      double prob_sum = 0.0;
      for (const int t : distinct_tweets(g, u)) {
        const double p = model.proba(concat_features(v, g.users[u], g.tweets[t], in.norm, in.enc));
        votes.push_back(p >= 0.5 ? 1 : 0);
        prob_sum += p;
      }
      y_test.push_back(in.y[i]);
      if (votes.empty()) {  // labeled user without interactions
        y_hat.push_back(majority);
        scores.push_back(0.5);
      } else {
        y_hat.push_back(vote_user_label(votes, majority));
        scores.push_back(prob_sum / static_cast<double>(votes.size()));
      }
    }
    metrics.push_back(compute_metrics_voted(y_test, y_hat, scores));
  }
  return summarize_folds(metrics);
}

MetricReport evaluate_per_user(const Mat& X, const BaselineInputs& in, const CvConfig& cv) {
  return cross_validate(X, in.y, cv);
}

double f1_of(const std::vector<int>& y, const std::vector<double>& scores) {
  std::vector<int> y_hat(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_hat[i] = scores[i] >= 0.5 ? 1 : 0;
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1 && y_hat[i] == 1) ++tp;
    if (y[i] == 0 && y_hat[i] == 1) ++fp;
    if (y[i] == 1 && y_hat[i] == 0) ++fn;
  }
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Late fusion: UserInfo + Textual + Visual single models, weighted by
// training-split F1; fused probability decides the label.
MetricReport evaluate_late_fusion(const BaselineInputs& in, const CvConfig& cv) {
  const BipartiteGraph& g = in.graph;
  const std::vector<int> fold = stratified_folds(in.y, cv.k, cv.seed);
  constexpr BaselineVariant tweet_variants[2] = {BaselineVariant::Textual,
                                                 BaselineVariant::Visual};

  std::vector<FoldMetrics> metrics;
  for (int f = 0; f < cv.k; ++f) {
    std::vector<int> train_users_idx, test_users_idx;
    for (std::size_t i = 0; i < in.labeled_users.size(); ++i)
      (fold[i] == f ? test_users_idx : train_users_idx).push_back(static_cast<int>(i));

    // user-level model
    Mat Xu_train(train_users_idx.size(), concat_dim(BaselineVariant::UserInfo, in.enc));
    std::vector<int> yu_train(train_users_idx.size());
    for (std::size_t i = 0; i < train_users_idx.size(); ++i) {
      const int u = in.labeled_users[train_users_idx[i]];
      Xu_train.row(i) =
          concat_features(BaselineVariant::UserInfo, g.users[u], std::nullopt, in.norm, in.enc)
              .transpose();
      yu_train[i] = in.y[train_users_idx[i]];
    }
    const TweetLevelModel user_model = fit_examples(
        Xu_train, yu_train, cv, rng::derive(cv.seed, "fusion-user", static_cast<std::uint64_t>(f)));

    long pos = 0;
    for (const int i : train_users_idx) pos += in.y[i];
    const int majority = 2 * pos > static_cast<long>(train_users_idx.size()) ? 1 : 0;

    TweetLevelModel tweet_models[2];
    for (int m = 0; m < 2; ++m) {
      std::vector<Vec> rows;
      std::vector<int> labels;
      for (const int i : train_users_idx) {
        const int u = in.labeled_users[i];
        for (const int t : distinct_tweets(g, u)) {
          rows.push_back(concat_features(tweet_variants[m], g.users[u], g.tweets[t], in.norm, in.enc));
          labels.push_back(in.y[i]);
        }
      }
      if (rows.empty()) throw DataError("late fusion: training fold has no tweets");
      Mat X(rows.size(), rows[0].size());
      for (std::size_t r = 0; r < rows.size(); ++r) X.row(r) = rows[r].transpose();
      tweet_models[m] = fit_examples(
          X, labels, cv,
          rng::derive(cv.seed, m == 0 ? "fusion-text" : "fusion-vis", static_cast<std::uint64_t>(f)));
    }

    // per-user probability under one model, training or test side
    const auto user_proba = [&](const TweetLevelModel& model, bool user_level,
                                BaselineVariant variant, int i) {
      const int u = in.labeled_users[i];
      if (user_level)
        return model.proba(
            concat_features(BaselineVariant::UserInfo, g.users[u], std::nullopt, in.norm, in.enc));
      const auto tweets = distinct_tweets(g, u);
      if (tweets.empty()) return 0.5;
      double s = 0.0;
      for (const int t : tweets)
        s += model.proba(concat_features(variant, g.users[u], g.tweets[t], in.norm, in.enc));
      return s / static_cast<double>(tweets.size());
    };

    // F1 weights from the training split
    std::vector<double> weights(3);
    {
      std::vector<int> y_tr;
      std::vector<double> s_user, s_text, s_vis;
      for (const int i : train_users_idx) {
        y_tr.push_back(in.y[i]);
        s_user.push_back(user_proba(user_model, true, BaselineVariant::UserInfo, i));
        s_text.push_back(user_proba(tweet_models[0], false, BaselineVariant::Textual, i));
        s_vis.push_back(user_proba(tweet_models[1], false, BaselineVariant::Visual, i));
      }
      weights[0] = f1_of(y_tr, s_user);
      weights[1] = f1_of(y_tr, s_text);
      weights[2] = f1_of(y_tr, s_vis);
    }

    std::vector<int> y_test, y_hat;
    std::vector<double> scores;
    for (const int i : test_users_idx) {
      const std::vector<double> probs = {
          user_proba(user_model, true, BaselineVariant::UserInfo, i),
          user_proba(tweet_models[0], false, BaselineVariant::Textual, i),
          user_proba(tweet_models[1], false, BaselineVariant::Visual, i)};
      double p;
      if (weights[0] + weights[1] + weights[2] > 0.0) {
        p = late_fusion_proba(probs, weights);
      } else {  // all single models useless on this fold; fall back to majority
        p = majority ? 1.0 : 0.0;
      }
      y_test.push_back(in.y[i]);
      y_hat.push_back(p >= 0.5 ? 1 : 0);
      scores.push_back(p);
    }
    metrics.push_back(compute_metrics_voted(y_test, y_hat, scores));
  }
  return summarize_folds(metrics);
}

}  // namespace

MetricReport evaluate_baseline(BaselineVariant v, const BaselineInputs& in, const CvConfig& cv,
                               const GcnConfig& gcn) {
  const BipartiteGraph& g = in.graph;
  switch (v) {
    case BaselineVariant::UserInfo: {
      Mat X(in.labeled_users.size(), concat_dim(v, in.enc));
      for (std::size_t i = 0; i < in.labeled_users.size(); ++i)
        X.row(i) = concat_features(v, g.users[in.labeled_users[i]], std::nullopt, in.norm, in.enc)
                       .transpose();
      return evaluate_per_user(X, in, cv);
    }
    case BaselineVariant::Textual:
    case BaselineVariant::Visual:
    case BaselineVariant::TextualVisual:
    case BaselineVariant::UserTextualVisual:
      return evaluate_voted(v, in, cv);
    case BaselineVariant::LateFusion:
      return evaluate_late_fusion(in, cv);
    case BaselineVariant::Gcn: {
      const TrainView view(g);
      WalkConfig wc;
      wc.seed = rng::derive(gcn.seed, "gcn-walks");
      const auto walks = generate_walks(view, wc);
      const auto pairs = positive_pairs(walks, wc.window);
      const Mat features = gcn_node_features(g, in.norm, in.enc, gcn.pca_dim);
      const Mat h = gcn_embed(view, features, gcn, pairs);
      Mat X(in.labeled_users.size(), h.cols());
      for (std::size_t i = 0; i < in.labeled_users.size(); ++i)
        X.row(i) = h.row(in.labeled_users[i]);
      return evaluate_per_user(X, in, cv);
    }
  }
  throw DataError("evaluate_baseline: bad variant");
}

}  // namespace bigraph
