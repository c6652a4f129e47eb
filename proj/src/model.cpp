#include "bigraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "bigraph/io.hpp"
#include "bigraph/rng.hpp"

namespace bigraph {
namespace {

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Vec sigmoid_v(const Vec& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

// -- single-direction LSTM ----------------------------------------------------

void lstm_run(const LstmParams& p, const std::vector<Vec>& xs, LstmCache& c) {
  const int H = static_cast<int>(p.w_recur.cols());
  const auto L = xs.size();
  c.x = xs;
  c.i.resize(L);
  c.f.resize(L);
  c.g.resize(L);
  c.o.resize(L);
  c.c.resize(L);
  c.h.resize(L);
  Vec h = Vec::Zero(H), cell = Vec::Zero(H);
  for (std::size_t t = 0; t < L; ++t) {
    const Vec z = p.w_input * xs[t] + p.w_recur * h + p.bias;
    c.i[t] = sigmoid_v(z.head(H));
    c.f[t] = sigmoid_v(z.segment(H, H));
    c.g[t] = z.segment(2 * H, H).array().tanh().matrix();
    c.o[t] = sigmoid_v(z.tail(H));
    cell = c.f[t].cwiseProduct(cell) + c.i[t].cwiseProduct(c.g[t]);
    h = c.o[t].cwiseProduct(cell.array().tanh().matrix());
    c.c[t] = cell;
    c.h[t] = h;
  }
}

// dh_uniform is the per-position external gradient (mean pooling spreads the
// pooled gradient evenly). Accumulates parameter grads, returns dx per step.
std::vector<Vec> lstm_backward(const LstmParams& p, const LstmCache& c, const Vec& dh_uniform,
                               LstmParams& grad) {
  const int H = static_cast<int>(p.w_recur.cols());
  const int L = static_cast<int>(c.x.size());
  std::vector<Vec> dx(L);
  Vec dh_next = Vec::Zero(H), dc_next = Vec::Zero(H);
  Vec dz(4 * H);
  for (int t = L - 1; t >= 0; --t) {
    const Vec dh = dh_uniform + dh_next;
    const Vec tc = c.c[t].array().tanh().matrix();
    const Vec d_o = dh.cwiseProduct(tc);
    const Vec dc =
        dh.cwiseProduct(c.o[t]).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
    const Vec cprev = t > 0 ? c.c[t - 1] : Vec::Zero(H);
    const Vec hprev = t > 0 ? c.h[t - 1] : Vec::Zero(H);
    dz.head(H) = dc.cwiseProduct(c.g[t]).cwiseProduct(c.i[t]).cwiseProduct(
        (1.0 - c.i[t].array()).matrix());
    dz.segment(H, H) =
        dc.cwiseProduct(cprev).cwiseProduct(c.f[t]).cwiseProduct((1.0 - c.f[t].array()).matrix());
    dz.segment(2 * H, H) = dc.cwiseProduct(c.i[t]).cwiseProduct(
        (1.0 - c.g[t].array().square()).matrix());
    dz.tail(H) = d_o.cwiseProduct(c.o[t]).cwiseProduct((1.0 - c.o[t].array()).matrix());
    grad.w_input.noalias() += dz * c.x[t].transpose();
    grad.w_recur.noalias() += dz * hprev.transpose();
    grad.bias += dz;
    dx[t] = p.w_input.transpose() * dz;
    dh_next.noalias() = p.w_recur.transpose() * dz;
    dc_next = dc.cwiseProduct(c.f[t]);
  }
  return dx;
}

Vec bilstm_forward(const BiLstmParams& p, const std::vector<Vec>& xs, BiLstmCache* cache) {
  BiLstmCache local;
  BiLstmCache& c = cache ? *cache : local;
  c.length = static_cast<int>(xs.size());
  lstm_run(p.fwd, xs, c.fwd);
  const std::vector<Vec> rev(xs.rbegin(), xs.rend());
  lstm_run(p.bwd, rev, c.bwd);
  const int H = static_cast<int>(p.fwd.w_recur.cols());
  Vec pooled = Vec::Zero(2 * H);
  for (int t = 0; t < c.length; ++t) {
    pooled.head(H) += c.fwd.h[t];
    pooled.tail(H) += c.bwd.h[t];
  }
  pooled /= static_cast<double>(c.length);
  c.pooled = pooled;
  return pooled;
}

// Returns dx per original position (fwd step t and bwd step L-1-t combined).
std::vector<Vec> bilstm_backward(const BiLstmParams& p, const BiLstmCache& c, const Vec& dpooled,
                                 BiLstmParams& grad) {
  const int L = c.length;
  const int H = static_cast<int>(dpooled.size()) / 2;
  const Vec dhf = dpooled.head(H) / static_cast<double>(L);
  const Vec dhb = dpooled.tail(H) / static_cast<double>(L);
  const auto dxf = lstm_backward(p.fwd, c.fwd, dhf, grad.fwd);
  const auto dxb = lstm_backward(p.bwd, c.bwd, dhb, grad.bwd);
  std::vector<Vec> dx(L);
  for (int pos = 0; pos < L; ++pos) dx[pos] = dxf[pos] + dxb[L - 1 - pos];
  return dx;
}

void fuse_backward(const ModelParams& p, const FuseCache& c, const Vec& df1, ModelGrad& grad) {
  const auto dx = bilstm_backward(p.content, c.lstm, df1, grad.content);
  for (std::size_t pos = 0; pos < c.tags.size(); ++pos) {
    Projection& gp = grad.projections.at(c.tags[pos]);
    gp.weight.noalias() += dx[pos] * c.raw[pos].transpose();
    gp.bias += dx[pos];
  }
}

// Accumulates du; returns the self (f1) gradient and per-candidate gradients.
void attention_backward(const ModelParams& p, const AttentionCache& c, const Vec& dout,
                        Vec& dself, std::vector<Vec>& dcand, Vec& du) {
  const int n = static_cast<int>(c.candidates.size());
  const int d = p.dim;
  std::vector<double> dalpha(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    dalpha[i] = dout.dot(c.candidates[i]);
    s += c.alpha[i] * dalpha[i];
  }
  dself = Vec::Zero(d);
  dcand.assign(n, Vec::Zero(d));
  for (int i = 0; i < n; ++i) {
    const double dlogit = c.alpha[i] * (dalpha[i] - s);
    const double dpre = dlogit * (c.pre[i] > 0.0 ? 1.0 : 0.2);
    du.head(d) += dpre * c.candidates[0];
    du.tail(d) += dpre * c.candidates[i];
    dself += dpre * p.attention.head(d);
    dcand[i] += c.alpha[i] * dout + dpre * p.attention.tail(d);
  }
}

struct TripleGrad {
  double loss = 0.0;
  Vec d_v, d_pos, d_neg;
};

TripleGrad nce_backward(const Vec& e_v, const Vec& e_pos, const Vec& e_neg, LossSign sign) {
  TripleGrad out;
  const double dp = e_pos.dot(e_v);
  const double dn = e_neg.dot(e_v);
  out.loss = softplus(-dp) + softplus(dn);
  const double gp = sigmoid(dp) - 1.0;
  const double gn = sigmoid(dn);
  out.d_v = gp * e_pos + gn * e_neg;
  out.d_pos = gp * e_v;
  out.d_neg = gn * e_v;
  if (sign == LossSign::PaperLiteral) {
    out.loss = -out.loss;
    out.d_v = -out.d_v;
    out.d_pos = -out.d_pos;
    out.d_neg = -out.d_neg;
  }
  return out;
}

constexpr AttrTag kAllTags[kNumAttrTags] = {
    AttrTag::UserScalars,    AttrTag::UserDescription,   AttrTag::TweetText,
    AttrTag::TweetImage,     AttrTag::AuthorScalars,     AttrTag::AuthorDescription,
};

}  // namespace

// -- parameters ---------------------------------------------------------------

ModelParams init_params(int dim, const EncoderConfig& enc, std::uint64_t seed) {
  if (dim <= 0 || dim % 2 != 0) throw DataError("model dim must be positive and even");
  ModelParams p;
  p.dim = dim;
  rng::Engine gen(rng::derive(seed, "init"));
  const auto fill = [&gen](double* data, Eigen::Index n, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index k = 0; k < n; ++k) data[k] = rng::next_uniform(gen, -bound, bound);
  };
  for (const AttrTag tag : kAllTags) {
    Projection pr;
    const int df = attr_dim(tag, enc);
    pr.weight.resize(dim, df);
    fill(pr.weight.data(), pr.weight.size(), df);
    pr.bias = Vec::Zero(dim);
    p.projections.emplace(tag, std::move(pr));
  }
  const int H = dim / 2;
  const auto make_lstm = [&](int input_dim) {
    LstmParams l;
    l.w_input.resize(4 * H, input_dim);
    fill(l.w_input.data(), l.w_input.size(), input_dim);
    l.w_recur.resize(4 * H, H);
    fill(l.w_recur.data(), l.w_recur.size(), H);
    l.bias = Vec::Zero(4 * H);
    l.bias.segment(H, H).setOnes();  // forget gate starts open
    return l;
  };
  p.content = {make_lstm(dim), make_lstm(dim)};
  p.neighbor_user = {make_lstm(dim), make_lstm(dim)};
  p.neighbor_tweet = {make_lstm(dim), make_lstm(dim)};
  p.attention.resize(2 * dim);
  fill(p.attention.data(), p.attention.size(), 2 * dim);
  return p;
}

ModelGrad zero_grad_like(const ModelParams& p) {
  ModelGrad g = p;
  for_each_tensor(g, [](const std::string&, Eigen::Map<Eigen::VectorXd> t) { t.setZero(); });
  return g;
}

void for_each_tensor(ModelParams& p,
                     const std::function<void(const std::string&, Eigen::Map<Eigen::VectorXd>)>& fn) {
  for (auto& [tag, pr] : p.projections) {
    const std::string base = std::string("proj.") + to_string(tag);
    fn(base + ".weight", {pr.weight.data(), pr.weight.size()});
    fn(base + ".bias", {pr.bias.data(), pr.bias.size()});
  }
  const auto lstm = [&fn](const std::string& base, LstmParams& l) {
    fn(base + ".w_input", {l.w_input.data(), l.w_input.size()});
    fn(base + ".w_recur", {l.w_recur.data(), l.w_recur.size()});
    fn(base + ".bias", {l.bias.data(), l.bias.size()});
  };
  lstm("content.fwd", p.content.fwd);
  lstm("content.bwd", p.content.bwd);
  lstm("neighbor_user.fwd", p.neighbor_user.fwd);
  lstm("neighbor_user.bwd", p.neighbor_user.bwd);
  lstm("neighbor_tweet.fwd", p.neighbor_tweet.fwd);
  lstm("neighbor_tweet.bwd", p.neighbor_tweet.bwd);
  fn("attention", {p.attention.data(), p.attention.size()});
}

void for_each_tensor(const ModelParams& p,
                     const std::function<void(const std::string&, Eigen::Map<const Eigen::VectorXd>)>& fn) {
  for (const auto& [tag, pr] : p.projections) {
    const std::string base = std::string("proj.") + to_string(tag);
    fn(base + ".weight", {pr.weight.data(), pr.weight.size()});
    fn(base + ".bias", {pr.bias.data(), pr.bias.size()});
  }
  const auto lstm = [&fn](const std::string& base, const LstmParams& l) {
    fn(base + ".w_input", {l.w_input.data(), l.w_input.size()});
    fn(base + ".w_recur", {l.w_recur.data(), l.w_recur.size()});
    fn(base + ".bias", {l.bias.data(), l.bias.size()});
  };
  lstm("content.fwd", p.content.fwd);
  lstm("content.bwd", p.content.bwd);
  lstm("neighbor_user.fwd", p.neighbor_user.fwd);
  lstm("neighbor_user.bwd", p.neighbor_user.bwd);
  lstm("neighbor_tweet.fwd", p.neighbor_tweet.fwd);
  lstm("neighbor_tweet.bwd", p.neighbor_tweet.bwd);
  fn("attention", {p.attention.data(), p.attention.size()});
}

// -- forward ------------------------------------------------------------------

Vec fuse_attributes(const ModelParams& p, const AttributeSet& attrs, FuseCache* cache) {
  if (attrs.empty()) throw DataError("fuse_attributes: empty attribute set");
  FuseCache local;
  FuseCache& c = cache ? *cache : local;
  c.tags.clear();
  c.raw.clear();
  std::vector<Vec> xs;
  xs.reserve(attrs.size());
  for (const auto& a : attrs) {
    const auto it = p.projections.find(a.tag);
    if (it == p.projections.end())
      throw DataError(std::string("no projection for attribute '") + to_string(a.tag) + "'");
    const Projection& pr = it->second;
    if (pr.weight.cols() != a.value.size())
      throw DataError(std::string("attribute '") + to_string(a.tag) + "' has dimension " +
                      std::to_string(a.value.size()) + ", projection expects " +
                      std::to_string(pr.weight.cols()));
    xs.emplace_back(pr.weight * a.value + pr.bias);
    c.tags.push_back(a.tag);
    c.raw.push_back(a.value);
  }
  c.f1 = bilstm_forward(p.content, xs, &c.lstm);
  return c.f1;
}

std::optional<Vec> aggregate_neighbors(const ModelParams& p, NodeKind neighbor_kind,
                                       const std::vector<Vec>& neighbor_f1,
                                       BiLstmCache* cache) {
  if (neighbor_f1.empty()) return std::nullopt;
  const BiLstmParams& lstm =
      neighbor_kind == NodeKind::User ? p.neighbor_user : p.neighbor_tweet;
  return bilstm_forward(lstm, neighbor_f1, cache);
}

Vec attention_combine(const ModelParams& p, const Vec& f1, const std::optional<Vec>& f2_user,
                      const std::optional<Vec>& f2_tweet, AttentionCache* cache) {
  AttentionCache local;
  AttentionCache& c = cache ? *cache : local;
  const int d = p.dim;
  c.candidates.clear();
  c.candidates.push_back(f1);
  if (f2_user) c.candidates.push_back(*f2_user);
  if (f2_tweet) c.candidates.push_back(*f2_tweet);
  const int n = static_cast<int>(c.candidates.size());
  c.pre.resize(n);
  c.logits.resize(n);
  c.alpha.resize(n);
  const double self_part = p.attention.head(d).dot(f1);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    c.pre[i] = self_part + p.attention.tail(d).dot(c.candidates[i]);
    c.logits[i] = c.pre[i] > 0.0 ? c.pre[i] : 0.2 * c.pre[i];
    max_logit = std::max(max_logit, c.logits[i]);
  }
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(c.logits[i] - max_logit);
  c.out = Vec::Zero(d);
  for (int i = 0; i < n; ++i) {
    c.alpha[i] = std::exp(c.logits[i] - max_logit) / z;
    c.out += c.alpha[i] * c.candidates[i];
  }
  return c.out;
}

double nce_loss(const Vec& e_v, const Vec& e_pos, const Vec& e_neg, LossSign sign) {
  if (e_v.size() != e_pos.size() || e_v.size() != e_neg.size())
    throw DataError("nce_loss: dimension mismatch");
  const double l = softplus(-e_pos.dot(e_v)) + softplus(e_neg.dot(e_v));
  return sign == LossSign::Standard ? l : -l;
}

// -- batch workspace ------------------------------------------------------------

BatchWorkspace::BatchWorkspace(const ModelParams& params, const std::vector<AttributeSet>& attrs,
                               const NeighborSets& neighbors)
    : params_(params), attrs_(attrs), neighbors_(neighbors) {}

const FuseCache& BatchWorkspace::content(int node) {
  auto it = f1_.find(node);
  if (it != f1_.end()) return it->second;
  FuseCache c;
  fuse_attributes(params_, attrs_.at(node), &c);
  return f1_.emplace(node, std::move(c)).first->second;
}

const NodeEmbedCache& BatchWorkspace::embed(int node) {
  auto it = emb_.find(node);
  if (it != emb_.end()) return it->second;

  NodeEmbedCache nc;
  nc.node = node;
  const Vec f1 = content(node).f1;
  const TypedNeighbors& nbr = neighbors_.per_node.at(node);

  std::vector<Vec> user_f1;
  for (const auto& [idx, count] : nbr.users) {
    nc.user_neighbors.push_back(idx);
    user_f1.push_back(content(idx).f1);
  }
  std::vector<Vec> tweet_f1;
  for (const auto& [idx, count] : nbr.tweets) {
    nc.tweet_neighbors.push_back(idx);
    tweet_f1.push_back(content(idx).f1);
  }

  std::optional<Vec> f2u, f2t;
  if (!user_f1.empty()) {
    nc.f2_user.emplace();
    f2u = aggregate_neighbors(params_, NodeKind::User, user_f1, &*nc.f2_user);
  }
  if (!tweet_f1.empty()) {
    nc.f2_tweet.emplace();
    f2t = aggregate_neighbors(params_, NodeKind::Tweet, tweet_f1, &*nc.f2_tweet);
  }
  attention_combine(params_, f1, f2u, f2t, &nc.attn);
  return emb_.emplace(node, std::move(nc)).first->second;
}

void BatchWorkspace::add_embedding_grad(int node, const Vec& grad) {
  auto [it, inserted] = d_emb_.try_emplace(node, Vec::Zero(params_.dim));
  it->second += grad;
}

void BatchWorkspace::backward(ModelGrad& grad) {
  std::map<int, Vec> df1;
  const auto accumulate = [&](int node, const Vec& v) {
    auto [it, inserted] = df1.try_emplace(node, Vec::Zero(params_.dim));
    it->second += v;
  };

  for (const auto& [node, d_out] : d_emb_) {
    const NodeEmbedCache& nc = emb_.at(node);
    Vec dself;
    std::vector<Vec> dcand;
    attention_backward(params_, nc.attn, d_out, dself, dcand, grad.attention);
    accumulate(node, dself + dcand[0]);
    int ci = 1;
    if (nc.f2_user) {
      const auto dx = bilstm_backward(params_.neighbor_user, *nc.f2_user, dcand[ci++],
                                      grad.neighbor_user);
      for (std::size_t pos = 0; pos < dx.size(); ++pos)
        accumulate(nc.user_neighbors[pos], dx[pos]);
    }
    if (nc.f2_tweet) {
      const auto dx = bilstm_backward(params_.neighbor_tweet, *nc.f2_tweet, dcand[ci++],
                                      grad.neighbor_tweet);
      for (std::size_t pos = 0; pos < dx.size(); ++pos)
        accumulate(nc.tweet_neighbors[pos], dx[pos]);
    }
  }
  for (const auto& [node, g] : df1) fuse_backward(params_, f1_.at(node), g, grad);
}

void BatchWorkspace::reset() {
  f1_.clear();
  emb_.clear();
  d_emb_.clear();
}

// -- training -------------------------------------------------------------------

namespace {

struct AdamState {
  ModelGrad m, v;
  std::uint64_t step = 0;
};

void adam_update(ModelParams& p, const ModelGrad& g, AdamState& st, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++st.step;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.step));

  std::vector<Eigen::Map<Eigen::VectorXd>> pm, mm, vm;
  std::vector<Eigen::Map<const Eigen::VectorXd>> gm;
  for_each_tensor(p, [&](const std::string&, Eigen::Map<Eigen::VectorXd> t) { pm.push_back(t); });
  for_each_tensor(st.m, [&](const std::string&, Eigen::Map<Eigen::VectorXd> t) { mm.push_back(t); });
  for_each_tensor(st.v, [&](const std::string&, Eigen::Map<Eigen::VectorXd> t) { vm.push_back(t); });
  for_each_tensor(static_cast<const ModelParams&>(g),
                  [&](const std::string&, Eigen::Map<const Eigen::VectorXd> t) { gm.push_back(t); });

  for (std::size_t k = 0; k < pm.size(); ++k) {
    mm[k] = b1 * mm[k] + (1.0 - b1) * gm[k];
    vm[k] = b2 * vm[k].array() + (1.0 - b2) * gm[k].array().square();
    pm[k].array() -=
        lr * (mm[k].array() / bc1) / ((vm[k].array() / bc2).sqrt() + eps);
  }
}

}  // namespace

TrainResult train(const TrainView& g, const NeighborSets& neighbors,
                  const std::vector<AttributeSet>& attrs, const EncoderConfig& enc,
                  const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || cfg.learning_rate <= 0.0 ||
      cfg.negatives_per_positive <= 0)
    throw DataError("train: invalid configuration");
  if (static_cast<int>(attrs.size()) != g.n_nodes())
    throw DataError("train: attribute list does not cover the graph");

  TrainResult result;
  result.params = init_params(cfg.dim, enc, cfg.seed);

  if (cfg.epochs > 0) {
    const auto walks = generate_walks(g, cfg.walk);
    const auto pairs = positive_pairs(walks, cfg.walk.window);
    if (pairs.empty()) throw DataError("train: no positive pairs (graph has no edges?)");

    const NegativeSampler neg_sampler(g);
    AdamState adam{zero_grad_like(result.params), zero_grad_like(result.params), 0};
    BatchWorkspace ws(result.params, attrs, neighbors);

    const std::size_t n_pairs = pairs.size();
    const std::size_t take = cfg.pairs_per_epoch > 0
                                 ? std::min<std::size_t>(n_pairs, cfg.pairs_per_epoch)
                                 : n_pairs;
    std::vector<std::size_t> order(n_pairs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng::Engine pair_gen(rng::derive(cfg.seed, "pairs", static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = 0; i < n_pairs; ++i) order[i] = i;
      // partial Fisher-Yates: the first `take` slots form the epoch sample
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng::next_below(pair_gen, n_pairs - i);
        std::swap(order[i], order[j]);
      }
      rng::Engine neg_gen(rng::derive(cfg.seed, "neg", static_cast<std::uint64_t>(epoch)));

      double loss_sum = 0.0;
      std::size_t loss_count = 0;
      for (std::size_t start = 0; start < take; start += cfg.batch_size) {
        const std::size_t end = std::min(take, start + cfg.batch_size);
        ws.reset();
        const double scale =
            1.0 / (static_cast<double>(end - start) * cfg.negatives_per_positive);
        for (std::size_t k = start; k < end; ++k) {
          const auto [v, pos] = pairs[order[k]];
          const NodeKind pos_kind = g.node_at(pos).kind;
          for (int r = 0; r < cfg.negatives_per_positive; ++r) {
            const int neg = neg_sampler.sample(pos_kind, neg_gen);
            const Vec& e_v = ws.embed(v).embedding();
            const Vec& e_pos = ws.embed(pos).embedding();
            const Vec& e_neg = ws.embed(neg).embedding();
            const TripleGrad tg = nce_backward(e_v, e_pos, e_neg, cfg.loss_sign);
            if (!std::isfinite(tg.loss))
              throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", pair " + std::to_string(k) + ", nodes (" + std::to_string(v) +
                                 ", " + std::to_string(pos) + ", " + std::to_string(neg) + ")");
            loss_sum += tg.loss;
            ++loss_count;
            ws.add_embedding_grad(v, tg.d_v * scale);
            ws.add_embedding_grad(pos, tg.d_pos * scale);
            ws.add_embedding_grad(neg, tg.d_neg * scale);
          }
        }
        ModelGrad grad = zero_grad_like(result.params);
        ws.backward(grad);
        adam_update(result.params, grad, adam, cfg.learning_rate);
      }
      result.epoch_loss.push_back(loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0);
      if (cfg.verbose)
        std::fprintf(stderr, "epoch %d/%d  mean loss %.6f\n", epoch + 1, cfg.epochs,
                     result.epoch_loss.back());
    }
  }

  result.embeddings = compute_embeddings(g, neighbors, attrs, result.params);
  return result;
}

EmbeddingTable compute_embeddings(const TrainView& g, const NeighborSets& neighbors,
                                  const std::vector<AttributeSet>& attrs,
                                  const ModelParams& params) {
  const int n = g.n_nodes();
  if (static_cast<int>(attrs.size()) != n)
    throw DataError("compute_embeddings: attribute list does not cover the graph");
  if (static_cast<int>(neighbors.per_node.size()) != n)
    throw DataError("compute_embeddings: neighbor sets do not cover the graph");

  std::vector<Vec> f1(n);
  for (int node = 0; node < n; ++node) f1[node] = fuse_attributes(params, attrs[node], nullptr);

  EmbeddingTable table;
  table.dim = params.dim;
  table.rows.resize(n, params.dim);
  table.alphas.resize(n);
  table.ids.reserve(n);
  for (int node = 0; node < n; ++node) {
    const TypedNeighbors& nbr = neighbors.per_node[node];
    std::vector<Vec> user_f1, tweet_f1;
    for (const auto& [idx, count] : nbr.users) user_f1.push_back(f1[idx]);
    for (const auto& [idx, count] : nbr.tweets) tweet_f1.push_back(f1[idx]);
    const auto f2u = aggregate_neighbors(params, NodeKind::User, user_f1, nullptr);
    const auto f2t = aggregate_neighbors(params, NodeKind::Tweet, tweet_f1, nullptr);
    AttentionCache ac;
    table.rows.row(node) =
        attention_combine(params, f1[node], f2u, f2t, &ac).transpose();
    table.alphas[node] = ac.alpha;

    const NodeId id = g.node_at(node);
    const std::string& ext =
        id.kind == NodeKind::User ? g.user(id.index).external_id : g.tweet(id.index).external_id;
    if (!table.index.emplace(ext, node).second)
      throw DataError("compute_embeddings: external id '" + ext + "' is not unique across kinds");
    table.ids.push_back(ext);
  }
  return table;
}

const Vec EmbeddingTable::row(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw DataError("embedding table: unknown id '" + id + "'");
  return rows.row(it->second).transpose();
}

// -- gradient check -------------------------------------------------------------

CheckScenario make_check_scenario(const EncoderConfig& enc, std::uint64_t seed) {
  rng::Engine gen(rng::derive(seed, "scenario"));
  const auto randvec = [&gen](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng::next_normal(gen);
    return v;
  };
  const auto user_attrs = [&](bool with_desc) {
    AttributeSet a;
    a.push_back({AttrTag::UserScalars, randvec(kScalarVecLen)});
    if (with_desc) a.push_back({AttrTag::UserDescription, randvec(enc.text_dim)});
    return a;
  };
  const auto tweet_attrs = [&](bool with_image) {
    AttributeSet a;
    a.push_back({AttrTag::TweetText, randvec(enc.text_dim)});
    if (with_image) a.push_back({AttrTag::TweetImage, randvec(enc.image_dim)});
    a.push_back({AttrTag::AuthorScalars, randvec(kScalarVecLen)});
    a.push_back({AttrTag::AuthorDescription, randvec(enc.text_dim)});
    return a;
  };

  CheckScenario s;
  s.pool = {user_attrs(true), tweet_attrs(true), user_attrs(false),
            tweet_attrs(false), user_attrs(true), tweet_attrs(false)};
  s.center = 0;
  s.positive = 1;
  s.negative = 2;
  // Node 4 neighbors two embedded nodes and node 1 is both the positive and
  // a neighbor of the center: every accumulation path gets exercised,
  // including the absent-f2 branch (node 1 has no user neighbors).
  s.user_neighbors = {{2, 4}, {}, {4}, {}, {}, {}};
  s.tweet_neighbors = {{1, 3}, {3, 5}, {5}, {}, {}, {}};
  return s;
}

double scenario_loss(const ModelParams& p, const CheckScenario& s, ModelGrad* grad,
                     LossSign sign) {
  NeighborSets ns;
  ns.per_node.resize(s.pool.size());
  for (std::size_t i = 0; i < s.pool.size(); ++i) {
    for (const int u : s.user_neighbors[i]) ns.per_node[i].users.emplace_back(u, 1);
    for (const int t : s.tweet_neighbors[i]) ns.per_node[i].tweets.emplace_back(t, 1);
  }
  BatchWorkspace ws(p, s.pool, ns);
  const Vec e_v = ws.embed(s.center).embedding();
  const Vec e_pos = ws.embed(s.positive).embedding();
  const Vec e_neg = ws.embed(s.negative).embedding();
  const TripleGrad tg = nce_backward(e_v, e_pos, e_neg, sign);
  if (grad) {
    ws.add_embedding_grad(s.center, tg.d_v);
    ws.add_embedding_grad(s.positive, tg.d_pos);
    ws.add_embedding_grad(s.negative, tg.d_neg);
    ws.backward(*grad);
  }
  return tg.loss;
}

// -- extended-precision oracle for the finite-difference side -------------------
//
// At h = 1e-5 a double-precision loss evaluation carries ~2 ulps of rounding,
// which divided by 2h is ~1e-11: over the 1e-8 denominator floor that alone
// exceeds the 1e-4 bound on entries whose true gradient is tiny (deep
// recurrent weights, and the attention head u[0..d) whenever every candidate
// at a node shares one LeakyReLU slope, a genuine softmax shift invariance).
// The analytic gradients are fine; the oracle must out-resolve them, so the
// FD side reruns the forward pass independently in long double.

namespace {

using XVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using XMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

long double xsigmoid(long double x) {
  return x >= 0.0L ? 1.0L / (1.0L + std::exp(-x)) : std::exp(x) / (1.0L + std::exp(x));
}

long double xsoftplus(long double x) {
  return x > 0.0L ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct XLstm {
  XMat w_input, w_recur;
  XVec bias;
};

struct XParams {
  int dim = 0;
  std::map<AttrTag, std::pair<XMat, XVec>> proj;
  XLstm content_f, content_b, nuser_f, nuser_b, ntweet_f, ntweet_b;
  XVec attention;
};

XParams widen(const ModelParams& p) {
  XParams x;
  x.dim = p.dim;
  for (const auto& [tag, pr] : p.projections)
    x.proj.emplace(tag, std::make_pair(pr.weight.cast<long double>().eval(),
                                       pr.bias.cast<long double>().eval()));
  const auto lstm = [](const LstmParams& l) {
    return XLstm{l.w_input.cast<long double>(), l.w_recur.cast<long double>(),
                 l.bias.cast<long double>()};
  };
  x.content_f = lstm(p.content.fwd);
  x.content_b = lstm(p.content.bwd);
  x.nuser_f = lstm(p.neighbor_user.fwd);
  x.nuser_b = lstm(p.neighbor_user.bwd);
  x.ntweet_f = lstm(p.neighbor_tweet.fwd);
  x.ntweet_b = lstm(p.neighbor_tweet.bwd);
  x.attention = p.attention.cast<long double>();
  return x;
}

XVec xbilstm(const XLstm& fp, const XLstm& bp, const std::vector<XVec>& xs) {
  const int H = static_cast<int>(fp.w_recur.cols());
  const auto L = xs.size();
  XVec pooled = XVec::Zero(2 * H);
  const auto run = [&](const XLstm& p, bool reverse, int pooled_offset) {
    XVec h = XVec::Zero(H), cell = XVec::Zero(H);
    for (std::size_t t = 0; t < L; ++t) {
      const XVec& x = xs[reverse ? L - 1 - t : t];
      const XVec z = p.w_input * x + p.w_recur * h + p.bias;
      for (int j = 0; j < H; ++j) {
        const long double i = xsigmoid(z[j]);
        const long double f = xsigmoid(z[H + j]);
        const long double g = std::tanh(z[2 * H + j]);
        const long double o = xsigmoid(z[3 * H + j]);
        cell[j] = f * cell[j] + i * g;
        h[j] = o * std::tanh(cell[j]);
      }
      pooled.segment(pooled_offset, H) += h;
    }
  };
  run(fp, false, 0);
  run(bp, true, H);
  return pooled / static_cast<long double>(L);
}

XVec xfuse(const XParams& p, const AttributeSet& attrs) {
  std::vector<XVec> xs;
  xs.reserve(attrs.size());
  for (const auto& a : attrs) {
    const auto& [w, b] = p.proj.at(a.tag);
    xs.emplace_back(w * a.value.cast<long double>() + b);
  }
  return xbilstm(p.content_f, p.content_b, xs);
}

XVec xembed(const XParams& p, const std::vector<XVec>& f1, const CheckScenario& s, int node) {
  std::vector<XVec> candidates{f1[node]};
  const auto aggregate = [&](const std::vector<int>& nbr, const XLstm& fp, const XLstm& bp) {
    if (nbr.empty()) return;
    std::vector<XVec> in;
    in.reserve(nbr.size());
    for (const int j : nbr) in.push_back(f1[j]);
    candidates.push_back(xbilstm(fp, bp, in));
  };
  aggregate(s.user_neighbors[node], p.nuser_f, p.nuser_b);
  aggregate(s.tweet_neighbors[node], p.ntweet_f, p.ntweet_b);

  const int d = p.dim;
  const int n = static_cast<int>(candidates.size());
  const long double self_part = p.attention.head(d).dot(f1[node]);
  std::vector<long double> logits(n);
  long double max_logit = -std::numeric_limits<long double>::infinity();
  for (int i = 0; i < n; ++i) {
    const long double pre = self_part + p.attention.tail(d).dot(candidates[i]);
    logits[i] = pre > 0.0L ? pre : 0.2L * pre;
    max_logit = std::max(max_logit, logits[i]);
  }
  long double z = 0.0L;
  for (int i = 0; i < n; ++i) z += std::exp(logits[i] - max_logit);
  XVec out = XVec::Zero(d);
  for (int i = 0; i < n; ++i) out += (std::exp(logits[i] - max_logit) / z) * candidates[i];
  return out;
}

long double xscenario_loss(const ModelParams& dp, const CheckScenario& s) {
  const XParams p = widen(dp);
  std::vector<XVec> f1(s.pool.size());
  for (std::size_t i = 0; i < s.pool.size(); ++i) f1[i] = xfuse(p, s.pool[i]);
  const XVec e_v = xembed(p, f1, s, s.center);
  const XVec e_pos = xembed(p, f1, s, s.positive);
  const XVec e_neg = xembed(p, f1, s, s.negative);
  return xsoftplus(-e_pos.dot(e_v)) + xsoftplus(e_neg.dot(e_v));
}

}  // namespace

double gradient_check(const ModelParams& p, const CheckScenario& s, double h,
                      const std::function<bool(const std::string&)>& filter) {
  ModelGrad analytic = zero_grad_like(p);
  scenario_loss(p, s, &analytic, LossSign::Standard);

  std::map<std::string, Vec> analytic_by_name;
  for_each_tensor(static_cast<const ModelParams&>(analytic),
                  [&](const std::string& name, Eigen::Map<const Eigen::VectorXd> t) {
                    analytic_by_name.emplace(name, t);
                  });

  ModelParams probe = p;
  double worst = 0.0;
  for_each_tensor(probe, [&](const std::string& name, Eigen::Map<Eigen::VectorXd> t) {
    if (filter && !filter(name)) return;
    const Vec& a = analytic_by_name.at(name);
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      const double saved = t[k];
      t[k] = saved + h;
      const long double up = xscenario_loss(probe, s);
      t[k] = saved - h;
      const long double down = xscenario_loss(probe, s);
      t[k] = saved;
      const double fd = static_cast<double>((up - down) / (2.0L * static_cast<long double>(h)));
      const double rel = std::abs(a[k] - fd) / std::max(1e-8, std::abs(a[k]) + std::abs(fd));
      worst = std::max(worst, rel);
    }
  });
  return worst;
}

// -- persistence ------------------------------------------------------------------

void export_embeddings(const EmbeddingTable& table, const std::string& path) {
  io::write_vector_table(path, table.ids, table.rows);
}

EmbeddingTable import_embeddings(const std::string& path) {
  const io::VectorTable vt = io::read_vector_table(path);
  EmbeddingTable t;
  t.dim = vt.dim;
  t.ids = vt.ids;
  t.index = vt.index;
  t.rows = vt.rows;
  return t;
}

namespace {

constexpr char kCheckpointMagic[8] = {'B', 'G', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError(std::string("checkpoint: truncated reading ") + what);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const EncoderConfig& enc, std::uint64_t seed,
                     const std::string& config_echo) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put(out, static_cast<std::int32_t>(params.dim));
  put(out, static_cast<std::int32_t>(enc.text_dim));
  put(out, static_cast<std::int32_t>(enc.image_dim));
  put(out, enc.hash_seed);
  put(out, seed);
  put(out, static_cast<std::uint64_t>(config_echo.size()));
  out.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));

  std::uint32_t n_tensors = 0;
  for_each_tensor(params, [&](const std::string&, Eigen::Map<const Eigen::VectorXd>) { ++n_tensors; });
  put(out, n_tensors);
  for_each_tensor(params, [&](const std::string& name, Eigen::Map<const Eigen::VectorXd> t) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(out, static_cast<std::uint64_t>(t.size()));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  });
  if (!out) throw ParseError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw ParseError("checkpoint: bad magic in " + path);

  Checkpoint ck;
  const auto dim = get<std::int32_t>(in, "dim");
  ck.enc.text_dim = get<std::int32_t>(in, "text_dim");
  ck.enc.image_dim = get<std::int32_t>(in, "image_dim");
  ck.enc.hash_seed = get<std::uint64_t>(in, "hash_seed");
  ck.seed = get<std::uint64_t>(in, "seed");
  const auto echo_len = get<std::uint64_t>(in, "config length");
  ck.config_echo.resize(echo_len);
  in.read(ck.config_echo.data(), static_cast<std::streamsize>(echo_len));
  if (!in) throw ParseError("checkpoint: truncated config echo");

  ck.params = init_params(dim, ck.enc, 0);
  const auto n_tensors = get<std::uint32_t>(in, "tensor count");
  std::map<std::string, Vec> loaded;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto name_len = get<std::uint32_t>(in, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto count = get<std::uint64_t>(in, "tensor size");
    Vec v(static_cast<Eigen::Index>(count));
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ParseError("checkpoint: truncated tensor " + name);
    loaded.emplace(std::move(name), std::move(v));
  }
  for_each_tensor(ck.params, [&](const std::string& name, Eigen::Map<Eigen::VectorXd> t) {
    auto it = loaded.find(name);
    if (it == loaded.end()) throw DataError("checkpoint: missing tensor " + name);
    if (it->second.size() != t.size())
      throw DataError("checkpoint: tensor " + name + " has size " +
                      std::to_string(it->second.size()) + ", expected " +
                      std::to_string(t.size()));
    t = it->second;
  });
  return ck;
}

}  // namespace bigraph
