#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bigraph/analysis.hpp"
#include "bigraph/baselines.hpp"
#include "bigraph/io.hpp"
#include "bigraph/model.hpp"
#include "bigraph/pipeline.hpp"
#include "bigraph/rng.hpp"
#include "bigraph/sampling.hpp"
#include "bigraph/synth.hpp"

namespace fs = std::filesystem;
using namespace bigraph;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

/// Digests of whichever dataset files are present, for the run manifest.
std::map<std::string, std::string> dataset_inputs(const std::string& dir) {
  std::map<std::string, std::string> m;
  for (const char* name : {"users.jsonl", "tweets.jsonl", "edges.jsonl", "labels.jsonl",
                           "text_vectors.tsv", "image_vectors.tsv"}) {
    const auto p = fs::path(dir) / name;
    if (fs::exists(p)) m[name] = io::file_digest(p.string());
  }
  return m;
}

void add_encoder_options(CLI::App* sub, EncoderConfig& enc) {
  sub->add_option("--text-dim", enc.text_dim, "text vector dimension");
  sub->add_option("--image-dim", enc.image_dim, "image vector dimension");
  sub->add_option("--hash-seed", enc.hash_seed, "seed for the hashing text encoder");
}

void add_walk_options(CLI::App* sub, WalkConfig& walk) {
  sub->add_option("--walk-length", walk.walk_length, "steps per restart walk");
  sub->add_option("--window", walk.window, "co-occurrence window for positive pairs");
  sub->add_option("--walks-per-node", walk.walks_per_node, "restart walks per node");
  sub->add_option("--restart", walk.restart_prob, "restart probability");
  sub->add_option("--topk-user", walk.topk_user, "user neighbors kept per node");
  sub->add_option("--topk-tweet", walk.topk_tweet, "tweet neighbors kept per node");
}

void encoder_config_entries(std::map<std::string, std::string>& m, const EncoderConfig& enc) {
  m["text-dim"] = fmt(enc.text_dim);
  m["image-dim"] = fmt(enc.image_dim);
  m["hash-seed"] = fmt(enc.hash_seed);
}

void walk_config_entries(std::map<std::string, std::string>& m, const WalkConfig& walk) {
  m["walk-length"] = fmt(walk.walk_length);
  m["window"] = fmt(walk.window);
  m["walks-per-node"] = fmt(walk.walks_per_node);
  m["restart"] = fmt(walk.restart_prob);
  m["topk-user"] = fmt(walk.topk_user);
  m["topk-tweet"] = fmt(walk.topk_tweet);
}

void write_metrics(const std::string& out_dir, const MetricReport& report) {
  fs::create_directories(out_dir);
  io::write_text_file((fs::path(out_dir) / "metrics.txt").string(), report.to_text());
  io::write_text_file((fs::path(out_dir) / "metrics.json").string(), report.to_json());
}

std::map<CLI::App*, std::string> g_config_paths;

CLI::App* make_subcommand(CLI::App& app, const std::string& name, const std::string& help) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", g_config_paths[sub],
                  "key=value file merged under the flags; flags win");
  return sub;
}

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return std::isspace(c) == 0; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

/// Applies key=value lines to options the command line left unset.
/// Unknown keys and unparseable values are usage errors.
bool apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "cannot open config file: %s\n", path.c_str());
    return false;
  }
  std::string line;
  for (long long lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "%s:%lld: expected key=value\n", path.c_str(), lineno);
      return false;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      std::fprintf(stderr, "%s:%lld: unknown config key '%s'\n", path.c_str(), lineno,
                   key.c_str());
      return false;
    }
    if (opt->count() > 0) continue;  // flags win
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      std::fprintf(stderr, "%s:%lld: bad value for '%s': %s\n", path.c_str(), lineno,
                   key.c_str(), e.what());
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bipartite user-tweet graph embeddings and polarization analysis"};
  app.require_subcommand(1);
  std::function<int()> action;

  // synth ---------------------------------------------------------------
  auto* synth = make_subcommand(app, "synth", "generate a two-community synthetic dataset");
  std::string synth_out, synth_profile = "small";
  std::uint64_t synth_seed = 0;
  SynthConfig synth_override;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--profile", synth_profile, "size profile")
      ->check(CLI::IsMember({"small", "medium"}));
  synth->add_option("--seed", synth_seed, "root seed");
  synth->add_option("--users-per-community", synth_override.users_per_community);
  synth->add_option("--tweets-per-community", synth_override.tweets_per_community);
  synth->add_option("--p-in", synth_override.p_in, "same-community interaction probability");
  synth->add_option("--p-out", synth_override.p_out, "cross-community interaction probability");
  synth->add_option("--content-signal", synth_override.content_signal,
                    "share of community-specific tokens");
  synth->add_option("--image-fraction", synth_override.image_fraction);
  synth->add_option("--text-dim", synth_override.text_dim);
  synth->add_option("--image-dim", synth_override.image_dim);
  synth->add_option("--hash-seed", synth_override.hash_seed);
  synth->callback([&] {
    action = [&]() -> int {
      SynthConfig cfg =
          synth_profile == "medium" ? synth_profile_medium() : synth_profile_small();
      cfg.seed = synth_seed;
      if (synth->count("--users-per-community"))
        cfg.users_per_community = synth_override.users_per_community;
      if (synth->count("--tweets-per-community"))
        cfg.tweets_per_community = synth_override.tweets_per_community;
      if (synth->count("--p-in")) cfg.p_in = synth_override.p_in;
      if (synth->count("--p-out")) cfg.p_out = synth_override.p_out;
      if (synth->count("--content-signal")) cfg.content_signal = synth_override.content_signal;
      if (synth->count("--image-fraction")) cfg.image_fraction = synth_override.image_fraction;
      if (synth->count("--text-dim")) cfg.text_dim = synth_override.text_dim;
      if (synth->count("--image-dim")) cfg.image_dim = synth_override.image_dim;
      if (synth->count("--hash-seed")) cfg.hash_seed = synth_override.hash_seed;

      const SynthSummary s = synth_generate(cfg, synth_out);
      std::map<std::string, std::string> c{
          {"profile", synth_profile},
          {"seed", fmt(cfg.seed)},
          {"users-per-community", fmt(cfg.users_per_community)},
          {"tweets-per-community", fmt(cfg.tweets_per_community)},
          {"p-in", fmt(cfg.p_in)},
          {"p-out", fmt(cfg.p_out)},
          {"content-signal", fmt(cfg.content_signal)},
          {"image-fraction", fmt(cfg.image_fraction)},
          {"text-dim", fmt(cfg.text_dim)},
          {"image-dim", fmt(cfg.image_dim)},
          {"hash-seed", fmt(cfg.hash_seed)},
      };
      io::write_manifest(synth_out, "synth", c, {});
      std::printf("users %d tweets %d edges %d cross-edges %d\n", s.n_users, s.n_tweets,
                  s.n_edges, s.n_cross_edges);
      return 0;
    };
  });

  // ingest --------------------------------------------------------------
  auto* ingest = make_subcommand(app, "ingest", "load, validate and summarize a dataset");
  std::string ingest_data, ingest_out;
  EncoderConfig ingest_enc;
  ingest->add_option("--data", ingest_data, "dataset directory")->required();
  ingest->add_option("--out", ingest_out, "where to write the canonical graph dump");
  add_encoder_options(ingest, ingest_enc);
  ingest->callback([&] {
    action = [&]() -> int {
      const LoadedData data = load_data_dir(ingest_data, ingest_enc);
      int synthetic = 0;
      for (const auto& u : data.graph.users) synthetic += u.synthetic ? 1 : 0;
      if (!ingest_out.empty()) {
        fs::create_directories(ingest_out);
        std::ostringstream dump;
        serialize_graph(data.graph, dump);
        io::write_text_file((fs::path(ingest_out) / "graph.txt").string(), dump.str());
        std::map<std::string, std::string> c;
        encoder_config_entries(c, ingest_enc);
        io::write_manifest(ingest_out, "ingest", c, dataset_inputs(ingest_data));
      }
      std::printf("users %d tweets %d edges %zu labels %zu synthetic-authors %d\n",
                  data.graph.n_users(), data.graph.n_tweets(), data.graph.n_edges(),
                  data.graph.label_map.size(), synthetic);
      return 0;
    };
  });

  // sample --------------------------------------------------------------
  auto* sample = make_subcommand(app, "sample", "random-walk neighbor sets");
  std::string sample_data, sample_out;
  std::uint64_t sample_seed = 0;
  EncoderConfig sample_enc;
  WalkConfig sample_walk;
  sample->add_option("--data", sample_data, "dataset directory")->required();
  sample->add_option("--out", sample_out, "output directory")->required();
  sample->add_option("--seed", sample_seed, "root seed");
  add_encoder_options(sample, sample_enc);
  add_walk_options(sample, sample_walk);
  sample->callback([&] {
    action = [&]() -> int {
      const LoadedData data = load_data_dir(sample_data, sample_enc);
      WalkConfig walk = sample_walk;
      walk.seed = rng::derive(sample_seed, "walk");  // the derivation train uses
      TrainView view(data.graph);
      const NeighborSets sets = build_neighbor_sets(view, walk);

      fs::create_directories(sample_out);
      std::ofstream out(fs::path(sample_out) / "neighbors.tsv");
      if (!out) throw ParseError("cannot write under " + sample_out);
      for (int i = 0; i < view.n_nodes(); ++i) {
        const auto write_side = [&](const char* kind,
                                    const std::vector<std::pair<int, int>>& entries) {
          out << data.graph.external_id(view.node_at(i)) << '\t' << kind << '\t';
          for (std::size_t j = 0; j < entries.size(); ++j) {
            if (j) out << ',';
            out << data.graph.external_id(view.node_at(entries[j].first)) << ':'
                << entries[j].second;
          }
          out << '\n';
        };
        write_side("user", sets.per_node[i].users);
        write_side("tweet", sets.per_node[i].tweets);
      }
      out.close();

      std::map<std::string, std::string> c{{"seed", fmt(sample_seed)}};
      encoder_config_entries(c, sample_enc);
      walk_config_entries(c, sample_walk);
      io::write_manifest(sample_out, "sample", c, dataset_inputs(sample_data));
      std::printf("nodes %d neighbors %s/neighbors.tsv\n", view.n_nodes(), sample_out.c_str());
      return 0;
    };
  });

  // train ---------------------------------------------------------------
  auto* train_cmd = make_subcommand(app, "train", "learn node embeddings");
  std::string train_data, train_out, train_loss_sign = "standard";
  EncoderConfig train_enc;
  TrainConfig train_cfg;
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_option("--seed", train_cfg.seed, "root seed");
  train_cmd->add_option("--dim", train_cfg.dim, "embedding dimension (even)");
  train_cmd->add_option("--epochs", train_cfg.epochs);
  train_cmd->add_option("--batch-size", train_cfg.batch_size);
  train_cmd->add_option("--lr", train_cfg.learning_rate);
  train_cmd->add_option("--pairs-per-epoch", train_cfg.pairs_per_epoch,
                        "triples per epoch, 0 = full pool");
  train_cmd->add_option("--negatives", train_cfg.negatives_per_positive);
  train_cmd->add_option("--loss-sign", train_loss_sign, "standard or paper-literal")
      ->check(CLI::IsMember({"standard", "paper-literal"}));
  train_cmd->add_flag("--verbose", train_cfg.verbose, "per-epoch loss on stderr");
  add_encoder_options(train_cmd, train_enc);
  add_walk_options(train_cmd, train_cfg.walk);
  train_cmd->callback([&] {
    action = [&]() -> int {
      train_cfg.loss_sign =
          train_loss_sign == "paper-literal" ? LossSign::PaperLiteral : LossSign::Standard;
      const LoadedData data = load_data_dir(train_data, train_enc);
      const TrainOutputs outs = run_training(data, train_cfg, train_out);

      std::ostringstream log;
      for (std::size_t e = 0; e < outs.result.epoch_loss.size(); ++e)
        log << "epoch " << e << " loss " << fmt(outs.result.epoch_loss[e]) << '\n';
      io::write_text_file((fs::path(train_out) / "train_log.txt").string(), log.str());

      std::map<std::string, std::string> c{
          {"seed", fmt(train_cfg.seed)},       {"dim", fmt(train_cfg.dim)},
          {"epochs", fmt(train_cfg.epochs)},   {"batch-size", fmt(train_cfg.batch_size)},
          {"lr", fmt(train_cfg.learning_rate)}, {"pairs-per-epoch", fmt(train_cfg.pairs_per_epoch)},
          {"negatives", fmt(train_cfg.negatives_per_positive)},
          {"loss-sign", train_loss_sign},
      };
      encoder_config_entries(c, train_enc);
      walk_config_entries(c, train_cfg.walk);
      io::write_manifest(train_out, "train", c, dataset_inputs(train_data));

      if (outs.result.epoch_loss.empty())
        std::printf("epochs 0 embeddings %s\n", outs.embeddings_path.c_str());
      else
        std::printf("epochs %d final-loss %.6f embeddings %s\n", train_cfg.epochs,
                    outs.result.epoch_loss.back(), outs.embeddings_path.c_str());
      return 0;
    };
  });

  // embed ---------------------------------------------------------------
  auto* embed = make_subcommand(app, "embed", "embeddings from a saved checkpoint");
  std::string embed_ckpt, embed_data, embed_out;
  WalkConfig embed_walk;
  embed->add_option("--checkpoint", embed_ckpt, "checkpoint.bin from train")->required();
  embed->add_option("--data", embed_data, "dataset directory")->required();
  embed->add_option("--out", embed_out, "output directory")->required();
  add_walk_options(embed, embed_walk);
  embed->callback([&] {
    action = [&]() -> int {
      const Checkpoint ckpt = load_checkpoint(embed_ckpt);
      const LoadedData data = load_data_dir(embed_data, ckpt.enc);
      WalkConfig walk = embed_walk;
      walk.seed = rng::derive(ckpt.seed, "walk");
      TrainView view(data.graph);
      const NeighborSets sets = build_neighbor_sets(view, walk);
      const EmbeddingTable table = compute_embeddings(view, sets, data.attrs, ckpt.params);

      fs::create_directories(embed_out);
      const std::string path = (fs::path(embed_out) / "embeddings.tsv").string();
      export_embeddings(table, path);

      std::map<std::string, std::string> c{{"checkpoint-seed", fmt(ckpt.seed)}};
      walk_config_entries(c, embed_walk);
      auto inputs = dataset_inputs(embed_data);
      inputs["checkpoint.bin"] = io::file_digest(embed_ckpt);
      io::write_manifest(embed_out, "embed", c, inputs);
      std::printf("embedded %zu nodes dim %d into %s\n", table.ids.size(), table.dim,
                  path.c_str());
      return 0;
    };
  });

  // baseline ------------------------------------------------------------
  auto* baseline = make_subcommand(app, "baseline", "evaluate a comparison variant");
  std::string base_data, base_out, base_variant, base_model = "logreg";
  std::uint64_t base_seed = 0;
  int base_k = 10;
  EncoderConfig base_enc;
  GcnConfig base_gcn;
  baseline->add_option("--data", base_data, "dataset directory")->required();
  baseline
      ->add_option("--variant", base_variant,
                   "userinfo|textual|visual|tv|utv|latefusion|gcn")
      ->required();
  baseline->add_option("--model", base_model, "classifier")
      ->check(CLI::IsMember({"logreg", "rf"}));
  baseline->add_option("--k", base_k, "cross-validation folds");
  baseline->add_option("--seed", base_seed, "root seed");
  baseline->add_option("--out", base_out, "optional metrics directory");
  baseline->add_option("--gcn-steps", base_gcn.steps);
  baseline->add_option("--gcn-lr", base_gcn.learning_rate);
  baseline->add_option("--gcn-dim", base_gcn.output_dim);
  baseline->add_option("--gcn-batch", base_gcn.batch_pairs);
  add_encoder_options(baseline, base_enc);
  baseline->callback([&] {
    action = [&]() -> int {
      const BaselineVariant variant = baseline_variant_from_string(base_variant);
      const LoadedData data = load_data_dir(base_data, base_enc);
      const BaselineInputs inputs = make_baseline_inputs(data.graph, data.norm, data.enc);
      CvConfig cv;
      cv.model = base_model == "rf" ? ClassifierKind::RandomForest : ClassifierKind::LogReg;
      cv.k = base_k;
      cv.seed = base_seed;
      GcnConfig gcn = base_gcn;
      gcn.hidden_dim = base_gcn.output_dim;
      gcn.seed = rng::derive(base_seed, "gcn");
      const MetricReport report = evaluate_baseline(variant, inputs, cv, gcn);
      std::fputs(report.to_text().c_str(), stdout);
      if (!base_out.empty()) {
        write_metrics(base_out, report);
        std::map<std::string, std::string> c{
            {"variant", base_variant}, {"model", base_model},
            {"k", fmt(base_k)},        {"seed", fmt(base_seed)},
            {"gcn-steps", fmt(base_gcn.steps)}, {"gcn-lr", fmt(base_gcn.learning_rate)},
            {"gcn-dim", fmt(base_gcn.output_dim)}, {"gcn-batch", fmt(base_gcn.batch_pairs)},
        };
        encoder_config_entries(c, base_enc);
        io::write_manifest(base_out, "baseline", c, dataset_inputs(base_data));
      }
      return 0;
    };
  });

  // evaluate ------------------------------------------------------------
  auto* evaluate = make_subcommand(app, "evaluate", "cross-validate exported embeddings");
  std::string eval_embeddings, eval_data, eval_out, eval_model = "logreg";
  std::uint64_t eval_seed = 0;
  int eval_k = 10;
  EncoderConfig eval_enc;
  evaluate->add_option("--embeddings", eval_embeddings, "embeddings.tsv")->required();
  evaluate->add_option("--data", eval_data, "dataset directory with labels")->required();
  evaluate->add_option("--model", eval_model, "classifier")
      ->check(CLI::IsMember({"logreg", "rf"}));
  evaluate->add_option("--k", eval_k, "cross-validation folds");
  evaluate->add_option("--seed", eval_seed, "root seed");
  evaluate->add_option("--out", eval_out, "optional metrics directory");
  add_encoder_options(evaluate, eval_enc);
  evaluate->callback([&] {
    action = [&]() -> int {
      const EmbeddingTable table = import_embeddings(eval_embeddings);
      const LoadedData data = load_data_dir(eval_data, eval_enc);
      CvConfig cv;
      cv.model = eval_model == "rf" ? ClassifierKind::RandomForest : ClassifierKind::LogReg;
      cv.k = eval_k;
      cv.seed = eval_seed;
      const MetricReport report = evaluate_embeddings(data.graph, table, cv);
      std::fputs(report.to_text().c_str(), stdout);
      if (!eval_out.empty()) {
        write_metrics(eval_out, report);
        std::map<std::string, std::string> c{
            {"model", eval_model}, {"k", fmt(eval_k)}, {"seed", fmt(eval_seed)}};
        encoder_config_entries(c, eval_enc);
        auto in = dataset_inputs(eval_data);
        in["embeddings.tsv"] = io::file_digest(eval_embeddings);
        io::write_manifest(eval_out, "evaluate", c, in);
      }
      return 0;
    };
  });

  // analyze -------------------------------------------------------------
  auto* analyze = make_subcommand(app, "analyze", "cluster users and describe the clusters");
  std::string an_embeddings, an_data, an_out;
  std::uint64_t an_seed = 0;
  int an_kmin = 2, an_kmax = 8, an_topwords = 25;
  EncoderConfig an_enc;
  analyze->add_option("--embeddings", an_embeddings, "embeddings.tsv")->required();
  analyze->add_option("--data", an_data, "dataset directory")->required();
  analyze->add_option("--out", an_out, "output directory")->required();
  analyze->add_option("--k-min", an_kmin);
  analyze->add_option("--k-max", an_kmax);
  analyze->add_option("--seed", an_seed, "root seed");
  analyze->add_option("--top-words", an_topwords, "words kept per cluster");
  add_encoder_options(analyze, an_enc);
  analyze->callback([&] {
    action = [&]() -> int {
      const EmbeddingTable table = import_embeddings(an_embeddings);
      const LoadedData data = load_data_dir(an_data, an_enc);
      const auto& g = data.graph;

      Mat X(g.n_users(), table.dim);
      for (int i = 0; i < g.n_users(); ++i)
        X.row(i) = table.row(g.users[i].external_id).transpose();
      std::vector<double> scores(g.n_users(), std::numeric_limits<double>::quiet_NaN());
      for (const auto& [idx, score] : g.score_map) scores[idx] = score;

      const ClusterReport rep = cluster_embeddings(X, an_kmin, an_kmax, an_seed, scores);
      const auto activity = activity_stat(g, rep.assignment, rep.chosen_k);
      const Projection2D proj = project_2d(X);

      std::vector<std::vector<WordCount>> words(rep.chosen_k);
      for (int cl = 0; cl < rep.chosen_k; ++cl) {
        std::vector<std::string> docs;
        for (int i = 0; i < g.n_users(); ++i)
          if (rep.assignment[i] == cl && g.users[i].description_text)
            docs.push_back(*g.users[i].description_text);
        words[cl] = word_frequency(docs, default_stopwords(), an_topwords);
      }

      fs::create_directories(an_out);
      nlohmann::json j;
      j["chosen_k"] = rep.chosen_k;
      j["degenerate"] = rep.degenerate;
      for (const auto& [k, s] : rep.silhouette_by_k)
        j["silhouette_by_k"].push_back({{"k", k}, {"silhouette", s}});
      j["cluster_sizes"] = rep.cluster_sizes;
      for (int cl = 0; cl < rep.chosen_k; ++cl) {
        nlohmann::json cj;
        cj["size"] = rep.cluster_sizes[cl];
        cj["mean_score"] = std::isnan(rep.mean_scores[cl])
                               ? nlohmann::json()
                               : nlohmann::json(rep.mean_scores[cl]);
        cj["activity"] = activity[cl] ? nlohmann::json(*activity[cl]) : nlohmann::json();
        for (const auto& w : words[cl])
          cj["top_words"].push_back({{"word", w.word}, {"count", w.count}});
        j["clusters"].push_back(cj);
      }
      io::write_text_file((fs::path(an_out) / "clusters.json").string(), j.dump(2) + "\n");

      std::ofstream coords(fs::path(an_out) / "coords.tsv");
      if (!coords) throw ParseError("cannot write under " + an_out);
      for (int i = 0; i < g.n_users(); ++i) {
        coords << g.users[i].external_id << '\t' << fmt(proj.coords(i, 0)) << '\t'
               << fmt(proj.coords(i, 1)) << '\t' << rep.assignment[i] << '\t';
        if (std::isnan(scores[i]))
          coords << "nan";
        else
          coords << fmt(scores[i]);
        coords << '\n';
      }
      coords.close();

      std::map<std::string, std::string> c{{"k-min", fmt(an_kmin)},
                                           {"k-max", fmt(an_kmax)},
                                           {"seed", fmt(an_seed)},
                                           {"top-words", fmt(an_topwords)}};
      encoder_config_entries(c, an_enc);
      auto in = dataset_inputs(an_data);
      in["embeddings.tsv"] = io::file_digest(an_embeddings);
      io::write_manifest(an_out, "analyze", c, in);

      double chosen_sil = 0.0;
      for (const auto& [k, s] : rep.silhouette_by_k)
        if (k == rep.chosen_k) chosen_sil = s;
      std::printf("clusters %d silhouette %.4f%s\n", rep.chosen_k, chosen_sil,
                  rep.degenerate ? " (degenerate)" : "");
      return 0;
    };
  });

  // gradcheck -----------------------------------------------------------
  auto* gradcheck = make_subcommand(app, "gradcheck", "finite-difference gradient check");
  std::uint64_t gc_seed = 0;
  int gc_dim = 8;
  double gc_h = 1e-5, gc_threshold = 1e-4;
  EncoderConfig gc_enc;
  gc_enc.text_dim = 12;
  gc_enc.image_dim = 16;
  gradcheck->add_option("--seed", gc_seed, "root seed");
  gradcheck->add_option("--dim", gc_dim, "embedding dimension (even)");
  gradcheck->add_option("--step", gc_h, "finite-difference step");
  gradcheck->add_option("--threshold", gc_threshold, "max relative error accepted");
  add_encoder_options(gradcheck, gc_enc);
  gradcheck->callback([&] {
    action = [&]() -> int {
      const ModelParams params = init_params(gc_dim, gc_enc, rng::derive(gc_seed, "params"));
      const CheckScenario scenario = make_check_scenario(gc_enc, rng::derive(gc_seed, "scenario"));
      const double err = gradient_check(params, scenario, gc_h);
      std::printf("max relative error %.3e (threshold %.1e)\n", err, gc_threshold);
      if (!(err <= gc_threshold)) {
        std::fprintf(stderr, "gradient check failed\n");
        return 3;
      }
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    const auto it = g_config_paths.find(sub);
    if (it != g_config_paths.end() && !it->second.empty() && !apply_config(sub, it->second))
      return 1;
  }

  try {
    return action ? action() : 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
