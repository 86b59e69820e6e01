#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "synsrl/kernels/kernels.hpp"
#include "synsrl/train/trainer.hpp"

namespace {

using namespace synsrl;

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  file.open(path);
  if (!file) throw IoError("cannot write " + path);
  return file;
}

void apply_reprs(model::ModelConfig& cfg,
                 const std::vector<std::string>& reprs) {
  cfg.use_dep = cfg.use_rel = cfg.use_deppath = cfg.use_relpath = false;
  for (const std::string& r : reprs) {
    if (r == "dep") {
      cfg.use_dep = true;
    } else if (r == "rel") {
      cfg.use_rel = true;
    } else if (r == "deppath") {
      cfg.use_deppath = true;
    } else if (r == "relpath") {
      cfg.use_relpath = true;
    } else {
      throw ConfigError("unknown representation: " + r);
    }
  }
}

struct PathsCli {
  std::string input;
  std::string trees = "gold";
  std::string output = "-";
};

int cmd_paths(const PathsCli& o) {
  const auto corpus = conll::read_corpus(o.input);
  const auto spec = pipeline::tree_spec_from_flag(o.trees);
  const auto tree_corpus = pipeline::load_tree_corpus(spec);
  std::ofstream file;
  std::ostream& out = open_out(o.output, file);
  for (size_t si = 0; si < corpus.size(); ++si) {
    const syntax::PrunedTree tree = pipeline::resolve_tree(
        corpus[si], spec, tree_corpus ? &*tree_corpus : nullptr, si);
    for (const std::string& rec :
         pipeline::path_records(corpus[si], tree, si + 1)) {
      out << rec << "\n";
    }
  }
  return 0;
}

struct TrainCli {
  std::string train_path;
  std::string dev_path;
  std::string trees = "gold";
  std::string dev_trees;  // empty = same as trees
  std::string mode = "none";
  std::vector<std::string> reprs;
  std::string config_path;
  std::string model_path;
  std::string log_path = "-";
  std::string resume;
  std::string precision = "f64";
  uint64_t seed = 1;
  int64_t steps = 200000;
  int64_t eval_every = 100;
  int64_t batch_words = 4096;
  double stop_dev_f1 = -1.0;
  bool include_senses = false;
  bool mode_seen = false;
  bool reprs_seen = false;
};

int cmd_train(const TrainCli& o) {
  const auto train_corpus = conll::read_corpus(o.train_path);
  const auto dev_corpus = conll::read_corpus(o.dev_path);

  model::ModelConfig cfg;
  if (!o.config_path.empty()) {
    cfg = model::config_from_kv(model::read_kv_file(o.config_path));
  }
  if (o.mode_seen || o.config_path.empty()) {
    cfg.mode = model::mode_from_name(o.mode);
  }
  if (o.reprs_seen || o.config_path.empty()) apply_reprs(cfg, o.reprs);

  train::TrainSchedule sched;
  sched.max_steps = o.steps;
  sched.eval_every = o.eval_every;
  sched.word_budget = o.batch_words;
  sched.seed = o.seed;
  sched.model_path = o.model_path;
  sched.resume_path = o.resume;
  sched.stop_at_dev_f1 = o.stop_dev_f1;
  sched.exclude_pred_sense = !o.include_senses;

  const auto train_spec = pipeline::tree_spec_from_flag(o.trees);
  const auto dev_spec = pipeline::tree_spec_from_flag(
      o.dev_trees.empty() ? o.trees : o.dev_trees);

  std::ofstream file;
  std::ostream& log = open_out(o.log_path, file);
  train::TrainResult res;
  if (o.precision == "f64") {
    res = train::train<double>(train_corpus, train_spec, dev_corpus,
                               dev_spec, cfg, sched, log);
  } else if (o.precision == "f32") {
    res = train::train<float>(train_corpus, train_spec, dev_corpus, dev_spec,
                              cfg, sched, log);
  } else {
    throw ConfigError("precision must be f64 or f32, got " + o.precision);
  }
  std::cerr << "done steps=" << res.steps << " best_step=" << res.best_step
            << " best_dev_F1=" << train::fmt_g(res.best_f1) << "\n";
  return 0;
}

struct PredictCli {
  std::string input;
  std::string model;
  std::string output;
  std::string trees;
};

template <class T>
void run_predict(const pipeline::LoadedManifest& m,
                 const std::vector<conll::Sentence>& corpus,
                 const pipeline::TreeSpec& spec,
                 const std::vector<conll::Sentence>* tree_corpus,
                 const PredictCli& o) {
  model::Params<T> params = model::init_params<T>(m.cfg, m.vocabs, 0);
  pipeline::params_from_archive(nn::Archive::load(o.model), params);
  const auto feats =
      pipeline::featurize_corpus(corpus, m.cfg, spec, tree_corpus, m.vocabs);
  conll::write_corpus(
      o.output, train::predict_corpus(corpus, feats, m.cfg, params, m.vocabs));
}

int cmd_predict(const PredictCli& o) {
  const auto m = pipeline::load_manifest_and_vocabs(o.model);
  const auto corpus = conll::read_corpus(o.input);
  pipeline::TreeSpec spec = pipeline::tree_spec_from_flag("gold");
  std::optional<std::vector<conll::Sentence>> tree_corpus;
  if (m.cfg.needs_tree()) {
    if (o.trees.empty()) {
      throw ConfigError(std::string("model mode ") +
                        model::mode_name(m.cfg.mode) +
                        " uses syntax; pass --trees");
    }
    spec = pipeline::tree_spec_from_flag(o.trees);
    tree_corpus = pipeline::load_tree_corpus(spec);
  }
  const auto* tp = tree_corpus ? &*tree_corpus : nullptr;
  if (m.precision == "f64") {
    run_predict<double>(m, corpus, spec, tp, o);
  } else {
    run_predict<float>(m, corpus, spec, tp, o);
  }
  return 0;
}

struct ScoreCli {
  std::string gold;
  std::string pred;
  bool include_senses = false;
};

int cmd_score(const ScoreCli& o) {
  const auto gold = conll::read_corpus(o.gold);
  const auto pred = conll::read_corpus(o.pred);
  const conll::ScoreReport r = conll::score(gold, pred, !o.include_senses);
  std::cout << conll::human_report(r);
  std::cout << conll::machine_line(r) << "\n";
  return 0;
}

struct InspectCli {
  std::string input;
  std::string model;
  std::string trees;
  std::string output;
  int block = 1;
  int head = 0;
  int sentence = 0;
  int predicate = 0;
};

template <class T>
void run_inspect(const pipeline::LoadedManifest& m,
                 const conll::Sentence& sentence,
                 const model::InstanceFeatures& feat, const InspectCli& o) {
  model::Params<T> params = model::init_params<T>(m.cfg, m.vocabs, 0);
  pipeline::params_from_archive(nn::Archive::load(o.model), params);
  model::AttnCapture<T> cap;
  cap.block = o.block;
  cap.head = o.head;
  Rng scratch(0);
  model::forward<T>(feat, m.cfg, params, false, scratch,
                    static_cast<nn::Tape<T>*>(nullptr), &cap);
  if (!cap.captured) {
    throw ConfigError("no attention head at block " + std::to_string(o.block) +
                      " head " + std::to_string(o.head));
  }
  const int n = cap.n;
  std::printf("block=%d head=%d kind=%s n=%d\n", o.block, o.head,
              cap.lisa ? "one-hot" : "softmax", n);
  for (int i = 0; i < n; ++i) {
    std::printf("%-12s", sentence.tokens[static_cast<size_t>(i)].form.c_str());
    for (int j = 0; j < n; ++j) {
      std::printf(" %8.4f",
                  static_cast<double>(cap.weights[static_cast<size_t>(i) * n +
                                                  static_cast<size_t>(j)]));
    }
    std::printf("\n");
  }
  if (!o.output.empty()) {
    std::ofstream f(o.output);
    if (!f) throw IoError("cannot write " + o.output);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j) f << '\t';
        f << train::fmt_g(static_cast<double>(
            cap.weights[static_cast<size_t>(i) * n + static_cast<size_t>(j)]));
      }
      f << '\n';
    }
  }
}

int cmd_inspect(const InspectCli& o) {
  const auto m = pipeline::load_manifest_and_vocabs(o.model);
  const auto corpus = conll::read_corpus(o.input);
  if (o.sentence < 0 || static_cast<size_t>(o.sentence) >= corpus.size()) {
    throw ConfigError("sentence index " + std::to_string(o.sentence) +
                      " out of range (corpus has " +
                      std::to_string(corpus.size()) + ")");
  }
  const conll::Sentence& s = corpus[static_cast<size_t>(o.sentence)];
  const auto instances = conll::extract_instances(s);
  if (o.predicate < 0 ||
      static_cast<size_t>(o.predicate) >= instances.size()) {
    throw ConfigError("predicate index " + std::to_string(o.predicate) +
                      " out of range (sentence has " +
                      std::to_string(instances.size()) + ")");
  }
  std::optional<syntax::PrunedTree> tree;
  if (m.cfg.needs_tree()) {
    if (o.trees.empty()) {
      throw ConfigError(std::string("model mode ") +
                        model::mode_name(m.cfg.mode) +
                        " uses syntax; pass --trees");
    }
    const auto spec = pipeline::tree_spec_from_flag(o.trees);
    const auto tree_corpus = pipeline::load_tree_corpus(spec);
    tree = pipeline::resolve_tree(s, spec,
                                  tree_corpus ? &*tree_corpus : nullptr,
                                  static_cast<size_t>(o.sentence));
  }
  const model::InstanceFeatures feat =
      pipeline::featurize(s, instances[static_cast<size_t>(o.predicate)],
                          tree ? &*tree : nullptr, m.cfg, m.vocabs);
  if (m.precision == "f64") {
    run_inspect<double>(m, s, feat, o);
  } else {
    run_inspect<float>(m, s, feat, o);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"syntax-enhanced semantic role labeler"};
  app.require_subcommand(1);
  std::string kernels_flag = "auto";
  const auto kernel_check = CLI::IsMember({"auto", "scalar", "avx2"});

  PathsCli paths_cli;
  CLI::App* paths = app.add_subcommand(
      "paths", "dump dependency path features per (sentence, predicate)");
  paths->add_option("--input", paths_cli.input, "CoNLL-2009 corpus")
      ->required();
  paths->add_option("--trees", paths_cli.trees,
                    "tree source: gold, pred, autodel or a CoNLL file");
  paths->add_option("--output", paths_cli.output, "output path, - = stdout");

  TrainCli train_cli;
  CLI::App* train = app.add_subcommand("train", "train a role labeler");
  train->add_option("--train", train_cli.train_path, "training corpus")
      ->required();
  train->add_option("--dev", train_cli.dev_path, "development corpus")
      ->required();
  train->add_option("--trees", train_cli.trees, "training tree source");
  train->add_option("--dev-trees", train_cli.dev_trees,
                    "dev tree source (default: same as --trees)");
  const CLI::Option* mode_opt =
      train->add_option("--mode", train_cli.mode, "syntax incorporation mode")
          ->check(CLI::IsMember({"none", "input", "lisa", "relawe"}));
  const CLI::Option* repr_opt =
      train
          ->add_option("--repr", train_cli.reprs,
                       "syntax representations (repeatable)")
          ->check(CLI::IsMember({"dep", "rel", "deppath", "relpath"}))
          ->delimiter(',');
  train->add_option("--config", train_cli.config_path,
                    "key=value model config file");
  train->add_option("--model", train_cli.model_path, "checkpoint output path")
      ->required();
  train->add_option("--log", train_cli.log_path, "metric log, - = stdout");
  train->add_option("--resume", train_cli.resume,
                    "continue from this checkpoint (its manifest supplies "
                    "the model settings)");
  train->add_option("--precision", train_cli.precision, "f64 or f32")
      ->check(CLI::IsMember({"f64", "f32"}));
  train->add_option("--seed", train_cli.seed, "rng seed");
  train->add_option("--steps", train_cli.steps, "updates to run");
  train->add_option("--eval-every", train_cli.eval_every,
                    "dev evaluation period in steps, 0 = never");
  train->add_option("--batch-words", train_cli.batch_words,
                    "word budget per batch");
  train->add_option("--stop-dev-f1", train_cli.stop_dev_f1,
                    "stop once dev F1 reaches this value");
  train->add_flag("--include-senses", train_cli.include_senses,
                  "score predicate senses as arcs during dev evaluation");
  train->add_option("--kernels", kernels_flag, "kernel backend")
      ->check(kernel_check);

  PredictCli predict_cli;
  CLI::App* predict =
      app.add_subcommand("predict", "label a corpus with a trained model");
  predict->add_option("--input", predict_cli.input, "CoNLL-2009 corpus")
      ->required();
  predict->add_option("--model", predict_cli.model, "checkpoint path")
      ->required();
  predict->add_option("--output", predict_cli.output, "labeled corpus path")
      ->required();
  predict->add_option("--trees", predict_cli.trees,
                      "tree source for syntax modes");
  predict->add_option("--kernels", kernels_flag, "kernel backend")
      ->check(kernel_check);

  ScoreCli score_cli;
  CLI::App* score =
      app.add_subcommand("score", "labeled precision/recall/F1 of a parse");
  score->add_option("--gold", score_cli.gold, "gold corpus")->required();
  score->add_option("--pred", score_cli.pred, "predicted corpus")->required();
  score->add_flag("--include-senses", score_cli.include_senses,
                  "count predicate senses as arcs");

  InspectCli inspect_cli;
  CLI::App* inspect = app.add_subcommand(
      "inspect", "print one attention head's weights on one instance");
  inspect->add_option("--input", inspect_cli.input, "CoNLL-2009 corpus")
      ->required();
  inspect->add_option("--model", inspect_cli.model, "checkpoint path")
      ->required();
  inspect->add_option("--trees", inspect_cli.trees,
                      "tree source for syntax modes");
  inspect->add_option("--block", inspect_cli.block, "encoder block, 1-based");
  inspect->add_option("--head", inspect_cli.head, "head index, 0-based");
  inspect->add_option("--sentence", inspect_cli.sentence,
                      "sentence index, 0-based");
  inspect->add_option("--predicate", inspect_cli.predicate,
                      "predicate index within the sentence, 0-based");
  inspect->add_option("--output", inspect_cli.output,
                      "also write the matrix as tab-separated values");
  inspect->add_option("--kernels", kernels_flag, "kernel backend")
      ->check(kernel_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    synsrl::kernels::set_backend_by_name(kernels_flag);
    train_cli.mode_seen = mode_opt->count() > 0;
    train_cli.reprs_seen = repr_opt->count() > 0;
    if (paths->parsed()) return cmd_paths(paths_cli);
    if (train->parsed()) return cmd_train(train_cli);
    if (predict->parsed()) return cmd_predict(predict_cli);
    if (score->parsed()) return cmd_score(score_cli);
    if (inspect->parsed()) return cmd_inspect(inspect_cli);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
