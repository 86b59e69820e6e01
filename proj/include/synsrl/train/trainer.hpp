#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "synsrl/conll/conll.hpp"
#include "synsrl/model/encoder.hpp"
#include "synsrl/pipeline/pipeline.hpp"
#include "synsrl/train/batching.hpp"
#include "synsrl/train/loss.hpp"
#include "synsrl/train/optimizer.hpp"

namespace synsrl::train {

// Everything the training loop needs beyond the model config. `model_path`
// may be empty for log-only runs (nothing is persisted then). `eval_every`
// = 0 disables dev evaluation; the final parameters are saved as the model
// in that case.
struct TrainSchedule {
  int64_t max_steps = 200000;
  int64_t eval_every = 100;
  int64_t word_budget = 4096;
  uint64_t seed = 1;
  std::string model_path;
  std::string resume_path;
  double stop_at_dev_f1 = -1.0;  // negative = never stop early
  bool exclude_pred_sense = true;
};

struct TrainResult {
  int64_t steps = 0;
  double best_f1 = -1.0;
  int64_t best_step = -1;
  double last_f1 = -1.0;
};

template <class T>
const char* precision_name() {
  return sizeof(T) == 8 ? "f64" : "f32";
}

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Eval-mode forwards for every instance, roles written back into a copy of
// the corpus. Deterministic: dropout is inactive, no rng draws are consumed.
template <class T>
std::vector<conll::Sentence> predict_corpus(
    const std::vector<conll::Sentence>& corpus,
    const std::vector<std::vector<model::InstanceFeatures>>& feats,
    const model::ModelConfig& cfg, model::Params<T>& params,
    const syntax::VocabSet& vocabs) {
  if (feats.size() != corpus.size()) {
    throw LengthMismatch("predict: " + std::to_string(feats.size()) +
                         " feature groups for " +
                         std::to_string(corpus.size()) + " sentences");
  }
  Rng scratch(0);
  std::vector<conll::Sentence> out;
  out.reserve(corpus.size());
  for (size_t si = 0; si < corpus.size(); ++si) {
    std::vector<std::vector<std::string>> roles;
    roles.reserve(feats[si].size());
    for (const auto& f : feats[si]) {
      const nn::Tensor<T> logits = model::forward<T>(
          f, cfg, params, false, scratch, static_cast<nn::Tape<T>*>(nullptr));
      roles.push_back(model::predict_roles(logits, vocabs.role));
    }
    out.push_back(conll::replace_roles(corpus[si], roles));
  }
  return out;
}

template <class T>
conll::ScoreReport evaluate(
    const std::vector<conll::Sentence>& corpus,
    const std::vector<std::vector<model::InstanceFeatures>>& feats,
    const model::ModelConfig& cfg, model::Params<T>& params,
    const syntax::VocabSet& vocabs, bool exclude_pred_sense = true) {
  return conll::score(corpus,
                      predict_corpus(corpus, feats, cfg, params, vocabs),
                      exclude_pred_sense);
}

struct ResumeState {
  uint64_t step = 0;
  uint64_t epoch = 0;
  uint64_t batch_idx = 0;
  int64_t best_step = -1;
  uint64_t seed = 0;
  double best_f1 = -1.0;
};

template <class T>
void save_checkpoint(const std::string& path,
                     const model::Params<T>& params, const Adadelta<T>& opt,
                     const Rng& dropout_rng, const ResumeState& st) {
  nn::Archive a;
  pipeline::params_to_archive(params, a);
  opt.to_archive(a);
  const auto rs = dropout_rng.save_state();
  a.put_u64("rng/dropout", rs);
  const uint64_t counters[5] = {st.step, st.epoch, st.batch_idx,
                                static_cast<uint64_t>(st.best_step), st.seed};
  a.put_u64("meta/counters", counters);
  const double bf[1] = {st.best_f1};
  a.put_f64("meta/best_f1", {1}, bf);
  a.save(path);
}

template <class T>
ResumeState load_checkpoint(const std::string& path,
                            model::Params<T>& params, Adadelta<T>& opt,
                            Rng& dropout_rng) {
  const nn::Archive a = nn::Archive::load(path);
  pipeline::params_from_archive(a, params);
  opt.from_archive(a);
  const auto& rng_words = a.get_u64("rng/dropout").values;
  if (rng_words.size() != 6) {
    throw Error("checkpoint rng state has " +
                std::to_string(rng_words.size()) + " words, expected 6");
  }
  std::array<uint64_t, 6> rs{};
  for (int i = 0; i < 6; ++i) rs[static_cast<size_t>(i)] = rng_words[i];
  dropout_rng.load_state(rs);
  const auto& c = a.get_u64("meta/counters").values;
  if (c.size() != 5) {
    throw Error("checkpoint counters have " + std::to_string(c.size()) +
                " words, expected 5");
  }
  ResumeState st;
  st.step = c[0];
  st.epoch = c[1];
  st.batch_idx = c[2];
  st.best_step = static_cast<int64_t>(c[3]);
  st.seed = c[4];
  st.best_f1 = a.get_f64("meta/best_f1").values.at(0);
  return st;
}

// One gradient step over a batch of instances. Each instance runs on its own
// tape; the per-instance loss is scaled by 1/batch so gradients accumulate
// into the batch mean. Returns the mean of the unscaled losses.
template <class T>
double batch_step(const std::vector<InstanceKey>& batch,
                  const std::vector<std::vector<model::InstanceFeatures>>&
                      feats,
                  const model::ModelConfig& cfg, model::Params<T>& params,
                  Adadelta<T>& opt, Rng& dropout_rng) {
  params.zero_grads();
  const T inv = T(1) / static_cast<T>(batch.size());
  double total = 0.0;
  for (const InstanceKey& key : batch) {
    const model::InstanceFeatures& f =
        feats[static_cast<size_t>(key.sentence)]
             [static_cast<size_t>(key.pred_k)];
    nn::Tape<T> tape;
    const nn::Tensor<T> logits =
        model::forward(f, cfg, params, true, dropout_rng, &tape);
    nn::Tensor<T> loss = label_smoothed_cross_entropy(
        logits, f.role_ids, static_cast<T>(cfg.label_smoothing), &tape);
    total += static_cast<double>(loss.at(0));
    tape.backward(nn::scale(loss, inv, &tape));
  }
  opt.step(params);
  return total / static_cast<double>(batch.size());
}

// Full training run. Logs one `step=<n> loss=<f>` line per update, where
// <n> counts updates already applied when the batch loss was measured, and
// one `step=<n> loss=<f> dev_P=<f> dev_R=<f> dev_F1=<f>` line per dev
// evaluation. The best-dev checkpoint lands at `model_path`, the final
// training state at `model_path + ".last"`; resuming from either continues
// the exact update sequence of an uninterrupted run.
template <class T>
TrainResult train(const std::vector<conll::Sentence>& train_corpus,
                  const pipeline::TreeSpec& train_trees,
                  const std::vector<conll::Sentence>& dev_corpus,
                  const pipeline::TreeSpec& dev_trees,
                  model::ModelConfig cfg, const TrainSchedule& sched,
                  std::ostream& log) {
  if (sched.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  const bool persist = !sched.model_path.empty();
  const bool resuming = !sched.resume_path.empty();

  const auto train_tree_corpus = pipeline::load_tree_corpus(train_trees);
  const auto* train_trees_ptr =
      train_tree_corpus ? &*train_tree_corpus : nullptr;

  syntax::VocabSet vocabs;
  if (resuming) {
    pipeline::LoadedManifest m =
        pipeline::load_manifest_and_vocabs(sched.resume_path);
    if (m.precision != precision_name<T>()) {
      throw ConfigError("checkpoint " + sched.resume_path +
                        " was trained with precision " + m.precision +
                        "; rerun with that precision");
    }
    cfg = std::move(m.cfg);
    vocabs = std::move(m.vocabs);
  } else {
    cfg.validate();
    vocabs = pipeline::build_vocabs(train_corpus, cfg, train_trees,
                                    train_trees_ptr);
  }

  const auto feats_train = pipeline::featurize_corpus(
      train_corpus, cfg, train_trees, train_trees_ptr, vocabs);
  const auto dev_tree_corpus = pipeline::load_tree_corpus(dev_trees);
  const auto feats_dev = pipeline::featurize_corpus(
      dev_corpus, cfg, dev_trees, dev_tree_corpus ? &*dev_tree_corpus : nullptr,
      vocabs);

  model::Params<T> params = model::init_params<T>(cfg, vocabs, sched.seed);
  Adadelta<T> opt;
  opt.attach(params);
  Rng dropout_rng(dropout_seed(sched.seed));
  ResumeState st;
  st.seed = sched.seed;
  if (resuming) {
    st = load_checkpoint(sched.resume_path, params, opt, dropout_rng);
  }

  if (persist) {
    pipeline::save_manifest_and_vocabs(sched.model_path, cfg, vocabs,
                                       precision_name<T>());
    pipeline::save_manifest_and_vocabs(sched.model_path + ".last", cfg,
                                       vocabs, precision_name<T>());
  }

  std::vector<InstanceKey> keys;
  for (size_t si = 0; si < feats_train.size(); ++si) {
    for (size_t k = 0; k < feats_train[si].size(); ++k) {
      keys.push_back({static_cast<int32_t>(si), static_cast<int32_t>(k),
                      static_cast<int32_t>(train_corpus[si].size())});
    }
  }

  const auto batches_for = [&](uint64_t epoch) {
    Rng r(epoch_seed(st.seed, epoch));
    return make_batches(keys, sched.word_budget, r);
  };
  auto batches = batches_for(st.epoch);

  TrainResult result;
  result.best_f1 = st.best_f1;
  result.best_step = st.best_step;
  bool stop = false;
  while (!stop && st.step < static_cast<uint64_t>(sched.max_steps)) {
    if (st.batch_idx >= batches.size()) {
      ++st.epoch;
      st.batch_idx = 0;
      batches = batches_for(st.epoch);
    }
    const auto& batch = batches[st.batch_idx];
    ++st.batch_idx;
    const double loss =
        batch_step(batch, feats_train, cfg, params, opt, dropout_rng);
    log << "step=" << st.step << " loss=" << fmt_g(loss) << "\n";
    ++st.step;

    const bool last = st.step == static_cast<uint64_t>(sched.max_steps);
    if (sched.eval_every > 0 &&
        (st.step % static_cast<uint64_t>(sched.eval_every) == 0 || last)) {
      const conll::ScoreReport rep =
          evaluate(dev_corpus, feats_dev, cfg, params, vocabs,
                   sched.exclude_pred_sense);
      log << "step=" << st.step << " loss=" << fmt_g(loss)
          << " dev_P=" << fmt_g(rep.labeled_precision)
          << " dev_R=" << fmt_g(rep.labeled_recall)
          << " dev_F1=" << fmt_g(rep.labeled_f1) << "\n";
      result.last_f1 = rep.labeled_f1;
      if (rep.labeled_f1 > st.best_f1) {
        st.best_f1 = rep.labeled_f1;
        st.best_step = static_cast<int64_t>(st.step);
        result.best_f1 = st.best_f1;
        result.best_step = st.best_step;
        if (persist) save_checkpoint(sched.model_path, params, opt,
                                     dropout_rng, st);
      }
      if (sched.stop_at_dev_f1 >= 0.0 &&
          rep.labeled_f1 >= sched.stop_at_dev_f1) {
        stop = true;
      }
    }
  }

  result.steps = static_cast<int64_t>(st.step);
  if (persist) {
    save_checkpoint(sched.model_path + ".last", params, opt, dropout_rng,
                    st);
    // Without dev evaluation there is no best checkpoint; the final state
    // stands in so prediction always has a model to load.
    if (st.best_step < 0) {
      save_checkpoint(sched.model_path, params, opt, dropout_rng, st);
    }
  }
  return result;
}

}  // namespace synsrl::train
