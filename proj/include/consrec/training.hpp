#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "consrec/autodiff.hpp"
#include "consrec/error.hpp"
#include "consrec/evaluation.hpp"
#include "consrec/interactions.hpp"
#include "consrec/model.hpp"
#include "consrec/rng.hpp"
#include "consrec/views.hpp"

namespace consrec {

struct TrainConfig {
  std::size_t dim = 32;
  std::size_t layers = 3;
  std::size_t n_neg_train = 8;
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;     // 0: no validation passes
  std::size_t patience = 0;       // early stop on group HR@10; 0: off
  bool group_self_loops = true;
  std::array<bool, 3> views_enabled{true, true, true};

  ModelConfig model() const { return ModelConfig{dim, layers, views_enabled}; }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };
    if (dim < 1) fail("dim must be >= 1");
    if (layers < 1) fail("layers must be >= 1");
    if (n_neg_train < 1) fail("n_neg_train must be >= 1");
    if (epochs < 1) fail("epochs must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1 must be in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2 must be in [0, 1)");
    if (!(adam_eps > 0.0)) fail("adam_eps must be > 0");
  }
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::size_t step = 0;
};

// Bias-corrected Adam over parallel lists of parameters and gradients.
inline void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state,
                      double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.first_moment.empty()) {
    for (const Matrix* p : params) {
      state.first_moment.emplace_back(p->rows(), p->cols());
      state.second_moment.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state does not match parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k]->data();
    const auto& g = grads[k].data();
    auto& m = state.first_moment[k].data();
    auto& v = state.second_moment[k].data();
    if (g.size() != p.size() || m.size() != p.size()) throw ShapeError("adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
}

inline void adam_step(ModelParams& params, std::span<const Matrix> grads, AdamState& state,
                      const TrainConfig& cfg) {
  std::vector<Matrix*> ptrs;
  params.for_each([&](std::string_view, Matrix& m) { ptrs.push_back(&m); });
  adam_step(ptrs, grads, state, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
}

// Training pairs (positive, negative) of one entity.
struct EntityPairs {
  std::size_t entity = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

namespace detail {

// -sum_e mean_{(j, j') in D_e} ln σ(score(e, j) - score(e, j')).
template <class ScoreRows>
Var bpr_loss(Tape& tape, const std::vector<EntityPairs>& batch, const char* what, ScoreRows&& score_rows) {
  std::vector<std::size_t> entities, positives, negatives;
  std::vector<double> weights;
  for (const auto& e : batch) {
    if (e.pairs.empty()) {
      throw std::invalid_argument(std::string(what) + " " + std::to_string(e.entity) + ": empty pair set");
    }
    const double w = -1.0 / static_cast<double>(e.pairs.size());
    for (const auto& [pos, neg] : e.pairs) {
      entities.push_back(e.entity);
      positives.push_back(pos);
      negatives.push_back(neg);
      weights.push_back(w);
    }
  }
  if (entities.empty()) return tape.constant(Matrix(1, 1, 0.0));
  // Each positive recurs once per sampled negative; score distinct rows once.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> row_of;
  std::vector<std::size_t> row_entities, row_items, pos_rows, neg_rows;
  auto row = [&](std::size_t e, std::size_t i) {
    auto [it, inserted] = row_of.try_emplace({e, i}, row_entities.size());
    if (inserted) {
      row_entities.push_back(e);
      row_items.push_back(i);
    }
    return it->second;
  };
  for (std::size_t k = 0; k < entities.size(); ++k) {
    pos_rows.push_back(row(entities[k], positives[k]));
    neg_rows.push_back(row(entities[k], negatives[k]));
  }
  const Var scores = score_rows(std::move(row_entities), std::move(row_items));
  const Var pos = tape.row_select(scores, std::move(pos_rows));
  const Var neg = tape.row_select(scores, std::move(neg_rows));
  return tape.weighted_sum(tape.ln_sigmoid(tape.subtract(pos, neg)), std::move(weights));
}

}  // namespace detail

inline Var bpr_loss_group(Tape& tape, const ParamVars& p, const ForwardVars& f,
                          const std::vector<EntityPairs>& batch) {
  return detail::bpr_loss(tape, batch, "group", [&](std::vector<std::size_t> g, std::vector<std::size_t> i) {
    return group_scores(tape, p, f, std::move(g), std::move(i));
  });
}

inline Var bpr_loss_user(Tape& tape, const ParamVars& p, const std::vector<EntityPairs>& batch) {
  return detail::bpr_loss(tape, batch, "user", [&](std::vector<std::size_t> u, std::vector<std::size_t> i) {
    return user_scores(tape, p, std::move(u), std::move(i));
  });
}

// Fresh pairs for every entity that has training interactions.
inline std::vector<EntityPairs> sample_epoch_pairs(const InteractionDataset& train, EntityKind kind,
                                                   std::size_t n_neg, Rng& rng) {
  std::vector<EntityPairs> out;
  const auto& rows = train.interactions(kind);
  for (std::size_t e = 0; e < rows.size(); ++e) {
    if (rows[e].empty()) continue;
    out.push_back({e, sample_training_negatives(train, kind, e, n_neg, rng)});
  }
  return out;
}

struct JointLoss {
  double group = 0.0;
  double user = 0.0;
  double total() const { return group + user; }
};

struct LossAndGrads {
  JointLoss loss;
  std::vector<Matrix> grads;  // ModelParams::for_each order
};

// L_group + L_user and its gradient with respect to every parameter tensor.
inline LossAndGrads joint_loss_and_grads(const ConsensusViews& views, const ModelParams& params,
                                         const ModelConfig& cfg, const std::vector<EntityPairs>& group_pairs,
                                         const std::vector<EntityPairs>& user_pairs) {
  Tape tape;
  const ParamVars p = put_params(tape, params, true);
  const ForwardVars f = forward(tape, views, p, cfg);
  const Var lg = bpr_loss_group(tape, p, f, group_pairs);
  const Var lu = bpr_loss_user(tape, p, user_pairs);
  const Var total = tape.add(lg, lu);
  LossAndGrads out;
  out.loss = {tape.value(lg)(0, 0), tape.value(lu)(0, 0)};
  out.grads = tape.backward(total);
  return out;
}

inline JointLoss joint_loss(const ConsensusViews& views, const ModelParams& params, const ModelConfig& cfg,
                            const std::vector<EntityPairs>& group_pairs,
                            const std::vector<EntityPairs>& user_pairs) {
  Tape tape;
  const ParamVars p = put_params(tape, params, false);
  const ForwardVars f = forward(tape, views, p, cfg);
  return {tape.value(bpr_loss_group(tape, p, f, group_pairs))(0, 0),
          tape.value(bpr_loss_user(tape, p, user_pairs))(0, 0)};
}

struct EpochRecord {
  std::size_t epoch = 0;
  double loss_group = 0.0;
  double loss_user = 0.0;
  double seconds = 0.0;
  std::vector<MetricsReport> validation;  // empty unless a validation pass ran
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> log;
};

// One full-graph forward, joint BPR loss, backward and Adam step per epoch,
// with pairs resampled every epoch. `validation` queries are scored every
// `eval_every` epochs when non-empty. `on_epoch` sees each record as it lands.
inline TrainResult train(const SplitDataset& data, const TrainConfig& cfg,
                         std::span<const EvalQuery> validation = {},
                         const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  if (cfg.dim < 1 || cfg.layers < 1 || cfg.n_neg_train < 1 || cfg.epochs < 1) {
    throw ConfigError("train: dim, layers, n_neg_train and epochs must be >= 1");
  }
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("train: lr must be finite and >= 0");
  const auto& d = data.train;
  if (d.num_items() == 0 || (d.group_interaction_count() == 0 && d.user_interaction_count() == 0)) {
    throw DataError("train: dataset has no training interactions");
  }
  const ModelConfig mcfg = cfg.model();
  const ConsensusViews views = build_views(d, cfg.group_self_loops);
  Rng init_rng = make_stream(cfg.seed, RngPurpose::init);
  Rng pair_rng = make_stream(cfg.seed, RngPurpose::train_negatives);

  TrainResult result;
  result.params = init_params(mcfg, d.num_users(), d.num_items(), d.num_groups(), init_rng);
  AdamState adam;
  std::optional<ModelParams> best;
  double best_hr = -1.0;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto group_pairs = sample_epoch_pairs(d, EntityKind::group, cfg.n_neg_train, pair_rng);
    const auto user_pairs = sample_epoch_pairs(d, EntityKind::user, cfg.n_neg_train, pair_rng);
    LossAndGrads lg;
    try {
      lg = joint_loss_and_grads(views, result.params, mcfg, group_pairs, user_pairs);
    } catch (const NumericError& e) {
      std::ostringstream os;
      os << "epoch " << epoch << ": " << e.what();
      throw NumericError(os.str());
    }
    if (!std::isfinite(lg.loss.group) || !std::isfinite(lg.loss.user)) {
      std::ostringstream os;
      os << "epoch " << epoch << ": non-finite loss (group " << lg.loss.group << ", user " << lg.loss.user << ")";
      throw NumericError(os.str());
    }
    adam_step(result.params, lg.grads, adam, cfg);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_group = lg.loss.group;
    rec.loss_user = lg.loss.user;
    if (cfg.eval_every > 0 && !validation.empty() && epoch % cfg.eval_every == 0) {
      const ForwardOutputs out = compute_forward(views, result.params, mcfg);
      for (auto task : {EntityKind::group, EntityKind::user}) {
        rec.validation.push_back(evaluate(result.params, out, validation, task, {5, 10}));
      }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (cfg.patience > 0 && !rec.validation.empty()) {
      const double hr = rec.validation.front().hr_at(10);
      if (hr > best_hr) {
        best_hr = hr;
        best = result.params;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
  }
  if (best) result.params = std::move(*best);
  return result;
}

}  // namespace consrec
