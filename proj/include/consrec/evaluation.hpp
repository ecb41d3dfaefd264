#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "consrec/interactions.hpp"
#include "consrec/model.hpp"

namespace consrec {

// 1-based rank of scores[positive]. Ties with the positive count as half a
// position each, rounded up: 1 + #greater + ceil(#tied / 2).
inline std::size_t rank_position(std::span<const double> scores, std::size_t positive) {
  const double target = scores[positive];
  std::size_t greater = 0;
  std::size_t tied = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (k == positive) continue;
    if (scores[k] > target) {
      ++greater;
    } else if (scores[k] == target) {
      ++tied;
    }
  }
  return 1 + greater + (tied + 1) / 2;
}

inline double hr_at_k(std::size_t rank, std::size_t k) { return rank <= k ? 1.0 : 0.0; }

inline double ndcg_at_k(std::size_t rank, std::size_t k) {
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

struct MetricsReport {
  EntityKind task = EntityKind::group;
  std::string model = "consrec";
  std::vector<std::size_t> ks;
  std::vector<double> hr;    // parallel to ks
  std::vector<double> ndcg;  // parallel to ks
  std::size_t n_queries = 0;
  double seconds = 0.0;
  // Propagation passes observed while scoring; candidate independence means 0.
  std::uint64_t propagation_passes = 0;

  double hr_at(std::size_t k) const { return hr.at(index_of(k)); }
  double ndcg_at(std::size_t k) const { return ndcg.at(index_of(k)); }

 private:
  std::size_t index_of(std::size_t k) const {
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] == k) return i;
    }
    throw std::out_of_range("MetricsReport: K=" + std::to_string(k) + " not evaluated");
  }
};

// Averages HR/NDCG over the queries of `task`; score(query, item) rates a candidate.
// Candidate 0 is the positive, followed by the negatives in query order.
template <class ScoreFn>
MetricsReport evaluate_with(EntityKind task, std::span<const EvalQuery> queries,
                            const std::vector<std::size_t>& ks, ScoreFn&& score) {
  const auto start = std::chrono::steady_clock::now();
  const auto passes_before = propagation_passes();
  MetricsReport r;
  r.task = task;
  r.ks = ks;
  r.hr.assign(ks.size(), 0.0);
  r.ndcg.assign(ks.size(), 0.0);
  std::vector<double> scores;
  for (const auto& q : queries) {
    if (q.kind != task) continue;
    scores.clear();
    scores.push_back(score(q, q.positive));
    for (auto j : q.negatives) scores.push_back(score(q, j));
    const std::size_t rank = rank_position(scores, 0);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      r.hr[i] += hr_at_k(rank, ks[i]);
      r.ndcg[i] += ndcg_at_k(rank, ks[i]);
    }
    ++r.n_queries;
  }
  if (r.n_queries > 0) {
    for (auto& v : r.hr) v /= static_cast<double>(r.n_queries);
    for (auto& v : r.ndcg) v /= static_cast<double>(r.n_queries);
  }
  r.propagation_passes = propagation_passes() - passes_before;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Scores group queries with the fused group table and user queries with the
// base user table, both through the shared MLP. `outputs` is computed once.
inline MetricsReport evaluate(const ModelParams& params, const ForwardOutputs& outputs,
                              std::span<const EvalQuery> queries, EntityKind task,
                              const std::vector<std::size_t>& ks = {5, 10}) {
  MlpScorer mlp(params);
  if (task == EntityKind::group) {
    return evaluate_with(task, queries, ks, [&](const EvalQuery& q, std::size_t item) {
      return mlp(outputs.group_fused.row(q.entity), outputs.item_refined.row(item));
    });
  }
  return evaluate_with(task, queries, ks, [&](const EvalQuery& q, std::size_t item) {
    return mlp(params.users.row(q.entity), params.items.row(item));
  });
}

// Item popularity in the training interactions of the task's entity kind.
inline MetricsReport popularity_baseline(const InteractionDataset& train,
                                         std::span<const EvalQuery> queries, EntityKind task,
                                         const std::vector<std::size_t>& ks = {5, 10}) {
  std::vector<double> counts(train.num_items(), 0.0);
  for (const auto& row : train.interactions(task)) {
    for (auto i : row) counts[i] += 1.0;
  }
  auto r = evaluate_with(task, queries, ks,
                         [&](const EvalQuery&, std::size_t item) { return counts[item]; });
  r.model = "popularity";
  return r;
}

// {"task":"group","metric":"HR","k":5,"value":0.8844,"n_queries":q}, one line
// per (metric, K); non-default models add a "model" field.
inline void write_metrics_jsonl(std::ostream& out, const MetricsReport& r) {
  const auto old_precision = out.precision(17);
  for (const char* metric : {"HR", "NDCG"}) {
    const auto& values = std::string(metric) == "HR" ? r.hr : r.ndcg;
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
      out << "{\"task\":\"" << entity_name(r.task) << "\",";
      if (r.model != "consrec") out << "\"model\":\"" << r.model << "\",";
      out << "\"metric\":\"" << metric << "\",\"k\":" << r.ks[i] << ",\"value\":" << values[i]
          << ",\"n_queries\":" << r.n_queries << "}\n";
    }
  }
  out.precision(old_precision);
}

struct ScalingPoint {
  std::size_t n_queries = 0;
  double seconds = 0.0;
  std::uint64_t propagation_passes = 0;
};

struct EfficiencyProfile {
  double train_seconds = 0.0;
  double forward_seconds = 0.0;
  std::uint64_t forward_propagation_passes = 0;
  std::vector<ScalingPoint> scaling;
  double slope = 0.0;      // seconds per query
  double r_squared = 0.0;  // of the linear fit seconds ~ n_queries
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// Times one forward pass and query scoring at `multipliers` x the query list
// (queries repeated cyclically), tracking propagation passes at every size.
// Each size is timed `repeats` times and the minimum kept.

inline EfficiencyProfile efficiency_profile(const ConsensusViews& views, const ModelParams& params,
                                            const ModelConfig& cfg, std::span<const EvalQuery> queries,
                                            const std::vector<std::size_t>& multipliers = {1, 2, 4, 6, 8, 10},
                                            std::size_t repeats = 3) {
  EfficiencyProfile prof;
  const auto before = propagation_passes();
  const auto start = std::chrono::steady_clock::now();
  const ForwardOutputs outputs = compute_forward(views, params, cfg);
  prof.forward_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  prof.forward_propagation_passes = propagation_passes() - before;

  std::vector<std::vector<EvalQuery>> batches;
  for (auto m : multipliers) {
    auto& batch = batches.emplace_back();
    batch.reserve(queries.size() * m);
    for (std::size_t r = 0; r < m; ++r) batch.insert(batch.end(), queries.begin(), queries.end());
    ScalingPoint pt;
    pt.n_queries = batch.size();
    pt.seconds = std::numeric_limits<double>::infinity();
    prof.scaling.push_back(pt);
  }
  auto score_all = [&](const std::vector<EvalQuery>& batch) {
    for (auto task : {EntityKind::group, EntityKind::user}) {
      (void)evaluate(params, outputs, batch, task, {5, 10});
    }
  };
  if (!batches.empty()) score_all(batches.front());  // warm-up
  // Repeats sweep all sizes in turn so slow stretches of machine time are
  // shared across sizes; the minimum per size is kept.
  for (std::size_t rep = 0; rep < std::max<std::size_t>(repeats, 1); ++rep) {
    for (std::size_t b = 0; b < batches.size(); ++b) {
      auto& pt = prof.scaling[b];
      const auto p0 = propagation_passes();
      const auto t0 = std::chrono::steady_clock::now();
      score_all(batches[b]);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      pt.seconds = std::min(pt.seconds, secs);
      pt.propagation_passes += propagation_passes() - p0;
    }
  }
  std::vector<double> xs, ys;
  for (const auto& pt : prof.scaling) {
    xs.push_back(static_cast<double>(pt.n_queries));
    ys.push_back(pt.seconds);
  }
  if (xs.size() >= 2) {
    const auto fit = fit_line(xs, ys);
    prof.slope = fit.slope;
    prof.r_squared = fit.r_squared;
  }
  return prof;
}

}  // namespace consrec
