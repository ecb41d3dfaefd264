#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consrec/autodiff.hpp"
#include "consrec/rng.hpp"
#include "consrec/tensor.hpp"
#include "consrec/views.hpp"

namespace consrec {

enum class View : std::size_t { member = 0, item = 1, group = 2 };

struct ModelConfig {
  std::size_t dim = 32;
  std::size_t layers = 3;
  // A disabled view has its gate pinned to zero in the fusion.
  std::array<bool, 3> views_enabled{true, true, true};
};

// All trainable tensors. Gate weights are d x 1 columns; MLP biases are 1 x width rows.
struct ModelParams {
  Matrix users;
  Matrix items;
  Matrix groups;
  Matrix fusion;  // 3d x d, shared by every hypergraph layer
  Matrix gate_member;
  Matrix gate_item;
  Matrix gate_group;
  std::array<Matrix, 3> mlp_weights;  // d x d, d x d, d x 1
  std::array<Matrix, 3> mlp_biases;   // 1 x d, 1 x d, 1 x 1

  static constexpr std::size_t kTensorCount = 13;

  std::size_t dim() const noexcept { return users.cols(); }

  // Visits (name, tensor) in a fixed order; this order is the parameter
  // registration order on a tape and the checkpoint file order.
  template <class Self, class Fn>
  static void visit(Self& self, Fn&& fn) {
    fn(std::string_view("users"), self.users);
    fn(std::string_view("items"), self.items);
    fn(std::string_view("groups"), self.groups);
    fn(std::string_view("fusion"), self.fusion);
    fn(std::string_view("gate_member"), self.gate_member);
    fn(std::string_view("gate_item"), self.gate_item);
    fn(std::string_view("gate_group"), self.gate_group);
    static constexpr const char* kW[] = {"mlp_w0", "mlp_w1", "mlp_w2"};
    static constexpr const char* kB[] = {"mlp_b0", "mlp_b1", "mlp_b2"};
    for (std::size_t k = 0; k < 3; ++k) {
      fn(std::string_view(kW[k]), self.mlp_weights[k]);
      fn(std::string_view(kB[k]), self.mlp_biases[k]);
    }
  }
  template <class Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <class Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  std::vector<Matrix> tensors() const {
    std::vector<Matrix> out;
    for_each([&](std::string_view, const Matrix& m) { out.push_back(m); });
    return out;
  }
  void set_tensors(std::vector<Matrix> ts) {
    if (ts.size() != kTensorCount) throw ShapeError("ModelParams: wrong tensor count");
    std::size_t k = 0;
    for_each([&](std::string_view name, Matrix& m) {
      if (ts[k].rows() != m.rows() || ts[k].cols() != m.cols()) {
        throw ShapeError("ModelParams: shape mismatch for " + std::string(name));
      }
      m = std::move(ts[k++]);
    });
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

namespace detail {

inline Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in,
                             std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = dist(rng);
  return m;
}

inline Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = dist(rng);
  return m;
}

}  // namespace detail

// Glorot-uniform embeddings, fusion and gate weights; N(0, 0.1) MLP weights
// with zero biases.
inline ModelParams init_params(const ModelConfig& cfg, std::size_t num_users, std::size_t num_items,
                               std::size_t num_groups, Rng& rng) {
  const std::size_t d = cfg.dim;
  if (d == 0) throw std::invalid_argument("init_params: dim must be >= 1");
  ModelParams p;
  p.users = detail::glorot_uniform(num_users, d, d, d, rng);
  p.items = detail::glorot_uniform(num_items, d, d, d, rng);
  p.groups = detail::glorot_uniform(num_groups, d, d, d, rng);
  p.fusion = detail::glorot_uniform(3 * d, d, 3 * d, d, rng);
  p.gate_member = detail::glorot_uniform(d, 1, d, 1, rng);
  p.gate_item = detail::glorot_uniform(d, 1, d, 1, rng);
  p.gate_group = detail::glorot_uniform(d, 1, d, 1, rng);
  const std::size_t widths[] = {d, d, d, 1};
  for (std::size_t k = 0; k < 3; ++k) {
    p.mlp_weights[k] = detail::gaussian(widths[k], widths[k + 1], 0.1, rng);
    p.mlp_biases[k] = Matrix(1, widths[k + 1]);
  }
  return p;
}

// Counts view propagation passes (one per view per forward pass).
inline std::atomic<std::uint64_t>& propagation_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}
inline std::uint64_t propagation_passes() { return propagation_counter().load(); }

struct ParamVars {
  Var users, items, groups, fusion, gate_member, gate_item, gate_group;
  std::array<Var, 3> mlp_weights;
  std::array<Var, 3> mlp_biases;
};

// Puts every tensor on the tape, as trainable parameters or as constants.
inline ParamVars put_params(Tape& tape, const ModelParams& p, bool trainable) {
  std::vector<Var> vars;
  p.for_each([&](std::string_view, const Matrix& m) {
    vars.push_back(trainable ? tape.parameter(m) : tape.constant(m));
  });
  ParamVars v;
  v.users = vars[0];
  v.items = vars[1];
  v.groups = vars[2];
  v.fusion = vars[3];
  v.gate_member = vars[4];
  v.gate_item = vars[5];
  v.gate_group = vars[6];
  for (std::size_t k = 0; k < 3; ++k) {
    v.mlp_weights[k] = vars[7 + 2 * k];
    v.mlp_biases[k] = vars[8 + 2 * k];
  }
  return v;
}

struct HypergraphOutput {
  Var group_member;  // K x d, layer mean of hyperedge messages
  Var item_refined;  // N x d, layer mean of item node states
};

// Preference-aware hypergraph convolution. Per layer, each hyperedge pools its
// member and item states, fuses [m_u, m_i, m_i ⊙ g_e] through the fusion
// matrix, and every node takes the mean message of its hyperedges.
inline HypergraphOutput phgnn_forward(Tape& tape, const MemberHypergraph& h, const ParamVars& p,
                                      std::size_t layers) {
  if (tape.value(p.users).rows() != h.num_users || tape.value(p.items).rows() != h.num_items ||
      tape.value(p.groups).rows() != h.num_hyperedges()) {
    throw ShapeError("phgnn_forward: parameter tables do not match the hypergraph");
  }
  ++propagation_counter();
  Var user_state = p.users;
  Var item_state = p.items;
  std::vector<Var> messages;
  std::vector<Var> item_states{item_state};
  for (std::size_t l = 0; l <= layers; ++l) {
    const Var member_msg = tape.segment_mean(h.members_of_edge, user_state);
    const Var item_msg = tape.segment_mean(h.items_of_edge, item_state);
    const Var product = tape.hadamard(item_msg, p.groups);
    const Var message = tape.matmul(tape.concat_cols({member_msg, item_msg, product}), p.fusion);
    messages.push_back(message);
    if (l == layers) break;
    user_state = tape.segment_mean(h.edges_of_user, message);
    item_state = tape.segment_mean(h.edges_of_item, message);
    item_states.push_back(item_state);
  }
  return {tape.mean_over(messages), tape.mean_over(item_states)};
}

// Layer-averaged symmetric-normalized propagation of `start`.
inline Var propagate_mean(Tape& tape, const NormalizedAdjacency& adj, Var start, std::size_t layers) {
  std::vector<Var> states{start};
  Var state = start;
  for (std::size_t l = 0; l < layers; ++l) {
    state = tape.sparse_dense_matmul(adj.matrix, state);
    states.push_back(state);
  }
  return tape.mean_over(states);
}

struct ItemViewOutput {
  Var group_item;  // K x d
  Var item_item;   // N x d, computed but not used for prediction
};

inline ItemViewOutput item_view_forward(Tape& tape, const NormalizedAdjacency& adj, const ParamVars& p,
                                        std::size_t layers) {
  const std::size_t k = tape.value(p.groups).rows();
  const std::size_t n = tape.value(p.items).rows();
  if (adj.size() != k + n) throw ShapeError("item_view_forward: adjacency size != K + N");
  ++propagation_counter();
  const Var mean = propagate_mean(tape, adj, tape.concat_rows({p.groups, p.items}), layers);
  return {tape.row_slice(mean, 0, k), tape.row_slice(mean, k, n)};
}

inline Var group_view_forward(Tape& tape, const NormalizedAdjacency& adj, const ParamVars& p,
                              std::size_t layers) {
  if (adj.size() != tape.value(p.groups).rows()) {
    throw ShapeError("group_view_forward: adjacency size != K");
  }
  ++propagation_counter();
  return propagate_mean(tape, adj, p.groups, layers);
}

struct FusionOutput {
  Var fused;  // K x d
  Var gates;  // K x 3: alpha, beta, gamma
};

inline FusionOutput fuse(Tape& tape, Var member, Var item, Var group, const ParamVars& p,
                         const std::array<bool, 3>& enabled = {true, true, true}) {
  const std::size_t k = tape.value(member).rows();
  const Var views[] = {member, item, group};
  const Var weights[] = {p.gate_member, p.gate_item, p.gate_group};
  std::vector<Var> gates;
  Var fused{};
  for (std::size_t v = 0; v < 3; ++v) {
    const Var gate = enabled[v] ? tape.sigmoid(tape.matmul(views[v], weights[v]))
                                : tape.constant(Matrix(k, 1));
    gates.push_back(gate);
    const Var term = tape.row_scale(views[v], gate);
    fused = v == 0 ? term : tape.add(fused, term);
  }
  return {fused, tape.concat_cols(gates)};
}

struct ForwardVars {
  Var group_member, item_refined, group_item, item_item, group_group, group_fused, gates;
};

inline ForwardVars forward(Tape& tape, const ConsensusViews& views, const ParamVars& p,
                           const ModelConfig& cfg) {
  const auto hyper = phgnn_forward(tape, views.member, p, cfg.layers);
  const auto item = item_view_forward(tape, views.item, p, cfg.layers);
  const Var group = group_view_forward(tape, views.group, p, cfg.layers);
  const auto fused = fuse(tape, hyper.group_member, item.group_item, group, p, cfg.views_enabled);
  return {hyper.group_member, hyper.item_refined, item.group_item, item.item_item,
          group,              fused.fused,        fused.gates};
}

// Shared prediction head: Linear-ReLU-Linear-ReLU-Linear over row inputs.
inline Var mlp_forward(Tape& tape, const ParamVars& p, Var x) {
  const std::size_t rows = tape.value(x).rows();
  const Var ones = tape.constant(Matrix(rows, 1, 1.0));
  Var h = x;
  for (std::size_t k = 0; k < 3; ++k) {
    h = tape.add(tape.matmul(h, p.mlp_weights[k]), tape.matmul(ones, p.mlp_biases[k]));
    if (k < 2) h = tape.relu(h);
  }
  return h;
}

// Scores of (group, item) rows: MLP(G_fused[t] ⊙ I_refined[j]).
inline Var group_scores(Tape& tape, const ParamVars& p, const ForwardVars& f,
                        std::vector<std::size_t> groups, std::vector<std::size_t> items) {
  return mlp_forward(tape, p, tape.hadamard(tape.row_select(f.group_fused, std::move(groups)),
                                            tape.row_select(f.item_refined, std::move(items))));
}

// Scores of (user, item) rows over the base tables: MLP(U[s] ⊙ I[j]).
inline Var user_scores(Tape& tape, const ParamVars& p, std::vector<std::size_t> users,
                       std::vector<std::size_t> items) {
  return mlp_forward(tape, p, tape.hadamard(tape.row_select(p.users, std::move(users)),
                                            tape.row_select(p.items, std::move(items))));
}

struct ForwardOutputs {
  Matrix group_member;
  Matrix item_refined;
  Matrix group_item;
  Matrix item_item;
  Matrix group_group;
  Matrix group_fused;
  Matrix gates;
};

// All view outputs for fixed parameters; three propagation passes.
inline ForwardOutputs compute_forward(const ConsensusViews& views, const ModelParams& params,
                                      const ModelConfig& cfg) {
  Tape tape;
  const ParamVars p = put_params(tape, params, false);
  const ForwardVars f = forward(tape, views, p, cfg);
  return {tape.value(f.group_member), tape.value(f.item_refined), tape.value(f.group_item),
          tape.value(f.item_item),    tape.value(f.group_group),  tape.value(f.group_fused),
          tape.value(f.gates)};
}

// Evaluates the shared MLP on one input row.
class MlpScorer {
 public:
  explicit MlpScorer(const ModelParams& p) : p_(&p), h0_(p.dim()), h1_(p.dim()), x_(p.dim()) {}

  double operator()(std::span<const double> a, std::span<const double> b) {
    const std::size_t d = x_.size();
    if (a.size() != d || b.size() != d) throw ShapeError("MlpScorer: input width != dim");
    for (std::size_t k = 0; k < d; ++k) x_[k] = a[k] * b[k];
    layer(x_, p_->mlp_weights[0], p_->mlp_biases[0], h0_);
    layer(h0_, p_->mlp_weights[1], p_->mlp_biases[1], h1_);
    const Matrix& w = p_->mlp_weights[2];
    double s = p_->mlp_biases[2](0, 0);
    for (std::size_t k = 0; k < d; ++k) s += h1_[k] * w(k, 0);
    return s;
  }

 private:
  static void layer(const std::vector<double>& in, const Matrix& w, const Matrix& b,
                    std::vector<double>& out) {
    const std::size_t width = w.cols();
    std::copy(b.row(0).begin(), b.row(0).end(), out.begin());
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (in[k] == 0.0) continue;
      auto wr = w.row(k);
      for (std::size_t j = 0; j < width; ++j) out[j] += in[k] * wr[j];
    }
    for (auto& v : out) v = v > 0.0 ? v : 0.0;
  }

  const ModelParams* p_;
  std::vector<double> h0_, h1_, x_;
};

inline double predict_group(std::size_t group, std::size_t item, const ForwardOutputs& f,
                            const ModelParams& p) {
  if (group >= f.group_fused.rows()) throw std::out_of_range("predict_group: group id out of range");
  if (item >= f.item_refined.rows()) throw std::out_of_range("predict_group: item id out of range");
  MlpScorer score(p);
  return score(f.group_fused.row(group), f.item_refined.row(item));
}

inline double predict_user(std::size_t user, std::size_t item, const ModelParams& p) {
  if (user >= p.users.rows()) throw std::out_of_range("predict_user: user id out of range");
  if (item >= p.items.rows()) throw std::out_of_range("predict_user: item id out of range");
  MlpScorer score(p);
  return score(p.users.row(user), p.items.row(item));
}

}  // namespace consrec
