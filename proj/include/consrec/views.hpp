#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <vector>

#include "consrec/interactions.hpp"
#include "consrec/tensor.hpp"

namespace consrec {

// Member-level hypergraph. Nodes are users [0, M) followed by items [M, M+N);
// hyperedge t joins roster G_t and the items Y_t.
struct MemberHypergraph {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<IdList> edge_members;  // user ids per hyperedge
  std::vector<IdList> edge_items;    // item ids per hyperedge, without the M offset
  std::vector<IdList> node_edges;    // hyperedge ids per node

  // Pooling operators for the forward pass.
  std::shared_ptr<const Segments> members_of_edge;
  std::shared_ptr<const Segments> items_of_edge;
  std::shared_ptr<const Segments> edges_of_user;
  std::shared_ptr<const Segments> edges_of_item;

  std::size_t num_nodes() const noexcept { return num_users + num_items; }
  std::size_t num_hyperedges() const noexcept { return edge_members.size(); }

  // Node ids of hyperedge t: members, then items offset by M.
  IdList edge_nodes(std::size_t t) const {
    IdList nodes = edge_members.at(t);
    for (auto i : edge_items.at(t)) nodes.push_back(num_users + i);
    return nodes;
  }
};

inline MemberHypergraph build_member_hypergraph(const InteractionDataset& d) {
  MemberHypergraph h;
  h.num_users = d.num_users();
  h.num_items = d.num_items();
  h.edge_members = d.group_members;
  h.edge_items = d.group_items;
  h.node_edges.assign(h.num_nodes(), {});
  for (std::size_t t = 0; t < d.num_groups(); ++t) {
    for (auto u : d.group_members[t]) h.node_edges[u].push_back(t);
    for (auto i : d.group_items[t]) h.node_edges[h.num_users + i].push_back(t);
  }
  const std::vector<IdList> user_edges(h.node_edges.begin(),
                                       h.node_edges.begin() + static_cast<std::ptrdiff_t>(h.num_users));
  const std::vector<IdList> item_edges(h.node_edges.begin() + static_cast<std::ptrdiff_t>(h.num_users),
                                       h.node_edges.end());
  h.members_of_edge = std::make_shared<const Segments>(Segments::from_lists(h.num_users, h.edge_members));
  h.items_of_edge = std::make_shared<const Segments>(Segments::from_lists(h.num_items, h.edge_items));
  h.edges_of_user = std::make_shared<const Segments>(Segments::from_lists(d.num_groups(), user_edges));
  h.edges_of_item = std::make_shared<const Segments>(Segments::from_lists(d.num_groups(), item_edges));
  return h;
}

// D^{-1/2} A D^{-1/2} of a symmetric adjacency; zero-degree rows stay zero.
struct NormalizedAdjacency {
  std::shared_ptr<const SparseMatrix> matrix;

  std::size_t size() const noexcept { return matrix ? matrix->rows() : 0; }
  double at(std::size_t p, std::size_t q) const { return matrix->at(p, q); }
};

inline NormalizedAdjacency normalize_symmetric(std::size_t n,
                                               const std::vector<SparseMatrix::Entry>& adjacency) {
  std::vector<double> degree(n, 0.0);
  for (const auto& e : adjacency) degree[e.row] += e.value;
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (degree[k] > 0.0) inv_sqrt[k] = 1.0 / std::sqrt(degree[k]);
  }
  std::vector<SparseMatrix::Entry> scaled;
  scaled.reserve(adjacency.size());
  for (const auto& e : adjacency) {
    scaled.push_back({e.row, e.col, e.value * (inv_sqrt[e.row] * inv_sqrt[e.col])});
  }
  return {std::make_shared<const SparseMatrix>(SparseMatrix::from_triplets(n, n, std::move(scaled)))};
}

// Group-item bipartite view, [[0, Y], [Y^T, 0]]: groups occupy indices
// [0, K), items [K, K+N).
inline NormalizedAdjacency build_item_bipartite(const InteractionDataset& d) {
  const std::size_t k = d.num_groups();
  std::vector<SparseMatrix::Entry> a;
  for (std::size_t g = 0; g < k; ++g) {
    for (auto i : d.group_items[g]) {
      a.push_back({g, k + i, 1.0});
      a.push_back({k + i, g, 1.0});
    }
  }
  return normalize_symmetric(k + d.num_items(), a);
}

struct WeightedEdge {
  std::size_t p;
  std::size_t q;
  double weight;
  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// Groups joined when they share a member or an item, weighted by the
// overlap ratio (|G_p∩G_q| + |Y_p∩Y_q|) / (|G_p∪G_q| + |Y_p∪Y_q|).
struct GroupGraph {
  std::size_t num_groups = 0;
  std::vector<WeightedEdge> edges;  // p < q, sorted by (p, q)
};

inline GroupGraph build_group_graph(const InteractionDataset& d) {
  const std::size_t k = d.num_groups();
  std::vector<IdList> groups_of_user(d.num_users());
  std::vector<IdList> groups_of_item(d.num_items());
  for (std::size_t g = 0; g < k; ++g) {
    for (auto u : d.group_members[g]) groups_of_user[u].push_back(g);
    for (auto i : d.group_items[g]) groups_of_item[i].push_back(g);
  }

  GroupGraph out;
  out.num_groups = k;
  std::vector<std::size_t> shared_members(k, 0), shared_items(k, 0);
  IdList touched;
  for (std::size_t p = 0; p < k; ++p) {
    touched.clear();
    auto visit = [&](const std::vector<IdList>& index, const IdList& keys, std::vector<std::size_t>& count) {
      for (auto key : keys) {
        for (auto q : index[key]) {
          if (q <= p) continue;
          if (shared_members[q] == 0 && shared_items[q] == 0) touched.push_back(q);
          ++count[q];
        }
      }
    };
    visit(groups_of_user, d.group_members[p], shared_members);
    visit(groups_of_item, d.group_items[p], shared_items);
    std::sort(touched.begin(), touched.end());
    for (auto q : touched) {
      const double inter = static_cast<double>(shared_members[q] + shared_items[q]);
      const double uni = static_cast<double>(d.group_members[p].size() + d.group_members[q].size() -
                                             shared_members[q] + d.group_items[p].size() +
                                             d.group_items[q].size() - shared_items[q]);
      out.edges.push_back({p, q, inter / uni});
      shared_members[q] = 0;
      shared_items[q] = 0;
    }
  }
  return out;
}

inline NormalizedAdjacency normalize_group_graph(const GroupGraph& g, bool self_loops = true) {
  std::vector<SparseMatrix::Entry> a;
  a.reserve(2 * g.edges.size() + g.num_groups);
  for (const auto& e : g.edges) {
    a.push_back({e.p, e.q, e.weight});
    a.push_back({e.q, e.p, e.weight});
  }
  if (self_loops) {
    for (std::size_t p = 0; p < g.num_groups; ++p) a.push_back({p, p, 1.0});
  }
  return normalize_symmetric(g.num_groups, a);
}

// The three consensus views of one training dataset.
struct ConsensusViews {
  MemberHypergraph member;
  NormalizedAdjacency item;
  GroupGraph group_graph;
  NormalizedAdjacency group;

  std::size_t num_users() const noexcept { return member.num_users; }
  std::size_t num_items() const noexcept { return member.num_items; }
  std::size_t num_groups() const noexcept { return group_graph.num_groups; }
};

inline ConsensusViews build_views(const InteractionDataset& d, bool group_self_loops = true) {
  ConsensusViews v;
  v.member = build_member_hypergraph(d);
  v.item = build_item_bipartite(d);
  v.group_graph = build_group_graph(d);
  v.group = normalize_group_graph(v.group_graph, group_self_loops);
  return v;
}

// Debug edge lists: view_member.tsv (hyperedge, node), view_item.tsv and
// view_group.tsv (row, col, weight) with 17 significant digits.
inline void dump_views(const ConsensusViews& v, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "view_member.tsv");
    for (std::size_t t = 0; t < v.member.num_hyperedges(); ++t) {
      for (auto n : v.member.edge_nodes(t)) out << t << '\t' << n << '\n';
    }
  }
  auto dump = [&](const NormalizedAdjacency& a, const char* name) {
    std::ofstream out(dir / name);
    out << std::setprecision(17);
    for (std::size_t r = 0; r < a.size(); ++r) {
      auto cols = a.matrix->row_cols(r);
      auto vals = a.matrix->row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) out << r << '\t' << cols[k] << '\t' << vals[k] << '\n';
    }
  };
  dump(v.item, "view_item.tsv");
  dump(v.group, "view_group.tsv");
}

}  // namespace consrec
