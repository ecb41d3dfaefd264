#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "consrec/error.hpp"
#include "consrec/rng.hpp"

namespace consrec {

namespace fs = std::filesystem;

enum class EntityKind { group, user };

inline std::string_view entity_name(EntityKind k) { return k == EntityKind::group ? "group" : "user"; }

using IdList = std::vector<std::size_t>;

// External token <-> dense index table, dense ids in first-appearance order.
class IdMap {
 public:
  std::size_t size() const noexcept { return external_.size(); }
  const std::string& external(std::size_t dense) const { return external_.at(dense); }
  const std::vector<std::string>& externals() const noexcept { return external_; }

  std::optional<std::size_t> find(const std::string& token) const {
    auto it = lookup_.find(token);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t intern(const std::string& token) {
    auto [it, inserted] = lookup_.try_emplace(token, external_.size());
    if (inserted) external_.push_back(token);
    return it->second;
  }

  // Keeps only dense ids with keep[id] set, preserving relative order.
  // Returns old -> new (npos for dropped).
  std::vector<std::size_t> compact(const std::vector<bool>& keep) {
    std::vector<std::size_t> remap(external_.size(), npos);
    IdMap next;
    for (std::size_t i = 0; i < external_.size(); ++i) {
      if (keep[i]) remap[i] = next.intern(external_[i]);
    }
    *this = std::move(next);
    return remap;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.external_ == b.external_; }

 private:
  std::vector<std::string> external_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Users, items, groups; group rosters; group-item (Y) and user-item (R) rows.
struct InteractionDataset {
  std::vector<IdList> group_members;
  std::vector<IdList> group_items;
  std::vector<IdList> user_items;
  IdMap users;
  IdMap items;
  IdMap groups;

  std::size_t num_users() const noexcept { return users.size(); }
  std::size_t num_items() const noexcept { return items.size(); }
  std::size_t num_groups() const noexcept { return groups.size(); }

  const std::vector<IdList>& interactions(EntityKind k) const {
    return k == EntityKind::group ? group_items : user_items;
  }
  std::size_t num_entities(EntityKind k) const {
    return k == EntityKind::group ? num_groups() : num_users();
  }

  std::size_t group_interaction_count() const { return total(group_items); }
  std::size_t user_interaction_count() const { return total(user_items); }

  // Throws DataError on any violated invariant.
  void validate() const {
    const auto check = [](const std::vector<IdList>& rows, std::size_t expected_rows,
                          std::size_t bound, const char* what) {
      if (rows.size() != expected_rows) {
        throw DataError(std::string(what) + ": row count does not match entity count");
      }
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& l = rows[r];
        for (std::size_t k = 0; k < l.size(); ++k) {
          if (l[k] >= bound) {
            throw DataError(std::string(what) + " row " + std::to_string(r) + ": id " +
                            std::to_string(l[k]) + " out of range");
          }
          if (k > 0 && l[k - 1] >= l[k]) {
            throw DataError(std::string(what) + " row " + std::to_string(r) +
                            ": ids not strictly sorted");
          }
        }
      }
    };
    check(group_members, num_groups(), num_users(), "group_members");
    check(group_items, num_groups(), num_items(), "group_items");
    check(user_items, num_users(), num_items(), "user_items");
  }

  friend bool operator==(const InteractionDataset&, const InteractionDataset&) = default;

 private:
  static std::size_t total(const std::vector<IdList>& rows) {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    return n;
  }
};

struct SplitDataset {
  InteractionDataset train;
  std::vector<std::optional<std::size_t>> held_out_group;
  std::vector<std::optional<std::size_t>> held_out_user;

  const std::vector<std::optional<std::size_t>>& held_out(EntityKind k) const {
    return k == EntityKind::group ? held_out_group : held_out_user;
  }

  friend bool operator==(const SplitDataset&, const SplitDataset&) = default;
};

struct EvalQuery {
  EntityKind kind = EntityKind::group;
  std::size_t entity = 0;
  std::size_t positive = 0;
  IdList negatives;

  friend bool operator==(const EvalQuery&, const EvalQuery&) = default;
};

enum class DataFormat { canonical, agree };

namespace detail {

inline void sort_unique(IdList& l) {
  std::sort(l.begin(), l.end());
  l.erase(std::unique(l.begin(), l.end()), l.end());
}

inline std::vector<std::string> split_any(std::string_view s, std::string_view delims) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && delims.find(s[i]) != std::string_view::npos) ++i;
    std::size_t j = i;
    while (j < s.size() && delims.find(s[j]) == std::string_view::npos) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string_view trim_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

// Calls fn(fields, line_no) for every non-blank line; fields split on `delims`.
template <class Fn>
void for_each_record(const fs::path& file, std::string_view delims, Fn&& fn) {
  std::ifstream in(file);
  if (!in) throw DataError("missing file: " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_eol(line);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      fn(split_any(view, delims), line_no);
    } catch (const DataError& e) {
      throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

struct Builder {
  InteractionDataset d;
  bool frozen = false;  // prepared input: every token must already be in the id maps

  std::size_t id(IdMap& map, const std::string& token, const char* kind) {
    if (frozen) {
      auto found = map.find(token);
      if (!found) throw DataError(std::string("unknown ") + kind + " token '" + token + "'");
      return *found;
    }
    return map.intern(token);
  }

  std::size_t user(const std::string& t) {
    const auto u = id(d.users, t, "user");
    if (d.user_items.size() <= u) d.user_items.resize(u + 1);
    return u;
  }
  std::size_t item(const std::string& t) { return id(d.items, t, "item"); }
  std::size_t new_group(const std::string& t) {
    const auto g = id(d.groups, t, "group");
    if (d.group_members.size() <= g) {
      d.group_members.resize(g + 1);
      d.group_items.resize(g + 1);
    }
    return g;
  }
  std::size_t known_group(const std::string& t) {
    auto g = d.groups.find(t);
    if (!g) throw DataError("group token '" + t + "' has no roster");
    return *g;
  }

  InteractionDataset finish() {
    d.user_items.resize(d.users.size());
    d.group_members.resize(d.groups.size());
    d.group_items.resize(d.groups.size());
    for (auto& l : d.group_members) sort_unique(l);
    for (auto& l : d.group_items) sort_unique(l);
    for (auto& l : d.user_items) sort_unique(l);
    d.validate();
    return std::move(d);
  }
};

inline void read_rosters(Builder& b, const fs::path& file, std::string_view delims) {
  for_each_record(file, delims, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.empty()) return;
    const auto g = b.new_group(f[0]);
    for (std::size_t k = 1; k < f.size(); ++k) {
      for (const auto& tok : split_any(f[k], ",")) b.d.group_members[g].push_back(b.user(tok));
    }
  });
}

inline void read_pairs(Builder& b, const fs::path& file, EntityKind kind, std::string_view delims) {
  for_each_record(file, delims, [&](const std::vector<std::string>& f, std::size_t) {
    if (f.size() < 2) throw DataError("expected '<entity> <item>'");
    if (kind == EntityKind::group) {
      const auto g = b.known_group(f[0]);
      b.d.group_items[g].push_back(b.item(f[1]));
    } else {
      const auto u = b.user(f[0]);
      b.d.user_items[u].push_back(b.item(f[1]));
    }
  });
}

}  // namespace detail

// Reads a dataset directory. Canonical: group_members.tsv, group_items.tsv,
// user_items.tsv (plus id_maps.tsv when the directory is prepared output).
// AGREE: groupMember.txt with group/user rating files.
inline InteractionDataset load_dataset(const fs::path& dir, DataFormat format) {
  detail::Builder b;
  if (format == DataFormat::canonical) {
    const auto members = dir / "group_members.tsv";
    const auto gi = dir / "group_items.tsv";
    const auto ui = dir / "user_items.tsv";
    for (const auto& f : {members, gi, ui}) {
      if (!fs::exists(f)) throw DataError("missing file: " + f.string());
    }
    std::optional<std::array<IdMap, 3>> names;
    if (fs::exists(dir / "id_maps.tsv")) {
      std::vector<std::array<std::string, 2>> rows[3];
      detail::for_each_record(dir / "id_maps.tsv", "\t",
                              [&](const std::vector<std::string>& f, std::size_t) {
                                if (f.size() != 3) {
                                  throw DataError("expected 'kind<TAB>external<TAB>dense'");
                                }
                                const int kind = f[0] == "user" ? 0 : f[0] == "item" ? 1
                                                 : f[0] == "group"                   ? 2
                                                                                     : -1;
                                if (kind < 0) throw DataError("unknown id kind '" + f[0] + "'");
                                rows[kind].push_back({f[2], f[1]});
                              });
      names.emplace();
      IdMap* dense_maps[3] = {&b.d.users, &b.d.items, &b.d.groups};
      for (int kind = 0; kind < 3; ++kind) {
        std::vector<std::string> ext(rows[kind].size());
        std::vector<bool> seen(rows[kind].size(), false);
        for (const auto& r : rows[kind]) {
          std::size_t dense = 0;
          try {
            std::size_t used = 0;
            dense = std::stoull(r[0], &used);
            if (used != r[0].size()) throw std::invalid_argument("trailing");
          } catch (const std::exception&) {
            throw DataError("id_maps.tsv: bad dense id '" + r[0] + "'");
          }
          if (dense >= ext.size() || seen[dense]) {
            throw DataError("id_maps.tsv: dense ids are not a permutation of 0..n-1");
          }
          seen[dense] = true;
          ext[dense] = r[1];
        }
        for (std::size_t k = 0; k < ext.size(); ++k) {
          dense_maps[kind]->intern(std::to_string(k));
          (*names)[kind].intern(ext[k]);
        }
        if ((*names)[kind].size() != ext.size()) {
          throw DataError("id_maps.tsv: duplicate external token");
        }
      }
      b.d.user_items.resize(b.d.users.size());
      b.d.group_members.resize(b.d.groups.size());
      b.d.group_items.resize(b.d.groups.size());
      b.frozen = true;
    }
    detail::read_rosters(b, members, "\t");
    detail::read_pairs(b, gi, EntityKind::group, "\t");
    detail::read_pairs(b, ui, EntityKind::user, "\t");
    if (names) {
      b.d.users = std::move((*names)[0]);
      b.d.items = std::move((*names)[1]);
      b.d.groups = std::move((*names)[2]);
    }
    return b.finish();
  }

  const auto members = dir / "groupMember.txt";
  if (!fs::exists(members)) throw DataError("missing file: " + members.string());
  detail::read_rosters(b, members, " \t");
  bool any_group = false;
  for (const char* name : {"groupRatingTrain.txt", "groupRatingTest.txt"}) {
    if (fs::exists(dir / name)) {
      detail::read_pairs(b, dir / name, EntityKind::group, " \t");
      any_group = true;
    }
  }
  bool any_user = false;
  for (const char* name : {"userRatingTrain.txt", "userRatingTest.txt"}) {
    if (fs::exists(dir / name)) {
      detail::read_pairs(b, dir / name, EntityKind::user, " \t");
      any_user = true;
    }
  }
  if (!any_group) throw DataError("missing file: " + (dir / "groupRatingTrain.txt").string());
  if (!any_user) throw DataError("missing file: " + (dir / "userRatingTrain.txt").string());
  return b.finish();
}

// Writes the canonical files with dense integer tokens plus id_maps.tsv.
inline void write_prepared(const InteractionDataset& d, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("group_members.tsv");
    for (std::size_t g = 0; g < d.num_groups(); ++g) {
      out << g << '\t';
      for (std::size_t k = 0; k < d.group_members[g].size(); ++k) {
        out << (k ? "," : "") << d.group_members[g][k];
      }
      out << '\n';
    }
  }
  {
    auto out = open("group_items.tsv");
    for (std::size_t g = 0; g < d.num_groups(); ++g) {
      for (auto i : d.group_items[g]) out << g << '\t' << i << '\n';
    }
  }
  {
    auto out = open("user_items.tsv");
    for (std::size_t u = 0; u < d.num_users(); ++u) {
      for (auto i : d.user_items[u]) out << u << '\t' << i << '\n';
    }
  }
  auto out = open("id_maps.tsv");
  const std::pair<const char*, const IdMap*> maps[] = {
      {"user", &d.users}, {"item", &d.items}, {"group", &d.groups}};
  for (const auto& [kind, map] : maps) {
    for (std::size_t k = 0; k < map->size(); ++k) {
      out << kind << '\t' << map->external(k) << '\t' << k << '\n';
    }
  }
}

// Drops groups with fewer than `min_members` members or fewer than
// `min_group_items` items, then users and items nobody references.
inline InteractionDataset apply_filters(const InteractionDataset& d, std::size_t min_members = 2,
                                        std::size_t min_group_items = 3) {
  std::vector<bool> keep_group(d.num_groups());
  for (std::size_t g = 0; g < d.num_groups(); ++g) {
    keep_group[g] = d.group_members[g].size() >= min_members &&
                    d.group_items[g].size() >= min_group_items;
  }
  std::vector<bool> keep_user(d.num_users(), false);
  std::vector<bool> keep_item(d.num_items(), false);
  for (std::size_t g = 0; g < d.num_groups(); ++g) {
    if (!keep_group[g]) continue;
    for (auto u : d.group_members[g]) keep_user[u] = true;
    for (auto i : d.group_items[g]) keep_item[i] = true;
  }
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    if (!d.user_items[u].empty()) keep_user[u] = true;
    for (auto i : d.user_items[u]) keep_item[i] = true;
  }

  InteractionDataset out;
  out.users = d.users;
  out.items = d.items;
  out.groups = d.groups;
  const auto user_map = out.users.compact(keep_user);
  const auto item_map = out.items.compact(keep_item);
  out.groups.compact(keep_group);

  auto remap = [](const IdList& l, const std::vector<std::size_t>& m) {
    IdList r;
    r.reserve(l.size());
    for (auto x : l) r.push_back(m[x]);
    return r;
  };
  for (std::size_t g = 0; g < d.num_groups(); ++g) {
    if (!keep_group[g]) continue;
    out.group_members.push_back(remap(d.group_members[g], user_map));
    out.group_items.push_back(remap(d.group_items[g], item_map));
  }
  out.user_items.resize(out.users.size());
  for (std::size_t u = 0; u < d.num_users(); ++u) {
    if (keep_user[u]) out.user_items[user_map[u]] = remap(d.user_items[u], item_map);
  }
  return out;
}

// Leave-one-out: every entity with >= 2 interactions moves one uniformly
// chosen interaction out of train.
inline SplitDataset split_leave_one_out(const InteractionDataset& d, std::uint64_t seed) {
  Rng rng = make_stream(seed, RngPurpose::split);
  SplitDataset s;
  s.train = d;
  auto hold_out = [&rng](std::vector<IdList>& rows, std::vector<std::optional<std::size_t>>& held) {
    held.assign(rows.size(), std::nullopt);
    for (std::size_t e = 0; e < rows.size(); ++e) {
      auto& l = rows[e];
      if (l.size() < 2) continue;
      std::uniform_int_distribution<std::size_t> pick(0, l.size() - 1);
      const auto k = pick(rng);
      held[e] = l[k];
      l.erase(l.begin() + static_cast<std::ptrdiff_t>(k));
    }
  };
  hold_out(s.train.group_items, s.held_out_group);
  hold_out(s.train.user_items, s.held_out_user);
  return s;
}

// For each training positive of the entity, `n` negatives drawn uniformly
// from the items it never interacted with.
inline std::vector<std::pair<std::size_t, std::size_t>> sample_training_negatives(
    const InteractionDataset& d, EntityKind kind, std::size_t entity, std::size_t n, Rng& rng) {
  const auto& positives = d.interactions(kind).at(entity);
  const std::size_t num_items = d.num_items();
  if (positives.size() >= num_items) {
    throw DataError(std::string(entity_name(kind)) + " " + std::to_string(entity) +
                    ": no negatives available");
  }
  std::uniform_int_distribution<std::size_t> draw(0, num_items - 1);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(positives.size() * n);
  for (auto pos : positives) {
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t neg;
      do {
        neg = draw(rng);
      } while (std::binary_search(positives.begin(), positives.end(), neg));
      pairs.emplace_back(pos, neg);
    }
  }
  return pairs;
}

// One query per held-out interaction of the given entity kind; negatives are
// drawn without replacement from items outside train and held-out.
inline std::vector<EvalQuery> build_eval_queries(const SplitDataset& s, EntityKind kind,
                                                 std::size_t n_neg, Rng& rng) {
  std::vector<EvalQuery> queries;
  const auto& held = s.held_out(kind);
  const auto& train = s.train.interactions(kind);
  const std::size_t num_items = s.train.num_items();
  IdList eligible;
  for (std::size_t e = 0; e < held.size(); ++e) {
    if (!held[e]) continue;
    const auto& seen = train[e];
    eligible.clear();
    for (std::size_t i = 0; i < num_items; ++i) {
      if (i != *held[e] && !std::binary_search(seen.begin(), seen.end(), i)) eligible.push_back(i);
    }
    if (eligible.size() < n_neg) {
      const auto& names = kind == EntityKind::group ? s.train.groups : s.train.users;
      throw DataError(std::string(entity_name(kind)) + " '" + names.external(e) + "': only " +
                      std::to_string(eligible.size()) + " eligible negatives, need " +
                      std::to_string(n_neg));
    }
    for (std::size_t k = 0; k < n_neg; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, eligible.size() - 1);
      std::swap(eligible[k], eligible[pick(rng)]);
    }
    queries.push_back(EvalQuery{kind, e, *held[e], IdList(eligible.begin(), eligible.begin() +
                                                             static_cast<std::ptrdiff_t>(n_neg))});
  }
  return queries;
}

}  // namespace consrec
