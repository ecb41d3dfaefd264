#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "consrec/interactions.hpp"
#include "consrec/rng.hpp"

namespace consrec {

// Synthetic data with a planted group consensus: items are split evenly into
// topics, every group draws its members and all of its items from one topic,
// and users mostly interact inside their own topic.
struct PlantedConfig {
  std::size_t num_users = 500;
  std::size_t num_items = 300;
  std::size_t num_groups = 100;
  std::size_t num_topics = 10;
  std::size_t user_interactions = 12;
  double user_on_topic = 0.8;
  std::size_t min_group_size = 2;
  std::size_t max_group_size = 5;
  std::size_t group_interactions = 8;
  std::uint64_t seed = 7;
};

inline InteractionDataset make_planted_dataset(const PlantedConfig& c) {
  Rng rng = make_stream(c.seed, RngPurpose::synthetic);
  const auto topic_of = [&](std::size_t id) { return id % c.num_topics; };
  std::vector<IdList> items_by_topic(c.num_topics), users_by_topic(c.num_topics);
  for (std::size_t i = 0; i < c.num_items; ++i) items_by_topic[topic_of(i)].push_back(i);
  for (std::size_t u = 0; u < c.num_users; ++u) users_by_topic[topic_of(u)].push_back(u);

  auto pick = [&rng](const IdList& from) {
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng)];
  };
  auto draw_distinct = [&](std::size_t n, auto&& next) {
    IdList out;
    while (out.size() < n) {
      const auto x = next();
      if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  InteractionDataset d;
  for (std::size_t u = 0; u < c.num_users; ++u) d.users.intern("u" + std::to_string(u));
  for (std::size_t i = 0; i < c.num_items; ++i) d.items.intern("i" + std::to_string(i));
  for (std::size_t g = 0; g < c.num_groups; ++g) d.groups.intern("g" + std::to_string(g));

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_item(0, c.num_items - 1);
  d.user_items.resize(c.num_users);
  for (std::size_t u = 0; u < c.num_users; ++u) {
    const auto& own = items_by_topic[topic_of(u)];
    d.user_items[u] = draw_distinct(c.user_interactions, [&] {
      return coin(rng) < c.user_on_topic ? pick(own) : any_item(rng);
    });
  }
  std::uniform_int_distribution<std::size_t> group_size(c.min_group_size, c.max_group_size);
  for (std::size_t g = 0; g < c.num_groups; ++g) {
    const std::size_t topic = topic_of(g);
    d.group_members.push_back(draw_distinct(group_size(rng), [&] { return pick(users_by_topic[topic]); }));
    d.group_items.push_back(draw_distinct(c.group_interactions, [&] { return pick(items_by_topic[topic]); }));
  }
  d.validate();
  return d;
}

}  // namespace consrec
