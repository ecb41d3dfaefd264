#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "consrec/interactions.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace consrec;
using testutil::TempDir;
using testutil::write_file;

namespace {

void write_canonical(const TempDir& dir, const std::string& members, const std::string& group_items,
                     const std::string& user_items) {
  write_file(dir / "group_members.tsv", members);
  write_file(dir / "group_items.tsv", group_items);
  write_file(dir / "user_items.tsv", user_items);
}

InteractionDataset make(std::size_t users, std::size_t items, std::vector<IdList> members,
                        std::vector<IdList> group_items, std::vector<IdList> user_items) {
  InteractionDataset d;
  for (std::size_t u = 0; u < users; ++u) d.users.intern("u" + std::to_string(u));
  for (std::size_t i = 0; i < items; ++i) d.items.intern("i" + std::to_string(i));
  for (std::size_t g = 0; g < members.size(); ++g) d.groups.intern("g" + std::to_string(g));
  d.group_members = std::move(members);
  d.group_items = std::move(group_items);
  d.user_items = std::move(user_items);
  d.user_items.resize(users);
  d.validate();
  return d;
}

}  // namespace

TEST(LoadDataset, CanonicalDensifiesInFirstAppearanceOrder) {
  TempDir dir;
  write_canonical(dir, "gB\tbob,amy\ngA\tamy,cat\n", "gA\tx\ngB\ty\ngB\tx\n", "cat\tz\nbob\tx\nbob\tx\n");
  const auto d = load_dataset(dir.path(), DataFormat::canonical);
  EXPECT_EQ(d.num_groups(), 2u);
  EXPECT_EQ(d.num_users(), 3u);
  EXPECT_EQ(d.num_items(), 3u);
  EXPECT_EQ(d.groups.externals(), (std::vector<std::string>{"gB", "gA"}));
  EXPECT_EQ(d.users.externals(), (std::vector<std::string>{"bob", "amy", "cat"}));
  EXPECT_EQ(d.group_members[0], (IdList{0, 1}));
  EXPECT_EQ(d.group_members[1], (IdList{1, 2}));
  EXPECT_EQ(d.group_items[0], (IdList{0, 1}));  // x=0 (first seen via gA), y=1
  EXPECT_EQ(d.user_items[0], (IdList{0}));      // duplicate line collapsed
  EXPECT_EQ(d.user_items[2], (IdList{2}));
}

TEST(LoadDataset, EmptyGroupItemsLoads) {
  TempDir dir;
  write_canonical(dir, "g1\tu1,u2\ng2\tu3\n", "", "u1\ti1\n");
  const auto d = load_dataset(dir.path(), DataFormat::canonical);
  EXPECT_EQ(d.num_groups(), 2u);
  EXPECT_TRUE(d.group_items[0].empty());
  EXPECT_TRUE(d.group_items[1].empty());
}

TEST(LoadDataset, MissingFileIsNamed) {
  TempDir dir;
  write_file(dir / "group_items.tsv", "");
  write_file(dir / "user_items.tsv", "");
  try {
    load_dataset(dir.path(), DataFormat::canonical);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("group_members.tsv"), std::string::npos);
  }
}

TEST(LoadDataset, MalformedLineReportsFileAndLine) {
  TempDir dir;
  write_canonical(dir, "g1\tu1\n", "g1\ti1\ng1\n", "");
  try {
    load_dataset(dir.path(), DataFormat::canonical);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("group_items.tsv:2"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, GroupWithoutRosterIsRejected) {
  TempDir dir;
  write_canonical(dir, "g1\tu1\n", "g9\ti1\n", "");
  EXPECT_THROW(load_dataset(dir.path(), DataFormat::canonical), DataError);
}

TEST(LoadDataset, AgreeFormatIgnoresExtraColumns) {
  TempDir dir;
  write_file(dir / "groupMember.txt", "0 1,2\n1 2,3\n");
  write_file(dir / "groupRatingTrain.txt", "0 10 1\n1 11 1\n");
  write_file(dir / "groupRatingTest.txt", "0 12 1 99\n");
  write_file(dir / "userRatingTrain.txt", "1 10 5\n4 13 3\n");
  const auto d = load_dataset(dir.path(), DataFormat::agree);
  EXPECT_EQ(d.num_groups(), 2u);
  EXPECT_EQ(d.num_users(), 4u);
  EXPECT_EQ(d.num_items(), 4u);
  EXPECT_EQ(d.group_interaction_count(), 3u);
  EXPECT_EQ(d.user_interaction_count(), 2u);
  EXPECT_EQ(d.items.external(d.group_items[0][1]), "12");
}

TEST(LoadDataset, AgreeFormatRequiresGroupMemberFile) {
  TempDir dir;
  write_file(dir / "groupRatingTrain.txt", "0 10\n");
  EXPECT_THROW(load_dataset(dir.path(), DataFormat::agree), DataError);
}

TEST(WritePrepared, ReloadingPreparedOutputIsIdempotent) {
  TempDir in, out1, out2;
  write_canonical(in, "gB\tbob,amy\ngA\tamy,cat\n", "gA\tx\ngB\ty\ngB\tx\n", "cat\tz\nbob\tw\n");
  const auto d = load_dataset(in.path(), DataFormat::canonical);
  write_prepared(d, out1.path());
  const auto reloaded = load_dataset(out1.path(), DataFormat::canonical);
  EXPECT_EQ(reloaded, d);
  write_prepared(reloaded, out2.path());
  for (const char* f : {"group_members.tsv", "group_items.tsv", "user_items.tsv", "id_maps.tsv"}) {
    EXPECT_EQ(testutil::read_file(out1 / f), testutil::read_file(out2 / f)) << f;
  }
}

TEST(ApplyFilters, DropsSmallRostersAndShortHistories) {
  // g0: 1 member, 5 items -> removed; g1: 3 members, 2 items -> removed; g2 passes.
  auto d = make(5, 6, {{0}, {1, 2, 3}, {3, 4}}, {{0, 1, 2, 3, 4}, {0, 1}, {2, 3, 5}}, {});
  const auto f = apply_filters(d);
  ASSERT_EQ(f.num_groups(), 1u);
  EXPECT_EQ(f.groups.external(0), "g2");
  EXPECT_EQ(f.num_users(), 2u);  // u3, u4
  EXPECT_EQ(f.num_items(), 3u);  // i2, i3, i5
  EXPECT_EQ(f.users.externals(), (std::vector<std::string>{"u3", "u4"}));
  EXPECT_EQ(f.group_items[0], (IdList{0, 1, 2}));
  f.validate();
}

TEST(ApplyFilters, UsersWithOwnHistoryAreKept) {
  auto d = make(3, 4, {{0}}, {{0}}, {{}, {3}, {}});
  const auto f = apply_filters(d);
  EXPECT_EQ(f.num_groups(), 0u);
  EXPECT_EQ(f.users.externals(), (std::vector<std::string>{"u1"}));
  EXPECT_EQ(f.items.externals(), (std::vector<std::string>{"i3"}));
}

TEST(ApplyFilters, PassingDatasetIsUnchanged) {
  auto d = make(3, 3, {{0, 1}, {1, 2}}, {{0, 1, 2}, {0, 1, 2}}, {{0}, {}, {2}});
  EXPECT_EQ(apply_filters(d), d);
}

TEST(ApplyFilters, IsIdempotent) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = oracle::random_dataset(rng, 8, 8, 6);
    const auto once = apply_filters(d);
    EXPECT_EQ(apply_filters(once), once);
  }
}

TEST(Split, HoldsOutOneOfSeveral) {
  auto d = make(1, 10, {{0}}, {{3, 7, 9}}, {{4}});
  const auto s = split_leave_one_out(d, 17);
  ASSERT_TRUE(s.held_out_group[0].has_value());
  EXPECT_EQ(s.train.group_items[0].size(), 2u);
  const IdList all{3, 7, 9};
  EXPECT_TRUE(std::count(all.begin(), all.end(), *s.held_out_group[0]));
  EXPECT_FALSE(std::count(s.train.group_items[0].begin(), s.train.group_items[0].end(), *s.held_out_group[0]));
}

TEST(Split, SingletonIsNeverSplit) {
  auto d = make(1, 10, {{0}}, {{3}}, {{4}});
  const auto s = split_leave_one_out(d, 17);
  EXPECT_FALSE(s.held_out_group[0].has_value());
  EXPECT_FALSE(s.held_out_user[0].has_value());
  EXPECT_EQ(s.train.group_items[0], (IdList{3}));
}

TEST(Split, DeterministicAndReMergeable) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = oracle::random_dataset(rng, 8, 10, 5);
    const auto a = split_leave_one_out(d, 99);
    EXPECT_EQ(a, split_leave_one_out(d, 99));
    for (auto kind : {EntityKind::group, EntityKind::user}) {
      for (std::size_t e = 0; e < d.num_entities(kind); ++e) {
        IdList merged = a.train.interactions(kind)[e];
        if (a.held_out(kind)[e]) merged.push_back(*a.held_out(kind)[e]);
        std::sort(merged.begin(), merged.end());
        EXPECT_EQ(merged, d.interactions(kind)[e]);
      }
    }
  }
}

TEST(TrainingNegatives, SupportIsTheComplement) {
  auto d = make(1, 5, {}, {}, {{2}});
  Rng rng = make_stream(1, RngPurpose::train_negatives);
  const auto pairs = sample_training_negatives(d, EntityKind::user, 0, 2, rng);
  ASSERT_EQ(pairs.size(), 2u);
  for (const auto& [pos, neg] : pairs) {
    EXPECT_EQ(pos, 2u);
    EXPECT_NE(neg, 2u);
    EXPECT_LT(neg, 5u);
  }
}

TEST(TrainingNegatives, CountIsPerPositive) {
  auto d = make(1, 20, {{0}}, {{1, 4, 9}}, {{}});
  Rng rng = make_stream(1, RngPurpose::train_negatives);
  EXPECT_EQ(sample_training_negatives(d, EntityKind::group, 0, 4, rng).size(), 12u);
  EXPECT_EQ(sample_training_negatives(d, EntityKind::group, 0, 8, rng).size(), 24u);
}

TEST(TrainingNegatives, DeterministicGivenStream) {
  auto d = make(1, 30, {{0}}, {{1, 4, 9}}, {{}});
  Rng a = make_stream(5, RngPurpose::train_negatives), b = make_stream(5, RngPurpose::train_negatives);
  EXPECT_EQ(sample_training_negatives(d, EntityKind::group, 0, 8, a),
            sample_training_negatives(d, EntityKind::group, 0, 8, b));
}

TEST(TrainingNegatives, SaturatedEntityHasNoNegatives) {
  auto d = make(1, 3, {}, {}, {{0, 1, 2}});
  Rng rng = make_stream(1, RngPurpose::train_negatives);
  try {
    sample_training_negatives(d, EntityKind::user, 0, 1, rng);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no negatives available"), std::string::npos);
  }
}

TEST(EvalQueries, HundredDistinctNegativesAvoidingInteractions) {
  IdList items;
  for (std::size_t i = 0; i < 10; ++i) items.push_back(i * 7);
  auto d = make(1, 200, {{0}}, {items}, {{}});
  auto s = split_leave_one_out(d, 3);
  Rng rng = make_stream(3, RngPurpose::eval_negatives);
  const auto qs = build_eval_queries(s, EntityKind::group, 100, rng);
  ASSERT_EQ(qs.size(), 1u);
  const auto& q = qs[0];
  EXPECT_EQ(q.positive, *s.held_out_group[0]);
  const std::set<std::size_t> uniq(q.negatives.begin(), q.negatives.end());
  EXPECT_EQ(uniq.size(), 100u);
  for (auto j : q.negatives) EXPECT_FALSE(std::count(items.begin(), items.end(), j));
}

TEST(EvalQueries, ExhaustionTakesWholeEligibleSet) {
  auto d = make(1, 12, {{0}}, {{0, 5}}, {{}});
  auto s = split_leave_one_out(d, 3);
  Rng rng = make_stream(3, RngPurpose::eval_negatives);
  const auto qs = build_eval_queries(s, EntityKind::group, 10, rng);
  IdList negs = qs.at(0).negatives;
  std::sort(negs.begin(), negs.end());
  EXPECT_EQ(negs, (IdList{1, 2, 3, 4, 6, 7, 8, 9, 10, 11}));
}

TEST(EvalQueries, TooFewEligibleNamesTheEntity) {
  auto d = make(1, 12, {{0}}, {{0, 5}}, {{}});
  auto s = split_leave_one_out(d, 3);
  Rng rng = make_stream(3, RngPurpose::eval_negatives);
  try {
    build_eval_queries(s, EntityKind::group, 11, rng);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'g0'"), std::string::npos) << e.what();
  }
}

TEST(EvalQueries, InvariantsAndDeterminism) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto d = oracle::random_dataset(gen, 10, 40, 6);
    const auto s = split_leave_one_out(d, trial);
    for (auto kind : {EntityKind::group, EntityKind::user}) {
      Rng a = make_stream(trial, RngPurpose::eval_negatives), b = make_stream(trial, RngPurpose::eval_negatives);
      std::vector<EvalQuery> qs;
      try {
        qs = build_eval_queries(s, kind, 5, a);
      } catch (const DataError&) {
        continue;  // dense random rows can exhaust the pool
      }
      EXPECT_EQ(qs, build_eval_queries(s, kind, 5, b));
      for (const auto& q : qs) {
        const auto& train = s.train.interactions(kind)[q.entity];
        const std::set<std::size_t> uniq(q.negatives.begin(), q.negatives.end());
        EXPECT_EQ(uniq.size(), 5u);
        EXPECT_FALSE(uniq.count(q.positive));
        for (auto j : q.negatives) EXPECT_FALSE(std::binary_search(train.begin(), train.end(), j));
      }
    }
  }
}
