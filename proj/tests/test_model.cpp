#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "acc/io.hpp"
#include "acc/model.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using acc::UserGroup;

namespace {

std::vector<UserGroup> groups_at(const acc::TimelineIndex& tl, int l) {
  std::vector<UserGroup> out;
  for (int g : tl.user_groups[static_cast<std::size_t>(l)]) {
    out.push_back(tl.groups[static_cast<std::size_t>(g)].users);
  }
  return out;
}

}  // namespace

TEST_CASE("example 1 intervals and missing sets") {
  const auto inst = fixtures::example1();
  inst.validate();
  const auto tl = acc::build_timeline(inst);
  REQUIRE(tl.beta() == 3);
  CHECK(tl.intervals[0].start == 0);
  CHECK(tl.intervals[0].end == 1);
  CHECK(tl.intervals[1].start == 1);
  CHECK(tl.intervals[1].end == 3);
  CHECK(tl.intervals[2].start == 3);
  CHECK(tl.intervals[2].end == 5);
  CHECK(tl.missing_of(1) == std::vector<int>{1, 2, 3});
  CHECK(tl.missing_of(2) == std::vector<int>{1, 2});
  CHECK(tl.missing_of(3) == std::vector<int>{1, 3});
}

TEST_CASE("example 1 groups and eligibility") {
  const auto inst = fixtures::example1();
  const auto tl = acc::build_timeline(inst);
  const auto g12 = tl.find_group({1, 2});
  REQUIRE(g12);
  CHECK(tl.eligible(*g12, 1) == std::vector<int>{1});
  CHECK(tl.eligible(*g12, 2) == std::vector<int>{1, 2});
  CHECK(tl.groups[static_cast<std::size_t>(*g12)].intervals == std::vector<int>{1, 2});
  CHECK_FALSE(tl.find_group({1, 3}));
  CHECK(groups_at(tl, 1) == std::vector<UserGroup>{{1}, {1, 2}, {2}});
  const auto g23 = tl.find_group({2, 3});
  REQUIRE(g23);
  const auto& c21 = tl.carriers.at({2, 1});
  const auto& c22 = tl.carriers.at({2, 2});
  CHECK(std::find(c21.begin(), c21.end(), *g23) != c21.end());
  CHECK(std::find(c22.begin(), c22.end(), *g23) != c22.end());
}

TEST_CASE("all-but-one equations") {
  const auto inst = fixtures::example1();
  std::vector<acc::EquationTerm> ok{{1, {1, 1}}, {2, {2, 1}}};
  CHECK(acc::is_all_but_one(ok, inst));
  std::vector<acc::EquationTerm> bad{{1, {1, 1}}, {3, {3, 1}}};
  CHECK_FALSE(acc::is_all_but_one(bad, inst));
  std::vector<acc::EquationTerm> single{{3, {3, 3}}};
  CHECK(acc::is_all_but_one(single, inst));
  std::vector<acc::EquationTerm> cached_own{{1, {2, 1}}};
  CHECK_FALSE(acc::is_all_but_one(cached_own, inst));
}

TEST_CASE("degenerate timelines") {
  acc::Instance one;
  one.config = {1, 1, 2, 1, 256};
  one.placement.caches = {{}};
  one.requests = {fixtures::req(1, 0, 4, 1)};
  auto tl = acc::build_timeline(one);
  REQUIRE(tl.beta() == 1);
  CHECK(tl.intervals[0].length() == 4);
  CHECK(tl.active_users[0] == std::vector<int>{1});
  CHECK(groups_at(tl, 0) == std::vector<UserGroup>{{1}});

  auto sync = fixtures::mn_synchronous(3, 1, 1, 6);
  CHECK(acc::build_timeline(sync).beta() == 1);
}

TEST_CASE("centralized placement missing sets") {
  const auto inst = fixtures::mn_synchronous(3, 1, 1, 6);
  CHECK(acc::missing_set(inst, 1) == std::vector<int>{2, 3});
  acc::Instance full = inst;
  full.placement.caches[0].insert({1, 2});
  full.placement.caches[0].insert({1, 3});
  CHECK(acc::missing_set(full, 1).empty());
  const auto tl = acc::build_timeline(full);
  CHECK(std::find(tl.active_users[0].begin(), tl.active_users[0].end(), 1) ==
        tl.active_users[0].end());
}

TEST_CASE("validation rejects malformed instances") {
  auto inst = fixtures::example1();
  inst.requests[1].slack = 0;
  CHECK_THROWS_AS(inst.validate(), acc::ModelError);
  inst = fixtures::example1();
  inst.config.field_order = 128;
  CHECK_THROWS_AS(inst.validate(), acc::ModelError);
  inst = fixtures::example1();
  inst.requests[2].user = 1;
  CHECK_THROWS_AS(inst.validate(), acc::ModelError);
  inst = fixtures::example1();
  inst.config.N = 2;
  CHECK_THROWS_AS(inst.validate(), acc::ModelError);
}

TEST_CASE("json round trip") {
  auto inst = fixtures::example1();
  inst.requests[0].parts = {1, 3};
  const auto text = acc::io::instance_to_json(inst);
  const auto back = acc::io::instance_from_json(text);
  CHECK(back.config.N == 3);
  CHECK(back.placement.caches == inst.placement.caches);
  CHECK(back.requests[0].parts == std::vector<int>{1, 3});
  CHECK(back.requests[2].deadline() == 5);
  CHECK_THROWS_AS(acc::io::instance_from_json("{\"N\":1}"), acc::ModelError);
}

TEST_CASE("timeline invariants on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int K = 1 + static_cast<int>(rng() % 6);
    const int F = 1 + static_cast<int>(rng() % 5);
    auto inst = fixtures::random_instance(rng, K, F, 1, 0.5, 6, 5);
    const auto tl = acc::build_timeline(inst);
    int t_first = 1 << 30;
    int t_max = 0;
    for (const auto& q : inst.requests) {
      t_first = std::min(t_first, q.arrival);
      t_max = std::max(t_max, q.deadline());
    }
    REQUIRE(tl.beta() <= 2 * K - 1);
    CHECK(tl.horizon_start() == t_first);
    CHECK(tl.horizon_end() == t_max);
    for (int l = 0; l + 1 < tl.beta(); ++l) {
      CHECK(tl.intervals[static_cast<std::size_t>(l)].end == tl.intervals[static_cast<std::size_t>(l + 1)].start);
    }
    for (int l = 0; l < tl.beta(); ++l) {
      const auto& iv = tl.intervals[static_cast<std::size_t>(l)];
      CHECK(iv.length() > 0);
      std::vector<int> active;
      for (const auto& q : inst.requests) {
        const bool inside = q.arrival <= iv.start && iv.end <= q.deadline();
        const bool outside = iv.end <= q.arrival || q.deadline() <= iv.start;
        CHECK((inside || outside));
        if (inside && !acc::missing_set(inst, q.user).empty()) active.push_back(q.user);
      }
      std::sort(active.begin(), active.end());
      CHECK(tl.active_users[static_cast<std::size_t>(l)] == active);
      CHECK(groups_at(tl, l) == oracles::brute_force_groups(inst, active));
    }
    // Eligibility definition and monotonicity.
    for (const auto& info : tl.groups) {
      for (const auto& [i, parts] : info.eligible) {
        CHECK_FALSE(parts.empty());
        for (int f : parts) {
          for (int j : info.users) {
            if (j != i) CHECK(inst.placement.contains(j, {inst.request(i).demand, f}));
          }
        }
        for (int drop : info.users) {
          if (drop == i || info.users.size() < 2) continue;
          std::vector<int> smaller;
          for (int u : info.users) {
            if (u != drop) smaller.push_back(u);
          }
          const auto sub = acc::eligible_parts(inst, tl.missing_of(i), i, UserGroup(smaller));
          CHECK(std::includes(sub.begin(), sub.end(), parts.begin(), parts.end()));
        }
      }
    }
  }
}

TEST_CASE("centralized placement bounds group size by t+1") {
  for (int K = 2; K <= 6; ++K) {
    for (int t = 1; t < K; ++t) {
      const auto inst = fixtures::mn_synchronous(K, t, 1, 10);
      const auto tl = acc::build_timeline(inst);
      std::size_t largest = 0;
      for (const auto& g : tl.groups) largest = std::max(largest, g.users.size());
      CHECK(largest == static_cast<std::size_t>(t + 1));
      const auto brute = oracles::brute_force_groups(inst, tl.active_users[0]);
      CHECK(brute.size() == tl.groups.size());
    }
  }
}

TEST_CASE("group size cap") {
  const auto inst = fixtures::mn_synchronous(4, 2, 1, 10);
  acc::TimelineOptions opts;
  opts.max_group_size = 2;
  const auto tl = acc::build_timeline(inst, opts);
  for (const auto& g : tl.groups) CHECK(g.users.size() <= 2);
}
