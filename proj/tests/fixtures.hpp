#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "acc/model.hpp"

namespace fixtures {

inline acc::Request req(int user, int arrival, int slack, int demand) {
  acc::Request r;
  r.user = user;
  r.arrival = arrival;
  r.slack = slack;
  r.demand = demand;
  return r;
}

// N=K=F=3, the three-user running example.
inline acc::Instance example1(int slack3 = 2) {
  acc::Instance inst;
  inst.config = {3, 3, 3, 1, 256};
  inst.placement.caches = {
      {{2, 1}, {2, 2}, {3, 3}},
      {{1, 1}, {2, 3}, {3, 1}},
      {{2, 2}, {3, 2}, {2, 1}},
  };
  inst.requests = {req(1, 0, 5, 1), req(2, 1, 4, 2), req(3, 3, slack3, 3)};
  return inst;
}

// Z_i = {W_{n,i}}; each user misses two parts of its file.
inline acc::Instance example3(std::vector<std::pair<int, int>> times = {{1, 2}, {2, 2}, {3, 2}}) {
  acc::Instance inst;
  inst.config = {3, 3, 3, 1, 256};
  inst.placement.caches.resize(3);
  for (int i = 1; i <= 3; ++i) {
    for (int n = 1; n <= 3; ++n) inst.placement.caches[static_cast<std::size_t>(i - 1)].insert({n, i});
  }
  for (int i = 1; i <= 3; ++i) {
    inst.requests.push_back(req(i, times[static_cast<std::size_t>(i - 1)].first,
                                times[static_cast<std::size_t>(i - 1)].second, i));
  }
  return inst;
}

// N=K=5, F=10, centralized placement with t=2; T=(0,2,3,6,8), slack 15.
inline acc::Instance example4() {
  const std::vector<std::vector<int>> cached = {
      {1, 2, 3, 4}, {1, 5, 6, 7}, {2, 5, 8, 9}, {3, 6, 8, 10}, {4, 7, 9, 10}};
  const std::vector<int> arrivals = {0, 2, 3, 6, 8};
  acc::Instance inst;
  inst.config = {5, 5, 10, 1, 256};
  inst.placement.caches.resize(5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (int f : cached[i]) {
      for (int n = 1; n <= 5; ++n) inst.placement.caches[i].insert({n, f});
    }
    inst.requests.push_back(req(static_cast<int>(i) + 1, arrivals[i], 15, static_cast<int>(i) + 1));
  }
  return inst;
}

// Centralized placement: parts are t-subsets of [K] in lexicographic order;
// user i caches part S of every file iff i is in S.
inline std::vector<std::vector<int>> t_subsets(int K, int t) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int next) -> void {
    if (static_cast<int>(cur.size()) == t) {
      out.push_back(cur);
      return;
    }
    for (int u = next; u <= K; ++u) {
      cur.push_back(u);
      self(self, u + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

inline acc::Instance mn_synchronous(int K, int t, int r, int slack) {
  const auto parts = t_subsets(K, t);
  acc::Instance inst;
  inst.config = {K, K, static_cast<int>(parts.size()), r, 256};
  inst.placement.caches.resize(static_cast<std::size_t>(K));
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (int u : parts[p]) {
      for (int n = 1; n <= K; ++n) {
        inst.placement.caches[static_cast<std::size_t>(u - 1)].insert({n, static_cast<int>(p) + 1});
      }
    }
  }
  for (int i = 1; i <= K; ++i) inst.requests.push_back(req(i, 0, slack, i));
  return inst;
}

// Random small instance: each user caches each part of each file with
// probability `density`; arrivals in [0, horizon), slacks in [1, max_slack].
inline acc::Instance random_instance(std::mt19937_64& rng, int K, int F, int r,
                                     double density, int horizon, int max_slack) {
  acc::Instance inst;
  inst.config = {K, K, F, r, 256};
  std::bernoulli_distribution cached(density);
  std::uniform_int_distribution<int> arrival(0, horizon - 1);
  std::uniform_int_distribution<int> slack(1, max_slack);
  inst.placement.caches.resize(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    for (int n = 1; n <= K; ++n) {
      for (int f = 1; f <= F; ++f) {
        if (cached(rng)) inst.placement.caches[static_cast<std::size_t>(i)].insert({n, f});
      }
    }
  }
  for (int i = 1; i <= K; ++i) {
    const int a = arrival(rng);
    inst.requests.push_back(req(i, a, slack(rng), i));
  }
  return inst;
}

}  // namespace fixtures
