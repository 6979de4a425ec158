#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "acc/flows.hpp"
#include "acc/lp.hpp"
#include "acc/model.hpp"

namespace oracles {

// Solves the square system A x = b by Gaussian elimination with partial
// pivoting; nullopt when A is (numerically) singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-10) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double factor = a[r][c] / a[c][c];
      if (factor == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= factor * a[c][k];
      b[r] -= factor * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

struct VertexOptimum {
  double objective = 0.0;
  std::vector<double> x;
};

// Optimum over all basic feasible solutions of an LP with x >= 0 and no
// upper bounds. Assumes the feasible region is bounded; returns nullopt if
// no vertex is feasible.
inline std::optional<VertexOptimum> enumerate_vertices(const acc::lp::LinearProgram& lp) {
  const int n = lp.num_variables();
  struct Row {
    std::vector<double> a;
    double b;
    acc::lp::Relation rel;
  };
  std::vector<Row> rows;
  for (const auto& c : lp.constraints()) {
    Row row{std::vector<double>(static_cast<std::size_t>(n), 0.0), c.rhs, c.relation};
    for (const auto& t : c.terms) row.a[static_cast<std::size_t>(t.var)] += t.coef;
    rows.push_back(std::move(row));
  }
  for (int j = 0; j < n; ++j) {
    Row row{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0,
            acc::lp::Relation::kGreaterEqual};
    row.a[static_cast<std::size_t>(j)] = 1.0;
    rows.push_back(std::move(row));
  }
  const int total = static_cast<int>(rows.size());
  const bool maximize = lp.sense() == acc::lp::Sense::kMaximize;
  std::optional<VertexOptimum> best;
  std::vector<int> pick;
  auto feasible = [&](const std::vector<double>& x) {
    for (const auto& row : rows) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) lhs += row.a[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
      const double tol = 1e-7 * std::max(1.0, std::abs(row.b));
      if (row.rel == acc::lp::Relation::kLessEqual && lhs > row.b + tol) return false;
      if (row.rel == acc::lp::Relation::kGreaterEqual && lhs < row.b - tol) return false;
      if (row.rel == acc::lp::Relation::kEqual && std::abs(lhs - row.b) > tol) return false;
    }
    return true;
  };
  auto rec = [&](auto&& self, int next) -> void {
    if (static_cast<int>(pick.size()) == n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (int k : pick) {
        a.push_back(rows[static_cast<std::size_t>(k)].a);
        b.push_back(rows[static_cast<std::size_t>(k)].b);
      }
      auto x = solve_square(std::move(a), std::move(b));
      if (!x || !feasible(*x)) return;
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += lp.objective()[static_cast<std::size_t>(j)] * (*x)[static_cast<std::size_t>(j)];
      if (!best || (maximize ? obj > best->objective : obj < best->objective)) {
        best = VertexOptimum{obj, *x};
      }
      return;
    }
    if (total - next < n - static_cast<int>(pick.size())) return;
    for (int k = next; k < total; ++k) {
      pick.push_back(k);
      self(self, k + 1);
      pick.pop_back();
    }
  };
  if (n == 0) return VertexOptimum{};
  rec(rec, 0);
  return best;
}

// Min-cost flow written directly as an LP over arc flows.
inline acc::lp::LpResult flow_as_lp(const acc::flows::FlowNetwork& net) {
  acc::lp::LinearProgram prog;
  for (const auto& a : net.arcs()) {
    std::optional<double> upper;
    if (a.capacity != acc::flows::kInfiniteCapacity) upper = static_cast<double>(a.capacity);
    prog.add_variable("f", static_cast<double>(a.cost), 0.0, upper);
  }
  for (int v = 0; v < net.num_nodes(); ++v) {
    std::vector<acc::lp::Term> terms;
    for (int k = 0; k < net.num_arcs(); ++k) {
      if (net.arc(k).from == v) terms.push_back({k, 1.0});
      if (net.arc(k).to == v) terms.push_back({k, -1.0});
    }
    prog.add_constraint(std::move(terms), acc::lp::Relation::kEqual,
                        static_cast<double>(net.supply(v)));
  }
  return acc::lp::solve(prog);
}

// Maximum s-t flow as an LP; NaN if the LP does not reach an optimum.
inline double max_flow_value(const acc::flows::FlowNetwork& net, int s, int t) {
  acc::lp::LinearProgram prog(acc::lp::Sense::kMaximize);
  for (const auto& a : net.arcs()) {
    std::optional<double> upper;
    if (a.capacity != acc::flows::kInfiniteCapacity) upper = static_cast<double>(a.capacity);
    const double gain = (a.from == s ? 1.0 : 0.0) - (a.to == s ? 1.0 : 0.0);
    prog.add_variable("f", gain, 0.0, upper);
  }
  for (int v = 0; v < net.num_nodes(); ++v) {
    if (v == s || v == t) continue;
    std::vector<acc::lp::Term> terms;
    for (int k = 0; k < net.num_arcs(); ++k) {
      if (net.arc(k).from == v) terms.push_back({k, 1.0});
      if (net.arc(k).to == v) terms.push_back({k, -1.0});
    }
    prog.add_constraint(std::move(terms), acc::lp::Relation::kEqual, 0.0);
  }
  const auto res = acc::lp::solve(prog);
  if (res.status != acc::lp::Status::kOptimal) return std::numeric_limits<double>::quiet_NaN();
  return res.objective;
}

// Minimum s-t cut by enumerating every node subset containing s but not t.
inline std::int64_t brute_force_min_cut(const acc::flows::FlowNetwork& net, int s, int t) {
  const int n = net.num_nodes();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s & 1u) || (mask >> t & 1u)) continue;
    std::int64_t cut = 0;
    bool infinite = false;
    for (const auto& a : net.arcs()) {
      if ((mask >> a.from & 1u) && !(mask >> a.to & 1u)) {
        if (a.capacity == acc::flows::kInfiniteCapacity) infinite = true;
        else cut += a.capacity;
      }
    }
    if (!infinite) best = std::min(best, cut);
  }
  return best;
}

// Every subset of `active` whose members all have a nonempty eligible set.
inline std::vector<acc::UserGroup> brute_force_groups(const acc::Instance& inst,
                                                      const std::vector<int>& active) {
  std::vector<acc::UserGroup> out;
  const std::size_t n = active.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> users;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask >> k & 1u) users.push_back(active[k]);
    }
    acc::UserGroup g(users);
    bool ok = true;
    for (int i : g) {
      const int d = inst.request(i).demand;
      bool any = false;
      for (int f = 1; f <= inst.config.F && !any; ++f) {
        if (inst.placement.contains(i, {d, f})) continue;
        bool all = true;
        for (int j : g) {
          if (j != i && !inst.placement.contains(j, {d, f})) all = false;
        }
        any = all;
      }
      ok = ok && any;
    }
    if (ok) out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Fewest integral slot transmissions (r = 1) of all-but-one equations that
// deliver every missing part to its user inside the user's window; nullopt
// if impossible. Dynamic programming over slots and delivered-part masks.
inline std::optional<int> min_integral_schedule(const acc::Instance& inst) {
  std::vector<std::pair<int, int>> items;  // (user, part)
  std::map<std::pair<int, int>, int> bit;
  int t0 = std::numeric_limits<int>::max();
  int t1 = 0;
  for (const auto& req : inst.requests) {
    t0 = std::min(t0, req.arrival);
    t1 = std::max(t1, req.deadline());
    for (int f = 1; f <= inst.config.F; ++f) {
      if (!inst.placement.contains(req.user, {req.demand, f})) {
        bit[{req.user, f}] = static_cast<int>(items.size());
        items.emplace_back(req.user, f);
      }
    }
  }
  const std::uint32_t full = items.size() == 32 ? ~0u : (1u << items.size()) - 1u;
  std::map<std::uint32_t, int> states{{0u, 0}};
  for (int tau = t0; tau < t1; ++tau) {
    std::vector<int> active;
    for (const auto& req : inst.requests) {
      if (req.arrival <= tau && tau < req.deadline()) active.push_back(req.user);
    }
    std::map<std::uint32_t, int> next;
    auto relax = [&](std::uint32_t m, int c) {
      auto it = next.find(m);
      if (it == next.end() || c < it->second) next[m] = c;
    };
    for (const auto& [mask, cost] : states) {
      relax(mask, cost);
      // Enumerate equations: each active user contributes nothing or one
      // undelivered part; validity checked once the term set is fixed.
      std::vector<std::pair<int, int>> terms;
      auto rec = [&](auto&& self, std::size_t k) -> void {
        if (k == active.size()) {
          if (terms.empty()) return;
          std::uint32_t add = 0;
          bool valid = true;
          for (auto [i, f] : terms) {
            add |= 1u << bit.at({i, f});
            for (auto [j, g] : terms) {
              (void)g;
              if (j != i && !inst.placement.contains(j, {inst.request(i).demand, f})) valid = false;
            }
          }
          if (valid) relax(mask | add, cost + 1);
          return;
        }
        self(self, k + 1);
        const int i = active[k];
        for (int f = 1; f <= inst.config.F; ++f) {
          auto it = bit.find({i, f});
          if (it == bit.end() || (mask >> it->second & 1u)) continue;
          terms.emplace_back(i, f);
          self(self, k + 1);
          terms.pop_back();
        }
      };
      rec(rec, 0);
    }
    // Drop states where a user whose window just closed is incomplete.
    states.clear();
    for (const auto& [mask, cost] : next) {
      bool ok = true;
      for (const auto& req : inst.requests) {
        if (req.deadline() != tau + 1) continue;
        for (std::size_t k = 0; k < items.size(); ++k) {
          if (items[k].first == req.user && !(mask >> k & 1u)) ok = false;
        }
      }
      if (ok) states[mask] = cost;
    }
  }
  auto it = states.find(full);
  if (it == states.end()) return std::nullopt;
  return it->second;
}

}  // namespace oracles
