#include "acc/flows.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

namespace acc::flows {

std::int64_t to_fixed_cost(double cost) {
  return static_cast<std::int64_t>(std::llround(cost / kCostResolution));
}

double from_fixed_cost(std::int64_t cost) {
  return static_cast<double>(cost) * kCostResolution;
}

int FlowNetwork::add_node(std::int64_t supply) {
  supply_.push_back(supply);
  return num_nodes() - 1;
}

int FlowNetwork::add_arc(int from, int to, std::int64_t capacity, std::int64_t cost) {
  if (from < 0 || from >= num_nodes() || to < 0 || to >= num_nodes()) {
    throw std::invalid_argument("arc endpoint out of range");
  }
  if (capacity < 0) throw std::invalid_argument("negative arc capacity");
  arcs_.push_back({from, to, capacity, cost});
  return num_arcs() - 1;
}

void FlowNetwork::set_supply(int node, std::int64_t supply) {
  supply_.at(static_cast<std::size_t>(node)) = supply;
}

namespace {

struct Edge {
  int to;
  int rev;  // index of the paired edge in graph[to]
  std::int64_t cap;
  std::int64_t cost;
};

struct Residual {
  std::vector<std::vector<Edge>> graph;
  std::vector<std::pair<int, int>> forward;  // arc -> (node, edge index)

  Residual(const FlowNetwork& net, std::int64_t infinite) {
    graph.resize(static_cast<std::size_t>(net.num_nodes()));
    for (const auto& a : net.arcs()) {
      const std::int64_t cap = a.capacity == kInfiniteCapacity ? infinite : a.capacity;
      auto& out = graph[static_cast<std::size_t>(a.from)];
      auto& in = graph[static_cast<std::size_t>(a.to)];
      const int fi = static_cast<int>(out.size());
      const int bi = static_cast<int>(in.size()) + (a.from == a.to ? 1 : 0);
      out.push_back({a.to, bi, cap, a.cost});
      graph[static_cast<std::size_t>(a.to)].push_back({a.from, fi, 0, -a.cost});
      forward.emplace_back(a.from, fi);
    }
  }

  Edge& edge(int node, int k) {
    return graph[static_cast<std::size_t>(node)][static_cast<std::size_t>(k)];
  }

  void push(int node, int k, std::int64_t amount) {
    Edge& e = edge(node, k);
    e.cap -= amount;
    edge(e.to, e.rev).cap += amount;
  }

  std::vector<std::int64_t> arc_flows(const FlowNetwork& net) {
    std::vector<std::int64_t> flow;
    flow.reserve(forward.size());
    for (const auto& [node, k] : forward) {
      const Edge& e = edge(node, k);
      flow.push_back(edge(e.to, e.rev).cap);
    }
    (void)net;
    return flow;
  }
};

// Detects a negative-cost cycle made only of infinite-capacity arcs.
bool has_unbounded_cycle(const FlowNetwork& net) {
  const int n = net.num_nodes();
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n), 0);
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (const auto& a : net.arcs()) {
      if (a.capacity != kInfiniteCapacity) continue;
      const auto from = static_cast<std::size_t>(a.from);
      const auto to = static_cast<std::size_t>(a.to);
      if (dist[from] + a.cost < dist[to]) {
        dist[to] = dist[from] + a.cost;
        changed = true;
      }
    }
    if (!changed) return false;
  }
  return true;
}

}  // namespace

FlowResult min_cost_flow(const FlowNetwork& net) {
  std::int64_t balance = 0;
  std::int64_t total_supply = 0;
  for (auto s : net.supplies()) {
    balance += s;
    if (s > 0) total_supply += s;
  }
  if (balance != 0) throw std::invalid_argument("supplies and demands do not balance");
  if (has_unbounded_cycle(net)) {
    throw UnboundedFlow("negative-cost cycle with infinite capacity");
  }

  // Negative-cost cycles through finite arcs can route more than the total
  // supply over an infinite arc, so the stand-in also covers every finite cap.
  std::int64_t infinite = total_supply;
  for (const auto& a : net.arcs()) {
    if (a.capacity != kInfiniteCapacity) infinite += a.capacity;
  }
  const int n = net.num_nodes();
  Residual res(net, infinite);
  std::vector<std::int64_t> excess = net.supplies();
  std::vector<std::int64_t> potential(static_cast<std::size_t>(n), 0);

  std::int64_t largest = 1;
  for (auto e : excess) largest = std::max(largest, std::abs(e));
  for (const auto& a : net.arcs()) {
    largest = std::max(largest, a.capacity == kInfiniteCapacity ? infinite : a.capacity);
  }
  std::int64_t delta = 1;
  while (delta <= largest / 2) delta *= 2;

  constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> parent(static_cast<std::size_t>(n));
  std::vector<char> settled(static_cast<std::size_t>(n));

  auto reduced = [&](int u, const Edge& e) {
    return e.cost + potential[static_cast<std::size_t>(u)] -
           potential[static_cast<std::size_t>(e.to)];
  };

  for (; delta >= 1; delta /= 2) {
    // Restore reduced-cost optimality on the delta-residual network.
    for (int u = 0; u < n; ++u) {
      auto& out = res.graph[static_cast<std::size_t>(u)];
      for (int k = 0; k < static_cast<int>(out.size()); ++k) {
        Edge& e = out[static_cast<std::size_t>(k)];
        if (e.cap >= delta && reduced(u, e) < 0) {
          const std::int64_t amount = e.cap;
          excess[static_cast<std::size_t>(u)] -= amount;
          excess[static_cast<std::size_t>(e.to)] += amount;
          res.push(u, k, amount);
        }
      }
    }

    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    for (;;) {
      int source = -1;
      for (int u = 0; u < n; ++u) {
        if (!blocked[static_cast<std::size_t>(u)] && excess[static_cast<std::size_t>(u)] >= delta) {
          source = u;
          break;
        }
      }
      if (source < 0) break;

      std::fill(dist.begin(), dist.end(), kUnreached);
      std::fill(settled.begin(), settled.end(), 0);
      using Item = std::pair<std::int64_t, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[static_cast<std::size_t>(source)] = 0;
      heap.emplace(0, source);
      int sink = -1;
      std::vector<int> order;
      while (!heap.empty()) {
        auto [du, u] = heap.top();
        heap.pop();
        if (settled[static_cast<std::size_t>(u)] || du != dist[static_cast<std::size_t>(u)]) continue;
        settled[static_cast<std::size_t>(u)] = 1;
        order.push_back(u);
        if (excess[static_cast<std::size_t>(u)] <= -delta) {
          sink = u;
          break;
        }
        const auto& out = res.graph[static_cast<std::size_t>(u)];
        for (int k = 0; k < static_cast<int>(out.size()); ++k) {
          const Edge& e = out[static_cast<std::size_t>(k)];
          if (e.cap < delta) continue;
          const std::int64_t nd = du + reduced(u, e);
          if (nd < dist[static_cast<std::size_t>(e.to)]) {
            dist[static_cast<std::size_t>(e.to)] = nd;
            parent[static_cast<std::size_t>(e.to)] = {u, k};
            heap.emplace(nd, e.to);
          }
        }
      }
      if (sink < 0) {
        blocked[static_cast<std::size_t>(source)] = 1;
        continue;
      }
      // Shift potentials by min(dist, dist[sink]); keeps reduced costs >= 0.
      const std::int64_t cap_dist = dist[static_cast<std::size_t>(sink)];
      for (int v = 0; v < n; ++v) {
        const auto uv = static_cast<std::size_t>(v);
        potential[uv] += settled[uv] ? dist[uv] : cap_dist;
      }
      std::int64_t amount = std::min(excess[static_cast<std::size_t>(source)],
                                     -excess[static_cast<std::size_t>(sink)]);
      for (int v = sink; v != source;) {
        auto [u, k] = parent[static_cast<std::size_t>(v)];
        amount = std::min(amount, res.edge(u, k).cap);
        v = u;
      }
      for (int v = sink; v != source;) {
        auto [u, k] = parent[static_cast<std::size_t>(v)];
        res.push(u, k, amount);
        v = u;
      }
      excess[static_cast<std::size_t>(source)] -= amount;
      excess[static_cast<std::size_t>(sink)] += amount;
    }
  }

  FlowResult result;
  result.status = FlowStatus::kFeasible;
  for (auto e : excess) {
    if (e != 0) result.status = FlowStatus::kInfeasible;
  }
  result.flow = res.arc_flows(net);
  for (std::size_t a = 0; a < result.flow.size(); ++a) {
    result.cost += result.flow[a] * net.arcs()[a].cost;
  }
  return result;
}

FlowResult max_flow(const FlowNetwork& net, int source, int sink) {
  const int n = net.num_nodes();
  if (source < 0 || source >= n || sink < 0 || sink >= n) {
    throw std::invalid_argument("max_flow terminal out of range");
  }
  FlowResult result;
  result.status = FlowStatus::kFeasible;
  if (source == sink) {
    result.flow.assign(static_cast<std::size_t>(net.num_arcs()), 0);
    return result;
  }
  std::int64_t finite_sum = 0;
  for (const auto& a : net.arcs()) {
    if (a.capacity != kInfiniteCapacity && a.from == source) finite_sum += a.capacity;
  }
  // Any s-t flow is bounded by the finite capacity leaving the source unless
  // the source has an infinite arc; then fall back to the total finite cap.
  std::int64_t all_finite = 0;
  for (const auto& a : net.arcs()) {
    if (a.capacity != kInfiniteCapacity) all_finite += a.capacity;
  }
  Residual res(net, std::max<std::int64_t>(all_finite, finite_sum) + 1);

  std::vector<int> level(static_cast<std::size_t>(n));
  std::vector<std::size_t> cursor(static_cast<std::size_t>(n));
  auto bfs = [&]() {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[static_cast<std::size_t>(source)] = 0;
    q.push(source);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const Edge& e : res.graph[static_cast<std::size_t>(u)]) {
        if (e.cap > 0 && level[static_cast<std::size_t>(e.to)] < 0) {
          level[static_cast<std::size_t>(e.to)] = level[static_cast<std::size_t>(u)] + 1;
          q.push(e.to);
        }
      }
    }
    return level[static_cast<std::size_t>(sink)] >= 0;
  };
  // Iterative blocking-flow DFS.
  auto augment = [&]() -> std::int64_t {
    std::vector<std::pair<int, int>> path;  // (node, edge index)
    int u = source;
    for (;;) {
      if (u == sink) {
        std::int64_t amount = std::numeric_limits<std::int64_t>::max();
        for (auto [v, k] : path) amount = std::min(amount, res.edge(v, k).cap);
        for (auto [v, k] : path) res.push(v, k, amount);
        return amount;
      }
      auto& out = res.graph[static_cast<std::size_t>(u)];
      auto& cur = cursor[static_cast<std::size_t>(u)];
      bool advanced = false;
      for (; cur < out.size(); ++cur) {
        const Edge& e = out[cur];
        if (e.cap > 0 && level[static_cast<std::size_t>(e.to)] == level[static_cast<std::size_t>(u)] + 1) {
          path.emplace_back(u, static_cast<int>(cur));
          u = e.to;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      if (path.empty()) return 0;
      level[static_cast<std::size_t>(u)] = -1;  // dead end
      u = path.back().first;
      path.pop_back();
      ++cursor[static_cast<std::size_t>(u)];
    }
  };
  while (bfs()) {
    std::fill(cursor.begin(), cursor.end(), 0);
    while (std::int64_t pushed = augment()) result.value += pushed;
  }
  result.flow = res.arc_flows(net);
  for (std::size_t a = 0; a < result.flow.size(); ++a) {
    result.cost += result.flow[a] * net.arcs()[a].cost;
  }
  return result;
}

}  // namespace acc::flows
