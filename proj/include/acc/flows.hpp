#pragma once

// Integral network-flow solvers: capacity-scaling successive shortest paths
// for min-cost flow, Dinic for max flow.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace acc::flows {

inline constexpr std::int64_t kInfiniteCapacity = std::numeric_limits<std::int64_t>::max();
// Real-valued costs are stored as integers at this resolution.
inline constexpr double kCostResolution = 1e-6;

std::int64_t to_fixed_cost(double cost);
double from_fixed_cost(std::int64_t cost);

struct Arc {
  int from = 0;
  int to = 0;
  std::int64_t capacity = 0;
  std::int64_t cost = 0;
};

class FlowNetwork {
 public:
  FlowNetwork() = default;
  explicit FlowNetwork(int nodes) : supply_(static_cast<std::size_t>(nodes), 0) {}

  int add_node(std::int64_t supply = 0);
  int add_arc(int from, int to, std::int64_t capacity, std::int64_t cost = 0);
  // Positive values are supplies, negative values demands.
  void set_supply(int node, std::int64_t supply);
  void set_cost(int arc, std::int64_t cost) { arcs_.at(static_cast<std::size_t>(arc)).cost = cost; }

  int num_nodes() const { return static_cast<int>(supply_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(int a) const { return arcs_.at(static_cast<std::size_t>(a)); }
  std::int64_t supply(int node) const { return supply_.at(static_cast<std::size_t>(node)); }
  const std::vector<std::int64_t>& supplies() const { return supply_; }

 private:
  std::vector<std::int64_t> supply_;
  std::vector<Arc> arcs_;
};

enum class FlowStatus { kFeasible, kInfeasible };

struct FlowResult {
  FlowStatus status = FlowStatus::kInfeasible;
  std::vector<std::int64_t> flow;  // per arc
  std::int64_t cost = 0;           // fixed-point total cost
  std::int64_t value = 0;          // max-flow value (max_flow only)
};

class UnboundedFlow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimum-cost flow meeting every supply and demand. Throws
// std::invalid_argument when supplies do not balance and UnboundedFlow when a
// negative-cost cycle of infinite-capacity arcs exists.
FlowResult min_cost_flow(const FlowNetwork& net);

// Maximum source->sink flow; supplies are ignored.
FlowResult max_flow(const FlowNetwork& net, int source, int sink);

}  // namespace acc::flows
