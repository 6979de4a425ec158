#pragma once

// Offline LP through its Lagrangian dual: one min-cost flow per user per
// iteration, projected subgradient ascent on (gamma, zeta), and running-
// average primal recovery.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acc/flows.hpp"
#include "acc/model.hpp"
#include "acc/offline.hpp"

namespace acc::dual {

// Every (U, l) with U in the group family of interval l, with U's members.
struct DualLayout {
  struct Pair {
    int group = 0;
    int interval = 0;
    std::vector<int> members;
  };
  std::vector<Pair> pairs;
  std::map<offline::XKey, int> index;
};

DualLayout make_layout(const TimelineIndex& timeline);

struct DualState {
  double alpha = 0.5;
  int iteration = 0;  // completed iterations
  std::vector<std::vector<double>> gamma;   // [pair][member]
  std::vector<double> zeta;                 // [interval]
  std::vector<std::vector<double>> x_user;  // [pair][member], latest subproblem flows
  std::vector<std::vector<double>> x_avg;   // [pair][member], running mean of x_user
  std::vector<double> xbar;                 // [pair], running mean of max_i x_user
};

// How the primal point is read off the iterates. kAverageOfMax is the
// running mean of max_i x^(i); kMaxOfAverages is max_i of the running means
// of x^(i). Both use weights 1/n.
enum class Recovery { kMaxOfAverages, kAverageOfMax };

// gamma = 1/|U|, zeta = 0.
DualState initial_state(const DualLayout& layout, const TimelineIndex& timeline,
                        double alpha = 0.5);

struct UserNetwork {
  flows::FlowNetwork net;
  int source = 0;
  int sink = 0;
  // Group->interval arcs with the pair index and the user's member slot.
  struct CostArc {
    int arc;
    int pair;
    int member;
  };
  std::vector<CostArc> cost_arcs;
};

// s -> f (cap r) -> U (uncapacitated) -> Pi_l (cost (1+zeta)gamma) -> t
// (cap |Pi_l|); s supplies r|Omega| to t.
UserNetwork build_user_network(int user, const TimelineIndex& timeline,
                               const DualLayout& layout, const DualState& state, int r);

// Euclidean projection onto the probability simplex (sorted threshold).
std::vector<double> project_simplex(std::span<const double> values);

double step_size(int n, double alpha);

class Decomposition {
 public:
  Decomposition(const TimelineIndex& timeline, int r, double alpha = 0.5,
                Recovery recovery = Recovery::kMaxOfAverages);

  // Solves every user's subproblem at the current multipliers, stores the
  // flows in state().x_user and returns g. nullopt when some subproblem has
  // no feasible flow (the instance is then offline-infeasible).
  std::optional<double> eval_dual();
  // Multiplier update with the given step, then projection.
  void subgradient_step(double theta);
  // Folds the latest subproblem flows into the running average as iterate
  // n = iteration + 1 and advances the iteration counter.
  void recover_primal();

  // Recovered x per pair under the configured rule.
  std::vector<double> recovered() const;
  double primal_value() const;
  // Largest relative overload max_l (sum_U xbar - |Pi_l|) / |Pi_l|.
  double capacity_excess() const;

  DualState& state() { return state_; }
  const DualState& state() const { return state_; }
  const DualLayout& layout() const { return layout_; }

 private:
  void reprice(UserNetwork& net) const;

  const TimelineIndex& timeline_;
  int r_;
  Recovery recovery_;
  DualLayout layout_;
  DualState state_;
  std::vector<std::optional<UserNetwork>> networks_;  // by user - 1
};

struct TraceRow {
  int iter = 0;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;
};

std::string trace_csv(const std::vector<TraceRow>& rows);

struct Options {
  int max_iterations = 2000;
  double alpha = 0.5;
  double gap_tolerance = 1e-3;
  int patience = 50;
  Recovery recovery = Recovery::kMaxOfAverages;
};

enum class YSource { kFixedGroups, kSupportLp, kFullLp, kNone };

struct DecompositionResult {
  bool feasible = false;
  int iterations = 0;
  double best_dual = 0.0;
  double primal_value = 0.0;  // sum of recovered x
  std::map<offline::XKey, double> xbar;  // recovered x, positive entries
  offline::OfflineLpVars vars;  // executable point after y extraction
  YSource y_source = YSource::kNone;
  std::vector<TraceRow> trace;
};

DecompositionResult solve_via_decomposition(const Instance& instance,
                                            const Options& options = {});
DecompositionResult solve_via_decomposition(const TimelineIndex& timeline,
                                            const Instance& instance,
                                            const Options& options = {});

}  // namespace acc::dual
