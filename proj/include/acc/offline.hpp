#pragma once

// Offline scheduling: the rate-minimizing LP over intervals and user groups,
// its interpretation as a broadcast schedule, and the fixed-allocation LP that
// counts how many missing packets a user can extract from given group time.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "acc/lp.hpp"
#include "acc/model.hpp"

namespace acc::offline {

using XKey = std::pair<int, int>;             // (group id, interval)
using YKey = std::tuple<int, int, int>;       // (user, part, group id)

struct OfflineLpVars {
  std::map<XKey, double> x;
  std::map<YKey, double> y;
  double objective = 0.0;

  double x_at(int group, int interval) const;
  double y_at(int user, int part, int group) const;
};

struct OfflineLp {
  lp::LinearProgram program{lp::Sense::kMinimize};
  std::map<XKey, int> x_var;
  std::map<YKey, int> y_var;

  OfflineLpVars extract(const std::vector<double>& primal) const;
};

OfflineLp build_offline_lp(const TimelineIndex& timeline, int r);

// Worst violation of the four offline constraint families at `vars`.
double max_violation(const TimelineIndex& timeline, int r, const OfflineLpVars& vars);

struct OfflineResult {
  bool feasible = false;
  OfflineLpVars vars;
  int iterations = 0;
};

OfflineResult solve_offline(const TimelineIndex& timeline, int r);
OfflineResult solve_offline(const Instance& instance);

// Same optimum through per-user copies x^(i)_U(l) with x^(i) <= x and
// equality coupling to the y variables.
lp::LinearProgram build_decoupled_lp(const TimelineIndex& timeline, int r);

struct Segment {
  int interval = 0;
  double start = 0.0;   // absolute time
  double length = 0.0;
  UserGroup group;      // users with a term in this equation
  std::map<int, int> assignment;  // user -> part
};

struct Schedule {
  std::vector<Segment> segments;  // ordered by start
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Lays each interval's group allocations end to end (lexicographic group
// order), then each member's y pieces end to end inside its group's total
// time, and cuts at every breakpoint. Throws ContractError if `vars` violate
// the LP constraints beyond 1e-6.
Schedule interpret_schedule(const OfflineLpVars& vars, const TimelineIndex& timeline,
                            int r);

// Checks every Schedule invariant; returns an empty string when valid,
// otherwise a description of the first problem found.
std::string validate_schedule(const Schedule& schedule, const TimelineIndex& timeline,
                              const Instance& instance, int r);

// Rebuilds integral y values through per-user max flows when every x is
// integral. Returns nullopt if some x is fractional or some user cannot be
// fully served by the rounded allocation.
std::optional<OfflineLpVars> integralize(const OfflineLpVars& vars,
                                         const TimelineIndex& timeline,
                                         const Instance& instance, int r);

enum class FixedGroupsMethod { kAuto, kMaxFlow, kSimplex };

struct FixedGroupsResult {
  double objective = 0.0;
  std::map<std::pair<int, UserGroup>, double> y;  // (part, group) -> value
};

// maximize sum y_{i,f}(U) s.t. sum_f y_{i,f}(U) <= z_U, sum_U y_{i,f}(U) <= r.
// kAuto uses max flow when every z_U is integral and the simplex otherwise.
FixedGroupsResult fixed_groups_lp(const Instance& instance,
                                  std::span<const int> missing, int user,
                                  const std::map<UserGroup, double>& history, int r,
                                  FixedGroupsMethod method = FixedGroupsMethod::kAuto);

std::string schedule_to_json(const Schedule& schedule);
// One header line plus one row per interval:
// interval,start,end,length,allocated,utilization,objective,beta
std::string schedule_summary_csv(const Schedule& schedule, const TimelineIndex& timeline,
                                 double objective);

}  // namespace acc::offline
