#include "acc/dual_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace acc::dual {

DualLayout make_layout(const TimelineIndex& timeline) {
  DualLayout layout;
  for (int l = 0; l < timeline.beta(); ++l) {
    for (int g : timeline.user_groups[static_cast<std::size_t>(l)]) {
      const auto users = timeline.groups[static_cast<std::size_t>(g)].users.users();
      layout.index[{g, l}] = static_cast<int>(layout.pairs.size());
      layout.pairs.push_back({g, l, std::vector<int>(users.begin(), users.end())});
    }
  }
  return layout;
}

DualState initial_state(const DualLayout& layout, const TimelineIndex& timeline,
                        double alpha) {
  DualState s;
  s.alpha = alpha;
  s.zeta.assign(static_cast<std::size_t>(timeline.beta()), 0.0);
  for (const auto& p : layout.pairs) {
    const auto m = p.members.size();
    s.gamma.emplace_back(m, 1.0 / static_cast<double>(m));
    s.x_user.emplace_back(m, 0.0);
    s.x_avg.emplace_back(m, 0.0);
    s.xbar.push_back(0.0);
  }
  return s;
}

namespace {

int member_slot(const DualLayout::Pair& p, int user) {
  auto it = std::lower_bound(p.members.begin(), p.members.end(), user);
  return static_cast<int>(it - p.members.begin());
}

double arc_price(const DualState& s, const DualLayout& layout, int pair, int member) {
  const auto& p = layout.pairs[static_cast<std::size_t>(pair)];
  return (1.0 + s.zeta[static_cast<std::size_t>(p.interval)]) *
         s.gamma[static_cast<std::size_t>(pair)][static_cast<std::size_t>(member)];
}

}  // namespace

UserNetwork build_user_network(int user, const TimelineIndex& timeline,
                               const DualLayout& layout, const DualState& state, int r) {
  UserNetwork out;
  auto& net = out.net;
  const auto& missing = timeline.missing_of(user);
  const auto supply = static_cast<std::int64_t>(r) * static_cast<std::int64_t>(missing.size());
  out.source = net.add_node(supply);
  std::map<int, int> part_node;
  for (int f : missing) {
    part_node[f] = net.add_node();
    net.add_arc(out.source, part_node[f], r);
  }
  std::map<int, int> group_node;
  std::map<int, int> interval_node;
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    const auto& info = timeline.groups[static_cast<std::size_t>(g)];
    auto it = info.eligible.find(user);
    if (it == info.eligible.end()) continue;
    const int node = net.add_node();
    group_node[g] = node;
    for (int f : it->second) net.add_arc(part_node.at(f), node, flows::kInfiniteCapacity);
    for (int l : info.intervals) {
      if (!interval_node.contains(l)) interval_node[l] = -1;
    }
  }
  for (auto& [l, node] : interval_node) node = net.add_node();
  for (const auto& [g, node] : group_node) {
    for (int l : timeline.groups[static_cast<std::size_t>(g)].intervals) {
      const int pair = layout.index.at({g, l});
      const int member = member_slot(layout.pairs[static_cast<std::size_t>(pair)], user);
      const int arc = net.add_arc(node, interval_node.at(l), flows::kInfiniteCapacity,
                                  flows::to_fixed_cost(arc_price(state, layout, pair, member)));
      out.cost_arcs.push_back({arc, pair, member});
    }
  }
  out.sink = net.add_node(-supply);
  for (const auto& [l, node] : interval_node) {
    net.add_arc(node, out.sink, timeline.intervals[static_cast<std::size_t>(l)].length());
  }
  return out;
}

std::vector<double> project_simplex(std::span<const double> values) {
  std::vector<double> u(values.begin(), values.end());
  if (u.empty()) return u;
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    prefix += u[k];
    const double t = (prefix - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) threshold = t;
  }
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::max(values[k] - threshold, 0.0);
  return out;
}

double step_size(int n, double alpha) { return std::pow(static_cast<double>(n), -alpha); }

Decomposition::Decomposition(const TimelineIndex& timeline, int r, double alpha,
                             Recovery recovery)
    : timeline_(timeline),
      r_(r),
      recovery_(recovery),
      layout_(make_layout(timeline)),
      state_(initial_state(layout_, timeline, alpha)),
      networks_(timeline.missing.size()) {
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()); ++i) {
    if (timeline.missing_of(i).empty()) continue;
    networks_[static_cast<std::size_t>(i - 1)] =
        build_user_network(i, timeline, layout_, state_, r);
  }
}

void Decomposition::reprice(UserNetwork& net) const {
  for (const auto& c : net.cost_arcs) {
    net.net.set_cost(c.arc, flows::to_fixed_cost(arc_price(state_, layout_, c.pair, c.member)));
  }
}

std::optional<double> Decomposition::eval_dual() {
  for (auto& row : state_.x_user) std::fill(row.begin(), row.end(), 0.0);
  double g = 0.0;
  for (auto& slot : networks_) {
    if (!slot) continue;
    reprice(*slot);
    const auto res = flows::min_cost_flow(slot->net);
    if (res.status != flows::FlowStatus::kFeasible) return std::nullopt;
    for (const auto& c : slot->cost_arcs) {
      const auto flow = static_cast<double>(res.flow[static_cast<std::size_t>(c.arc)]);
      state_.x_user[static_cast<std::size_t>(c.pair)][static_cast<std::size_t>(c.member)] = flow;
      g += flow * arc_price(state_, layout_, c.pair, c.member);
    }
  }
  for (int l = 0; l < timeline_.beta(); ++l) {
    g -= state_.zeta[static_cast<std::size_t>(l)] *
         timeline_.intervals[static_cast<std::size_t>(l)].length();
  }
  return g;
}

void Decomposition::subgradient_step(double theta) {
  std::vector<double> load(state_.zeta.size(), 0.0);
  for (std::size_t k = 0; k < layout_.pairs.size(); ++k) {
    const auto l = static_cast<std::size_t>(layout_.pairs[k].interval);
    for (std::size_t m = 0; m < state_.gamma[k].size(); ++m) {
      load[l] += state_.gamma[k][m] * state_.x_user[k][m];
    }
  }
  for (std::size_t k = 0; k < layout_.pairs.size(); ++k) {
    const double scale = 1.0 + state_.zeta[static_cast<std::size_t>(layout_.pairs[k].interval)];
    std::vector<double> moved(state_.gamma[k].size());
    for (std::size_t m = 0; m < moved.size(); ++m) {
      moved[m] = state_.gamma[k][m] + theta * state_.x_user[k][m] * scale;
    }
    state_.gamma[k] = project_simplex(moved);
  }
  for (std::size_t l = 0; l < state_.zeta.size(); ++l) {
    const double moved =
        state_.zeta[l] + theta * (load[l] - timeline_.intervals[l].length());
    state_.zeta[l] = std::max(moved, 0.0);
  }
}

void Decomposition::recover_primal() {
  const double n = static_cast<double>(state_.iteration);
  for (std::size_t k = 0; k < layout_.pairs.size(); ++k) {
    const double top = *std::max_element(state_.x_user[k].begin(), state_.x_user[k].end());
    state_.xbar[k] = n / (n + 1.0) * state_.xbar[k] + top / (n + 1.0);
    for (std::size_t m = 0; m < state_.x_avg[k].size(); ++m) {
      state_.x_avg[k][m] = n / (n + 1.0) * state_.x_avg[k][m] + state_.x_user[k][m] / (n + 1.0);
    }
  }
  ++state_.iteration;
}

std::vector<double> Decomposition::recovered() const {
  if (recovery_ == Recovery::kAverageOfMax) return state_.xbar;
  std::vector<double> out;
  out.reserve(state_.x_avg.size());
  for (const auto& row : state_.x_avg) out.push_back(*std::max_element(row.begin(), row.end()));
  return out;
}

double Decomposition::primal_value() const {
  const auto x = recovered();
  return std::accumulate(x.begin(), x.end(), 0.0);
}

double Decomposition::capacity_excess() const {
  std::vector<double> used(state_.zeta.size(), 0.0);
  const auto x = recovered();
  for (std::size_t k = 0; k < layout_.pairs.size(); ++k) {
    used[static_cast<std::size_t>(layout_.pairs[k].interval)] += x[k];
  }
  double worst = -1e300;
  for (std::size_t l = 0; l < used.size(); ++l) {
    if (timeline_.user_groups[l].empty()) continue;
    const double len = timeline_.intervals[l].length();
    worst = std::max(worst, (used[l] - len) / len);
  }
  return worst;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "iter,dual_value,primal_value,gap\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << r.dual_value << ',' << r.primal_value << ',' << r.gap << '\n';
  }
  return out.str();
}

namespace {

// Offline LP with x restricted to the pairs in `support`.
std::optional<offline::OfflineLpVars> solve_on_support(const TimelineIndex& timeline, int r,
                                                       const std::map<offline::XKey, double>& support) {
  TimelineIndex reduced = timeline;
  for (int l = 0; l < reduced.beta(); ++l) {
    auto& ids = reduced.user_groups[static_cast<std::size_t>(l)];
    std::erase_if(ids, [&](int g) { return !support.contains({g, l}); });
  }
  for (int g = 0; g < static_cast<int>(reduced.groups.size()); ++g) {
    auto& iv = reduced.groups[static_cast<std::size_t>(g)].intervals;
    std::erase_if(iv, [&](int l) { return !support.contains({g, l}); });
  }
  const auto res = offline::solve_offline(reduced, r);
  if (!res.feasible) return std::nullopt;
  return res.vars;
}

}  // namespace

DecompositionResult solve_via_decomposition(const Instance& instance, const Options& options) {
  const auto timeline = build_timeline(instance);
  return solve_via_decomposition(timeline, instance, options);
}

DecompositionResult solve_via_decomposition(const TimelineIndex& timeline,
                                            const Instance& instance, const Options& options) {
  const int r = instance.config.r;
  DecompositionResult out;
  Decomposition dec(timeline, r, options.alpha, options.recovery);
  double best = -1e300;
  int streak = 0;
  bool subproblem_infeasible = false;
  for (int n = 1; n <= options.max_iterations; ++n) {
    const auto g = dec.eval_dual();
    if (!g) {
      subproblem_infeasible = true;
      break;
    }
    best = std::max(best, *g);
    dec.recover_primal();
    const double primal = dec.primal_value();
    const double gap = std::abs(primal - best) / std::max(std::abs(primal), 1e-9);
    out.trace.push_back({n, *g, primal, gap});
    out.iterations = n;
    streak = gap < options.gap_tolerance ? streak + 1 : 0;
    if (streak >= options.patience) break;
    dec.subgradient_step(step_size(n, options.alpha));
  }
  if (subproblem_infeasible) return out;
  out.best_dual = best;
  out.primal_value = dec.primal_value();
  const auto& layout = dec.layout();
  const auto recovered = dec.recovered();
  for (std::size_t k = 0; k < layout.pairs.size(); ++k) {
    const double v = recovered[k];
    if (v > 1e-9) out.xbar[{layout.pairs[k].group, layout.pairs[k].interval}] = v;
  }

  // y extraction against the recovered group totals.
  constexpr double kMargin = 1e-6;
  offline::OfflineLpVars vars;
  vars.x = out.xbar;
  vars.objective = out.primal_value;
  bool served = true;
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()) && served; ++i) {
    const auto& missing = timeline.missing_of(i);
    if (missing.empty()) continue;
    std::map<UserGroup, double> history;
    std::map<UserGroup, int> ids;
    for (const auto& [key, v] : out.xbar) {
      const auto& info = timeline.groups[static_cast<std::size_t>(key.first)];
      if (!info.users.contains(i)) continue;
      history[info.users] += v;
      ids[info.users] = key.first;
    }
    for (auto& [g, z] : history) z += kMargin;
    const auto res = offline::fixed_groups_lp(instance, missing, i, history, r,
                                              offline::FixedGroupsMethod::kSimplex);
    if (res.objective < r * static_cast<double>(missing.size()) - 1e-7) {
      served = false;
      break;
    }
    for (const auto& [key, v] : res.y) vars.y[{i, key.first, ids.at(key.second)}] = v;
  }
  if (served && offline::max_violation(timeline, r, vars) <= 1e-5) {
    out.vars = std::move(vars);
    out.y_source = YSource::kFixedGroups;
    out.feasible = true;
    return out;
  }
  if (auto reduced = solve_on_support(timeline, r, out.xbar)) {
    out.vars = std::move(*reduced);
    out.y_source = YSource::kSupportLp;
    out.feasible = true;
    return out;
  }
  const auto full = offline::solve_offline(timeline, r);
  if (full.feasible) {
    out.vars = full.vars;
    out.y_source = YSource::kFullLp;
    out.feasible = true;
  }
  return out;
}

}  // namespace acc::dual
