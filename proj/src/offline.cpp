#include "acc/offline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acc/flows.hpp"
#include "json.hpp"

namespace acc::offline {

namespace {

constexpr double kEps = 1e-9;
constexpr double kCheckTol = 1e-6;

std::string group_label(const UserGroup& g) { return g.to_string(); }

bool is_integral(double v) { return std::abs(v - std::round(v)) <= kEps; }

}  // namespace

double OfflineLpVars::x_at(int group, int interval) const {
  auto it = x.find({group, interval});
  return it == x.end() ? 0.0 : it->second;
}

double OfflineLpVars::y_at(int user, int part, int group) const {
  auto it = y.find({user, part, group});
  return it == y.end() ? 0.0 : it->second;
}

OfflineLpVars OfflineLp::extract(const std::vector<double>& primal) const {
  OfflineLpVars vars;
  for (const auto& [key, var] : x_var) {
    vars.x[key] = primal[static_cast<std::size_t>(var)];
    vars.objective += primal[static_cast<std::size_t>(var)];
  }
  for (const auto& [key, var] : y_var) vars.y[key] = primal[static_cast<std::size_t>(var)];
  return vars;
}

OfflineLp build_offline_lp(const TimelineIndex& timeline, int r) {
  OfflineLp out;
  auto& lp = out.program;
  for (int l = 0; l < timeline.beta(); ++l) {
    for (int g : timeline.user_groups[static_cast<std::size_t>(l)]) {
      const auto& users = timeline.groups[static_cast<std::size_t>(g)].users;
      out.x_var[{g, l}] = lp.add_variable(
          "x_" + group_label(users) + "(" + std::to_string(l + 1) + ")", 1.0);
    }
  }
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    const auto& info = timeline.groups[static_cast<std::size_t>(g)];
    for (const auto& [i, parts] : info.eligible) {
      for (int f : parts) {
        out.y_var[{i, f, g}] = lp.add_variable(
            "y_{" + std::to_string(i) + "," + std::to_string(f) + "}(" +
                group_label(info.users) + ")",
            0.0);
      }
    }
  }
  // Interval capacity.
  for (int l = 0; l < timeline.beta(); ++l) {
    const auto& ids = timeline.user_groups[static_cast<std::size_t>(l)];
    if (ids.empty()) continue;
    std::vector<lp::Term> terms;
    for (int g : ids) terms.push_back({out.x_var.at({g, l}), 1.0});
    lp.add_constraint(std::move(terms), lp::Relation::kLessEqual,
                      timeline.intervals[static_cast<std::size_t>(l)].length());
  }
  // Group time shared among a member's parts.
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    const auto& info = timeline.groups[static_cast<std::size_t>(g)];
    for (const auto& [i, parts] : info.eligible) {
      std::vector<lp::Term> terms;
      for (int f : parts) terms.push_back({out.y_var.at({i, f, g}), 1.0});
      for (int l : info.intervals) terms.push_back({out.x_var.at({g, l}), -1.0});
      lp.add_constraint(std::move(terms), lp::Relation::kLessEqual, 0.0);
    }
  }
  // Every missing part delivered in exactly r slots.
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()); ++i) {
    for (int f : timeline.missing_of(i)) {
      std::vector<lp::Term> terms;
      auto it = timeline.carriers.find({i, f});
      if (it != timeline.carriers.end()) {
        for (int g : it->second) terms.push_back({out.y_var.at({i, f, g}), 1.0});
      }
      lp.add_constraint(std::move(terms), lp::Relation::kEqual, r);
    }
  }
  return out;
}

double max_violation(const TimelineIndex& timeline, int r, const OfflineLpVars& vars) {
  double worst = 0.0;
  for (const auto& [k, v] : vars.x) worst = std::max(worst, -v);
  for (const auto& [k, v] : vars.y) worst = std::max(worst, -v);
  for (int l = 0; l < timeline.beta(); ++l) {
    double used = 0.0;
    for (int g : timeline.user_groups[static_cast<std::size_t>(l)]) used += vars.x_at(g, l);
    worst = std::max(worst, used - timeline.intervals[static_cast<std::size_t>(l)].length());
  }
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    const auto& info = timeline.groups[static_cast<std::size_t>(g)];
    double total = 0.0;
    for (int l : info.intervals) total += vars.x_at(g, l);
    for (const auto& [i, parts] : info.eligible) {
      double used = 0.0;
      for (int f : parts) used += vars.y_at(i, f, g);
      worst = std::max(worst, used - total);
    }
  }
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()); ++i) {
    for (int f : timeline.missing_of(i)) {
      double got = 0.0;
      auto it = timeline.carriers.find({i, f});
      if (it != timeline.carriers.end()) {
        for (int g : it->second) got += vars.y_at(i, f, g);
      }
      worst = std::max(worst, std::abs(got - r));
    }
  }
  return worst;
}

OfflineResult solve_offline(const TimelineIndex& timeline, int r) {
  OfflineLp lp = build_offline_lp(timeline, r);
  const lp::LpResult res = lp::solve(lp.program);
  OfflineResult out;
  out.iterations = res.iterations;
  if (res.status != lp::Status::kOptimal) return out;
  out.feasible = true;
  out.vars = lp.extract(res.primal);
  return out;
}

OfflineResult solve_offline(const Instance& instance) {
  return solve_offline(build_timeline(instance), instance.config.r);
}

lp::LinearProgram build_decoupled_lp(const TimelineIndex& timeline, int r) {
  lp::LinearProgram lp(lp::Sense::kMinimize);
  std::map<XKey, int> x;
  std::map<std::tuple<int, int, int>, int> xi;  // (user, group, interval)
  std::map<YKey, int> y;
  for (int l = 0; l < timeline.beta(); ++l) {
    for (int g : timeline.user_groups[static_cast<std::size_t>(l)]) {
      x[{g, l}] = lp.add_variable("x", 1.0);
      for (int i : timeline.groups[static_cast<std::size_t>(g)].users) {
        xi[{i, g, l}] = lp.add_variable("xi", 0.0);
      }
    }
  }
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    for (const auto& [i, parts] : timeline.groups[static_cast<std::size_t>(g)].eligible) {
      for (int f : parts) y[{i, f, g}] = lp.add_variable("y", 0.0);
    }
  }
  for (const auto& [key, var] : xi) {
    const auto [i, g, l] = key;
    lp.add_constraint({{var, 1.0}, {x.at({g, l}), -1.0}}, lp::Relation::kLessEqual, 0.0);
  }
  for (int l = 0; l < timeline.beta(); ++l) {
    const auto& ids = timeline.user_groups[static_cast<std::size_t>(l)];
    if (ids.empty()) continue;
    std::vector<lp::Term> terms;
    for (int g : ids) terms.push_back({x.at({g, l}), 1.0});
    lp.add_constraint(std::move(terms), lp::Relation::kLessEqual,
                      timeline.intervals[static_cast<std::size_t>(l)].length());
  }
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    const auto& info = timeline.groups[static_cast<std::size_t>(g)];
    for (const auto& [i, parts] : info.eligible) {
      std::vector<lp::Term> terms;
      for (int f : parts) terms.push_back({y.at({i, f, g}), 1.0});
      for (int l : info.intervals) terms.push_back({xi.at({i, g, l}), -1.0});
      lp.add_constraint(std::move(terms), lp::Relation::kEqual, 0.0);
    }
  }
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()); ++i) {
    for (int f : timeline.missing_of(i)) {
      std::vector<lp::Term> terms;
      auto it = timeline.carriers.find({i, f});
      if (it != timeline.carriers.end()) {
        for (int g : it->second) terms.push_back({y.at({i, f, g}), 1.0});
      }
      lp.add_constraint(std::move(terms), lp::Relation::kEqual, r);
    }
  }
  return lp;
}

Schedule interpret_schedule(const OfflineLpVars& vars, const TimelineIndex& timeline,
                            int r) {
  if (const double v = max_violation(timeline, r, vars); v > kCheckTol) {
    throw ContractError("LP point violates constraints by " + std::to_string(v));
  }
  struct Piece {
    int interval;
    double abs_start;
    double offset;  // within the group's concatenated time
    double length;
  };
  std::vector<std::vector<Piece>> pieces(timeline.groups.size());
  std::vector<double> group_total(timeline.groups.size(), 0.0);
  for (int l = 0; l < timeline.beta(); ++l) {
    double cursor = timeline.intervals[static_cast<std::size_t>(l)].start;
    for (int g : timeline.user_groups[static_cast<std::size_t>(l)]) {
      const double len = vars.x_at(g, l);
      if (len <= kEps) continue;
      auto& total = group_total[static_cast<std::size_t>(g)];
      pieces[static_cast<std::size_t>(g)].push_back({l, cursor, total, len});
      total += len;
      cursor += len;
    }
  }

  Schedule schedule;
  for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
    const auto& gp = pieces[static_cast<std::size_t>(g)];
    if (gp.empty()) continue;
    const auto& info = timeline.groups[static_cast<std::size_t>(g)];
    const double total = group_total[static_cast<std::size_t>(g)];
    std::vector<double> cuts{0.0, total};
    for (const auto& p : gp) cuts.push_back(p.offset);
    // (from, to, part) per member, laid out in part order.
    std::map<int, std::vector<std::tuple<double, double, int>>> lanes;
    for (const auto& [i, parts] : info.eligible) {
      double cursor = 0.0;
      for (int f : parts) {
        const double amount = vars.y_at(i, f, g);
        if (amount <= kEps) continue;
        const double to = std::min(cursor + amount, total);
        lanes[i].emplace_back(cursor, to, f);
        cuts.push_back(cursor);
        cuts.push_back(to);
        cursor += amount;
      }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> merged;
    for (double c : cuts) {
      if (merged.empty() || c - merged.back() > kEps) merged.push_back(c);
    }
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
      const double a = merged[k];
      const double b = std::min(merged[k + 1], total);
      if (b - a <= kEps) continue;
      const double mid = 0.5 * (a + b);
      const Piece* piece = nullptr;
      for (const auto& p : gp) {
        if (mid >= p.offset && mid < p.offset + p.length) piece = &p;
      }
      if (piece == nullptr) continue;
      Segment seg;
      seg.interval = piece->interval;
      seg.start = piece->abs_start + (a - piece->offset);
      seg.length = b - a;
      std::vector<int> members;
      for (const auto& [i, lane] : lanes) {
        for (const auto& [from, to, f] : lane) {
          if (mid >= from && mid < to) {
            seg.assignment[i] = f;
            members.push_back(i);
            break;
          }
        }
      }
      if (members.empty()) continue;
      seg.group = UserGroup(std::move(members));
      schedule.segments.push_back(std::move(seg));
    }
  }
  std::sort(schedule.segments.begin(), schedule.segments.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  // Fuse touching segments that carry the same equation.
  std::vector<Segment> fused;
  for (auto& seg : schedule.segments) {
    if (!fused.empty()) {
      Segment& last = fused.back();
      if (last.interval == seg.interval && last.group == seg.group &&
          last.assignment == seg.assignment &&
          std::abs(last.start + last.length - seg.start) <= kEps) {
        last.length += seg.length;
        continue;
      }
    }
    fused.push_back(std::move(seg));
  }
  schedule.segments = std::move(fused);
  return schedule;
}

std::string validate_schedule(const Schedule& schedule, const TimelineIndex& timeline,
                              const Instance& instance, int r) {
  std::map<std::pair<int, int>, double> delivered;
  std::vector<std::vector<std::pair<double, double>>> spans(
      static_cast<std::size_t>(timeline.beta()));
  for (const auto& seg : schedule.segments) {
    if (seg.interval < 0 || seg.interval >= timeline.beta()) return "segment interval out of range";
    const auto& iv = timeline.intervals[static_cast<std::size_t>(seg.interval)];
    if (seg.length <= 0.0) return "nonpositive segment length";
    if (seg.start < iv.start - kCheckTol || seg.start + seg.length > iv.end + kCheckTol) {
      return "segment outside its interval";
    }
    spans[static_cast<std::size_t>(seg.interval)].emplace_back(seg.start, seg.start + seg.length);
    std::vector<EquationTerm> eq;
    for (const auto& [i, f] : seg.assignment) {
      if (!seg.group.contains(i)) return "assignment user outside group";
      eq.push_back({i, {instance.request(i).demand, f}});
      delivered[{i, f}] += seg.length;
    }
    if (eq.size() != seg.group.size()) return "group member without assignment";
    if (!is_all_but_one(eq, instance)) return "equation is not all-but-one";
  }
  for (auto& s : spans) {
    std::sort(s.begin(), s.end());
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (s[k].first < s[k - 1].second - kCheckTol) return "overlapping segments";
    }
  }
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()); ++i) {
    for (int f : timeline.missing_of(i)) {
      auto it = delivered.find({i, f});
      const double got = it == delivered.end() ? 0.0 : it->second;
      if (std::abs(got - r) > kCheckTol) {
        return "user " + std::to_string(i) + " part " + std::to_string(f) +
               " receives " + std::to_string(got) + " slots";
      }
    }
  }
  return {};
}

FixedGroupsResult fixed_groups_lp(const Instance& instance, std::span<const int> missing,
                                  int user, const std::map<UserGroup, double>& history,
                                  int r, FixedGroupsMethod method) {
  struct Column {
    int part;
    const UserGroup* group;
  };
  std::vector<std::pair<const UserGroup*, double>> groups;
  std::vector<std::vector<int>> eligible;
  bool integral = true;
  for (const auto& [g, z] : history) {
    if (!g.contains(user) || z <= 0.0) continue;
    auto parts = eligible_parts(instance, missing, user, g);
    if (parts.empty()) continue;
    groups.emplace_back(&g, z);
    eligible.push_back(std::move(parts));
    integral = integral && is_integral(z);
  }
  if (method == FixedGroupsMethod::kAuto) {
    method = integral ? FixedGroupsMethod::kMaxFlow : FixedGroupsMethod::kSimplex;
  }
  FixedGroupsResult out;
  if (groups.empty()) return out;

  if (method == FixedGroupsMethod::kMaxFlow) {
    if (!integral) throw std::invalid_argument("max-flow path needs integral allocations");
    flows::FlowNetwork net;
    const int s = net.add_node();
    const int t = net.add_node();
    std::map<int, int> part_node;
    for (int f : missing) {
      part_node[f] = net.add_node();
      net.add_arc(s, part_node[f], r);
    }
    std::vector<std::pair<int, Column>> cols;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const int gnode = net.add_node();
      net.add_arc(gnode, t, static_cast<std::int64_t>(std::llround(groups[k].second)));
      for (int f : eligible[k]) {
        cols.emplace_back(net.add_arc(part_node.at(f), gnode, flows::kInfiniteCapacity),
                          Column{f, groups[k].first});
      }
    }
    const auto res = flows::max_flow(net, s, t);
    out.objective = static_cast<double>(res.value);
    for (const auto& [arc, col] : cols) {
      const auto v = res.flow[static_cast<std::size_t>(arc)];
      if (v > 0) out.y[{col.part, *col.group}] = static_cast<double>(v);
    }
    return out;
  }

  lp::LinearProgram lp(lp::Sense::kMaximize);
  std::vector<std::pair<int, Column>> cols;
  std::map<int, std::vector<lp::Term>> per_part;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    std::vector<lp::Term> cap;
    for (int f : eligible[k]) {
      const int v = lp.add_variable("y", 1.0);
      cols.emplace_back(v, Column{f, groups[k].first});
      cap.push_back({v, 1.0});
      per_part[f].push_back({v, 1.0});
    }
    lp.add_constraint(std::move(cap), lp::Relation::kLessEqual, groups[k].second);
  }
  for (auto& [f, terms] : per_part) {
    lp.add_constraint(std::move(terms), lp::Relation::kLessEqual, r);
  }
  const auto res = lp::solve(lp);
  out.objective = res.objective;
  for (const auto& [v, col] : cols) {
    const double val = res.primal[static_cast<std::size_t>(v)];
    if (val > kEps) out.y[{col.part, *col.group}] = val;
  }
  return out;
}

std::optional<OfflineLpVars> integralize(const OfflineLpVars& vars,
                                         const TimelineIndex& timeline,
                                         const Instance& instance, int r) {
  OfflineLpVars out;
  for (const auto& [key, v] : vars.x) {
    if (!is_integral(v)) return std::nullopt;
    const double rounded = std::round(v);
    if (rounded > 0.0) out.x[key] = rounded;
    out.objective += rounded;
  }
  for (int i = 1; i <= static_cast<int>(timeline.missing.size()); ++i) {
    const auto& missing = timeline.missing_of(i);
    if (missing.empty()) continue;
    std::map<UserGroup, double> history;
    std::map<UserGroup, int> ids;
    for (int g = 0; g < static_cast<int>(timeline.groups.size()); ++g) {
      const auto& info = timeline.groups[static_cast<std::size_t>(g)];
      if (!info.users.contains(i)) continue;
      double total = 0.0;
      for (int l : info.intervals) total += out.x_at(g, l);
      if (total > 0.0) {
        history[info.users] = total;
        ids[info.users] = g;
      }
    }
    const auto res = fixed_groups_lp(instance, missing, i, history, r,
                                     FixedGroupsMethod::kMaxFlow);
    if (std::abs(res.objective - r * static_cast<double>(missing.size())) > kEps) {
      return std::nullopt;
    }
    for (const auto& [key, v] : res.y) out.y[{i, key.first, ids.at(key.second)}] = v;
  }
  return out;
}

std::string schedule_to_json(const Schedule& schedule) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& seg : schedule.segments) {
    nlohmann::json assignment = nlohmann::json::object();
    for (const auto& [i, f] : seg.assignment) assignment[std::to_string(i)] = f;
    segments.push_back({{"interval", seg.interval + 1},
                        {"start", seg.start},
                        {"length", seg.length},
                        {"group", std::vector<int>(seg.group.begin(), seg.group.end())},
                        {"assignment", assignment}});
  }
  return segments.dump(2);
}

std::string schedule_summary_csv(const Schedule& schedule, const TimelineIndex& timeline,
                                 double objective) {
  std::vector<double> used(static_cast<std::size_t>(timeline.beta()), 0.0);
  for (const auto& seg : schedule.segments) used[static_cast<std::size_t>(seg.interval)] += seg.length;
  std::ostringstream out;
  out.precision(10);
  out << "interval,start,end,length,allocated,utilization,objective,beta\n";
  for (int l = 0; l < timeline.beta(); ++l) {
    const auto& iv = timeline.intervals[static_cast<std::size_t>(l)];
    const double u = used[static_cast<std::size_t>(l)];
    out << l + 1 << ',' << iv.start << ',' << iv.end << ',' << iv.length() << ',' << u << ','
        << u / iv.length() << ',' << objective << ',' << timeline.beta() << '\n';
  }
  return out.str();
}

}  // namespace acc::offline
