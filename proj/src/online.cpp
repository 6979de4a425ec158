#include "acc/online.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "acc/lp.hpp"
#include "json.hpp"

namespace acc::online {

namespace {

constexpr double kEps = 1e-9;

std::map<UserGroup, double> as_history(const std::map<UserGroup, int>& z) {
  std::map<UserGroup, double> out;
  for (const auto& [g, n] : z) out[g] = n;
  return out;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

bool OnlineResult::all_decoded() const {
  return std::all_of(decode.begin(), decode.end(),
                     [](const UserDecode& d) { return d.decoded && d.bytes_match; });
}

int benefit(const Instance& instance, const std::vector<int>& missing, int user,
            const std::map<UserGroup, int>& z, const std::optional<UserGroup>& candidate) {
  auto history = as_history(z);
  if (candidate) history[*candidate] += 1.0;
  const auto res = offline::fixed_groups_lp(instance, missing, user, history,
                                            instance.config.r,
                                            offline::FixedGroupsMethod::kMaxFlow);
  return static_cast<int>(std::llround(res.objective));
}

OnlineScheduler::OnlineScheduler(const Instance& instance, OnlineOptions options)
    : instance_(instance),
      options_(options),
      timeline_(build_timeline(instance, {options.max_group_size})),
      field_(gf::GaloisField::get(instance.config.field_order)),
      rng_(options.seed) {
  const auto K = static_cast<std::size_t>(instance.config.K);
  state_.v.assign(K, 0);
  state_.equations.assign(K, {});
  state_.delivered.assign(K, {});
  if (options_.decode) {
    library_.emplace(instance.config.N, instance.config.F, instance.config.r,
                     options_.subfile_bytes, instance.config.field_order, mix(options.seed));
  }
}

int OnlineScheduler::needed(int user) const {
  return instance_.config.r * static_cast<int>(timeline_.missing_of(user).size());
}

bool OnlineScheduler::on_arrival(int tau, bool round_up) {
  const int r = instance_.config.r;
  std::vector<int> bounds{tau};
  for (const auto& req : instance_.requests) {
    if (req.arrival <= tau && req.deadline() > tau) bounds.push_back(req.deadline());
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  std::vector<Interval> intervals;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) intervals.push_back({bounds[k], bounds[k + 1]});

  std::map<UserGroup, std::vector<int>> forward;  // group -> forward intervals
  std::set<int> served;
  for (std::size_t l = 0; l < intervals.size(); ++l) {
    std::vector<int> active;
    for (const auto& req : instance_.requests) {
      if (req.arrival <= tau && intervals[l].end <= req.deadline() &&
          !timeline_.missing_of(req.user).empty()) {
        active.push_back(req.user);
        served.insert(req.user);
      }
    }
    for (auto& g : enumerate_groups(instance_, timeline_.missing, active, options_.max_group_size)) {
      forward[std::move(g)].push_back(static_cast<int>(l));
    }
  }

  lp::LinearProgram program(lp::Sense::kMinimize);
  std::map<std::pair<UserGroup, int>, int> x_var;
  std::vector<std::vector<lp::Term>> interval_rows(intervals.size());
  for (const auto& [g, ls] : forward) {
    for (int l : ls) {
      const int var = program.add_variable("", 1.0);
      x_var[{g, l}] = var;
      interval_rows[static_cast<std::size_t>(l)].push_back({var, 1.0});
    }
  }
  for (std::size_t l = 0; l < intervals.size(); ++l) {
    if (interval_rows[l].empty()) continue;
    program.add_constraint(interval_rows[l], lp::Relation::kLessEqual, intervals[l].length());
  }

  std::set<UserGroup> groups;
  for (const auto& [g, n] : state_.z) groups.insert(g);
  for (const auto& [g, ls] : forward) groups.insert(g);

  std::map<std::pair<int, int>, std::vector<lp::Term>> demand_rows;
  for (int i : served) {
    for (int f : timeline_.missing_of(i)) demand_rows[{i, f}];
  }
  for (const auto& g : groups) {
    const auto zit = state_.z.find(g);
    const double history = zit == state_.z.end() ? 0.0 : zit->second;
    const auto fit = forward.find(g);
    for (int i : g) {
      if (!served.contains(i)) continue;
      const auto parts = eligible_parts(instance_, timeline_.missing_of(i), i, g);
      if (parts.empty()) continue;
      std::vector<lp::Term> row;
      for (int f : parts) {
        const int var = program.add_variable("", 0.0);
        row.push_back({var, 1.0});
        demand_rows[{i, f}].push_back({var, 1.0});
      }
      if (fit != forward.end()) {
        for (int l : fit->second) row.push_back({x_var.at({g, l}), -1.0});
      }
      program.add_constraint(std::move(row), lp::Relation::kLessEqual, history);
    }
  }
  for (auto& [key, row] : demand_rows) {
    program.add_constraint(std::move(row), lp::Relation::kEqual, r);
  }

  const auto res = lp::solve(program);
  if (res.status != lp::Status::kOptimal) {
    state_.lp_infeasible_at.push_back(tau);
    return false;
  }
  std::vector<Candidate> out;
  for (const auto& [key, var] : x_var) {
    const double x = res.primal[static_cast<std::size_t>(var)];
    if (round_up && x > 1e-7) {
      out.push_back({key.first, key.second, std::ceil(x - 1e-7)});
    } else if (x >= 1.0 - kEps) {
      out.push_back({key.first, key.second, x});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.interval != b.interval) return a.interval < b.interval;
    if (a.group.size() != b.group.size()) return a.group.size() > b.group.size();
    return a.group < b.group;
  });
  state_.candidates = std::move(out);
  return true;
}

int OnlineScheduler::w(int user, const UserGroup& candidate) const {
  const std::size_t u = static_cast<std::size_t>(user - 1);
  if (options_.uncoded) {
    if (!candidate.contains(user)) return state_.v[u];
    const int demand = instance_.request(user).demand;
    for (int f : eligible_parts(instance_, timeline_.missing_of(user), user, candidate)) {
      for (int j = 1; j <= instance_.config.r; ++j) {
        if (!state_.delivered[u].contains(PacketId{{demand, f}, j})) return state_.v[u] + 1;
      }
    }
    return state_.v[u];
  }
  return benefit(instance_, timeline_.missing_of(user), user, state_.z, candidate);
}

double OnlineScheduler::eta(const UserGroup& group, int tau) const {
  double total = 0.0;
  for (int i : group) {
    const int v = state_.v[static_cast<std::size_t>(i - 1)];
    const int gain = w(i, group) - v;
    if (gain == 0) continue;
    const double window = instance_.request(i).deadline() - tau;
    total += (needed(i) - v) / window * gain;
  }
  return total;
}

bool OnlineScheduler::expired(const UserGroup& group, int tau) const {
  return std::any_of(group.begin(), group.end(),
                     [&](int i) { return instance_.request(i).deadline() <= tau; });
}

std::optional<UserGroup> OnlineScheduler::emergency_group(int tau) const {
  for (const auto& req : instance_.requests) {
    const int i = req.user;
    const int left = needed(i) - state_.v[static_cast<std::size_t>(i - 1)];
    if (req.arrival > tau || req.deadline() <= tau || left <= 0) continue;
    if (req.deadline() - tau > left) continue;
    for (const auto& c : state_.candidates) {
      if (c.group.contains(i) && !expired(c.group, tau) &&
          w(i, c.group) > state_.v[static_cast<std::size_t>(i - 1)]) {
        return c.group;
      }
    }
    return UserGroup({i});
  }
  return std::nullopt;
}

const gf::CodedPacket& OnlineScheduler::transmit(const UserGroup& group, int tau) {
  const int r = instance_.config.r;
  gf::CodedPacket packet;
  packet.tau = tau;
  packet.group = group;
  std::vector<int> next;
  for (int i : group) {
    next.push_back(w(i, group));
    const int demand = instance_.request(i).demand;
    const auto parts = eligible_parts(instance_, timeline_.missing_of(i), i, group);
    if (options_.uncoded) {
      auto& got = state_.delivered[static_cast<std::size_t>(i - 1)];
      bool done = false;
      for (int f : parts) {
        for (int j = 1; j <= r && !done; ++j) {
          const PacketId id{{demand, f}, j};
          if (got.contains(id)) continue;
          packet.terms.push_back({i, id, 1});
          got.insert(id);
          done = true;
        }
        if (done) break;
      }
      continue;
    }
    std::uniform_int_distribution<gf::Elem> coef(0, static_cast<gf::Elem>(field_.order() - 1));
    for (int f : parts) {
      for (int j = 1; j <= r; ++j) packet.terms.push_back({i, {{demand, f}, j}, coef(rng_)});
    }
  }
  if (library_) packet.payload = gf::encode_payload(field_, packet.terms, *library_);

  const int m = static_cast<int>(state_.log.size());
  state_.z[group] += 1;
  if (const auto l = timeline_.interval_at(tau)) state_.x_off[{group, *l}] += 1;
  std::size_t k = 0;
  for (int i : group) {
    auto& v = state_.v[static_cast<std::size_t>(i - 1)];
    if (next[k] > v) state_.equations[static_cast<std::size_t>(i - 1)].push_back(m);
    v = next[k++];
  }
  state_.log.push_back(std::move(packet));
  return state_.log.back();
}

std::optional<gf::CodedPacket> OnlineScheduler::step_slot(int tau) {
  const double eta0 = options_.eta0.threshold();
  std::optional<std::size_t> pick;
  for (std::size_t k = 0; k < state_.candidates.size(); ++k) {
    const auto& c = state_.candidates[k];
    if (expired(c.group, tau)) continue;
    if (eta(c.group, tau) >= eta0) {
      pick = k;
      break;
    }
  }
  if (pick) {
    const UserGroup group = state_.candidates[*pick].group;
    auto& c = state_.candidates[*pick];
    c.residual -= 1.0;
    if (c.residual < 1.0 - kEps) {
      state_.candidates.erase(state_.candidates.begin() + static_cast<std::ptrdiff_t>(*pick));
    }
    return transmit(group, tau);
  }
  if (options_.emergency) {
    if (auto g = emergency_group(tau)) return transmit(*g, tau);
  }
  return std::nullopt;
}

OnlineResult run_online(const Instance& instance, const OnlineOptions& options) {
  OnlineScheduler sched(instance, options);
  OnlineResult result;
  int horizon = 0;
  for (const auto& req : instance.requests) horizon = std::max(horizon, req.deadline());

  for (int tau = 0; tau <= horizon; ++tau) {
    for (const auto& req : instance.requests) {
      if (req.deadline() == tau &&
          sched.state().v[static_cast<std::size_t>(req.user - 1)] < sched.needed(req.user)) {
        result.status = Status::kInfeasible;
        result.failed_user = req.user;
        result.failed_tau = tau;
        break;
      }
    }
    if (result.status == Status::kInfeasible) break;
    const bool arrival = std::any_of(instance.requests.begin(), instance.requests.end(),
                                     [&](const Request& r) { return r.arrival == tau; });
    if (arrival) {
      sched.on_arrival(tau);
    } else if (options.resolve_when_exhausted && sched.state().candidates.empty()) {
      const bool short_user = std::any_of(
          instance.requests.begin(), instance.requests.end(), [&](const Request& r) {
            return r.arrival <= tau && r.deadline() > tau &&
                   sched.state().v[static_cast<std::size_t>(r.user - 1)] < sched.needed(r.user);
          });
      if (short_user) sched.on_arrival(tau, true);
    }
    sched.step_slot(tau);
  }

  const auto& st = sched.state();
  result.log = st.log;
  result.packets_sent = static_cast<int>(st.log.size());
  result.lp_infeasible_at = st.lp_infeasible_at;
  result.x_off = st.x_off;
  result.delivered = st.v;
  if (!result.satisfied() || !options.decode) return result;

  const auto& field = gf::GaloisField::get(instance.config.field_order);
  const gf::Library library(instance.config.N, instance.config.F, instance.config.r,
                            options.subfile_bytes, instance.config.field_order, mix(options.seed));
  for (int i = 1; i <= instance.config.K; ++i) {
    UserDecode d;
    d.user = i;
    const auto& eqs = st.equations[static_cast<std::size_t>(i - 1)];
    d.equations = static_cast<int>(eqs.size());
    if (sched.needed(i) == 0) {
      d.decoded = d.bytes_match = true;
      result.decode.push_back(d);
      continue;
    }
    d.rank = gf::rank(field, gf::build_decoding_matrix(instance, i, st.log, eqs));
    try {
      const auto packets = gf::decode_payload(field, instance, i, st.log, eqs, library);
      d.decoded = true;
      const int demand = instance.request(i).demand;
      const auto cols = gf::decoding_columns(instance, i);
      d.bytes_match = true;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const PacketId id{{demand, cols[c].first}, cols[c].second};
        if (packets[c] != library.packet(id)) d.bytes_match = false;
      }
    } catch (const gf::DecodeFailure&) {
      d.decoded = false;
    }
    result.decode.push_back(d);
  }
  return result;
}

std::optional<offline::OfflineLpVars> shadow_offline(const OnlineResult& result,
                                                     const TimelineIndex& timeline,
                                                     const Instance& instance) {
  offline::OfflineLpVars vars;
  for (const auto& [key, n] : result.x_off) {
    const auto id = timeline.find_group(key.first);
    if (!id) return std::nullopt;
    const auto& ls = timeline.groups[static_cast<std::size_t>(*id)].intervals;
    if (!std::binary_search(ls.begin(), ls.end(), key.second)) return std::nullopt;
    vars.x[{*id, key.second}] = n;
    vars.objective += n;
  }
  return offline::integralize(vars, timeline, instance, instance.config.r);
}

std::string equation_log_json(const std::vector<gf::CodedPacket>& log) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : log) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& t : p.terms) {
      coeffs.push_back({{"user", t.user}, {"f", t.packet.subfile.part}, {"j", t.packet.piece},
                        {"alpha", t.coef}});
    }
    std::ostringstream hex;
    for (auto b : p.payload) hex << std::hex << std::setw(2) << std::setfill('0') << int(b);
    out.push_back({{"tau", p.tau},
                   {"group", std::vector<int>(p.group.begin(), p.group.end())},
                   {"coeffs", coeffs},
                   {"payload_hex", hex.str()}});
  }
  return out.dump(2);
}

std::string decode_report_csv(const std::vector<UserDecode>& report) {
  std::ostringstream out;
  out << "user,equations,rank,decoded,bytes_match\n";
  for (const auto& d : report) {
    out << d.user << ',' << d.equations << ',' << d.rank << ',' << d.decoded << ','
        << d.bytes_match << '\n';
  }
  return out.str();
}

}  // namespace acc::online
