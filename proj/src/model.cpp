#include "acc/model.hpp"

#include <algorithm>
#include <sstream>

namespace acc {

void Instance::validate() const {
  const auto& c = config;
  if (c.K < 1) throw ModelError("K must be at least 1");
  if (!virtual_users && c.N < c.K) throw ModelError("N must be at least K");
  if (c.N < 1 || c.F < 1 || c.r < 1) throw ModelError("N, F and r must be positive");
  if (c.field_order != 256 && c.field_order != 65536) {
    throw ModelError("field_order must be 256 or 65536");
  }
  if (placement.caches.size() != static_cast<std::size_t>(c.K)) {
    throw ModelError("placement must list one cache per user");
  }
  for (const auto& cache : placement.caches) {
    for (const auto& id : cache) {
      if (id.file < 1 || id.file > c.N || id.part < 1 || id.part > c.F) {
        throw ModelError("cached subfile out of range");
      }
    }
  }
  if (requests.size() != static_cast<std::size_t>(c.K)) {
    throw ModelError("exactly one request per user is required");
  }
  std::vector<bool> seen(static_cast<std::size_t>(c.K), false);
  for (const auto& req : requests) {
    if (req.user < 1 || req.user > c.K) throw ModelError("request user out of range");
    if (seen[static_cast<std::size_t>(req.user - 1)]) {
      throw ModelError("duplicate request for user " + std::to_string(req.user));
    }
    seen[static_cast<std::size_t>(req.user - 1)] = true;
    if (req.arrival < 0) throw ModelError("arrival must be nonnegative");
    if (req.slack < 1) throw ModelError("slack must be at least 1");
    if (req.demand < 1 || req.demand > c.N) throw ModelError("demand out of range");
    for (int part : req.parts) {
      if (part < 1 || part > c.F) throw ModelError("requested part out of range");
    }
  }
}

const Request& Instance::request(int user) const {
  for (const auto& req : requests) {
    if (req.user == user) return req;
  }
  throw ModelError("no request for user " + std::to_string(user));
}

UserGroup::UserGroup(std::vector<int> users) : users_(std::move(users)) {
  std::sort(users_.begin(), users_.end());
  users_.erase(std::unique(users_.begin(), users_.end()), users_.end());
}

bool UserGroup::contains(int user) const {
  return std::binary_search(users_.begin(), users_.end(), user);
}

UserGroup UserGroup::with(int user) const {
  auto users = users_;
  users.push_back(user);
  return UserGroup(std::move(users));
}

std::string UserGroup::to_string() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t k = 0; k < users_.size(); ++k) {
    if (k) out << ',';
    out << users_[k];
  }
  out << '}';
  return out.str();
}

std::optional<int> TimelineIndex::find_group(const UserGroup& users) const {
  auto it = std::lower_bound(
      groups.begin(), groups.end(), users,
      [](const GroupInfo& g, const UserGroup& u) { return g.users < u; });
  if (it == groups.end() || it->users != users) return std::nullopt;
  return static_cast<int>(it - groups.begin());
}

std::optional<int> TimelineIndex::interval_at(int tau) const {
  for (std::size_t l = 0; l < intervals.size(); ++l) {
    if (intervals[l].contains(tau)) return static_cast<int>(l);
  }
  return std::nullopt;
}

const std::vector<int>& TimelineIndex::eligible(int group_id, int user) const {
  return groups.at(static_cast<std::size_t>(group_id)).eligible.at(user);
}

std::vector<int> missing_set(const Instance& instance, int user) {
  const Request& req = instance.request(user);
  std::vector<int> out;
  for (int f = 1; f <= instance.config.F; ++f) {
    if (!req.parts.empty() &&
        std::find(req.parts.begin(), req.parts.end(), f) == req.parts.end()) {
      continue;
    }
    if (!instance.placement.contains(user, {req.demand, f})) out.push_back(f);
  }
  return out;
}

std::vector<int> eligible_parts(const Instance& instance,
                                std::span<const int> missing, int user,
                                const UserGroup& group) {
  const int demand = instance.request(user).demand;
  std::vector<int> out;
  for (int f : missing) {
    bool cached_by_all = true;
    for (int j : group) {
      if (j != user && !instance.placement.contains(j, {demand, f})) {
        cached_by_all = false;
        break;
      }
    }
    if (cached_by_all) out.push_back(f);
  }
  return out;
}

namespace {

struct GroupSearch {
  const Instance& instance;
  const std::vector<std::vector<int>>& missing;
  std::span<const int> active;
  std::size_t max_size;
  std::vector<UserGroup> out;

  // members[k] pairs a user with its current F_{i,U}.
  void extend(std::vector<std::pair<int, std::vector<int>>>& members,
              std::size_t next) {
    std::vector<int> ids;
    for (const auto& m : members) ids.push_back(m.first);
    out.emplace_back(ids);
    if (members.size() >= max_size) return;
    for (std::size_t k = next; k < active.size(); ++k) {
      const int b = active[k];
      const int demand_b = instance.request(b).demand;
      // b's own eligible parts: cached by every current member.
      std::vector<int> own;
      for (int f : missing[static_cast<std::size_t>(b - 1)]) {
        bool ok = true;
        for (const auto& m : members) {
          if (!instance.placement.contains(m.first, {demand_b, f})) {
            ok = false;
            break;
          }
        }
        if (ok) own.push_back(f);
      }
      if (own.empty()) continue;
      std::vector<std::pair<int, std::vector<int>>> grown;
      grown.reserve(members.size() + 1);
      bool ok = true;
      for (const auto& m : members) {
        const int demand_i = instance.request(m.first).demand;
        std::vector<int> kept;
        for (int f : m.second) {
          if (instance.placement.contains(b, {demand_i, f})) kept.push_back(f);
        }
        if (kept.empty()) {
          ok = false;
          break;
        }
        grown.emplace_back(m.first, std::move(kept));
      }
      if (!ok) continue;
      grown.emplace_back(b, std::move(own));
      extend(grown, k + 1);
    }
  }
};

}  // namespace

std::vector<UserGroup> enumerate_groups(
    const Instance& instance, const std::vector<std::vector<int>>& missing,
    std::span<const int> active, std::size_t max_group_size) {
  std::vector<int> sorted(active.begin(), active.end());
  std::sort(sorted.begin(), sorted.end());
  GroupSearch search{instance, missing, sorted,
                     max_group_size == 0 ? sorted.size() : max_group_size, {}};
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const int a = sorted[k];
    const auto& own = missing[static_cast<std::size_t>(a - 1)];
    if (own.empty()) continue;
    std::vector<std::pair<int, std::vector<int>>> members{{a, own}};
    search.extend(members, k + 1);
  }
  std::sort(search.out.begin(), search.out.end());
  return std::move(search.out);
}

TimelineIndex build_timeline(const Instance& instance,
                             const TimelineOptions& options) {
  instance.validate();
  const int K = instance.config.K;
  TimelineIndex index;
  index.missing.resize(static_cast<std::size_t>(K));
  for (int i = 1; i <= K; ++i) {
    index.missing[static_cast<std::size_t>(i - 1)] = missing_set(instance, i);
  }

  std::vector<int> bounds;
  for (const auto& req : instance.requests) {
    bounds.push_back(req.arrival);
    bounds.push_back(req.deadline());
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    index.intervals.push_back({bounds[k], bounds[k + 1]});
  }

  std::map<UserGroup, std::set<int>> group_intervals;
  for (std::size_t l = 0; l < index.intervals.size(); ++l) {
    const Interval& iv = index.intervals[l];
    std::vector<int> active;
    std::set<int> demands;
    for (int i = 1; i <= K; ++i) {
      const Request& req = instance.request(i);
      if (req.arrival <= iv.start && iv.end <= req.deadline() &&
          !index.missing[static_cast<std::size_t>(i - 1)].empty()) {
        active.push_back(i);
        demands.insert(req.demand);
      }
    }
    for (auto& g : enumerate_groups(instance, index.missing, active,
                                    options.max_group_size)) {
      group_intervals[std::move(g)].insert(static_cast<int>(l));
    }
    index.active_users.push_back(std::move(active));
    index.active_demands.push_back(std::move(demands));
  }

  index.user_groups.resize(index.intervals.size());
  for (auto& [users, ivs] : group_intervals) {
    GroupInfo info;
    info.users = users;
    info.intervals.assign(ivs.begin(), ivs.end());
    const int id = static_cast<int>(index.groups.size());
    for (int i : users) {
      info.eligible[i] = eligible_parts(
          instance, index.missing[static_cast<std::size_t>(i - 1)], i, users);
      for (int f : info.eligible[i]) index.carriers[{i, f}].push_back(id);
    }
    for (int l : info.intervals) {
      index.user_groups[static_cast<std::size_t>(l)].push_back(id);
    }
    index.groups.push_back(std::move(info));
  }
  return index;
}

bool is_all_but_one(std::span<const EquationTerm> equation,
                    const Instance& instance) {
  if (equation.empty()) return false;
  for (std::size_t a = 0; a < equation.size(); ++a) {
    for (std::size_t b = a + 1; b < equation.size(); ++b) {
      if (equation[a].user == equation[b].user) return false;
    }
  }
  for (const auto& term : equation) {
    if (term.subfile.file != instance.request(term.user).demand) return false;
    if (instance.placement.contains(term.user, term.subfile)) return false;
    for (const auto& other : equation) {
      if (other.user != term.user &&
          !instance.placement.contains(other.user, term.subfile)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace acc
