#pragma once

// Problem instances for asynchronous coded caching with deadlines, the
// interval partition of the delivery horizon and the combinatorial set
// families (missing subfiles, user groups, eligible parts) derived from it.
//
// Users, files and subfile parts are 1-based identifiers throughout. Interval
// indices are 0-based positions into TimelineIndex::intervals.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace acc {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  int N = 1;  // files
  int K = 1;  // users
  int F = 1;  // subfiles per file
  int r = 1;  // packets (slots) per subfile
  int field_order = 256;
};

struct SubfileId {
  int file = 1;
  int part = 1;
  auto operator<=>(const SubfileId&) const = default;
};

struct PacketId {
  SubfileId subfile;
  int piece = 1;
  auto operator<=>(const PacketId&) const = default;
};

struct Placement {
  std::vector<std::set<SubfileId>> caches;  // caches[user - 1]

  bool contains(int user, SubfileId id) const {
    return caches.at(static_cast<std::size_t>(user - 1)).contains(id);
  }
};

struct Request {
  int user = 1;
  int arrival = 0;  // T_i
  int slack = 1;    // Delta_i
  int demand = 1;   // d_i
  // Parts of the demanded file this request asks for; empty means all of
  // them. Only per-subfile (virtual user) instances set this.
  std::vector<int> parts;

  int deadline() const { return arrival + slack; }
};

struct Instance {
  SystemConfig config;
  Placement placement;
  std::vector<Request> requests;
  // Virtual-user instances share demands and may have K > N.
  bool virtual_users = false;

  // Throws ModelError on any violated invariant.
  void validate() const;
  const Request& request(int user) const;
};

// Sorted list of distinct 1-based user ids. Ordering is lexicographic on the
// member list.
class UserGroup {
 public:
  UserGroup() = default;
  explicit UserGroup(std::vector<int> users);
  UserGroup(std::initializer_list<int> users)
      : UserGroup(std::vector<int>(users)) {}

  std::span<const int> users() const { return users_; }
  std::size_t size() const { return users_.size(); }
  bool empty() const { return users_.empty(); }
  bool contains(int user) const;
  UserGroup with(int user) const;
  std::string to_string() const;

  auto begin() const { return users_.begin(); }
  auto end() const { return users_.end(); }

  auto operator<=>(const UserGroup&) const = default;

 private:
  std::vector<int> users_;
};

struct Interval {
  int start = 0;
  int end = 0;  // half-open
  int length() const { return end - start; }
  bool contains(int tau) const { return start <= tau && tau < end; }
};

struct GroupInfo {
  UserGroup users;
  std::vector<int> intervals;            // I_U, ascending
  std::map<int, std::vector<int>> eligible;  // user -> F_{i,U}, ascending
};

struct TimelineIndex {
  std::vector<Interval> intervals;
  std::vector<std::vector<int>> active_users;     // U_l
  std::vector<std::set<int>> active_demands;      // D_l
  std::vector<std::vector<int>> missing;          // Omega^(i), by user - 1
  std::vector<std::vector<int>> user_groups;      // group ids per interval
  std::vector<GroupInfo> groups;                  // every user group, lex order
  std::map<std::pair<int, int>, std::vector<int>> carriers;  // (i, f) -> ids

  int beta() const { return static_cast<int>(intervals.size()); }
  int horizon_start() const { return intervals.empty() ? 0 : intervals.front().start; }
  int horizon_end() const { return intervals.empty() ? 0 : intervals.back().end; }
  std::optional<int> find_group(const UserGroup& users) const;
  std::optional<int> interval_at(int tau) const;
  const std::vector<int>& missing_of(int user) const {
    return missing.at(static_cast<std::size_t>(user - 1));
  }
  const std::vector<int>& eligible(int group_id, int user) const;
};

struct TimelineOptions {
  // Upper bound on |U| during group enumeration; 0 means K.
  std::size_t max_group_size = 0;
};

// Omega^(i): parts of W_{d_i} (restricted to the requested parts) absent
// from Z_i.
std::vector<int> missing_set(const Instance& instance, int user);

// F_{i,U}: parts in `missing` that every other member of `group` caches.
std::vector<int> eligible_parts(const Instance& instance,
                                std::span<const int> missing, int user,
                                const UserGroup& group);

// Enumerates every user group contained in `active` (users with an empty
// missing set must already be excluded). Groups are returned in lexicographic
// order.
std::vector<UserGroup> enumerate_groups(
    const Instance& instance, const std::vector<std::vector<int>>& missing,
    std::span<const int> active, std::size_t max_group_size);

TimelineIndex build_timeline(const Instance& instance,
                             const TimelineOptions& options = {});

struct EquationTerm {
  int user = 1;
  SubfileId subfile;
};

// Definition of an all-but-one equation: every term is missing at its own
// user and cached by every other participant.
bool is_all_but_one(std::span<const EquationTerm> equation,
                    const Instance& instance);

}  // namespace acc
