#pragma once

// Online scheduling: a recursive LP solved at every arrival proposes user
// groups, and each slot transmits one random linear combination for the first
// proposal whose weighted benefit clears a threshold.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acc/gf.hpp"
#include "acc/model.hpp"
#include "acc/offline.hpp"

namespace acc::online {

// eta_0 is either a constant or a - b / rate for a caller-supplied rate.
struct Eta0Policy {
  enum class Kind { kConstant, kRate };
  Kind kind = Kind::kConstant;
  double value = 0.0;
  double a = 0.0;
  double b = 0.0;
  double rate = 1.0;

  static Eta0Policy constant(double v) { return {Kind::kConstant, v, 0.0, 0.0, 1.0}; }
  static Eta0Policy schedule(double a, double b, double rate) {
    return {Kind::kRate, 0.0, a, b, rate};
  }
  static Eta0Policy always() { return constant(-std::numeric_limits<double>::infinity()); }
  static Eta0Policy never() { return constant(std::numeric_limits<double>::infinity()); }
  double threshold() const { return kind == Kind::kConstant ? value : a - b / rate; }
};

struct OnlineOptions {
  Eta0Policy eta0 = Eta0Policy::constant(0.0);
  std::uint64_t seed = 1;
  // When no candidate clears eta_0 and some user has exactly as many slots
  // left as packets missing, serve that user anyway.
  bool emergency = false;
  // Ablation: each member gets one raw packet per transmission, no mixing
  // across a user's missing subfiles.
  bool uncoded = false;
  // Re-solve the recursive LP at tau when the candidate list is empty and an
  // active user is still short, rounding every positive allocation up to whole
  // slots. Off reproduces the arrival-only schedule.
  bool resolve_when_exhausted = false;
  std::size_t max_group_size = 0;
  bool decode = true;
  int subfile_bytes = 16;
};

struct Candidate {
  UserGroup group;
  int interval = 0;        // forward interval index at the solving arrival
  double residual = 0.0;   // remaining x*
};

struct OnlineState {
  std::map<UserGroup, int> z;                 // sent groups and their slot counts
  std::vector<int> v;                         // delivered count, by user - 1
  std::vector<std::vector<int>> equations;    // indices into log, by user - 1
  std::map<std::pair<UserGroup, int>, int> x_off;  // (group, offline interval)
  std::vector<Candidate> candidates;
  std::vector<gf::CodedPacket> log;
  std::vector<std::set<PacketId>> delivered;  // uncoded ablation only
  std::vector<int> lp_infeasible_at;
};

enum class Status { kSatisfied, kInfeasible };

struct UserDecode {
  int user = 1;
  int equations = 0;
  int rank = 0;
  bool decoded = false;
  bool bytes_match = false;
};

struct OnlineResult {
  Status status = Status::kSatisfied;
  int failed_user = 0;
  int failed_tau = -1;
  int packets_sent = 0;
  std::vector<gf::CodedPacket> log;
  std::vector<UserDecode> decode;
  std::vector<int> lp_infeasible_at;
  std::map<std::pair<UserGroup, int>, int> x_off;
  std::vector<int> delivered;  // v_i at the end, by user - 1

  bool satisfied() const { return status == Status::kSatisfied; }
  bool all_decoded() const;
};

// Optimal value of the history-benefit LP for `user` when `candidate` is added
// to the sent groups (one more slot if already sent).
int benefit(const Instance& instance, const std::vector<int>& missing, int user,
            const std::map<UserGroup, int>& z, const std::optional<UserGroup>& candidate);

class OnlineScheduler {
 public:
  OnlineScheduler(const Instance& instance, OnlineOptions options);

  // Solves the recursive LP at tau and replaces the candidate list. Returns
  // false (and records tau) when the LP is infeasible; the old list is kept.
  // With round_up, every positive x* becomes ceil(x*) slots.
  bool on_arrival(int tau, bool round_up = false);
  int w(int user, const UserGroup& candidate) const;
  double eta(const UserGroup& group, int tau) const;
  // Emits at most one packet for slot [tau, tau + 1).
  std::optional<gf::CodedPacket> step_slot(int tau);
  // Sends `group` in slot tau and updates every counter, bypassing selection.
  const gf::CodedPacket& transmit(const UserGroup& group, int tau);

  const OnlineState& state() const { return state_; }
  const Instance& instance() const { return instance_; }
  const TimelineIndex& timeline() const { return timeline_; }
  int needed(int user) const;

 private:
  bool expired(const UserGroup& group, int tau) const;
  std::optional<UserGroup> emergency_group(int tau) const;

  Instance instance_;
  OnlineOptions options_;
  TimelineIndex timeline_;
  const gf::GaloisField& field_;
  std::optional<gf::Library> library_;
  std::mt19937_64 rng_;
  OnlineState state_;
};

OnlineResult run_online(const Instance& instance, const OnlineOptions& options);

// Integral offline point built from the online run's shadow allocations, with
// y rebuilt by max flow. nullopt if some group/interval pair is not valid
// offline or some user cannot be fully served by it.
std::optional<offline::OfflineLpVars> shadow_offline(const OnlineResult& result,
                                                     const TimelineIndex& timeline,
                                                     const Instance& instance);

std::string equation_log_json(const std::vector<gf::CodedPacket>& log);
// user,equations,rank,decoded,bytes_match
std::string decode_report_csv(const std::vector<UserDecode>& report);

}  // namespace acc::online
