#pragma once

// Instance generators, placement schemes and the Monte-Carlo harness that
// compares offline and online coding gain against arrival density.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "acc/model.hpp"
#include "acc/online.hpp"

namespace acc::sim {

std::uint64_t splitmix64(std::uint64_t x);

struct CentralizedPlacement {
  int F = 0;
  int t = 0;
  Placement placement;
};

// Parts are the t-subsets of [K], t = KM/N; user i caches part S of every
// file iff i is in S. Throws ModelError when KM/N is not an integer.
CentralizedPlacement placement_centralized(int K, int M, int N);

// Each user independently caches MF parts in total, spread over the N files as
// evenly as possible (the files that get one extra part are drawn at random),
// each file's parts a uniform random subset.
Placement placement_decentralized(int K, int M, int N, int F, std::mt19937_64& rng);

struct SubfileRequest {
  int user = 1;
  int part = 1;
  int arrival = 0;
  int slack = 1;
};

// One virtual user per subfile request, sharing the original user's cache and
// demand.
Instance virtualize_subfile_deadlines(const Instance& base,
                                      const std::vector<SubfileRequest>& requests);

struct ArrivalModel {
  double lambda = 1.0;
  int F = 1;
  // Cumulative exponential gaps with rate lambda * F, rounded to the nearest
  // slot.
  std::vector<int> draw(int count, std::mt19937_64& rng) const;
};

struct DeadlineModel {
  int min = 1;
  int max = 1;
  static DeadlineModel offline_preset(int K, int t);
  static DeadlineModel online_preset(int K, int M, int N, int F);
  int draw(std::mt19937_64& rng) const;
};

enum class PlacementKind { kCentralized, kDecentralized, kVirtual };
// What the eta_0 schedules a - b / x are evaluated at: the mean gap between
// arrivals in slots 1/(F lambda), the per-slot arrival rate F lambda, or
// lambda itself.
enum class Eta0Rate { kMeanGap, kSlotRate, kLambda };

PlacementKind parse_placement(const std::string& name);
Eta0Rate parse_eta0_rate(const std::string& name);
std::string to_string(PlacementKind kind);

struct SimConfig {
  int K = 6;
  int N = 6;
  int M = 2;
  int F = 20;  // ignored for centralized placement
  int r = 1;
  PlacementKind placement = PlacementKind::kDecentralized;
  bool offline_deadlines = false;  // use the offline preset instead of the online one
  double low_a = 0.4, low_b = 0.5;
  double high_a = 0.8, high_b = 0.2;
  Eta0Rate eta0_rate = Eta0Rate::kMeanGap;
  int field_order = 256;
  std::uint64_t seed = 1;
  int trials = 200;
  int threads = 1;
  bool run_online = true;
  bool emergency = false;
  bool resolve_when_exhausted = true;
  bool decode = true;
  int subfile_bytes = 8;
  std::size_t max_group_size = 0;
};

online::Eta0Policy low_threshold(const SimConfig& config, double lambda);
online::Eta0Policy high_threshold(const SimConfig& config, double lambda);

Instance make_instance(const SimConfig& config, double lambda, std::uint64_t seed);

struct SchemeOutcome {
  bool ran = false;
  bool feasible = false;
  double packets = 0.0;
  bool decoded = false;
};

struct TrialResult {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double uncoded_load = 0.0;
  SchemeOutcome offline;
  SchemeOutcome low;
  SchemeOutcome high;

  static double gain(double uncoded, const SchemeOutcome& s) { return uncoded / s.packets; }
};

TrialResult run_trial(const SimConfig& config, double lambda, std::uint64_t seed);

std::uint64_t trial_seed(std::uint64_t base, std::size_t lambda_index, int trial);

// Every trial for every lambda, in grid order then trial order.
std::vector<TrialResult> run_trials(const SimConfig& config, const std::vector<double>& lambdas);

struct Aggregate {
  double inv_f_lambda = 0.0;
  double lambda = 0.0;
  std::string scheme;
  int trials = 0;    // offline: all trials; online: offline-feasible trials
  int feasible = 0;
  double feasible_prob = 0.0;
  double gain_mean = 0.0;
  double gain_se = 0.0;
};

std::vector<Aggregate> aggregate(const SimConfig& config, const std::vector<double>& lambdas,
                                 const std::vector<TrialResult>& results);

// inv_f_lambda,lambda,scheme,trials,feasible,feasible_prob,gain_mean,gain_se
std::string results_csv(const std::vector<Aggregate>& rows);

}  // namespace acc::sim
