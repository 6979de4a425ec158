#include "acc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "acc/offline.hpp"

namespace acc::sim {

namespace {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long out = 1;
  for (int j = 1; j <= k; ++j) out = out * (n - k + j) / j;
  return out;
}

int effective_F(const SimConfig& c) {
  if (c.placement == PlacementKind::kCentralized) {
    return static_cast<int>(binomial(c.K, c.K * c.M / c.N));
  }
  return c.F;
}

struct Moments {
  int n = 0;
  double sum = 0.0;
  double sq = 0.0;
  void add(double x) {
    ++n;
    sum += x;
    sq += x * x;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sq - sum * sum / n) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CentralizedPlacement placement_centralized(int K, int M, int N) {
  if (K < 1 || N < 1 || M < 0 || M > N) throw ModelError("invalid K, M, N");
  if ((K * M) % N != 0) throw ModelError("KM/N must be an integer for centralized placement");
  CentralizedPlacement out;
  out.t = K * M / N;
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int next) -> void {
    if (static_cast<int>(cur.size()) == out.t) {
      subsets.push_back(cur);
      return;
    }
    for (int u = next; u <= K; ++u) {
      cur.push_back(u);
      self(self, u + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  out.F = static_cast<int>(subsets.size());
  out.placement.caches.resize(static_cast<std::size_t>(K));
  for (std::size_t p = 0; p < subsets.size(); ++p) {
    for (int u : subsets[p]) {
      for (int n = 1; n <= N; ++n) {
        out.placement.caches[static_cast<std::size_t>(u - 1)].insert({n, static_cast<int>(p) + 1});
      }
    }
  }
  return out;
}

Placement placement_decentralized(int K, int M, int N, int F, std::mt19937_64& rng) {
  if (M < 0 || M > N) throw ModelError("cache size out of range");
  Placement out;
  out.caches.resize(static_cast<std::size_t>(K));
  const int total = M * F;
  std::vector<int> files(static_cast<std::size_t>(N));
  std::vector<int> parts(static_cast<std::size_t>(F));
  for (int i = 0; i < K; ++i) {
    std::iota(files.begin(), files.end(), 1);
    std::shuffle(files.begin(), files.end(), rng);
    for (int k = 0; k < N; ++k) {
      const int count = total / N + (k < total % N ? 1 : 0);
      std::iota(parts.begin(), parts.end(), 1);
      std::shuffle(parts.begin(), parts.end(), rng);
      for (int p = 0; p < count; ++p) {
        out.caches[static_cast<std::size_t>(i)].insert({files[static_cast<std::size_t>(k)],
                                                        parts[static_cast<std::size_t>(p)]});
      }
    }
  }
  return out;
}

Instance virtualize_subfile_deadlines(const Instance& base,
                                      const std::vector<SubfileRequest>& requests) {
  Instance out;
  out.config = base.config;
  out.config.K = static_cast<int>(requests.size());
  out.virtual_users = true;
  int id = 1;
  for (const auto& sr : requests) {
    out.placement.caches.push_back(base.placement.caches.at(static_cast<std::size_t>(sr.user - 1)));
    Request req;
    req.user = id++;
    req.arrival = sr.arrival;
    req.slack = sr.slack;
    req.demand = base.request(sr.user).demand;
    req.parts = {sr.part};
    out.requests.push_back(std::move(req));
  }
  out.validate();
  return out;
}

std::vector<int> ArrivalModel::draw(int count, std::mt19937_64& rng) const {
  if (!(lambda > 0.0)) throw ModelError("arrival rate must be positive");
  std::exponential_distribution<double> gap(lambda * F);
  std::vector<int> out;
  double t = 0.0;
  for (int k = 0; k < count; ++k) {
    t += gap(rng);
    out.push_back(static_cast<int>(std::llround(t)));
  }
  return out;
}

DeadlineModel DeadlineModel::offline_preset(int K, int t) {
  return {static_cast<int>(binomial(K - 1, t)), static_cast<int>(binomial(K, t + 1))};
}

DeadlineModel DeadlineModel::online_preset(int K, int M, int N, int F) {
  return {std::max(1, K * M * F / N), K * F};
}

int DeadlineModel::draw(std::mt19937_64& rng) const {
  return std::uniform_int_distribution<int>(min, max)(rng);
}

PlacementKind parse_placement(const std::string& name) {
  if (name == "centralized") return PlacementKind::kCentralized;
  if (name == "decentralized") return PlacementKind::kDecentralized;
  if (name == "virtual") return PlacementKind::kVirtual;
  throw ModelError("unknown placement: " + name);
}

std::string to_string(PlacementKind kind) {
  switch (kind) {
    case PlacementKind::kCentralized: return "centralized";
    case PlacementKind::kDecentralized: return "decentralized";
    case PlacementKind::kVirtual: return "virtual";
  }
  return "";
}

Eta0Rate parse_eta0_rate(const std::string& name) {
  if (name == "gap") return Eta0Rate::kMeanGap;
  if (name == "slot") return Eta0Rate::kSlotRate;
  if (name == "lambda") return Eta0Rate::kLambda;
  throw ModelError("unknown threshold rate: " + name);
}

namespace {

double threshold_rate(const SimConfig& config, double lambda) {
  switch (config.eta0_rate) {
    case Eta0Rate::kMeanGap: return 1.0 / (lambda * effective_F(config));
    case Eta0Rate::kSlotRate: return lambda * effective_F(config);
    case Eta0Rate::kLambda: return lambda;
  }
  return lambda;
}

}  // namespace

online::Eta0Policy low_threshold(const SimConfig& config, double lambda) {
  return online::Eta0Policy::schedule(config.low_a, config.low_b, threshold_rate(config, lambda));
}

online::Eta0Policy high_threshold(const SimConfig& config, double lambda) {
  return online::Eta0Policy::schedule(config.high_a, config.high_b, threshold_rate(config, lambda));
}

Instance make_instance(const SimConfig& config, double lambda, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.config = {config.N, config.K, config.F, config.r, config.field_order};
  int t = 0;
  if (config.placement == PlacementKind::kCentralized) {
    auto cp = placement_centralized(config.K, config.M, config.N);
    inst.config.F = cp.F;
    t = cp.t;
    inst.placement = std::move(cp.placement);
  } else {
    inst.placement = placement_decentralized(config.K, config.M, config.N, config.F, rng);
    t = config.K * config.M / config.N;
  }
  const int F = inst.config.F;
  const DeadlineModel deadlines = config.offline_deadlines
                                      ? DeadlineModel::offline_preset(config.K, t)
                                      : DeadlineModel::online_preset(config.K, config.M, config.N, F);
  const ArrivalModel arrivals{lambda, F};

  if (config.placement != PlacementKind::kVirtual) {
    const auto times = arrivals.draw(config.K, rng);
    for (int i = 1; i <= config.K; ++i) {
      Request req;
      req.user = i;
      req.arrival = times[static_cast<std::size_t>(i - 1)];
      req.slack = deadlines.draw(rng);
      req.demand = (i - 1) % config.N + 1;
      inst.requests.push_back(req);
    }
    inst.validate();
    return inst;
  }

  for (int i = 1; i <= config.K; ++i) {
    Request req;
    req.user = i;
    req.demand = (i - 1) % config.N + 1;
    inst.requests.push_back(req);
  }
  std::vector<SubfileRequest> wanted;
  for (int i = 1; i <= config.K; ++i) {
    for (int f : missing_set(inst, i)) wanted.push_back({i, f, 0, 1});
  }
  std::shuffle(wanted.begin(), wanted.end(), rng);
  const auto times = arrivals.draw(static_cast<int>(wanted.size()), rng);
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    wanted[k].arrival = times[k];
    wanted[k].slack = deadlines.draw(rng);
  }
  return virtualize_subfile_deadlines(inst, wanted);
}

TrialResult run_trial(const SimConfig& config, double lambda, std::uint64_t seed) {
  TrialResult out;
  out.seed = seed;
  out.lambda = lambda;
  const Instance inst = make_instance(config, lambda, seed);
  for (int i = 1; i <= inst.config.K; ++i) {
    out.uncoded_load += inst.config.r * static_cast<double>(missing_set(inst, i).size());
  }

  const auto off = offline::solve_offline(build_timeline(inst, {config.max_group_size}), inst.config.r);
  out.offline.ran = true;
  out.offline.feasible = off.feasible;
  out.offline.packets = off.feasible ? off.vars.objective : 0.0;
  out.offline.decoded = off.feasible;
  if (!off.feasible || !config.run_online) return out;

  auto run = [&](const online::Eta0Policy& eta0, std::uint64_t salt) {
    online::OnlineOptions o;
    o.eta0 = eta0;
    o.seed = splitmix64(seed ^ salt);
    o.decode = config.decode;
    o.subfile_bytes = config.subfile_bytes;
    o.max_group_size = config.max_group_size;
    o.emergency = config.emergency;
    o.resolve_when_exhausted = config.resolve_when_exhausted;
    const auto res = online::run_online(inst, o);
    SchemeOutcome s;
    s.ran = true;
    s.feasible = res.satisfied();
    s.packets = res.packets_sent;
    s.decoded = s.feasible && (!config.decode || res.all_decoded());
    return s;
  };
  out.low = run(low_threshold(config, lambda), 0x1);
  out.high = run(high_threshold(config, lambda), 0x2);
  return out;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t lambda_index, int trial) {
  return splitmix64(splitmix64(base) ^ splitmix64((lambda_index << 32) | static_cast<std::uint32_t>(trial)));
}

std::vector<TrialResult> run_trials(const SimConfig& config, const std::vector<double>& lambdas) {
  const std::size_t per = static_cast<std::size_t>(config.trials);
  std::vector<TrialResult> out(lambdas.size() * per);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < out.size(); k = next++) {
      const std::size_t g = k / per;
      const int trial = static_cast<int>(k % per);
      out[k] = run_trial(config, lambdas[g], trial_seed(config.seed, g, trial));
    }
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

std::vector<Aggregate> aggregate(const SimConfig& config, const std::vector<double>& lambdas,
                                 const std::vector<TrialResult>& results) {
  const int F = effective_F(config);
  std::vector<Aggregate> rows;
  const std::size_t per = static_cast<std::size_t>(config.trials);
  for (std::size_t g = 0; g < lambdas.size(); ++g) {
    const double lambda = lambdas[g];
    auto summarize = [&](const std::string& name, auto pick) {
      Aggregate a;
      a.inv_f_lambda = 1.0 / (F * lambda);
      a.lambda = lambda;
      a.scheme = name;
      Moments m;
      for (std::size_t k = g * per; k < (g + 1) * per && k < results.size(); ++k) {
        const TrialResult& t = results[k];
        const SchemeOutcome& s = pick(t);
        if (!s.ran) continue;
        ++a.trials;
        if (!s.feasible) continue;
        ++a.feasible;
        if (s.packets > 0) m.add(TrialResult::gain(t.uncoded_load, s));
      }
      a.feasible_prob = a.trials ? static_cast<double>(a.feasible) / a.trials : 0.0;
      a.gain_mean = m.mean();
      a.gain_se = m.se();
      rows.push_back(a);
    };
    summarize("offline", [](const TrialResult& t) -> const SchemeOutcome& { return t.offline; });
    if (config.run_online) {
      summarize("online_low", [](const TrialResult& t) -> const SchemeOutcome& { return t.low; });
      summarize("online_high", [](const TrialResult& t) -> const SchemeOutcome& { return t.high; });
    }
  }
  return rows;
}

std::string results_csv(const std::vector<Aggregate>& rows) {
  std::ostringstream out;
  out << "inv_f_lambda,lambda,scheme,trials,feasible,feasible_prob,gain_mean,gain_se\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& a : rows) {
    out << a.inv_f_lambda << ',' << a.lambda << ',' << a.scheme << ',' << a.trials << ','
        << a.feasible << ',' << a.feasible_prob << ',' << a.gain_mean << ',' << a.gain_se << '\n';
  }
  return out.str();
}

}  // namespace acc::sim
