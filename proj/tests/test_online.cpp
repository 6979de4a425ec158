#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "acc/offline.hpp"
#include "acc/online.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace acc;
using namespace acc::online;

namespace {

Instance single_user(int F, int slack) {
  Instance inst;
  inst.config = {1, 1, F, 1, 256};
  inst.placement.caches.resize(1);
  inst.requests = {fixtures::req(1, 0, slack, 1)};
  return inst;
}

OnlineOptions opts(double eta0, std::uint64_t seed = 7) {
  OnlineOptions o;
  o.eta0 = Eta0Policy::constant(eta0);
  o.seed = seed;
  return o;
}

// Each term must be missing at its own user and cached by every other member.
bool all_but_one(const gf::CodedPacket& p, const Instance& inst) {
  for (const auto& t : p.terms) {
    std::vector<EquationTerm> eq{{t.user, t.packet.subfile}};
    std::set<int> seen{t.user};
    for (const auto& o : p.terms) {
      if (seen.insert(o.user).second) eq.push_back({o.user, o.packet.subfile});
    }
    if (!is_all_but_one(eq, inst)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("threshold policies") {
  CHECK(Eta0Policy::constant(0.3).threshold() == doctest::Approx(0.3));
  CHECK(Eta0Policy::schedule(0.4, 0.5, 2.0).threshold() == doctest::Approx(0.15));
  CHECK(Eta0Policy::schedule(0.8, 0.2, 0.5).threshold() == doctest::Approx(0.4));
  CHECK(std::isinf(Eta0Policy::always().threshold()));
  CHECK(Eta0Policy::always().threshold() < 0);
}

TEST_CASE("benefit of a fresh singleton and monotonicity") {
  const auto inst = fixtures::example1();
  const auto tl = build_timeline(inst);
  for (int i = 1; i <= 3; ++i) {
    CHECK(benefit(inst, tl.missing_of(i), i, {}, UserGroup({i})) == 1);
    CHECK(benefit(inst, tl.missing_of(i), i, {}, std::nullopt) == 0);
  }
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto ri = fixtures::random_instance(rng, 4, 4, 1 + trial % 2, 0.4, 4, 6);
    const auto rt = build_timeline(ri);
    if (rt.groups.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, rt.groups.size() - 1);
    std::map<UserGroup, int> z;
    for (int k = 0; k < 4; ++k) z[rt.groups[pick(rng)].users] += 1;
    const auto& cand = rt.groups[pick(rng)].users;
    for (int i = 1; i <= 4; ++i) {
      const int base = benefit(ri, rt.missing_of(i), i, z, std::nullopt);
      const int with = benefit(ri, rt.missing_of(i), i, z, cand);
      CHECK(with >= base);
      CHECK(with <= base + ri.config.r);
      if (!cand.contains(i)) CHECK(with == base);
    }
  }
}

TEST_CASE("example 4 benefits at tau = 8") {
  const auto inst = fixtures::example4();
  OnlineScheduler s(inst, opts(0.0));
  const std::vector<std::vector<int>> history = {{1}, {1}, {1, 2}, {1, 3},
                                                 {2, 3}, {1, 2, 3}, {1, 2, 4}, {2, 3, 4}};
  for (std::size_t k = 0; k < history.size(); ++k) s.transmit(UserGroup(history[k]), static_cast<int>(k));

  const auto& v = s.state().v;
  for (int i = 1; i <= 5; ++i) {
    CHECK(v[static_cast<std::size_t>(i - 1)] ==
          benefit(inst, s.timeline().missing_of(i), i, s.state().z, std::nullopt));
  }
  CHECK(v[1] == 5);
  CHECK(v[2] == 4);
  CHECK(v[3] == 2);
  CHECK(v[4] == 0);

  const UserGroup cand({2, 3, 5});
  CHECK(s.w(2, cand) - v[1] == 0);
  CHECK(s.w(3, cand) - v[2] == 0);
  CHECK(s.w(5, cand) - v[4] == 1);
  // Only user 5 contributes: 6 missing, window 23 - 8.
  CHECK(s.eta(cand, 8) == doctest::Approx(6.0 / 15.0));
}

TEST_CASE("eta arithmetic") {
  const auto inst = single_user(3, 3);
  OnlineScheduler s(inst, opts(0.0));
  CHECK(s.eta(UserGroup({1}), 0) == doctest::Approx(1.0));
  for (int tau = 0; tau < 3; ++tau) s.transmit(UserGroup({1}), tau);
  CHECK(s.state().v[0] == 3);
  CHECK(s.eta(UserGroup({1}), 2) == 0.0);
  CHECK(s.state().equations[0].size() == 3);
}

TEST_CASE("infinite thresholds") {
  SUBCASE("never transmit") {
    OnlineOptions o;
    o.eta0 = Eta0Policy::never();
    const auto res = run_online(fixtures::example3(), o);
    CHECK(res.status == Status::kInfeasible);
    CHECK(res.failed_user == 1);
    CHECK(res.failed_tau == 3);
    CHECK(res.packets_sent == 0);
  }
  SUBCASE("always transmit, one user") {
    OnlineOptions o;
    o.eta0 = Eta0Policy::always();
    const auto res = run_online(single_user(4, 9), o);
    REQUIRE(res.satisfied());
    CHECK(res.packets_sent == 4);
    for (int k = 0; k < 4; ++k) CHECK(res.log[static_cast<std::size_t>(k)].tau == k);
    CHECK(res.all_decoded());
  }
}

TEST_CASE("example 3 arrival at tau = 1 hedges across both missing parts") {
  const auto inst = fixtures::example3();
  OnlineScheduler s(inst, opts(0.0));
  REQUIRE(s.on_arrival(1));
  REQUIRE(s.state().candidates.size() == 1);
  CHECK(s.state().candidates[0].group == UserGroup({1}));
  CHECK(s.state().candidates[0].residual >= 2.0 - 1e-9);
  const auto p = s.step_slot(1);
  REQUIRE(p);
  CHECK(p->group == UserGroup({1}));
  std::set<int> parts;
  for (const auto& t : p->terms) parts.insert(t.packet.subfile.part);
  CHECK(parts == std::set<int>{2, 3});
}

TEST_CASE("example 3 under every continuation") {
  const std::vector<std::vector<std::pair<int, int>>> orders = {
      {{1, 2}, {2, 2}, {3, 2}}, {{1, 2}, {3, 2}, {2, 2}}};
  int uncoded_failures = 0;
  for (const auto& times : orders) {
    const auto inst = fixtures::example3(times);
    for (double eta0 : {0.0, -1e9}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto res = run_online(inst, opts(eta0, seed));
        CHECK(res.satisfied());
      }
    }
    auto o = opts(0.0);
    o.uncoded = true;
    if (!run_online(inst, o).satisfied()) ++uncoded_failures;
  }
  CHECK(uncoded_failures >= 1);
}

TEST_CASE("synchronous centralized placement matches the offline count") {
  for (int r : {1, 2}) {
    const auto inst = fixtures::mn_synchronous(3, 1, r, 12);
    const auto res = run_online(inst, opts(-1e9));
    REQUIRE(res.satisfied());
    CHECK(res.packets_sent <= 3 * r);
    CHECK(res.all_decoded());
  }
}

TEST_CASE("counting bound forces infeasibility") {
  const auto res = run_online(single_user(5, 3), opts(-1e9));
  CHECK(res.status == Status::kInfeasible);
  CHECK(res.failed_tau == 3);
}

TEST_CASE("run invariants on random instances") {
  std::mt19937_64 rng(11);
  int satisfied = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int K = 2 + trial % 3;
    auto inst = fixtures::random_instance(rng, K, 4, 1 + trial % 2, 0.4, 5, 12);
    if (trial % 4 == 0) inst.config.field_order = 65536;
    const auto res = run_online(inst, opts(trial % 3 == 0 ? -1e9 : 0.2, 100 + trial));
    const auto tl = build_timeline(inst);

    std::set<int> slots;
    std::map<UserGroup, int> z;
    for (const auto& p : res.log) {
      CHECK(slots.insert(p.tau).second);
      CHECK(all_but_one(p, inst));
      z[p.group] += 1;
    }
    for (int i = 1; i <= K; ++i) {
      const int v = res.delivered[static_cast<std::size_t>(i - 1)];
      CHECK(v == benefit(inst, tl.missing_of(i), i, z, std::nullopt));
      CHECK(v <= inst.config.r * static_cast<int>(tl.missing_of(i).size()));
    }
    if (!res.satisfied()) continue;
    ++satisfied;
    for (const auto& d : res.decode) {
      CHECK(d.equations == inst.config.r * static_cast<int>(tl.missing_of(d.user).size()));
      if (d.decoded) CHECK(d.bytes_match);
      CHECK(d.decoded == (d.rank == d.equations));
    }
  }
  CHECK(satisfied > 30);
}

TEST_CASE("satisfied runs imply a feasible offline point") {
  std::mt19937_64 rng(2024);
  int satisfied = 0;
  int offline_infeasible = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int K = 2 + trial % 4;
    const int F = 2 + trial % 5;
    const auto inst = fixtures::random_instance(rng, K, F, 1, 0.35, 6, 3 * F);
    OnlineOptions o = opts(trial % 2 ? 0.0 : -1e9, trial);
    o.decode = false;
    o.resolve_when_exhausted = trial % 3 == 0;
    const auto res = run_online(inst, o);
    const auto tl = build_timeline(inst);
    const auto off = offline::solve_offline(tl, 1);
    if (!off.feasible) {
      ++offline_infeasible;
      CHECK_FALSE(res.satisfied());
    }
    if (!res.satisfied()) continue;
    ++satisfied;
    CHECK(off.feasible);
    const auto shadow = shadow_offline(res, tl, inst);
    REQUIRE(shadow);
    CHECK(offline::max_violation(tl, 1, *shadow) <= 1e-9);
    CHECK(shadow->objective == doctest::Approx(res.packets_sent));
    CHECK(shadow->objective >= off.vars.objective - 1e-6);
  }
  CHECK(satisfied > 100);
  CHECK(offline_infeasible > 10);
}

TEST_CASE("decode success rate over GF(2^8)") {
  const auto inst = fixtures::mn_synchronous(4, 2, 1, 30);
  const int KF = inst.config.K * inst.config.F;
  const int runs = 300;
  int ok = 0;
  for (int s = 0; s < runs; ++s) {
    const auto res = run_online(inst, opts(-1e9, 5000 + static_cast<std::uint64_t>(s)));
    REQUIRE(res.satisfied());
    ok += res.all_decoded();
    for (const auto& d : res.decode) {
      if (d.decoded) CHECK(d.bytes_match);
    }
  }
  const double p = std::pow(1.0 - 1.0 / 256.0, KF);
  const double sigma = std::sqrt(p * (1 - p) / runs);
  CHECK(static_cast<double>(ok) / runs >= p - 3 * sigma);
}

TEST_CASE("runs replay from the seed") {
  const auto inst = fixtures::example4();
  const auto a = run_online(inst, opts(0.1, 99));
  const auto b = run_online(inst, opts(0.1, 99));
  CHECK(equation_log_json(a.log) == equation_log_json(b.log));
  CHECK(decode_report_csv(a.decode) == decode_report_csv(b.decode));
}

TEST_CASE("log and report formats") {
  const auto res = run_online(fixtures::example3(), opts(0.0, 4));
  REQUIRE(res.satisfied());
  const auto j = nlohmann::json::parse(equation_log_json(res.log));
  REQUIRE(j.size() == res.log.size());
  CHECK(j[0]["tau"] == 1);
  CHECK(j[0]["group"] == nlohmann::json::array({1}));
  CHECK(j[0]["coeffs"].size() == 2);
  CHECK(j[0]["coeffs"][0].contains("alpha"));
  CHECK(j[0]["payload_hex"].get<std::string>().size() == 32);
  const auto csv = decode_report_csv(res.decode);
  CHECK(csv.rfind("user,equations,rank,decoded,bytes_match\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
