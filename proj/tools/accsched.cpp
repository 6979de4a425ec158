#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acc/dual_decomp.hpp"
#include "acc/io.hpp"
#include "acc/offline.hpp"
#include "acc/online.hpp"
#include "acc/sim.hpp"

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    acc::io::save_text(path, text);
  }
}

struct ShapeArgs {
  int K = 6;
  int N = 6;
  int M = 2;
  int F = 20;
  int r = 1;
  int field = 256;
  std::string placement = "decentralized";
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--K", K, "users")->check(CLI::PositiveNumber);
    app->add_option("--N", N, "files")->check(CLI::PositiveNumber);
    app->add_option("--M", M, "cache size in files")->check(CLI::NonNegativeNumber);
    app->add_option("--F", F, "subfiles per file (decentralized, virtual)")->check(CLI::PositiveNumber);
    app->add_option("--r", r, "packets per subfile")->check(CLI::PositiveNumber);
    app->add_option("--field", field, "field order")->check(CLI::IsMember({256, 65536}));
    app->add_option("--placement", placement, "centralized, decentralized or virtual")
        ->check(CLI::IsMember({"centralized", "decentralized", "virtual"}));
    app->add_option("--seed", seed, "64-bit seed");
  }

  acc::sim::SimConfig config() const {
    acc::sim::SimConfig c;
    c.K = K;
    c.N = N;
    c.M = M;
    c.F = F;
    c.r = r;
    c.field_order = field;
    c.placement = acc::sim::parse_placement(placement);
    c.seed = seed;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadline-aware coded caching scheduler"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "emit a random instance as JSON");
  ShapeArgs gen_shape;
  gen_shape.add(gen);
  double gen_lambda = 0.1;
  bool gen_offline_deadlines = false;
  std::string gen_out;
  gen->add_option("--lambda", gen_lambda, "arrival parameter (rate lambda F per slot)")
      ->check(CLI::PositiveNumber);
  gen->add_flag("--offline-deadlines", gen_offline_deadlines,
                "draw slack from [C(K-1,t), C(K,t+1)] instead of [KMF/N, KF]");
  gen->add_option("--out", gen_out, "output path (default stdout)");

  // offline
  auto* off = app.add_subcommand("offline", "solve the offline LP for an instance");
  std::string off_in, off_schedule, off_summary;
  bool off_dual = false;
  int off_iters = 2000;
  double off_alpha = 0.5;
  off->add_option("input", off_in, "instance JSON")->required()->check(CLI::ExistingFile);
  off->add_flag("--dual", off_dual, "use dual decomposition instead of the simplex");
  off->add_option("--iters", off_iters, "decomposition iteration limit")->check(CLI::PositiveNumber);
  off->add_option("--alpha", off_alpha, "step exponent")->check(CLI::Range(0.01, 0.99));
  off->add_option("--schedule", off_schedule, "write the interpreted schedule JSON here");
  off->add_option("--summary", off_summary, "write the per-interval CSV here");

  // online
  auto* on = app.add_subcommand("online", "run the online scheduler on an instance");
  std::string on_in, on_log, on_report;
  std::optional<double> on_eta0;
  double on_a = 0.4, on_b = 0.5, on_rate = 1.0;
  int on_field = 0;
  std::uint64_t on_seed = 1;
  bool on_resolve = false, on_uncoded = false, on_emergency = false;
  on->add_option("input", on_in, "instance JSON")->required()->check(CLI::ExistingFile);
  on->add_option("--eta0", on_eta0, "constant threshold (overrides --eta0-a/--eta0-b)");
  on->add_option("--eta0-a", on_a, "threshold a in a - b / rate");
  on->add_option("--eta0-b", on_b, "threshold b in a - b / rate");
  on->add_option("--rate", on_rate, "rate used by the a - b / rate schedule")->check(CLI::PositiveNumber);
  on->add_option("--field", on_field, "override the instance field order")
      ->check(CLI::IsMember({256, 65536}));
  on->add_option("--seed", on_seed, "coefficient and payload seed");
  on->add_flag("--resolve", on_resolve, "re-solve when the candidate list runs dry");
  on->add_flag("--uncoded", on_uncoded, "send one raw packet per member");
  on->add_flag("--emergency", on_emergency, "serve users whose slack equals their backlog");
  on->add_option("--log", on_log, "write the equation log JSON here");
  on->add_option("--report", on_report, "write the decode report CSV here");

  // sim
  auto* sim = app.add_subcommand("sim", "Monte-Carlo sweep over arrival rates");
  ShapeArgs sim_shape;
  sim_shape.add(sim);
  int sim_trials = 200, sim_threads = 1;
  std::vector<double> sim_lambdas, sim_gaps;
  std::string sim_out, sim_rate = "gap";
  bool sim_literal = false, sim_no_online = false, sim_offline_deadlines = false;
  sim->add_option("--trials", sim_trials, "trials per grid point")->check(CLI::PositiveNumber);
  sim->add_option("--lambdas", sim_lambdas, "lambda values")->delimiter(',');
  sim->add_option("--inv-f-lambdas", sim_gaps, "grid given as 1/(F lambda)")->delimiter(',');
  sim->add_option("--threads", sim_threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--eta0-rate", sim_rate, "gap, slot or lambda")
      ->check(CLI::IsMember({"gap", "slot", "lambda"}));
  sim->add_flag("--literal", sim_literal, "re-solve only on arrivals");
  sim->add_flag("--no-online", sim_no_online, "offline LP only");
  sim->add_flag("--offline-deadlines", sim_offline_deadlines,
                "draw slack from [C(K-1,t), C(K,t+1)] instead of [KMF/N, KF]");
  sim->add_option("--out", sim_out, "CSV path (default stdout)");

  // trace
  auto* tr = app.add_subcommand("trace", "dual decomposition convergence CSV");
  std::string tr_in, tr_out;
  int tr_iters = 2000;
  double tr_alpha = 0.5;
  tr->add_option("input", tr_in, "instance JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--iters", tr_iters, "iteration limit")->check(CLI::PositiveNumber);
  tr->add_option("--alpha", tr_alpha, "step exponent")->check(CLI::Range(0.01, 0.99));
  tr->add_option("--out", tr_out, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto c = gen_shape.config();
      c.offline_deadlines = gen_offline_deadlines;
      emit(gen_out, acc::io::instance_to_json(acc::sim::make_instance(c, gen_lambda, c.seed)));
      return 0;
    }

    if (*off) {
      const auto inst = acc::io::load_instance(off_in);
      const auto timeline = acc::build_timeline(inst);
      acc::offline::OfflineLpVars vars;
      bool feasible = false;
      if (off_dual) {
        acc::dual::Options o;
        o.max_iterations = off_iters;
        o.alpha = off_alpha;
        const auto res = acc::dual::solve_via_decomposition(timeline, inst, o);
        feasible = res.feasible;
        vars = res.vars;
        std::cout << "iterations " << res.iterations << "\nbest_dual " << res.best_dual << '\n';
      } else {
        const auto res = acc::offline::solve_offline(timeline, inst.config.r);
        feasible = res.feasible;
        vars = res.vars;
      }
      if (!feasible) {
        std::cout << "status infeasible\n";
        return 2;
      }
      std::cout << "status feasible\nobjective " << vars.objective << '\n';
      if (!off_schedule.empty() || !off_summary.empty()) {
        const auto schedule = acc::offline::interpret_schedule(vars, timeline, inst.config.r);
        if (!off_schedule.empty()) emit(off_schedule, acc::offline::schedule_to_json(schedule));
        if (!off_summary.empty()) {
          emit(off_summary, acc::offline::schedule_summary_csv(schedule, timeline, vars.objective));
        }
      }
      return 0;
    }

    if (*on) {
      auto inst = acc::io::load_instance(on_in);
      if (on_field) inst.config.field_order = on_field;
      acc::online::OnlineOptions o;
      o.eta0 = on_eta0 ? acc::online::Eta0Policy::constant(*on_eta0)
                       : acc::online::Eta0Policy::schedule(on_a, on_b, on_rate);
      o.seed = on_seed;
      o.resolve_when_exhausted = on_resolve;
      o.uncoded = on_uncoded;
      o.emergency = on_emergency;
      const auto res = acc::online::run_online(inst, o);
      if (res.satisfied()) {
        std::cout << "status satisfied\npackets " << res.packets_sent << "\ndecoded "
                  << (res.all_decoded() ? "all" : "partial") << '\n';
      } else {
        std::cout << "status infeasible\nuser " << res.failed_user << "\ntau " << res.failed_tau
                  << "\npackets " << res.packets_sent << '\n';
      }
      if (!on_log.empty()) emit(on_log, acc::online::equation_log_json(res.log));
      if (!on_report.empty()) emit(on_report, acc::online::decode_report_csv(res.decode));
      return res.satisfied() ? 0 : 2;
    }

    if (*sim) {
      auto c = sim_shape.config();
      c.trials = sim_trials;
      c.threads = sim_threads;
      c.eta0_rate = acc::sim::parse_eta0_rate(sim_rate);
      c.resolve_when_exhausted = !sim_literal;
      c.run_online = !sim_no_online;
      c.offline_deadlines = sim_offline_deadlines;
      int F = c.F;
      if (c.placement == acc::sim::PlacementKind::kCentralized) {
        F = acc::sim::placement_centralized(c.K, c.M, c.N).F;
      }
      std::vector<double> lambdas = sim_lambdas;
      for (double g : sim_gaps) lambdas.push_back(1.0 / (F * g));
      if (lambdas.empty()) {
        for (double g : {0.25, 0.5, 1.0, 2.0}) lambdas.push_back(1.0 / (F * g));
      }
      const auto results = acc::sim::run_trials(c, lambdas);
      emit(sim_out, acc::sim::results_csv(acc::sim::aggregate(c, lambdas, results)));
      return 0;
    }

    if (*tr) {
      const auto inst = acc::io::load_instance(tr_in);
      acc::dual::Options o;
      o.max_iterations = tr_iters;
      o.alpha = tr_alpha;
      const auto res = acc::dual::solve_via_decomposition(inst, o);
      emit(tr_out, acc::dual::trace_csv(res.trace));
      return res.feasible ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
