#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdpkit/bellman.hpp"
#include "mdpkit/classical_pi.hpp"
#include "mdpkit/model.hpp"
#include "mdpkit/online_pi.hpp"
#include "mdpkit/oracle.hpp"
#include "mdpkit/runlog.hpp"
#include "mdpkit/version.hpp"

namespace {

using namespace mdpkit;

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string join_values(const CostVector& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += g9(v[i]);
  }
  return out;
}

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ' ';
    out += labels[i];
  }
  return out;
}

std::string join_states(const std::vector<int>& states) {
  std::string out;
  for (size_t i = 0; i < states.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(states[i]);
  }
  return out;
}

MdpInstance resolve_instance(const std::string& name) {
  if (name == "counterexample") return build_counterexample();
  return load_instance_file(name);
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, ',')) parts.push_back(part);
  return parts;
}

StationaryPolicy resolve_initial(const MdpInstance& instance, const std::string& spec) {
  if (spec == "first") return first_action_policy(instance);
  if (spec == "mubar") return policy_from_labels(instance, {"to2", "to1", "stay"});
  if (spec == "mustar") return policy_from_labels(instance, {"to3", "to3", "to2"});
  if (spec.find(',') != std::string::npos) {
    return policy_from_labels(instance, split_commas(spec));
  }
  throw std::invalid_argument(
      "unknown initial policy '" + spec +
      "' (expected first, mubar, mustar, or a comma-separated label list)");
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  const auto range_pos = spec.find("..");
  try {
    if (range_pos != std::string::npos) {
      const std::uint64_t lo = std::stoull(spec.substr(0, range_pos));
      const std::uint64_t hi = std::stoull(spec.substr(range_pos + 2));
      if (hi < lo) throw std::invalid_argument("seed range is empty");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      for (const std::string& part : split_commas(spec)) seeds.push_back(std::stoull(part));
    }
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("cannot parse seed list '" + spec +
                                "' (expected e.g. 1..20 or 3,5,8)");
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("seed out of range in '" + spec + "'");
  }
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  return seeds;
}

struct SolveArgs {
  std::string instance;
  std::string algorithm;
  std::string initial = "first";
  std::string mode = "plain";
  std::string rule = "argmin";
  int x0 = 1;
  double eps = 1e-9;
  int max_steps = 1000;
  int stable_window = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double tol = 1e-9;
  int max_iters = 0;  // 0 picks the per-algorithm default
  std::string log_path;
};

int cmd_solve(const SolveArgs& args) {
  const MdpInstance instance = resolve_instance(args.instance);
  std::cout << "instance: " << args.instance << " (digest " << instance_digest(instance)
            << ")\n";
  std::cout << "algorithm: " << args.algorithm << "\n";

  if (args.algorithm == "vi") {
    const int max_iters = args.max_iters > 0 ? args.max_iters : 10000;
    const CostVector j0(static_cast<size_t>(instance.n), 0.0);
    ViLogData data;
    data.j0 = j0;
    data.tol = args.tol;
    data.max_iters = max_iters;
    data.result = value_iteration(instance, j0, args.tol, max_iters);
    data.greedy = greedy_policy(instance, data.result.cost);
    const std::string path = args.log_path.empty() ? "vi_run.jsonl" : args.log_path;
    write_text_file(path, vi_log_to_jsonl(instance, data));
    std::cout << "iterations: " << data.result.iterations << "\n";
    std::cout << "final cost: " << join_values(data.result.cost) << "\n";
    std::cout << "greedy policy: " << join_labels(policy_labels(instance, data.greedy)) << "\n";
    std::cout << "run log: " << path << "\n";
    if (!data.result.converged) {
      std::cerr << "value iteration did not reach tol " << g9(args.tol) << " in " << max_iters
                << " iterations\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  }

  if (args.algorithm == "pi") {
    const int max_iters = args.max_iters > 0 ? args.max_iters : 1000;
    const StationaryPolicy initial = resolve_initial(instance, args.initial);
    const PiTrace trace = run_classical_pi(instance, initial, max_iters);
    const std::string path = args.log_path.empty() ? "pi_run.jsonl" : args.log_path;
    write_text_file(path, pi_log_to_jsonl(instance, trace, max_iters));
    std::cout << "iterations: " << trace.iterations << "\n";
    std::cout << "final policy: "
              << join_labels(policy_labels(instance, trace.iterates.back().policy)) << "\n";
    std::cout << "final cost: " << join_values(trace.iterates.back().cost) << "\n";
    std::cout << "run log: " << path << "\n";
    if (!trace.converged) {
      std::cerr << "policy iteration did not stabilize in " << max_iters << " steps\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  }

  if (args.algorithm == "online" || args.algorithm == "rollout") {
    if (!args.seed_given) {
      std::cerr << "--seed is required for --algorithm " << args.algorithm << "\n";
      return kExitUsage;
    }
    OnlineConfig config;
    if (args.algorithm == "rollout") {
      config.mode = OnlineMode::rollout;
    } else {
      const auto mode = parse_online_mode(args.mode);
      if (!mode || *mode == OnlineMode::rollout) {
        std::cerr << "--mode must be plain or exploration (use --algorithm rollout for rollout)\n";
        return kExitUsage;
      }
      config.mode = *mode;
    }
    const auto rule = parse_improvement_rule(args.rule);
    if (!rule) {
      std::cerr << "--rule must be argmin or first-improving\n";
      return kExitUsage;
    }
    config.improvement_rule = *rule;
    config.epsilon_improve = args.eps;
    config.max_steps = args.max_steps;
    config.stable_window = args.stable_window;
    config.seed = args.seed;

    const StationaryPolicy initial = resolve_initial(instance, args.initial);
    const OnlineRunLog log = run_online_pi(instance, args.x0, initial, config);
    const std::string default_name = args.algorithm + std::string("_run.jsonl");
    const std::string path = args.log_path.empty() ? default_name : args.log_path;
    write_text_file(path, online_log_to_jsonl(instance, log));

    std::cout << "mode: " << to_string(log.config.mode) << "\n";
    std::cout << "steps: " << log.steps.size() << "\n";
    std::cout << "policy changes: " << log.policy_changes << "\n";
    std::cout << "reason: " << to_string(log.reason) << "\n";
    std::cout << "recurrent set estimate: " << join_states(log.recurrent_set) << "\n";
    std::cout << "final policy: " << join_labels(policy_labels(instance, log.final_policy))
              << "\n";
    std::cout << "final cost: " << join_values(log.final_cost) << "\n";
    std::cout << "run log: " << path << "\n";
    if (log.reason == StopReason::max_steps) {
      std::cerr << "policy did not stabilize within " << log.config.max_steps << " steps\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  }

  std::cerr << "unknown algorithm '" << args.algorithm << "' (expected vi, pi, online, rollout)\n";
  return kExitUsage;
}

void print_findings(const VerificationReport& report) {
  for (const Finding& f : report.findings) {
    if (f.ok) {
      std::cout << "[ok]   " << f.check << "\n";
    } else {
      std::cout << "[FAIL] " << f.check << ": " << f.detail << "\n";
    }
  }
}

int cmd_verify(const std::string& instance_name, const std::string& log_path, bool replay) {
  const MdpInstance instance = resolve_instance(instance_name);
  const std::string text = read_text_file(log_path);
  const LogHeaderInfo header = peek_log_header(text);
  if (header.digest != instance_digest(instance)) {
    std::cerr << "instance digest mismatch: log was recorded against " << header.digest
              << ", this instance hashes to " << instance_digest(instance) << "\n";
    return kExitUsage;
  }

  VerificationReport report;
  if (header.algorithm == "online") {
    const OnlineRunLog log = online_log_from_jsonl(instance, text);
    report = verify_run(instance, log);
    if (replay) {
      const OnlineRunLog rerun = run_online_pi(instance, log.x0, log.initial_policy, log.config);
      const std::string regenerated = online_log_to_jsonl(instance, rerun);
      const bool same = regenerated == text;
      report.findings.push_back(
          {same, "replay", same ? "" : "re-running the header config produced a different log"});
    }
  } else if (header.algorithm == "pi") {
    const PiLogData data = pi_log_from_jsonl(instance, text);
    bool monotone = true;
    std::string monotone_detail;
    for (size_t k = 0; k + 1 < data.trace.iterates.size() && monotone; ++k) {
      const CostVector& before = data.trace.iterates[k].cost;
      const CostVector& after = data.trace.iterates[k + 1].cost;
      for (size_t i = 0; i < before.size(); ++i) {
        if (after[i] > before[i] + 1e-8) {
          monotone = false;
          monotone_detail = "cost rose at iterate " + std::to_string(k + 1) + ", state " +
                            std::to_string(i + 1);
          break;
        }
      }
    }
    report.findings.push_back({monotone, "cost-monotonicity", monotone_detail});

    bool costs_match = true;
    std::string costs_detail;
    for (size_t k = 0; k < data.trace.iterates.size(); ++k) {
      const CostVector recomputed = evaluate_policy_exact(instance, data.trace.iterates[k].policy);
      double scale = 0.0;
      for (double v : recomputed) scale = std::max(scale, std::abs(v));
      for (size_t i = 0; i < recomputed.size(); ++i) {
        if (std::abs(recomputed[i] - data.trace.iterates[k].cost[i]) > 1e-8 * (1.0 + scale)) {
          costs_match = false;
          costs_detail = "iterate " + std::to_string(k) + " cost does not match its policy";
          break;
        }
      }
      if (!costs_match) break;
    }
    report.findings.push_back({costs_match, "evaluation-consistency", costs_detail});

    if (data.trace.converged) {
      const bool optimal = check_global_optimality(instance, data.trace.iterates.back().policy);
      report.findings.push_back(
          {optimal, "global-optimality", optimal ? "" : "converged policy is improvable"});
    }
  } else if (header.algorithm == "vi") {
    const ViLogData data = vi_log_from_jsonl(instance, text);
    if (data.result.converged) {
      const CostVector image = apply_t(instance, data.result.cost);
      double residual = 0.0;
      for (size_t i = 0; i < image.size(); ++i) {
        residual = std::max(residual, std::abs(image[i] - data.result.cost[i]));
      }
      const bool ok = residual <= data.tol;
      report.findings.push_back(
          {ok, "fixed-point-residual",
           ok ? "" : "residual " + g9(residual) + " exceeds tol " + g9(data.tol)});
    }
    bool contracting = true;
    std::string contraction_detail;
    for (size_t k = 0; k + 1 < data.result.step_sup_norms.size(); ++k) {
      if (data.result.step_sup_norms[k + 1] >
          instance.discount * data.result.step_sup_norms[k] + 1e-9) {
        contracting = false;
        contraction_detail = "step norm grew at iteration " + std::to_string(k + 2);
        break;
      }
    }
    report.findings.push_back({contracting, "contraction", contraction_detail});

    const StationaryPolicy greedy = greedy_policy(instance, data.result.cost);
    const bool greedy_ok = greedy == data.greedy;
    report.findings.push_back(
        {greedy_ok, "greedy-policy", greedy_ok ? "" : "logged greedy policy is not greedy"});
  } else {
    std::cerr << "unknown algorithm '" << header.algorithm << "' in run log header\n";
    return kExitUsage;
  }

  print_findings(report);
  if (report.all_ok()) {
    std::cout << "all checks passed\n";
    return kExitOk;
  }
  return kExitFindings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite discounted MDP toolkit: value iteration, policy iteration, "
               "trajectory-driven on-line policy iteration, rollout, and brute-force oracles"};
  app.set_version_flag("--version", std::string("mdpkit ") + mdpkit::kToolVersion);
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "run an algorithm on an instance");
  solve->add_option("--instance", solve_args.instance,
                    "instance file, or the built-in name 'counterexample'")
      ->required();
  solve->add_option("--algorithm", solve_args.algorithm, "vi | pi | online | rollout")
      ->required();
  solve->add_option("--initial", solve_args.initial,
                    "initial policy: first | mubar | mustar | comma-separated labels");
  solve->add_option("--x0", solve_args.x0, "start state for online/rollout (default 1)");
  solve->add_option("--mode", solve_args.mode, "online mode: plain | exploration");
  solve->add_option("--rule", solve_args.rule, "improvement rule: argmin | first-improving");
  solve->add_option("--eps", solve_args.eps, "improvement margin (default 1e-9)");
  solve->add_option("--max-steps", solve_args.max_steps, "step budget for online/rollout");
  solve->add_option("--stable-window", solve_args.stable_window,
                    "unchanged steps required for a stable stop (0 = 10*n)");
  auto* seed_opt = solve->add_option("--seed", solve_args.seed,
                                     "trajectory seed (required for online/rollout)");
  solve->add_option("--tol", solve_args.tol, "convergence tolerance for vi (default 1e-9)");
  solve->add_option("--max-iters", solve_args.max_iters,
                    "iteration budget for vi/pi (defaults 10000/1000)");
  solve->add_option("--log", solve_args.log_path, "run log path (default <algorithm>_run.jsonl)");

  std::string verify_instance;
  std::string verify_log;
  bool verify_replay = false;
  auto* verify = app.add_subcommand("verify", "audit a run log against its instance");
  verify->add_option("--instance", verify_instance, "instance file or 'counterexample'")
      ->required();
  verify->add_option("--log", verify_log, "run log to audit")->required();
  verify->add_flag("--replay", verify_replay,
                   "also re-run the logged config and require an identical log");

  int gen_n = 0;
  int gen_max_actions = 0;
  int gen_branching = 0;
  double gen_cost_min = 0.0;
  double gen_cost_max = 1.0;
  double gen_discount = 0.9;
  std::uint64_t gen_seed = 0;
  std::string gen_output;
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  gen->add_option("--n", gen_n, "number of states")->required();
  gen->add_option("--max-actions", gen_max_actions, "actions per state are drawn from 1..this")
      ->required();
  gen->add_option("--branching", gen_branching, "distinct successors per action")->required();
  gen->add_option("--cost-min", gen_cost_min, "lower cost bound (default 0)");
  gen->add_option("--cost-max", gen_cost_max, "upper cost bound (default 1)");
  gen->add_option("--discount", gen_discount, "discount factor (default 0.9)");
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--output", gen_output, "output file (default stdout)");

  std::string cmp_instance;
  std::string cmp_initial = "first";
  std::string cmp_seeds;
  std::string cmp_csv;
  int cmp_x0 = 1;
  double cmp_eps = 1e-9;
  int cmp_max_steps = 1000;
  int cmp_stable_window = 0;
  std::string cmp_rule = "argmin";
  auto* compare = app.add_subcommand(
      "compare", "sweep plain/exploration/rollout runs plus classical PI into a CSV table");
  compare->add_option("--instance", cmp_instance, "instance file or 'counterexample'")
      ->required();
  compare->add_option("--seeds", cmp_seeds, "seed list, e.g. 1..20 or 3,5,8")->required();
  compare->add_option("--initial", cmp_initial, "initial policy (default first)");
  compare->add_option("--x0", cmp_x0, "start state (default 1)");
  compare->add_option("--eps", cmp_eps, "improvement margin (default 1e-9)");
  compare->add_option("--max-steps", cmp_max_steps, "step budget per run (default 1000)");
  compare->add_option("--stable-window", cmp_stable_window, "stability window (0 = 10*n)");
  compare->add_option("--rule", cmp_rule, "improvement rule (default argmin)");
  compare->add_option("--csv", cmp_csv, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) {
      solve_args.seed_given = seed_opt->count() > 0;
      return cmd_solve(solve_args);
    }
    if (verify->parsed()) {
      return cmd_verify(verify_instance, verify_log, verify_replay);
    }
    if (gen->parsed()) {
      const MdpInstance instance = generate_random(gen_n, gen_max_actions, gen_branching,
                                                   gen_cost_min, gen_cost_max, gen_discount,
                                                   gen_seed);
      const std::string text = save_instance(instance);
      if (gen_output.empty()) {
        std::cout << text;
      } else {
        write_text_file(gen_output, text);
        std::cout << "wrote " << gen_output << " (digest " << instance_digest(instance) << ")\n";
      }
      return kExitOk;
    }
    if (compare->parsed()) {
      const MdpInstance instance = resolve_instance(cmp_instance);
      const StationaryPolicy initial = resolve_initial(instance, cmp_initial);
      const std::vector<std::uint64_t> seeds = parse_seeds(cmp_seeds);
      const auto rule = parse_improvement_rule(cmp_rule);
      if (!rule) {
        std::cerr << "--rule must be argmin or first-improving\n";
        return kExitUsage;
      }
      OnlineConfig config;
      config.improvement_rule = *rule;
      config.epsilon_improve = cmp_eps;
      config.max_steps = cmp_max_steps;
      config.stable_window = cmp_stable_window;
      const auto rows = run_comparison(instance, cmp_x0, initial, seeds, config);
      const std::string csv = comparison_csv(rows);
      if (cmp_csv.empty()) {
        std::cout << csv;
      } else {
        write_text_file(cmp_csv, csv);
        std::cout << "wrote " << cmp_csv << " (" << rows.size() << " rows)\n";
      }
      return kExitOk;
    }
  } catch (const mdpkit::ValidationError& e) {
    std::cerr << e.what();
    return kExitUsage;
  } catch (const mdpkit::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
