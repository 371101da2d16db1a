#include "mdpkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mdpkit/bellman.hpp"
#include "mdpkit/classical_pi.hpp"

namespace mdpkit {

namespace {

StationaryPolicy decode_policy(const MdpInstance& instance, std::uint64_t rank) {
  StationaryPolicy policy;
  policy.choice.resize(static_cast<size_t>(instance.n));
  for (int x = 1; x <= instance.n; ++x) {
    const auto radix = static_cast<std::uint64_t>(instance.num_actions(x));
    policy.choice[static_cast<size_t>(x - 1)] = static_cast<int>(rank % radix);
    rank /= radix;
  }
  return policy;
}

double sup_diff(const CostVector& a, const CostVector& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::uint64_t count_policies(const MdpInstance& instance) {
  std::uint64_t total = 1;
  for (int x = 1; x <= instance.n; ++x) {
    const auto radix = static_cast<std::uint64_t>(instance.num_actions(x));
    if (total > kMaxEnumerablePolicies / radix + 1) return 0;
    total *= radix;
    if (total > kMaxEnumerablePolicies) return 0;
  }
  return total;
}

OracleReport enumerate_optimal(const MdpInstance& instance, double tol) {
  const std::uint64_t total = count_policies(instance);
  if (total == 0) {
    throw std::invalid_argument("enumerate_optimal: policy count exceeds " +
                                std::to_string(kMaxEnumerablePolicies));
  }

  OracleReport report;
  report.policies_enumerated = total;
  report.optimal_cost.assign(static_cast<size_t>(instance.n),
                             std::numeric_limits<double>::infinity());

  const auto count = static_cast<long long>(total);
#pragma omp parallel
  {
    CostVector local_min(static_cast<size_t>(instance.n),
                         std::numeric_limits<double>::infinity());
#pragma omp for schedule(static)
    for (long long rank = 0; rank < count; ++rank) {
      const StationaryPolicy policy = decode_policy(instance, static_cast<std::uint64_t>(rank));
      const CostVector cost = evaluate_policy_exact(instance, policy);
      for (size_t i = 0; i < cost.size(); ++i) local_min[i] = std::min(local_min[i], cost[i]);
    }
#pragma omp critical
    {
      for (size_t i = 0; i < local_min.size(); ++i) {
        report.optimal_cost[i] = std::min(report.optimal_cost[i], local_min[i]);
      }
    }
  }

  const CostVector bellman_image = apply_t(instance, report.optimal_cost);
  if (sup_diff(report.optimal_cost, bellman_image) > 10.0 * tol) {
    throw std::logic_error("enumerate_optimal: componentwise minimum is not a Bellman fixed point");
  }

  std::vector<std::uint64_t> optimal_ranks;
#pragma omp parallel
  {
    std::vector<std::uint64_t> local_ranks;
#pragma omp for schedule(static)
    for (long long rank = 0; rank < count; ++rank) {
      const StationaryPolicy policy = decode_policy(instance, static_cast<std::uint64_t>(rank));
      const CostVector cost = evaluate_policy_exact(instance, policy);
      if (sup_diff(cost, report.optimal_cost) <= tol) {
        local_ranks.push_back(static_cast<std::uint64_t>(rank));
      }
    }
#pragma omp critical
    optimal_ranks.insert(optimal_ranks.end(), local_ranks.begin(), local_ranks.end());
  }
  std::sort(optimal_ranks.begin(), optimal_ranks.end());
  for (std::uint64_t rank : optimal_ranks) {
    report.optimal_policies.push_back(decode_policy(instance, rank));
  }
  return report;
}

std::vector<ComparisonRow> run_comparison(const MdpInstance& instance, int x0,
                                          const StationaryPolicy& mu0,
                                          const std::vector<std::uint64_t>& seeds,
                                          const OnlineConfig& config_template) {
  const bool have_oracle = count_policies(instance) != 0;
  CostVector optimal_cost;
  if (have_oracle) optimal_cost = enumerate_optimal(instance).optimal_cost;

  const OnlineMode modes[3] = {OnlineMode::plain, OnlineMode::exploration, OnlineMode::rollout};
  std::vector<ComparisonRow> rows(seeds.size() * 3 + 1);

  const auto jobs = static_cast<long long>(seeds.size() * 3);
#pragma omp parallel for schedule(dynamic)
  for (long long job = 0; job < jobs; ++job) {
    const size_t seed_index = static_cast<size_t>(job) / 3;
    OnlineConfig cfg = config_template;
    cfg.mode = modes[job % 3];
    cfg.seed = seeds[seed_index];
    const OnlineRunLog log = run_online_pi(instance, x0, mu0, cfg);

    ComparisonRow row;
    row.seed = seeds[seed_index];
    row.mode = to_string(cfg.mode);
    row.steps = static_cast<int>(log.steps.size());
    row.policy_changes = log.policy_changes;
    row.max_j_gap_vs_oracle =
        have_oracle ? sup_diff(log.final_cost, optimal_cost)
                    : std::numeric_limits<double>::quiet_NaN();
    row.local_opt = check_local_optimality(instance, log.final_policy, log.recurrent_set);
    row.global_opt = check_global_optimality(instance, log.final_policy);
    rows[static_cast<size_t>(job)] = std::move(row);
  }

  const PiTrace trace = run_classical_pi(instance, mu0, 1000);
  ComparisonRow pi_row;
  pi_row.seed = 0;
  pi_row.mode = "pi";
  pi_row.steps = trace.iterations;
  pi_row.policy_changes = static_cast<int>(trace.iterates.size()) - 1;
  const CostVector& final_cost = trace.iterates.back().cost;
  pi_row.max_j_gap_vs_oracle = have_oracle ? sup_diff(final_cost, optimal_cost)
                                           : std::numeric_limits<double>::quiet_NaN();
  pi_row.global_opt = check_global_optimality(instance, trace.iterates.back().policy);
  pi_row.local_opt = pi_row.global_opt;
  rows.back() = std::move(pi_row);
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "seed,mode,steps,policy_changes,max_J_gap_vs_oracle,local_opt,global_opt\n";
  for (const ComparisonRow& row : rows) {
    out << row.seed << ',' << row.mode << ',' << row.steps << ',' << row.policy_changes << ',';
    if (!std::isnan(row.max_j_gap_vs_oracle)) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.9g", row.max_j_gap_vs_oracle);
      out << buf;
    }
    out << ',' << (row.local_opt ? "true" : "false") << ','
        << (row.global_opt ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace mdpkit
