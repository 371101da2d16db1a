#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdpkit/model.hpp"
#include "mdpkit/online_pi.hpp"

namespace mdpkit {

/// Enumeration cap: instances whose policy count exceeds this are rejected
/// rather than silently ground through.
inline constexpr std::uint64_t kMaxEnumerablePolicies = 1000000;

struct OracleReport {
  CostVector optimal_cost;                        // componentwise min over all policies
  std::vector<StationaryPolicy> optimal_policies; // every policy within tol of it, sup-norm
  std::uint64_t policies_enumerated = 0;
};

/// Brute-force ground truth: evaluates every stationary policy by linear
/// solve and takes the componentwise minimum, which a single policy attains.
/// Policies are ranked mixed-radix with state 1 as the least significant
/// digit; evaluation is spread over OpenMP threads, and the min-reduction is
/// order-independent, so the report is deterministic. Throws
/// std::invalid_argument when the policy count exceeds the cap.
OracleReport enumerate_optimal(const MdpInstance& instance, double tol = 1e-7);

/// Number of stationary policies, or 0 when the product overflows the cap.
std::uint64_t count_policies(const MdpInstance& instance);

struct ComparisonRow {
  std::uint64_t seed = 0;
  std::string mode;  // plain | exploration | rollout | pi
  int steps = 0;
  int policy_changes = 0;
  double max_j_gap_vs_oracle = 0.0;  // NaN when the oracle is out of reach
  bool local_opt = false;            // over the run's recurrent-set estimate; for pi, global
  bool global_opt = false;
};

/// One plain, one exploration and one rollout run per seed, plus a single
/// classical-PI row, all measured against the enumeration oracle when the
/// instance is small enough. Runs execute in parallel; rows come back in
/// seed order with the PI row last.
std::vector<ComparisonRow> run_comparison(const MdpInstance& instance, int x0,
                                          const StationaryPolicy& mu0,
                                          const std::vector<std::uint64_t>& seeds,
                                          const OnlineConfig& config_template);

/// Fixed-schema CSV: header
/// seed,mode,steps,policy_changes,max_J_gap_vs_oracle,local_opt,global_opt
/// with gaps printed to 9 significant digits and an empty gap field when no
/// oracle was available. Same rows in, same bytes out.
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace mdpkit
