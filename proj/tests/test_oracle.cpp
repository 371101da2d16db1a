#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mdpkit/bellman.hpp"
#include "mdpkit/model.hpp"
#include "mdpkit/oracle.hpp"

using namespace mdpkit;

namespace {

double sup_diff(const CostVector& a, const CostVector& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// A chain of states with two actions each, just to overflow the policy cap.
MdpInstance wide_chain(int n) {
  MdpInstance m;
  m.n = n;
  m.discount = 0.9;
  m.states.resize(static_cast<size_t>(n));
  for (int x = 1; x <= n; ++x) {
    MdpState& st = m.states[static_cast<size_t>(x - 1)];
    st.id = x;
    for (int a = 0; a < 2; ++a) {
      MdpAction act;
      act.label = a == 0 ? "stay" : "step";
      act.successors = {a == 0 ? x : (x % n) + 1};
      act.probs = {1.0};
      act.costs = {static_cast<double>(a)};
      st.actions.push_back(act);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("policy counting multiplies action set sizes") {
  CHECK(count_policies(build_counterexample()) == 8);
  CHECK(count_policies(wide_chain(10)) == 1024);
  // 2^21 policies exceed the enumeration cap.
  CHECK(count_policies(wide_chain(21)) == 0);
}

TEST_CASE("enumeration on the counterexample finds exactly the two optima") {
  const MdpInstance m = build_counterexample();
  const OracleReport report = enumerate_optimal(m);

  CHECK(report.policies_enumerated == 8);
  REQUIRE(report.optimal_cost.size() == 3);
  for (double v : report.optimal_cost) CHECK(std::abs(v) <= 1e-9);

  // Two policies attain zero cost: both send state 1 to 3 and state 3 to 2;
  // state 2 may go either way. Ranks are ordered, so the to1 variant is first.
  REQUIRE(report.optimal_policies.size() == 2);
  CHECK(report.optimal_policies[0].choice == std::vector<int>{1, 0, 0});
  CHECK(report.optimal_policies[1].choice == std::vector<int>{1, 1, 0});

  bool contains_mustar = false;
  for (const StationaryPolicy& p : report.optimal_policies) {
    if (p == counterexample_mustar()) contains_mustar = true;
  }
  CHECK(contains_mustar);
}

TEST_CASE("enumeration rejects instances beyond the cap") {
  CHECK_THROWS_AS((void)enumerate_optimal(wide_chain(21)), std::invalid_argument);
}

TEST_CASE("enumeration agrees with value iteration on random instances") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const MdpInstance m = generate_random(5, 3, 2, 0.0, 1.0, 0.9, seed + 60);
    const OracleReport report = enumerate_optimal(m);
    const ValueIterationResult vi = value_iteration(m, CostVector(5, 0.0), 1e-10, 100000);
    REQUIRE(vi.converged);
    CHECK(sup_diff(report.optimal_cost, vi.cost) <= 1e-6);
    REQUIRE_FALSE(report.optimal_policies.empty());
    for (const StationaryPolicy& p : report.optimal_policies) {
      CHECK(sup_diff(evaluate_policy_exact(m, p), report.optimal_cost) <= 1e-6);
    }
  }
}

TEST_CASE("enumeration is deterministic despite parallel evaluation") {
  const MdpInstance m = generate_random(6, 3, 2, 0.0, 1.0, 0.9, 123);
  const OracleReport a = enumerate_optimal(m);
  const OracleReport b = enumerate_optimal(m);
  CHECK(a.optimal_cost == b.optimal_cost);
  REQUIRE(a.optimal_policies.size() == b.optimal_policies.size());
  for (size_t i = 0; i < a.optimal_policies.size(); ++i) {
    CHECK(a.optimal_policies[i] == b.optimal_policies[i]);
  }
}

TEST_CASE("comparison table covers every mode and lands in seed order") {
  const MdpInstance m = build_counterexample();
  OnlineConfig config;
  config.max_steps = 300;
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  const std::vector<ComparisonRow> rows = run_comparison(m, 1, counterexample_mubar(), seeds, config);

  REQUIRE(rows.size() == 10);
  for (size_t i = 0; i < 9; ++i) {
    CHECK(rows[i].seed == seeds[i / 3]);
    const char* expected = (i % 3 == 0) ? "plain" : (i % 3 == 1) ? "exploration" : "rollout";
    CHECK(rows[i].mode == expected);
  }
  CHECK(rows.back().mode == "pi");

  for (const ComparisonRow& row : rows) {
    if (row.mode == "plain" || row.mode == "rollout") {
      // Started inside the trap cycle these runs stay on it: locally optimal,
      // globally not, and the cost gap at state 3 is the full 100.
      CHECK(row.policy_changes == 0);
      CHECK(row.local_opt);
      CHECK_FALSE(row.global_opt);
      CHECK(row.max_j_gap_vs_oracle == doctest::Approx(100.0));
    } else {
      // Exploration and classical policy iteration both reach the optimum.
      CHECK(row.global_opt);
      CHECK(row.max_j_gap_vs_oracle <= 1e-8);
    }
  }
}

TEST_CASE("comparison csv has the fixed schema and reproduces byte for byte") {
  const MdpInstance m = build_counterexample();
  OnlineConfig config;
  config.max_steps = 200;
  const std::vector<std::uint64_t> seeds = {7, 9};
  const std::string a = comparison_csv(run_comparison(m, 1, counterexample_mubar(), seeds, config));
  const std::string b = comparison_csv(run_comparison(m, 1, counterexample_mubar(), seeds, config));
  CHECK(a == b);

  std::istringstream lines(a);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "seed,mode,steps,policy_changes,max_J_gap_vs_oracle,local_opt,global_opt");
  int count = 0;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++count;
    int commas = 0;
    for (char c : line) commas += c == ',';
    CHECK(commas == 6);
  }
  CHECK(count == 7);
}

TEST_CASE("comparison gap field is empty when the oracle is out of reach") {
  ComparisonRow row;
  row.seed = 4;
  row.mode = "plain";
  row.steps = 10;
  row.policy_changes = 1;
  row.max_j_gap_vs_oracle = std::nan("");
  const std::string csv = comparison_csv({row});
  CHECK(csv.find("4,plain,10,1,,false,false\n") != std::string::npos);
}
