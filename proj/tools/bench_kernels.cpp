#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "mdpkit/bellman.hpp"
#include "mdpkit/linsolve.hpp"
#include "mdpkit/model.hpp"
#include "mdpkit/reference.hpp"

// Times the OpenMP production kernels against their serial references on one
// generated instance and checks that the outputs match bitwise.

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void report(const char* kernel, int n, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-12s n=%-6d serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx   max|diff| %g\n",
              kernel, n, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  int n = 1024;
  int max_actions = 8;
  int branching = 32;
  int reps = 5;
  std::uint64_t seed = 42;

  CLI::App app{"benchmark: serial reference kernels vs the OpenMP production kernels"};
  app.add_option("--n", n, "number of states (default 1024)");
  app.add_option("--actions", max_actions, "max actions per state (default 8)");
  app.add_option("--branching", branching, "successors per action (default 32)");
  app.add_option("--reps", reps, "repetitions, best time wins (default 5)");
  app.add_option("--seed", seed, "instance seed (default 42)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  branching = std::min(branching, n);

  const mdpkit::MdpInstance instance =
      mdpkit::generate_random(n, max_actions, branching, 0.0, 1.0, 0.9, seed);
  std::printf("instance: n=%d, max_actions=%d, branching=%d, threads=%d\n", n, max_actions,
              branching, omp_get_max_threads());

  mdpkit::CostVector J(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) J[static_cast<size_t>(i)] = std::sin(0.1 * i) * 10.0;

  {
    mdpkit::CostVector serial_out, parallel_out;
    double serial_ms = 1e300;
    double parallel_ms = 1e300;
    for (int r = 0; r < reps; ++r) {
      auto t0 = Clock::now();
      serial_out = mdpkit::reference::apply_t(instance, J);
      serial_ms = std::min(serial_ms, ms_since(t0));
      t0 = Clock::now();
      parallel_out = mdpkit::apply_t(instance, J);
      parallel_ms = std::min(parallel_ms, ms_since(t0));
    }
    report("apply_t", n, serial_ms, parallel_ms, max_abs_diff(serial_out, parallel_out));
  }

  {
    const mdpkit::StationaryPolicy policy = mdpkit::first_action_policy(instance);
    // Assemble the policy's linear system once, then time both solvers on
    // fresh copies.
    std::vector<double> A(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> b(static_cast<size_t>(n), 0.0);
    for (int x = 1; x <= n; ++x) {
      const mdpkit::MdpAction& act = instance.action(x, 0);
      double* row = &A[static_cast<size_t>(x - 1) * n];
      row[x - 1] = 1.0;
      double expected_cost = 0.0;
      for (size_t i = 0; i < act.successors.size(); ++i) {
        row[act.successors[i] - 1] -= instance.discount * act.probs[i];
        expected_cost += act.probs[i] * act.costs[i];
      }
      b[static_cast<size_t>(x - 1)] = expected_cost;
    }

    std::vector<double> serial_x, parallel_x;
    double serial_ms = 1e300;
    double parallel_ms = 1e300;
    for (int r = 0; r < reps; ++r) {
      auto A1 = A;
      auto b1 = b;
      auto t0 = Clock::now();
      mdpkit::reference::solve_dense(A1, b1, n);
      serial_ms = std::min(serial_ms, ms_since(t0));
      serial_x = b1;

      auto A2 = A;
      auto b2 = b;
      t0 = Clock::now();
      mdpkit::solve_dense(A2, b2, n);
      parallel_ms = std::min(parallel_ms, ms_since(t0));
      parallel_x = b2;
    }
    report("solve_dense", n, serial_ms, parallel_ms, max_abs_diff(serial_x, parallel_x));
  }

  return 0;
}
