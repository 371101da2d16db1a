#include "mdpkit/reference.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mdpkit::reference {

namespace {

double action_value(const MdpAction& act, double discount, const CostVector& J) {
  double q = 0.0;
  for (size_t i = 0; i < act.successors.size(); ++i) {
    q += act.probs[i] * (act.costs[i] + discount * J[static_cast<size_t>(act.successors[i] - 1)]);
  }
  return q;
}

}  // namespace

CostVector apply_tmu(const MdpInstance& instance, const StationaryPolicy& policy,
                     const CostVector& J) {
  CostVector out(static_cast<size_t>(instance.n));
  for (int x = 1; x <= instance.n; ++x) {
    const MdpAction& act = instance.action(x, policy.choice[static_cast<size_t>(x - 1)]);
    out[static_cast<size_t>(x - 1)] = action_value(act, instance.discount, J);
  }
  return out;
}

CostVector apply_t(const MdpInstance& instance, const CostVector& J) {
  CostVector out(static_cast<size_t>(instance.n));
  for (int x = 1; x <= instance.n; ++x) {
    const auto& actions = instance.state(x).actions;
    double best = action_value(actions[0], instance.discount, J);
    for (size_t a = 1; a < actions.size(); ++a) {
      const double q = action_value(actions[a], instance.discount, J);
      if (q < best) best = q;
    }
    out[static_cast<size_t>(x - 1)] = best;
  }
  return out;
}

void solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    double best = std::abs(A[static_cast<size_t>(k) * n + k]);
    for (int i = k + 1; i < n; ++i) {
      const double mag = std::abs(A[static_cast<size_t>(i) * n + k]);
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    if (best == 0.0) throw std::runtime_error("reference::solve_dense: singular matrix");
    if (pivot != k) {
      for (int j = 0; j < n; ++j) {
        std::swap(A[static_cast<size_t>(k) * n + j], A[static_cast<size_t>(pivot) * n + j]);
      }
      std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(pivot)]);
    }
    const double pivot_value = A[static_cast<size_t>(k) * n + k];
    for (int i = k + 1; i < n; ++i) {
      double* row = &A[static_cast<size_t>(i) * n];
      const double* pivot_row = &A[static_cast<size_t>(k) * n];
      const double factor = row[k] / pivot_value;
      if (factor != 0.0) {
        for (int j = k + 1; j < n; ++j) row[j] -= factor * pivot_row[j];
        b[static_cast<size_t>(i)] -= factor * b[static_cast<size_t>(k)];
      }
      row[k] = 0.0;
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double sum = b[static_cast<size_t>(i)];
    const double* row = &A[static_cast<size_t>(i) * n];
    for (int j = i + 1; j < n; ++j) sum -= row[j] * b[static_cast<size_t>(j)];
    b[static_cast<size_t>(i)] = sum / row[i];
  }
}

}  // namespace mdpkit::reference
