#include "mdpkit/linsolve.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mdpkit {

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
    if (best == 0.0) throw std::runtime_error("solve_dense: singular matrix");
    if (pivot != k) {
      for (int j = 0; j < n; ++j) {
        std::swap(A[static_cast<size_t>(k) * n + j], A[static_cast<size_t>(pivot) * n + j]);
      }
      std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(pivot)]);
    }
    const double pivot_value = A[static_cast<size_t>(k) * n + k];
#pragma omp parallel for schedule(static) if (n - k > 64)
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

}  // namespace mdpkit
