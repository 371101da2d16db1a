#pragma once

#include <vector>

namespace mdpkit {

/// Solves the dense system A x = b by Gaussian elimination with partial
/// pivoting, overwriting A and returning x in b. A is row-major n x n.
/// Row updates run under OpenMP once n is large enough to pay for it; the
/// per-row arithmetic is identical either way, so results are bitwise equal
/// to the serial reference. Throws std::runtime_error on a vanishing pivot.
void solve_dense(std::vector<double>& A, std::vector<double>& b, int n);

}  // namespace mdpkit
