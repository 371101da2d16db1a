#pragma once

#include <vector>

#include "mdpkit/model.hpp"

namespace mdpkit::reference {

// Plain serial implementations of the hot kernels. Tests pin the OpenMP
// production paths against these bitwise; the benchmark tool times the two
// side by side.

CostVector apply_tmu(const MdpInstance& instance, const StationaryPolicy& policy,
                     const CostVector& J);

CostVector apply_t(const MdpInstance& instance, const CostVector& J);

void solve_dense(std::vector<double>& A, std::vector<double>& b, int n);

}  // namespace mdpkit::reference
