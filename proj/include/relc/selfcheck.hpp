// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
// Built-in sanity suite behind the `selftest` CLI verb: brute-force oracle
// comparisons for the discrete kernels and central finite-difference checks
// for the differentiable blocks.
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "relc/tensor.hpp"

namespace relc {

/// Central finite-difference check. `build` re-runs the forward on the given
/// leaf values (bound in order) and returns a scalar; the result is the max
/// over leaf elements of |analytic - fd| / (|fd| + 1e-8).
double fd_max_rel_error(
    const std::function<Tensor(Tape&, const std::vector<Tensor>&)>& build,
    const std::vector<std::pair<Shape, std::vector<double>>>& leaves, double eps = 1e-5);

/// Runs the oracle + gradient suites, printing one [PASS]/[FAIL] line per
/// group. Returns true when everything passed.
bool run_selftest();

}  // namespace relc
