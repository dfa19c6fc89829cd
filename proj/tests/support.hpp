// Shared helpers for the unit and acceptance suites: independent reference
// computations (kept deliberately naive) and small numeric utilities.
#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "pad/nn/param.hpp"
#include "pad/oracle.hpp"
#include "pad/pool.hpp"

namespace padtest {

// Copy of `spec` with the total-blocks sampling range clamped to [M, cap] so
// sampled instances stay enumeration-sized.  No-op for problems without a
// block budget.
pad::ProblemSpec clamp_block_budget(pad::ProblemSpec spec, long long cap);

// Best feasible objective found by naive candidate enumeration.  P2/P3/P4
// walk every block vector with sum <= B_total, P8 every binary subset, P7
// every block vector with the library's inner power solve, P9 every offload
// pattern with the closed-form share rule.  NaN when nothing is feasible.
double enumerate_best(const pad::ProblemSpec& spec, const pad::ProblemInstance& inst);

// Rank-pool selection recomputed from scratch: per-pair cosine by direct dot
// products, stable sort on (V, original index), first m indices emitted in
// ascending order.
std::vector<int> rank_pool_reference(const pad::TokenMatrix& T, int m);

std::vector<unsigned char> file_bytes(const std::filesystem::path& path);

// Central-difference gradient check on `probes` randomly chosen weight
// entries.  `run(true)` must evaluate the loss and leave gradients in the
// store (fd_gradcheck zeroes them first); `run(false)` must only evaluate.
// Returns the worst |fd - analytic| / max(1e-8, |fd| + |analytic|).
double fd_gradcheck(pad::nn::ParamStore<double>& ps, const std::function<double(bool)>& run,
                    int probes, std::uint64_t seed, double eps = 1e-5);

}  // namespace padtest
