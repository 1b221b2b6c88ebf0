#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "amkm/dataset.hpp"
#include "amkm/kernel.hpp"
#include "amkm/matchers.hpp"

namespace amkm {

/// Isotropic-Gaussian covariate shift with an analytic importance ratio.
/// Means/sigmas may be scalars (broadcast) or one value per dimension.
struct SyntheticShiftSpec {
    std::size_t d = 1;
    std::vector<double> matching_mean{0.0};
    std::vector<double> matching_sigma{1.0};
    std::vector<double> reference_mean{0.0};
    std::vector<double> reference_sigma{1.0};
    std::size_t n_m = 100;
    std::size_t n_r = 1000;
    std::uint64_t seed = 0;
};

struct ShiftSample {
    Dataset matching;
    Dataset reference;
    std::vector<double> true_w_on_matching;  // p_r(x)/p_m(x) at each matching row
};

/// One experiment record; the unit of CLI output.
struct ExperimentResult {
    std::string method;
    std::size_t n_m = 0;
    std::size_t n_r = 0;
    MatchParams params;  // echo
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double nmse = 0.0;
    double mmd2 = 0.0;
    double wallclock_ms = 0.0;
    std::string truth_mode;  // "analytic" | "full-kmm-oracle"
};

/// Sum-normalize both vectors, then mean squared difference. Scale-invariant:
/// nmse(c*t, t) = 0 for c > 0.
double nmse(std::span<const double> estimated, std::span<const double> truth);

/// Full three-term MMD^2 expansion, including the constant reference term:
/// (1/n_m^2) a'K_mm a - (2/(n_m n_r)) a'K_mr e + (1/n_r^2) e'K_rr e.
double mmd_squared(std::span<const double> weights, const Dataset& matching,
                   const Dataset& reference, const KernelConfig& cfg);

/// Draw the shifted sample and evaluate the analytic ratio at each matching
/// point. Bit-identical outputs for equal seeds.
ShiftSample generate_shift(const SyntheticShiftSpec& spec);

/// A fit wrapped for timing: wall-clock covers fit() only (kernel matrices
/// included, data loading and bandwidth resolution excluded).
struct ExperimentTask {
    std::string method;
    std::size_t n_m = 0;
    std::size_t n_r = 0;
    MatchParams params;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string truth_mode;
    /// Runs the matcher fit; returns the fitted coefficient vector.
    std::function<std::vector<double>()> fit;
    /// Post-fit metrics from those coefficients: (nmse, mmd2).
    std::function<std::pair<double, double>(const std::vector<double>&)> evaluate;
};

/// Execute the task, timing fit() on the monotonic clock.
ExperimentResult time_run(const ExperimentTask& task);

}  // namespace amkm
