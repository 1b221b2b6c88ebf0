#pragma once

#include <span>
#include <vector>

#include "amkm/dataset.hpp"
#include "amkm/matrix.hpp"

namespace amkm {

enum class BandwidthPolicy { fixed, median_heuristic };

/// Gaussian bandwidth and how it was (or will be) chosen. Kernel operations
/// require a resolved config (sigma > 0).
struct KernelConfig {
    double sigma = 0.0;
    BandwidthPolicy policy = BandwidthPolicy::median_heuristic;

    static KernelConfig fixed(double sigma) { return {sigma, BandwidthPolicy::fixed}; }
    static KernelConfig median() { return {0.0, BandwidthPolicy::median_heuristic}; }
    bool resolved() const { return sigma > 0.0; }
};

/// Per-instance importance: strictly positive raw kernel sums plus the
/// normalized vector summing to 1.
struct ImportanceScores {
    std::vector<double> raw;
    std::vector<double> normalized;
    std::size_t size() const { return raw.size(); }
};

/// exp(-||x-y||^2 / (2 sigma^2)); 1 iff x = y.
double gaussian_kernel(std::span<const double> x, std::span<const double> y, double sigma);

/// |X| x |Y| matrix of gaussian_kernel values. Passing the same Dataset for
/// both operands yields an exactly symmetric matrix with unit diagonal.
Matrix kernel_matrix(const Dataset& X, const Dataset& Y, const KernelConfig& cfg);

/// Median of all n(n-1)/2 pairwise Euclidean distances (mean of the two
/// middle order statistics when the count is even). Errors when n < 2 or the
/// median distance is zero.
double median_heuristic(const Dataset& X);

/// Fill sigma from the policy: median_heuristic(X) when unresolved.
KernelConfig resolve_bandwidth(KernelConfig cfg, const Dataset& X);

/// raw_i = sum_j k(x_i, x_j) over the full reference set.
ImportanceScores self_importance(const Dataset& reference, const KernelConfig& cfg);

/// raw_i = sum_{j in subset} k(x_i, x_j) for every reference instance i.
/// Subset indices must be distinct and in range.
ImportanceScores subset_importance(const Dataset& reference, std::span<const std::size_t> subset,
                                   const KernelConfig& cfg);

/// Indices of the k largest normalized scores, descending; ties broken by
/// lower index first.
std::vector<std::size_t> top_k_important(const ImportanceScores& scores, std::size_t k);

/// Mean pairwise Gaussian affinity of width parameter 2 sigma^2, i.e.
/// (1/n^2) sum_ij exp(-||x_i-x_j||^2 / (4 sigma^2)); in (0, 1].
double information_potential(const Dataset& X, const KernelConfig& cfg);

/// -log(information_potential); >= 0.
double renyi_entropy(const Dataset& X, const KernelConfig& cfg);

}  // namespace amkm
