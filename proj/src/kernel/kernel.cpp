#include "amkm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "amkm/simd/ops.hpp"

namespace amkm {
namespace {

void require_resolved(const KernelConfig& cfg) {
    if (!cfg.resolved()) {
        throw std::invalid_argument("kernel: bandwidth not resolved (sigma must be > 0)");
    }
}

void require_same_dim(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("kernel: dimensionality mismatch (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

double gaussian_kernel(std::span<const double> x, std::span<const double> y, double sigma) {
    if (sigma <= 0.0) {
        throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    }
    require_same_dim(x.size(), y.size());
    double d2 = simd::active().squared_distance(x.data(), y.data(), x.size());
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

Matrix kernel_matrix(const Dataset& X, const Dataset& Y, const KernelConfig& cfg) {
    require_resolved(cfg);
    require_same_dim(X.d(), Y.d());
    const auto& ops = simd::active();
    const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const std::size_t nx = X.n();
    const std::size_t ny = Y.n();
    Matrix K(nx, ny);
    std::vector<double> d2(ny);

    if (&X == &Y) {
        // Same object: fill the strict upper triangle and mirror. Values are
        // symmetric anyway; this halves the work and pins the unit diagonal.
        for (std::size_t i = 0; i < nx; ++i) {
            K(i, i) = 1.0;
            std::size_t count = ny - i - 1;
            if (count == 0) continue;
            const double* rows = Y.instances.data() + (i + 1) * Y.d();
            ops.squared_distance_row(X.instances.row(i).data(), rows, count, X.d(), d2.data());
            ops.exp_scale(d2.data(), scale, K.row(i).data() + i + 1, count);
            for (std::size_t j = i + 1; j < ny; ++j) K(j, i) = K(i, j);
        }
        return K;
    }

    for (std::size_t i = 0; i < nx; ++i) {
        ops.squared_distance_row(X.instances.row(i).data(), Y.instances.data(), ny, X.d(),
                                 d2.data());
        ops.exp_scale(d2.data(), scale, K.row(i).data(), ny);
    }
    return K;
}

double median_heuristic(const Dataset& X) {
    const std::size_t n = X.n();
    if (n < 2) {
        throw std::invalid_argument("median_heuristic: needs at least 2 instances");
    }
    const auto& ops = simd::active();
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t count = n - i - 1;
        const double* rows = X.instances.data() + (i + 1) * X.d();
        ops.squared_distance_row(X.instances.row(i).data(), rows, count, X.d(), d2.data());
        for (std::size_t j = 0; j < count; ++j) dist.push_back(std::sqrt(d2[j]));
    }

    std::size_t m = dist.size();
    auto mid = dist.begin() + m / 2;
    std::nth_element(dist.begin(), mid, dist.end());
    double median = *mid;
    if (m % 2 == 0) {
        double lower = *std::max_element(dist.begin(), mid);
        median = 0.5 * (lower + median);
    }
    if (median <= 0.0) {
        throw std::runtime_error("median_heuristic: median pairwise distance is zero");
    }
    return median;
}

KernelConfig resolve_bandwidth(KernelConfig cfg, const Dataset& X) {
    if (cfg.policy == BandwidthPolicy::median_heuristic && !cfg.resolved()) {
        cfg.sigma = median_heuristic(X);
    }
    require_resolved(cfg);
    return cfg;
}

ImportanceScores self_importance(const Dataset& reference, const KernelConfig& cfg) {
    require_resolved(cfg);
    if (reference.n() == 0) {
        throw std::invalid_argument("self_importance: empty reference set");
    }
    const auto& ops = simd::active();
    const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const std::size_t n = reference.n();

    ImportanceScores scores;
    scores.raw.resize(n);
    std::vector<double> d2(n);
    std::vector<double> krow(n);
    for (std::size_t i = 0; i < n; ++i) {
        ops.squared_distance_row(reference.instances.row(i).data(), reference.instances.data(), n,
                                 reference.d(), d2.data());
        ops.exp_scale(d2.data(), scale, krow.data(), n);
        scores.raw[i] = ops.sum(krow.data(), n);
    }
    double total = ops.sum(scores.raw.data(), n);
    scores.normalized.resize(n);
    for (std::size_t i = 0; i < n; ++i) scores.normalized[i] = scores.raw[i] / total;
    return scores;
}

ImportanceScores subset_importance(const Dataset& reference, std::span<const std::size_t> subset,
                                   const KernelConfig& cfg) {
    require_resolved(cfg);
    if (subset.empty()) {
        throw std::invalid_argument("subset_importance: empty subset");
    }
    const std::size_t n = reference.n();
    std::vector<bool> seen(n, false);
    for (std::size_t j : subset) {
        if (j >= n) {
            throw std::out_of_range("subset_importance: index " + std::to_string(j) +
                                    " out of range for " + std::to_string(n) + " instances");
        }
        if (seen[j]) {
            throw std::invalid_argument("subset_importance: duplicate index " + std::to_string(j));
        }
        seen[j] = true;
    }

    Matrix sel = reference.instances.take_rows(subset);
    const auto& ops = simd::active();
    const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);

    ImportanceScores scores;
    scores.raw.resize(n);
    std::vector<double> d2(subset.size());
    std::vector<double> krow(subset.size());
    for (std::size_t i = 0; i < n; ++i) {
        ops.squared_distance_row(reference.instances.row(i).data(), sel.data(), sel.rows(),
                                 reference.d(), d2.data());
        ops.exp_scale(d2.data(), scale, krow.data(), sel.rows());
        scores.raw[i] = ops.sum(krow.data(), sel.rows());
    }
    double total = ops.sum(scores.raw.data(), n);
    scores.normalized.resize(n);
    for (std::size_t i = 0; i < n; ++i) scores.normalized[i] = scores.raw[i] / total;
    return scores;
}

std::vector<std::size_t> top_k_important(const ImportanceScores& scores, std::size_t k) {
    const std::size_t n = scores.size();
    if (k < 1 || k > n) {
        throw std::invalid_argument("top_k_important: k=" + std::to_string(k) +
                                    " out of range [1, " + std::to_string(n) + "]");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores.normalized[a] != scores.normalized[b]) {
            return scores.normalized[a] > scores.normalized[b];
        }
        return a < b;
    });
    order.resize(k);
    return order;
}

double information_potential(const Dataset& X, const KernelConfig& cfg) {
    require_resolved(cfg);
    const std::size_t n = X.n();
    if (n == 0) {
        throw std::invalid_argument("information_potential: empty dataset");
    }
    const auto& ops = simd::active();
    // Width parameter 2 sigma^2: exp(-||u||^2 / (4 sigma^2)).
    const double scale = -1.0 / (4.0 * cfg.sigma * cfg.sigma);

    double off_diag = 0.0;
    std::vector<double> d2(n);
    std::vector<double> krow(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t count = n - i - 1;
        const double* rows = X.instances.data() + (i + 1) * X.d();
        ops.squared_distance_row(X.instances.row(i).data(), rows, count, X.d(), d2.data());
        ops.exp_scale(d2.data(), scale, krow.data(), count);
        off_diag += ops.sum(krow.data(), count);
    }
    double total = static_cast<double>(n) + 2.0 * off_diag;
    return total / (static_cast<double>(n) * static_cast<double>(n));
}

double renyi_entropy(const Dataset& X, const KernelConfig& cfg) {
    return -std::log(information_potential(X, cfg));
}

}  // namespace amkm
