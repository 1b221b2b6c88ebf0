#include "amkm/eval.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "amkm/rng.hpp"
#include "amkm/simd/ops.hpp"

namespace amkm {
namespace {

std::vector<double> broadcast(const std::vector<double>& v, std::size_t d, const char* what) {
    if (v.size() == d) return v;
    if (v.size() == 1) return std::vector<double>(d, v[0]);
    throw std::invalid_argument(std::string("generate_shift: ") + what +
                                " must have 1 or d entries");
}

// log of the product of per-dimension normal densities
double log_density(std::span<const double> x, const std::vector<double>& mean,
                   const std::vector<double>& sigma) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double z = (x[k] - mean[k]) / sigma[k];
        acc += -0.5 * z * z - std::log(sigma[k] * std::sqrt(2.0 * std::numbers::pi));
    }
    return acc;
}

}  // namespace

double nmse(std::span<const double> estimated, std::span<const double> truth) {
    if (estimated.size() != truth.size()) {
        throw std::invalid_argument("nmse: length mismatch");
    }
    if (estimated.empty()) {
        throw std::invalid_argument("nmse: empty input");
    }
    const auto& ops = simd::active();
    double se = ops.sum(estimated.data(), estimated.size());
    double st = ops.sum(truth.data(), truth.size());
    if (se == 0.0 || st == 0.0) {
        throw std::invalid_argument("nmse: input sums to zero");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        double diff = estimated[i] / se - truth[i] / st;
        acc += diff * diff;
    }
    return acc / static_cast<double>(estimated.size());
}

double mmd_squared(std::span<const double> weights, const Dataset& matching,
                   const Dataset& reference, const KernelConfig& cfg) {
    if (weights.size() != matching.n()) {
        throw std::invalid_argument("mmd_squared: weights length must equal n_m");
    }
    if (matching.d() != reference.d()) {
        throw std::invalid_argument("mmd_squared: dimensionality mismatch");
    }
    if (!cfg.resolved()) {
        throw std::invalid_argument("mmd_squared: kernel bandwidth not resolved");
    }
    const auto& ops = simd::active();
    const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const std::size_t n_m = matching.n();
    const std::size_t n_r = reference.n();

    // a' K_mm a and a' K_mr e, streamed.
    double quad = 0.0;
    double cross = 0.0;
    {
        std::vector<double> d2(std::max(n_m, n_r));
        std::vector<double> krow(std::max(n_m, n_r));
        for (std::size_t i = 0; i < n_m; ++i) {
            const double* xi = matching.instances.row(i).data();
            ops.squared_distance_row(xi, matching.instances.data(), n_m, matching.d(), d2.data());
            ops.exp_scale(d2.data(), scale, krow.data(), n_m);
            quad += weights[i] * ops.dot(krow.data(), weights.data(), n_m);
            ops.squared_distance_row(xi, reference.instances.data(), n_r, matching.d(), d2.data());
            ops.exp_scale(d2.data(), scale, krow.data(), n_r);
            cross += weights[i] * ops.sum(krow.data(), n_r);
        }
    }

    // e' K_rr e via the strict upper triangle.
    double ref_offdiag = 0.0;
    {
        std::vector<double> d2(n_r);
        std::vector<double> krow(n_r);
        for (std::size_t i = 0; i + 1 < n_r; ++i) {
            std::size_t count = n_r - i - 1;
            const double* rows = reference.instances.data() + (i + 1) * reference.d();
            ops.squared_distance_row(reference.instances.row(i).data(), rows, count,
                                     reference.d(), d2.data());
            ops.exp_scale(d2.data(), scale, krow.data(), count);
            ref_offdiag += ops.sum(krow.data(), count);
        }
    }
    double ref_total = static_cast<double>(n_r) + 2.0 * ref_offdiag;

    double nm = static_cast<double>(n_m);
    double nr = static_cast<double>(n_r);
    return quad / (nm * nm) - 2.0 * cross / (nm * nr) + ref_total / (nr * nr);
}

ShiftSample generate_shift(const SyntheticShiftSpec& spec) {
    if (spec.d < 1 || spec.n_m < 1 || spec.n_r < 1) {
        throw std::invalid_argument("generate_shift: d, n_m, n_r must be >= 1");
    }
    auto m_mean = broadcast(spec.matching_mean, spec.d, "matching_mean");
    auto m_sigma = broadcast(spec.matching_sigma, spec.d, "matching_sigma");
    auto r_mean = broadcast(spec.reference_mean, spec.d, "reference_mean");
    auto r_sigma = broadcast(spec.reference_sigma, spec.d, "reference_sigma");
    for (double s : m_sigma) {
        if (s <= 0.0) throw std::invalid_argument("generate_shift: matching_sigma must be > 0");
    }
    for (double s : r_sigma) {
        if (s <= 0.0) throw std::invalid_argument("generate_shift: reference_sigma must be > 0");
    }

    Rng rng(spec.seed);
    ShiftSample out;
    out.matching.instances = Matrix(spec.n_m, spec.d);
    out.matching.source = "synthetic#matching";
    for (std::size_t i = 0; i < spec.n_m; ++i) {
        auto row = out.matching.instances.row(i);
        for (std::size_t k = 0; k < spec.d; ++k) {
            row[k] = m_mean[k] + m_sigma[k] * rng.normal();
        }
    }
    out.reference.instances = Matrix(spec.n_r, spec.d);
    out.reference.source = "synthetic#reference";
    for (std::size_t i = 0; i < spec.n_r; ++i) {
        auto row = out.reference.instances.row(i);
        for (std::size_t k = 0; k < spec.d; ++k) {
            row[k] = r_mean[k] + r_sigma[k] * rng.normal();
        }
    }

    out.true_w_on_matching.resize(spec.n_m);
    for (std::size_t i = 0; i < spec.n_m; ++i) {
        auto x = out.matching.instances.row(i);
        out.true_w_on_matching[i] =
            std::exp(log_density(x, r_mean, r_sigma) - log_density(x, m_mean, m_sigma));
    }
    return out;
}

ExperimentResult time_run(const ExperimentTask& task) {
    ExperimentResult result;
    result.method = task.method;
    result.n_m = task.n_m;
    result.n_r = task.n_r;
    result.params = task.params;
    result.sigma = task.sigma;
    result.seed = task.seed;
    result.truth_mode = task.truth_mode;

    auto start = std::chrono::steady_clock::now();
    std::vector<double> weights = task.fit();
    auto stop = std::chrono::steady_clock::now();
    result.wallclock_ms =
        std::chrono::duration<double, std::milli>(stop - start).count();

    auto [err, mmd2] = task.evaluate(weights);
    result.nmse = err;
    result.mmd2 = mmd2;
    return result;
}

}  // namespace amkm
