#include "amkm/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amkm/rng.hpp"
#include "amkm/simd/ops.hpp"

namespace amkm {
namespace {

void require_fit_inputs(const Dataset& matching, const Dataset& reference,
                        const KernelConfig& cfg, double lambda) {
    if (matching.n() < 1 || reference.n() < 1) {
        throw std::invalid_argument("matcher: matching and reference must be non-empty");
    }
    if (matching.d() != reference.d()) {
        throw std::invalid_argument("matcher: dimensionality mismatch");
    }
    if (!cfg.resolved()) {
        throw std::invalid_argument("matcher: kernel bandwidth not resolved");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("matcher: lambda must be >= 0");
    }
}

// b_i = sum_j k(matching_i, ref_j), streamed row by row.
std::vector<double> kernel_rowsums(const Dataset& matching, const Matrix& ref_rows, double sigma) {
    const auto& ops = simd::active();
    const double scale = -1.0 / (2.0 * sigma * sigma);
    const std::size_t n_m = matching.n();
    const std::size_t n_r = ref_rows.rows();
    std::vector<double> out(n_m);
    std::vector<double> d2(n_r);
    std::vector<double> krow(n_r);
    for (std::size_t i = 0; i < n_m; ++i) {
        ops.squared_distance_row(matching.instances.row(i).data(), ref_rows.data(), n_r,
                                 matching.d(), d2.data());
        ops.exp_scale(d2.data(), scale, krow.data(), n_r);
        out[i] = ops.sum(krow.data(), n_r);
    }
    return out;
}

struct ReducedFit {
    std::vector<double> alpha;
    std::vector<double> rowsum;
};

// alpha = (n_m / |ref|) (K_mm + lambda I)^-1 K_{m,ref} e. Every matcher goes
// through this one path so degenerate reductions are bit-identical.
ReducedFit fit_against(const Matrix& kmm, const Dataset& matching, const Matrix& ref_rows,
                       const KernelConfig& cfg, double lambda) {
    ReducedFit fit;
    fit.rowsum = kernel_rowsums(matching, ref_rows, cfg.sigma);
    fit.alpha = ridge_solve(kmm, fit.rowsum, lambda);
    const double ratio = static_cast<double>(matching.n()) / static_cast<double>(ref_rows.rows());
    for (double& a : fit.alpha) a *= ratio;
    return fit;
}

std::vector<std::size_t> sorted_top_k(const ImportanceScores& scores, std::size_t k) {
    auto idx = top_k_important(scores, k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// One AMKM repetition: random selection, refinement, reduced solve.
KmmModel amkm_repetition(const Matrix& kmm, const Dataset& matching, const Dataset& reference,
                         const MatchParams& params, const KernelConfig& cfg,
                         std::size_t rep_index, std::shared_ptr<const Dataset> anchors) {
    Rng rng(derive_rep_seed(params.seed, rep_index));
    const std::size_t n_pick = std::min(params.n, reference.n());
    const std::size_t n_keep = std::min(params.n_s, reference.n());
    auto random_idx = rng.sample_without_replacement(reference.n(), n_pick);
    auto scores = subset_importance(reference, random_idx, cfg);
    auto selected = sorted_top_k(scores, n_keep);

    Matrix reduced = reference.instances.take_rows(selected);
    ReducedFit fit = fit_against(kmm, matching, reduced, cfg, params.lambda);

    KmmModel rep;
    rep.alpha = std::move(fit.alpha);
    rep.anchors = std::move(anchors);
    rep.cfg = cfg;
    rep.lambda = params.lambda;
    rep.selected = std::move(selected);
    rep.ref_rowsum = std::move(fit.rowsum);
    rep.ref_count = n_keep;
    return rep;
}

// Fusion QP over the current repetition list: H from K_mm quadratic forms,
// f from each repetition's fitted linear term, then
// combined_alpha = (1/t) sum beta_i alpha_i.
void solve_fusion(AmkmModel& model) {
    const auto& ops = simd::active();
    const Matrix& kmm = *model.matching_kernel;
    const std::size_t t = model.reps.size();
    const std::size_t n_m = model.anchors->n();

    // u_i = K_mm alpha_i
    std::vector<std::vector<double>> ku(t, std::vector<double>(n_m));
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t r = 0; r < n_m; ++r) {
            ku[i][r] = ops.dot(kmm.row(r).data(), model.reps[i].alpha.data(), n_m);
        }
    }

    NnqpProblem qp;
    qp.H = Matrix(t, t);
    qp.f.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        qp.H(i, i) = ops.dot(model.reps[i].alpha.data(), ku[i].data(), n_m);
        if (model.params.fusion == FusionForm::coupled) {
            for (std::size_t l = i + 1; l < t; ++l) {
                double h = ops.dot(model.reps[i].alpha.data(), ku[l].data(), n_m);
                qp.H(i, l) = h;
                qp.H(l, i) = h;
            }
        }
        const KmmModel& rep = model.reps[i];
        if (model.params.fusion_reference == FusionReference::subset) {
            double ratio = static_cast<double>(n_m) / static_cast<double>(rep.ref_count);
            qp.f[i] = -ratio * ops.dot(rep.alpha.data(), rep.ref_rowsum.data(), n_m);
        } else {
            double ratio = static_cast<double>(n_m) / static_cast<double>(model.total_reference);
            qp.f[i] = -ratio * ops.dot(rep.alpha.data(), model.full_rowsum.data(), n_m);
        }
    }

    model.fusion = nnqp_solve(qp);
    model.beta = model.fusion.beta;
    model.combined_alpha.assign(n_m, 0.0);
    const double inv_t = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < t; ++i) {
        ops.axpy(inv_t * model.beta[i], model.reps[i].alpha.data(), model.combined_alpha.data(),
                 n_m);
    }
}

}  // namespace

KmmModel kmm_standard(const Dataset& matching, const Dataset& reference, const KernelConfig& cfg,
                      double lambda) {
    require_fit_inputs(matching, reference, cfg, lambda);
    Matrix kmm = kernel_matrix(matching, matching, cfg);
    ReducedFit fit = fit_against(kmm, matching, reference.instances, cfg, lambda);

    KmmModel model;
    model.alpha = std::move(fit.alpha);
    model.anchors = std::make_shared<Dataset>(matching);
    model.cfg = cfg;
    model.lambda = lambda;
    model.ref_rowsum = std::move(fit.rowsum);
    model.ref_count = reference.n();
    return model;
}

KmmModel glokmm(const Dataset& matching, const Dataset& reference, const MatchParams& params,
                const KernelConfig& cfg) {
    require_fit_inputs(matching, reference, cfg, params.lambda);
    if (params.n_h < 1 || params.n_h > reference.n()) {
        throw std::invalid_argument("glokmm: n_h out of range [1, n_r]");
    }
    auto scores = self_importance(reference, cfg);
    auto selected = sorted_top_k(scores, params.n_h);
    Matrix reduced = reference.instances.take_rows(selected);

    Matrix kmm = kernel_matrix(matching, matching, cfg);
    ReducedFit fit = fit_against(kmm, matching, reduced, cfg, params.lambda);

    KmmModel model;
    model.alpha = std::move(fit.alpha);
    model.anchors = std::make_shared<Dataset>(matching);
    model.cfg = cfg;
    model.lambda = params.lambda;
    model.selected = std::move(selected);
    model.ref_rowsum = std::move(fit.rowsum);
    model.ref_count = params.n_h;
    return model;
}

AmkmModel amkm(const Dataset& matching, const Dataset& reference, const MatchParams& params,
               const KernelConfig& cfg) {
    require_fit_inputs(matching, reference, cfg, params.lambda);
    if (params.t < 1) {
        throw std::invalid_argument("amkm: t must be >= 1");
    }
    if (params.n < 1 || params.n > reference.n()) {
        throw std::invalid_argument("amkm: n out of range [1, n_r]");
    }
    if (params.n_s < 1 || params.n_s > reference.n()) {
        throw std::invalid_argument("amkm: n_s out of range [1, n_r]");
    }

    AmkmModel model;
    model.anchors = std::make_shared<Dataset>(matching);
    model.cfg = cfg;
    model.params = params;
    model.matching_kernel = std::make_shared<Matrix>(kernel_matrix(matching, matching, cfg));
    model.total_reference = reference.n();
    if (params.fusion_reference == FusionReference::full) {
        model.full_rowsum = kernel_rowsums(matching, reference.instances, cfg.sigma);
    }

    model.reps.reserve(params.t);
    for (std::size_t i = 0; i < params.t; ++i) {
        model.reps.push_back(amkm_repetition(*model.matching_kernel, matching, reference, params,
                                             cfg, i, model.anchors));
    }
    solve_fusion(model);
    return model;
}

KmmModel enskmm(const Dataset& matching, const Dataset& reference, const MatchParams& params,
                const KernelConfig& cfg) {
    require_fit_inputs(matching, reference, cfg, params.lambda);
    const std::size_t n_r = reference.n();
    if (params.partitions < 1 || params.partitions > n_r) {
        throw std::invalid_argument("enskmm: partitions out of range [1, n_r]");
    }

    Rng rng(params.seed);
    auto perm = rng.permutation(n_r);
    const std::size_t base = n_r / params.partitions;
    const std::size_t extra = n_r % params.partitions;

    Matrix kmm = kernel_matrix(matching, matching, cfg);
    const auto& ops = simd::active();
    const std::size_t n_m = matching.n();

    KmmModel model;
    model.alpha.assign(n_m, 0.0);
    model.ref_rowsum.assign(n_m, 0.0);
    model.anchors = std::make_shared<Dataset>(matching);
    model.cfg = cfg;
    model.lambda = params.lambda;
    model.ref_count = n_r;

    std::size_t offset = 0;
    for (std::size_t p = 0; p < params.partitions; ++p) {
        const std::size_t size = base + (p < extra ? 1 : 0);
        std::vector<std::size_t> part(perm.begin() + offset, perm.begin() + offset + size);
        offset += size;
        std::sort(part.begin(), part.end());

        Matrix rows = reference.instances.take_rows(part);
        ReducedFit fit = fit_against(kmm, matching, rows, cfg, params.lambda);
        const double weight = static_cast<double>(size) / static_cast<double>(n_r);
        ops.axpy(weight, fit.alpha.data(), model.alpha.data(), n_m);
        for (std::size_t i = 0; i < n_m; ++i) model.ref_rowsum[i] += fit.rowsum[i];
    }
    return model;
}

namespace {

std::vector<double> predict_kernel_sum(const std::vector<double>& coeff, const Dataset& anchors,
                                       const KernelConfig& cfg, const Dataset& X) {
    if (X.d() != anchors.d()) {
        throw std::invalid_argument("predict_importance: dimensionality mismatch");
    }
    const auto& ops = simd::active();
    const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const std::size_t n_a = anchors.n();
    std::vector<double> out(X.n());
    std::vector<double> d2(n_a);
    std::vector<double> krow(n_a);
    for (std::size_t i = 0; i < X.n(); ++i) {
        ops.squared_distance_row(X.instances.row(i).data(), anchors.instances.data(), n_a, X.d(),
                                 d2.data());
        ops.exp_scale(d2.data(), scale, krow.data(), n_a);
        out[i] = ops.dot(coeff.data(), krow.data(), n_a);
    }
    return out;
}

}  // namespace

std::vector<double> predict_importance(const KmmModel& model, const Dataset& X) {
    return predict_kernel_sum(model.alpha, *model.anchors, model.cfg, X);
}

std::vector<double> predict_importance(const AmkmModel& model, const Dataset& X) {
    return predict_kernel_sum(model.combined_alpha, *model.anchors, model.cfg, X);
}

AmkmModel amkm_append(const AmkmModel& model, const Dataset& matching, const Dataset& new_batch,
                      const MatchParams& params, const KernelConfig& cfg) {
    require_fit_inputs(matching, new_batch, cfg, params.lambda);
    if (model.anchors == nullptr || model.anchors->n() != matching.n() ||
        model.anchors->d() != matching.d() ||
        model.anchors->instances.values() != matching.instances.values()) {
        throw std::invalid_argument("amkm_append: matching set differs from the fitted model's");
    }
    if (model.cfg.sigma != cfg.sigma) {
        throw std::invalid_argument("amkm_append: kernel config differs from the fitted model's");
    }
    if (params.fusion_reference == FusionReference::full && model.full_rowsum.empty()) {
        throw std::invalid_argument(
            "amkm_append: model was fused against subsets; cannot switch to full reference");
    }
    if (params.t_batch < 1) {
        throw std::invalid_argument("amkm_append: t_batch must be >= 1");
    }

    AmkmModel next = model;
    next.params = params;
    if (next.matching_kernel == nullptr) {
        next.matching_kernel = std::make_shared<Matrix>(kernel_matrix(matching, matching, cfg));
    }

    const std::size_t start = model.reps.size();
    for (std::size_t j = 0; j < params.t_batch; ++j) {
        next.reps.push_back(amkm_repetition(*next.matching_kernel, matching, new_batch, params,
                                            cfg, start + j, next.anchors));
    }
    next.total_reference += new_batch.n();
    if (params.fusion_reference == FusionReference::full) {
        auto batch_rowsum = kernel_rowsums(matching, new_batch.instances, cfg.sigma);
        for (std::size_t i = 0; i < batch_rowsum.size(); ++i) {
            next.full_rowsum[i] += batch_rowsum[i];
        }
    }
    solve_fusion(next);
    return next;
}

}  // namespace amkm
