#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "amkm/dataset.hpp"
#include "amkm/kernel.hpp"
#include "amkm/solvers.hpp"

namespace amkm {

/// Shape of the fusion QP: separable keeps only per-repetition quadratic
/// terms (diagonal H); coupled models the summed predictor (full H).
enum class FusionForm { separable, coupled };

/// Reference set for the fusion linear term: each repetition's selected
/// subset (matching its fitting problem) or the full reference set.
enum class FusionReference { subset, full };

struct MatchParams {
    std::size_t t = 5;           // repetitions
    std::size_t n = 50;          // randomly selected instances per repetition
    std::size_t n_s = 100;       // refined subset size
    std::size_t n_h = 100;       // gloKMM top count
    std::size_t partitions = 5;  // ensemble part count
    double lambda = 1e-3;        // ridge penalty
    std::uint64_t seed = 0;
    std::size_t t_batch = 1;     // repetitions added per appended batch
    FusionForm fusion = FusionForm::separable;
    FusionReference fusion_reference = FusionReference::subset;
};

/// Fitted coefficient vector anchored on the matching instances.
struct KmmModel {
    std::vector<double> alpha;                // length n_m
    std::shared_ptr<const Dataset> anchors;   // the matching set
    KernelConfig cfg;
    double lambda = 0.0;
    std::vector<std::size_t> selected;        // reduced reference rows; empty = full set
    std::vector<double> ref_rowsum;           // K_{m,.} e over the fitted reference
    std::size_t ref_count = 0;                // reference size used in the fit
};

/// t per-repetition models, nonnegative fusion weights, and the combined
/// predictor combined_alpha = (1/t) sum_i beta_i alpha_i.
struct AmkmModel {
    std::vector<KmmModel> reps;
    std::vector<double> beta;
    std::vector<double> combined_alpha;
    NnqpSolution fusion;                      // QP diagnostics (incl. converged)
    std::shared_ptr<const Dataset> anchors;
    KernelConfig cfg;
    MatchParams params;
    std::vector<double> full_rowsum;          // K_{m,r} e over all reference seen
    std::size_t total_reference = 0;
    std::shared_ptr<const Matrix> matching_kernel;  // cached K_{m,m}
};

/// Closed-form KMM: alpha = (n_m/n_r) (K_mm + lambda I)^-1 K_mr e.
KmmModel kmm_standard(const Dataset& matching, const Dataset& reference, const KernelConfig& cfg,
                      double lambda);

/// KMM restricted to the params.n_h most self-important reference instances.
KmmModel glokmm(const Dataset& matching, const Dataset& reference, const MatchParams& params,
                const KernelConfig& cfg);

/// params.t repetitions of random selection (params.n), refinement to the
/// params.n_s most important instances, and a reduced KMM solve; fused by a
/// nonnegative QP over per-repetition scales.
AmkmModel amkm(const Dataset& matching, const Dataset& reference, const MatchParams& params,
               const KernelConfig& cfg);

/// Reference set randomly partitioned into params.partitions near-equal
/// parts; per-part KMM fits combined by size-weighted sum.
KmmModel enskmm(const Dataset& matching, const Dataset& reference, const MatchParams& params,
                const KernelConfig& cfg);

/// w(x) = sum_i a_i k(x, anchor_i) with a = alpha / combined_alpha.
std::vector<double> predict_importance(const KmmModel& model, const Dataset& X);
std::vector<double> predict_importance(const AmkmModel& model, const Dataset& X);

/// Extend a fitted model with params.t_batch repetitions drawn from
/// new_batch only, then re-solve just the fusion QP over all repetitions.
/// Prior alpha vectors are reused unmodified.
AmkmModel amkm_append(const AmkmModel& model, const Dataset& matching, const Dataset& new_batch,
                      const MatchParams& params, const KernelConfig& cfg);

}  // namespace amkm
