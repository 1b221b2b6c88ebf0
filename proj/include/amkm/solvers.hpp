#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amkm/matrix.hpp"

namespace amkm {

/// Nonnegativity-constrained QP: minimize 1/2 b'Hb + f'b subject to b >= 0.
/// H must be symmetric (within 1e-10) positive semidefinite.
struct NnqpProblem {
    Matrix H;
    std::vector<double> f;

    std::size_t size() const { return f.size(); }
    /// Throws on shape/symmetry violations.
    void validate() const;
};

struct NnqpSolution {
    std::vector<double> beta;  // entries >= 0 exactly
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// K+ B through SVD: singular values <= tol * s_max are zeroed in the
/// inverse. Throws if the decomposition fails (no silent fallback).
Matrix pinv_solve(const Matrix& K, const Matrix& B, double tol = 1e-12);
std::vector<double> pinv_solve(const Matrix& K, std::span<const double> b, double tol = 1e-12);

/// x = (K + lambda I)^-1 b for symmetric K. The postcondition
/// ||(K + lambda I) x - b|| <= 1e-8 ||b|| is verified; a singular system
/// (possible at lambda = 0) is reported as an error.
std::vector<double> ridge_solve(const Matrix& K, std::span<const double> b, double lambda);

/// Projected gradient with Barzilai-Borwein steps plus an active-set polish.
/// Accepted by the KKT conditions: for each i, either beta_i = 0 and
/// (H beta + f)_i >= -tol, or beta_i > 0 and |(H beta + f)_i| <= tol.
/// Exceeding max_iter returns converged = false rather than throwing.
/// max_iter = 0 selects the default 10 t^2 + 1000.
NnqpSolution nnqp_solve(const NnqpProblem& p, double tol = 1e-8, std::size_t max_iter = 0);

}  // namespace amkm
