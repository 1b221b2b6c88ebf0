#include "amkm/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amkm/simd/ops.hpp"

namespace amkm {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const RowMajor>;
using MapVec = Eigen::Map<const Eigen::VectorXd>;

// g = H b + f
void gradient(const Matrix& H, std::span<const double> beta, std::span<const double> f,
              std::vector<double>& g) {
    const auto& ops = simd::active();
    const std::size_t t = f.size();
    g.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        g[i] = ops.dot(H.row(i).data(), beta.data(), t) + f[i];
    }
}

double kkt_residual(std::span<const double> beta, std::span<const double> g) {
    double r = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        double ri = beta[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, -g[i]);
        r = std::max(r, ri);
    }
    return r;
}

double objective(const Matrix& H, std::span<const double> beta, std::span<const double> f) {
    const auto& ops = simd::active();
    const std::size_t t = f.size();
    double quad = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        quad += beta[i] * ops.dot(H.row(i).data(), beta.data(), t);
    }
    return 0.5 * quad + ops.dot(f.data(), beta.data(), t);
}

// Guess the active set from the current iterate, solve the free subsystem
// exactly, and accept the result only if it is feasible and KKT-clean.
bool polish(const Matrix& H, std::span<const double> f, std::vector<double>& beta,
            std::vector<double>& g, double tol) {
    const std::size_t t = f.size();
    std::vector<std::size_t> free_set;
    for (std::size_t i = 0; i < t; ++i) {
        if (beta[i] > 0.0 || g[i] < 0.0) free_set.push_back(i);
    }

    std::vector<double> candidate(t, 0.0);
    if (!free_set.empty()) {
        const std::size_t m = free_set.size();
        Eigen::MatrixXd hff(m, m);
        Eigen::VectorXd rhs(m);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) hff(a, b) = H(free_set[a], free_set[b]);
            rhs(a) = -f[free_set[a]];
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hff);
        if (ldlt.info() != Eigen::Success) return false;
        Eigen::VectorXd z = ldlt.solve(rhs);
        double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
        if ((hff * z - rhs).lpNorm<Eigen::Infinity>() > 0.1 * tol * scale) return false;
        for (std::size_t a = 0; a < m; ++a) {
            if (z(a) < -1e-12 * scale) return false;
            candidate[free_set[a]] = std::max(z(a), 0.0);
        }
    }

    std::vector<double> cg;
    gradient(H, candidate, f, cg);
    if (kkt_residual(candidate, cg) <= tol &&
        objective(H, candidate, f) <= objective(H, beta, f) + 1e-15) {
        beta = std::move(candidate);
        g = std::move(cg);
        return true;
    }
    return false;
}

}  // namespace

void NnqpProblem::validate() const {
    const std::size_t t = f.size();
    if (t < 1) {
        throw std::invalid_argument("NnqpProblem: dimension must be >= 1");
    }
    if (H.rows() != t || H.cols() != t) {
        throw std::invalid_argument("NnqpProblem: H must be t x t with t = |f|");
    }
    double max_abs = 0.0;
    for (double v : H.values()) max_abs = std::max(max_abs, std::abs(v));
    double sym_tol = 1e-10 * std::max(1.0, max_abs);
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            if (std::abs(H(i, j) - H(j, i)) > sym_tol) {
                throw std::invalid_argument("NnqpProblem: H is not symmetric");
            }
        }
    }
}

Matrix pinv_solve(const Matrix& K, const Matrix& B, double tol) {
    if (K.rows() != K.cols()) {
        throw std::invalid_argument("pinv_solve: K must be square");
    }
    if (B.rows() != K.rows()) {
        throw std::invalid_argument("pinv_solve: B row count must match K");
    }
    if (tol < 0.0) {
        throw std::invalid_argument("pinv_solve: tol must be >= 0");
    }
    const std::size_t n = K.rows();
    MapMat mk(K.data(), n, n);
    MapMat mb(B.data(), B.rows(), B.cols());

    Eigen::MatrixXd pinv_b;
    auto apply = [&](const auto& svd) {
        if (svd.info() != Eigen::Success) {
            throw std::runtime_error("pinv_solve: SVD failed to converge");
        }
        const auto& s = svd.singularValues();
        double cutoff = s.size() > 0 ? tol * s(0) : 0.0;
        Eigen::VectorXd inv = s;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            inv(i) = s(i) > cutoff && s(i) > 0.0 ? 1.0 / s(i) : 0.0;
        }
        pinv_b = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * mb);
    };
    if (n <= 32) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(mk, Eigen::ComputeThinU | Eigen::ComputeThinV);
        apply(svd);
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(mk, Eigen::ComputeThinU | Eigen::ComputeThinV);
        apply(svd);
    }

    Matrix out(pinv_b.rows(), pinv_b.cols());
    for (Eigen::Index i = 0; i < pinv_b.rows(); ++i) {
        for (Eigen::Index j = 0; j < pinv_b.cols(); ++j) {
            out(i, j) = pinv_b(i, j);
        }
    }
    return out;
}

std::vector<double> pinv_solve(const Matrix& K, std::span<const double> b, double tol) {
    Matrix bm(b.size(), 1, std::vector<double>(b.begin(), b.end()));
    Matrix x = pinv_solve(K, bm, tol);
    return x.values();
}

std::vector<double> ridge_solve(const Matrix& K, std::span<const double> b, double lambda) {
    const std::size_t n = K.rows();
    if (K.cols() != n) {
        throw std::invalid_argument("ridge_solve: K must be square");
    }
    if (b.size() != n) {
        throw std::invalid_argument("ridge_solve: b length must match K");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("ridge_solve: lambda must be >= 0");
    }

    MapMat mk(K.data(), n, n);
    MapVec mb(b.data(), n);
    Eigen::MatrixXd A = mk;
    A.diagonal().array() += lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    Eigen::VectorXd x = ldlt.solve(mb);
    const double target = 1e-8 * mb.norm();
    double residual = (A * x - mb).norm();
    if (!x.allFinite() || residual > target) {
        // One round of iterative refinement before declaring the system bad.
        if (x.allFinite()) {
            x += ldlt.solve(mb - A * x);
            residual = (A * x - mb).norm();
        }
        if (!x.allFinite() || residual > target) {
            throw std::runtime_error(
                "ridge_solve: system is singular or too ill-conditioned (residual " +
                std::to_string(residual) + ")");
        }
    }
    return std::vector<double>(x.data(), x.data() + n);
}

NnqpSolution nnqp_solve(const NnqpProblem& p, double tol, std::size_t max_iter) {
    p.validate();
    if (tol <= 0.0) {
        throw std::invalid_argument("nnqp_solve: tol must be > 0");
    }
    const std::size_t t = p.size();
    if (max_iter == 0) max_iter = 10 * t * t + 1000;
    const auto& ops = simd::active();

    NnqpSolution sol;
    sol.beta.assign(t, 0.0);
    std::vector<double> g(p.f);
    sol.kkt_residual = kkt_residual(sol.beta, g);
    if (sol.kkt_residual <= tol || polish(p.H, p.f, sol.beta, g, tol)) {
        sol.kkt_residual = kkt_residual(sol.beta, g);
        sol.converged = true;
        return sol;
    }

    // Initial step from the gradient scale.
    double hinf = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < t; ++j) row_sum += std::abs(p.H(i, j));
        hinf = std::max(hinf, row_sum);
    }
    double step = hinf > 0.0 ? 1.0 / hinf : 1.0;

    std::vector<double> beta_prev(t), g_prev(t), s(t), y(t);
    std::vector<double> best_beta = sol.beta;
    double best_kkt = sol.kkt_residual;

    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        beta_prev = sol.beta;
        g_prev = g;
        for (std::size_t i = 0; i < t; ++i) {
            sol.beta[i] = std::max(0.0, sol.beta[i] - step * g[i]);
        }
        gradient(p.H, sol.beta, p.f, g);
        sol.iterations = iter;

        double r = kkt_residual(sol.beta, g);
        if (r < best_kkt) {
            best_kkt = r;
            best_beta = sol.beta;
        }
        if (r <= tol) {
            sol.kkt_residual = r;
            sol.converged = true;
            return sol;
        }
        if (iter % 25 == 0 && polish(p.H, p.f, sol.beta, g, tol)) {
            sol.kkt_residual = kkt_residual(sol.beta, g);
            sol.converged = true;
            return sol;
        }

        // Barzilai-Borwein step, alternating the two formulas.
        for (std::size_t i = 0; i < t; ++i) {
            s[i] = sol.beta[i] - beta_prev[i];
            y[i] = g[i] - g_prev[i];
        }
        double sy = ops.dot(s.data(), y.data(), t);
        if (sy > 0.0) {
            step = (iter % 2 == 0) ? ops.dot(s.data(), s.data(), t) / sy
                                   : sy / ops.dot(y.data(), y.data(), t);
            step = std::clamp(step, 1e-14, 1e14);
        } else {
            step = hinf > 0.0 ? 1.0 / hinf : 1.0;
        }
    }

    sol.beta = std::move(best_beta);
    gradient(p.H, sol.beta, p.f, g);
    sol.kkt_residual = kkt_residual(sol.beta, g);
    sol.converged = sol.kkt_residual <= tol;
    return sol;
}

}  // namespace amkm
