#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "amkm/solvers.hpp"
#include "support/oracles.hpp"

using namespace amkm;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double nnqp_objective(const NnqpProblem& p, const std::vector<double>& beta) {
    double quad = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) quad += beta[i] * p.H(i, j) * beta[j];
    }
    double lin = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) lin += p.f[i] * beta[i];
    return 0.5 * quad + lin;
}

}  // namespace

TEST_CASE("pinv_solve identity and rank-deficient diagonal") {
    Matrix eye = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    Matrix b(2, 1, {2.0, 5.0});
    Matrix x = pinv_solve(eye, b);
    CHECK(x(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x(1, 0) == doctest::Approx(5.0).epsilon(1e-14));

    Matrix sing = Matrix::from_rows({{2.0, 0.0}, {0.0, 0.0}});
    Matrix y = pinv_solve(sing, b, 1e-12);
    CHECK(y(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(y(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("pinv_solve residual on well-conditioned systems") {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> dist(0, 1);
    for (int rep = 0; rep < 5; ++rep) {
        std::size_t n = 6 + rep * 13;  // crosses the Jacobi/BDC switch
        Matrix K = oracle::random_psd(n, 100 + rep, 1.0);
        std::vector<double> b(n);
        for (auto& v : b) v = dist(eng);
        auto x = pinv_solve(K, b);
        double res = 0.0, bn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += K(i, j) * x[j];
            res += (acc - b[i]) * (acc - b[i]);
            bn += b[i] * b[i];
        }
        CHECK(std::sqrt(res) <= 1e-8 * std::max(1.0, std::sqrt(bn)));
    }
}

TEST_CASE("pinv_solve validates shapes") {
    Matrix rect(2, 3);
    Matrix b(2, 1);
    CHECK_THROWS_AS(pinv_solve(rect, b), std::invalid_argument);
    Matrix sq(3, 3);
    CHECK_THROWS_AS(pinv_solve(sq, b), std::invalid_argument);
}

TEST_CASE("ridge_solve diagonal and pure-penalty cases") {
    Matrix eye = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<double> b{2.0, 4.0};
    auto x = ridge_solve(eye, b, 1.0);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));

    Matrix zero(2, 2);
    auto y = ridge_solve(zero, b, 1.0);
    CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(4.0).epsilon(1e-12));

    CHECK_THROWS_AS(ridge_solve(zero, b, 0.0), std::runtime_error);
}

TEST_CASE("ridge_solve agrees with pinv_solve on random PSD systems") {
    std::mt19937_64 eng(6);
    std::normal_distribution<double> dist(0, 1);
    for (int rep = 0; rep < 5; ++rep) {
        std::size_t n = 5 + rep * 3;
        Matrix K = oracle::random_psd(n, 200 + rep, 0.5);
        std::vector<double> b(n);
        for (auto& v : b) v = dist(eng);
        double lambda = 0.37;
        auto x_ridge = ridge_solve(K, b, lambda);

        Matrix K_shift = K;
        for (std::size_t i = 0; i < n; ++i) K_shift(i, i) += lambda;
        auto x_pinv = pinv_solve(K_shift, b);
        CHECK(max_abs_diff(x_ridge, x_pinv) <= 1e-8);
    }
}

TEST_CASE("ridge_solve approaches pinv_solve as lambda shrinks") {
    Matrix K = oracle::random_psd(8, 300, 1.0);  // nonsingular
    std::vector<double> b(8);
    std::mt19937_64 eng(7);
    std::normal_distribution<double> dist(0, 1);
    for (auto& v : b) v = dist(eng);
    auto exact = pinv_solve(K, b);

    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-2, 1e-4, 1e-6}) {
        auto x = ridge_solve(K, b, lambda);
        double diff = max_abs_diff(x, exact);
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("nnqp separable pinned cases") {
    NnqpProblem p1{Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}), {-1.0, -2.0}};
    auto s1 = nnqp_solve(p1);
    CHECK(s1.converged);
    CHECK(s1.beta[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s1.beta[1] == doctest::Approx(2.0).epsilon(1e-10));

    NnqpProblem p2{Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}), {1.0, 1.0}};
    auto s2 = nnqp_solve(p2);
    CHECK(s2.converged);
    CHECK(s2.beta[0] == 0.0);
    CHECK(s2.beta[1] == 0.0);

    NnqpProblem p3{Matrix::from_rows({{2.0, 0.0}, {0.0, 2.0}}), {-2.0, 3.0}};
    auto s3 = nnqp_solve(p3);
    CHECK(s3.converged);
    CHECK(s3.beta[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s3.beta[1] == 0.0);
}

TEST_CASE("nnqp solutions satisfy KKT on random PSD problems") {
    std::mt19937_64 eng(8);
    std::normal_distribution<double> dist(0, 2);
    for (int rep = 0; rep < 40; ++rep) {
        std::size_t t = 1 + static_cast<std::size_t>(eng() % 20);
        NnqpProblem p;
        p.H = oracle::random_psd(t, 400 + rep, rep % 3 == 0 ? 0.0 : 1e-3);
        p.f.resize(t);
        for (auto& v : p.f) v = dist(eng);

        auto sol = nnqp_solve(p);
        REQUIRE(sol.converged);
        CHECK(sol.kkt_residual <= 1e-8);
        for (std::size_t i = 0; i < t; ++i) {
            CHECK(sol.beta[i] >= 0.0);
            double g = p.f[i];
            for (std::size_t j = 0; j < t; ++j) g += p.H(i, j) * sol.beta[j];
            if (sol.beta[i] > 0.0) {
                CHECK(std::abs(g) <= 1e-8);
            } else {
                CHECK(g >= -1e-8);
            }
        }
    }
}

TEST_CASE("nnqp diagonal problems match the closed form") {
    std::mt19937_64 eng(9);
    std::uniform_real_distribution<double> diag(0.2, 5.0);
    std::normal_distribution<double> lin(0, 3);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t t = 1 + static_cast<std::size_t>(eng() % 12);
        NnqpProblem p;
        p.H = Matrix(t, t);
        p.f.resize(t);
        for (std::size_t i = 0; i < t; ++i) {
            p.H(i, i) = diag(eng);
            p.f[i] = lin(eng);
        }
        auto sol = nnqp_solve(p);
        REQUIRE(sol.converged);
        for (std::size_t i = 0; i < t; ++i) {
            double closed = std::max(0.0, -p.f[i] / p.H(i, i));
            CHECK(std::abs(sol.beta[i] - closed) <= 1e-10);
        }
    }
}

TEST_CASE("nnqp objective dominates the origin and the clipped unconstrained point") {
    for (int rep = 0; rep < 10; ++rep) {
        std::size_t t = 4 + static_cast<std::size_t>(rep);
        NnqpProblem p;
        p.H = oracle::random_psd(t, 500 + rep, 0.5);
        p.f.resize(t);
        std::mt19937_64 eng(600 + rep);
        std::normal_distribution<double> dist(0, 1);
        for (auto& v : p.f) v = dist(eng);

        auto sol = nnqp_solve(p);
        REQUIRE(sol.converged);
        double at_solution = nnqp_objective(p, sol.beta);
        CHECK(at_solution <= nnqp_objective(p, std::vector<double>(t, 0.0)) + 1e-10);

        // clipped unconstrained solution max(0, -H^+ f)
        std::vector<double> neg_f(p.f);
        for (auto& v : neg_f) v = -v;
        auto unconstrained = pinv_solve(p.H, neg_f);
        for (auto& v : unconstrained) v = std::max(0.0, v);
        CHECK(at_solution <= nnqp_objective(p, unconstrained) + 1e-10);
    }
}

TEST_CASE("nnqp validates its problem") {
    NnqpProblem bad_dims{Matrix(2, 3), {1.0, 2.0}};
    CHECK_THROWS_AS(nnqp_solve(bad_dims), std::invalid_argument);
    NnqpProblem asym{Matrix::from_rows({{1.0, 0.5}, {0.0, 1.0}}), {1.0, 2.0}};
    CHECK_THROWS_AS(nnqp_solve(asym), std::invalid_argument);
    NnqpProblem empty{Matrix(0, 0), {}};
    CHECK_THROWS_AS(nnqp_solve(empty), std::invalid_argument);
}

TEST_CASE("nnqp reports non-convergence instead of throwing") {
    // An active constraint the initial polish cannot guess (the unconstrained
    // optimum has a negative coordinate), starved of iterations.
    NnqpProblem p{Matrix::from_rows({{1.0, 0.9}, {0.9, 1.0}}), {-1.0, -0.05}};
    auto sol = nnqp_solve(p, 1e-8, 2);
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations <= 2);
    for (double b : sol.beta) CHECK(b >= 0.0);

    auto full = nnqp_solve(p);
    CHECK(full.converged);
    CHECK(full.beta[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(full.beta[1] == 0.0);
}
