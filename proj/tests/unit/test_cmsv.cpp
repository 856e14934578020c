#include <gtest/gtest.h>

#include <lstar/cmsv/estimate.hpp>
#include <lstar/cmsv/htau.hpp>
#include <lstar/core/norms.hpp>
#include <lstar/random/ensembles.hpp>

#include "../support/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lstar;

namespace {

MeasurementOperator gaussian_op(Eigen::Index n1, Eigen::Index n2, Eigen::Index m, std::uint64_t seed) {
    return draw_operator({EnsembleKind::gaussian, n1, n2, m, seed, false});
}

// min and max of ||A(u v^T)||_2 over unit u, v in R^2 on an angle grid.
std::pair<double, double> rank_one_grid(const MeasurementOperator& op, int steps) {
    const Matrix vm = oracle::vectorize_rows(op.matrices());
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double a = std::numbers::pi * i / steps;
        const Eigen::Vector2d u(std::cos(a), std::sin(a));
        for (int j = 0; j < 2 * steps; ++j) {
            const double b = std::numbers::pi * j / steps;
            const Eigen::Vector2d v(std::cos(b), std::sin(b));
            const Matrix x = u * v.transpose();
            const double val = (vm * oracle::flatten_rows(x)).norm();
            lo = std::min(lo, val);
            hi = std::max(hi, val);
        }
    }
    return {lo, hi};
}

} // namespace

TEST(ProjectHtau, FullTauNormalizes) {
    std::mt19937_64 gen(40);
    const Matrix x = oracle::random_matrix(3, 4, gen);
    EXPECT_LE((project_htau(x, 3.0) - x / x.norm()).norm(), 1e-12);
}

TEST(ProjectHtau, TauOneKeepsTheTopSingularPair) {
    std::mt19937_64 gen(41);
    const Matrix x = oracle::random_matrix(4, 3, gen);
    const SvdFactors f = svd(x);
    const Matrix want = f.u.col(0) * f.v.col(0).transpose();
    EXPECT_LE((project_htau(x, 1.0) - want).norm(), 1e-9);
    EXPECT_NEAR(lstar_rank(project_htau(x, 1.0)), 1.0, 1e-9);
}

TEST(ProjectHtau, MatchesAngleGridOnTwoSingularValues) {
    const Vector sigma = Eigen::Vector2d(3.0, 1.0) / std::sqrt(10.0);
    const double tau = 1.5;
    double best = -1.0;
    Eigen::Vector2d best_s;
    const int steps = 200000;
    for (int i = 0; i <= steps; ++i) {
        const double t = 0.25 * std::numbers::pi * i / steps;  // s1 >= s2 >= 0
        const Eigen::Vector2d s(std::cos(t), std::sin(t));
        if (s.sum() > std::sqrt(tau)) continue;
        const double v = s.dot(sigma);
        if (v > best) {
            best = v;
            best_s = s;
        }
    }
    const Vector got = project_sigma_htau(sigma, tau);
    EXPECT_LE((got - best_s).norm(), 1e-5);
    EXPECT_NEAR(got.norm(), 1.0, 1e-12);
    EXPECT_LE(got.sum(), std::sqrt(tau) * (1 + 1e-12));
}

TEST(ProjectHtau, AlwaysFeasible) {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        const Matrix x = oracle::random_matrix(5, 6, gen);
        const double tau = 1.0 + 4.0 * u(gen);
        const Matrix p = project_htau(x, tau);
        EXPECT_NEAR(p.norm(), 1.0, 1e-9);
        EXPECT_LE(lstar_rank(p), tau * (1 + 1e-9));
    }
    EXPECT_THROW(project_htau(Matrix::Zero(2, 2), 1.5), std::domain_error);
    EXPECT_THROW(project_htau(Matrix::Identity(2, 2), 2.5), std::invalid_argument);
    EXPECT_THROW(project_htau(Matrix::Identity(2, 2), 0.5), std::invalid_argument);
}

TEST(EstimateCmsv, IsometryGivesOne) {
    const auto op = standard_basis_operator(3, 3);
    for (double tau : {1.0, 2.0, 3.0})
        for (auto d : {Direction::min, Direction::max}) {
            const auto e = estimate_cmsv(op, tau, d, 4, 1);
            EXPECT_NEAR(e.value, 1.0, 1e-9);
            EXPECT_EQ(e.evidence, evidence_for(d));
        }
}

TEST(EstimateCmsv, RankOneNullSpaceIsFound) {
    // every A_k vanishes at (0, 0), so e_1 e_1^T is a feasible zero of ||A(X)||
    std::vector<Matrix> mats = gaussian_op(2, 3, 4, 5).matrices();
    for (auto& a : mats) a(0, 0) = 0.0;
    const MeasurementOperator op(mats);
    const auto e = estimate_cmsv(op, 1.0, Direction::min, 32, 6);
    EXPECT_LE(e.value, 1e-6);
}

TEST(EstimateCmsv, WitnessInvariantsAndValue) {
    const auto op = gaussian_op(3, 4, 10, 7);
    for (double tau : {1.0, 1.7, 3.0})
        for (auto d : {Direction::min, Direction::max}) {
            const auto e = estimate_cmsv(op, tau, d, 8, 8);
            EXPECT_NEAR(e.witness.norm(), 1.0, 1e-9);
            EXPECT_LE(lstar_rank(e.witness), tau * (1 + 1e-9));
            EXPECT_EQ(e.value, apply(op, e.witness).norm());
            EXPECT_EQ(e.per_start_values.size(), 8u);
            for (double v : e.per_start_values)
                EXPECT_TRUE(d == Direction::min ? e.value <= v : e.value >= v);
        }
    EXPECT_THROW(estimate_cmsv(op, 3.5, Direction::min, 1, 0), std::invalid_argument);
    EXPECT_THROW(estimate_cmsv(op, 2.0, Direction::min, 0, 0), std::invalid_argument);
}

TEST(EstimateCmsv, DeterministicUnderSeed) {
    const auto op = gaussian_op(3, 3, 6, 9);
    const auto a = estimate_cmsv(op, 2.0, Direction::min, 6, 10);
    const auto b = estimate_cmsv(op, 2.0, Direction::min, 6, 10);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.witness, b.witness);
}

TEST(EstimateCmsv, AgreesWithBruteForceOnTwoByTwo) {
    for (std::uint64_t s = 0; s < 4; ++s) {
        const auto op = gaussian_op(2, 2, 3, 50 + s);
        for (double tau : {1.0, 1.3, 2.0})
            for (auto d : {Direction::min, Direction::max}) {
                const auto e = estimate_cmsv(op, tau, d, 32, 11);
                const auto b = brute_force_cmsv(op, tau, d, 100000, 12);
                // at an exact zero the relative criterion is vacuous
                EXPECT_LE(std::abs(e.value - b.value), std::max(0.02 * b.value, 1e-6))
                    << "tau=" << tau << " dir=" << to_string(d);
            }
    }
}

TEST(EstimateCmsv, ScalingIsExactForPowersOfTwo) {
    const auto op = gaussian_op(3, 3, 7, 13);
    for (double tau : {1.0, 2.0})
        for (auto d : {Direction::min, Direction::max}) {
            const auto base = estimate_cmsv(op, tau, d, 4, 14);
            for (double c : {0.25, 2.0, 8.0}) {
                const auto sc = estimate_cmsv(scale(op, c), tau, d, 4, 14);
                EXPECT_EQ(sc.value, c * base.value);
                EXPECT_EQ(sc.witness, base.witness);
            }
            const auto three = estimate_cmsv(scale(op, 3.0), tau, d, 4, 14);
            EXPECT_NEAR(three.value, 3.0 * base.value, 1e-6 * base.value);
        }
}

TEST(BruteForce, IsometryAndLimits) {
    const auto op = standard_basis_operator(2, 2);
    for (auto d : {Direction::min, Direction::max})
        EXPECT_NEAR(brute_force_cmsv(op, 1.5, d, 10000, 1).value, 1.0, 1e-3);
    EXPECT_THROW(brute_force_cmsv(standard_basis_operator(2, 5), 1.0, Direction::min, 10000, 1),
                 std::invalid_argument);
    EXPECT_THROW(brute_force_cmsv(op, 1.0, Direction::min, 9999, 1), std::invalid_argument);
}

TEST(BruteForce, FullTauMatchesVectorizedSingularValues) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto op = gaussian_op(2, 2, 5, 60 + s);
        const auto [lo, hi] = oracle::extreme_singular_values(op.matrices());
        EXPECT_NEAR(brute_force_cmsv(op, 2.0, Direction::min, 20000, 2).value, lo, 0.01 * lo);
        EXPECT_NEAR(brute_force_cmsv(op, 2.0, Direction::max, 20000, 2).value, hi, 0.01 * hi);
    }
}

TEST(BruteForce, MonotoneInTau) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto op = gaussian_op(2, 2, 4, 70 + s);
        double prev_min = std::numeric_limits<double>::infinity(), prev_max = 0.0;
        for (double tau : {1.0, 1.5, 2.0}) {
            const double lo = brute_force_cmsv(op, tau, Direction::min, 20000, 3).value;
            const double hi = brute_force_cmsv(op, tau, Direction::max, 20000, 3).value;
            EXPECT_LE(lo, prev_min * (1 + 1e-6));
            EXPECT_GE(hi, prev_max * (1 - 1e-6));
            prev_min = lo;
            prev_max = hi;
        }
    }
}

TEST(BruteForce, LipschitzOnSharedSamples) {
    std::mt19937_64 gen(43);
    for (int t = 0; t < 10; ++t) {
        const auto a = gaussian_op(2, 2, 3, 80 + t);
        std::vector<Matrix> pert;
        for (const auto& m : a.matrices()) pert.push_back(m + 0.1 * oracle::random_matrix(2, 2, gen));
        const MeasurementOperator b(pert);
        const double d = operator_distance(a, b);
        for (auto dir : {Direction::min, Direction::max}) {
            const double va = brute_force_cmsv(a, 1.4, dir, 10000, 5, false).value;
            const double vb = brute_force_cmsv(b, 1.4, dir, 10000, 5, false).value;
            EXPECT_LE(std::abs(va - vb), d + 1e-9);
        }
    }
}

TEST(EstimateRcsv, FullRankMatchesVectorizedSingularValues) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto op = gaussian_op(2, 2, 5, 90 + s);
        const auto [lo, hi] = oracle::extreme_singular_values(op.matrices());
        EXPECT_NEAR(estimate_rcsv(op, 2, Direction::min, 8, 1).value, lo, 0.01 * lo);
        EXPECT_NEAR(estimate_rcsv(op, 2, Direction::max, 8, 1).value, hi, 0.01 * hi);
    }
}

TEST(EstimateRcsv, RankOneMatchesAngleGrid) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto op = gaussian_op(2, 2, 3, 100 + s);
        const auto [lo, hi] = rank_one_grid(op, 1500);
        const auto emin = estimate_rcsv(op, 1, Direction::min, 16, 2);
        const auto emax = estimate_rcsv(op, 1, Direction::max, 16, 2);
        EXPECT_LE(std::abs(emin.value - lo), std::max(0.01 * lo, 1e-3));
        EXPECT_NEAR(emax.value, hi, 0.01 * hi);
        EXPECT_EQ(numerical_rank(emin.witness, 1e-9), 1);
        EXPECT_NEAR(emin.witness.norm(), 1.0, 1e-12);
    }
}

TEST(EstimateRcsv, IsometryAndArguments) {
    const auto op = standard_basis_operator(3, 2);
    for (int r : {1, 2})
        for (auto d : {Direction::min, Direction::max})
            EXPECT_NEAR(estimate_rcsv(op, r, d, 2, 3).value, 1.0, 1e-9);
    EXPECT_THROW(estimate_rcsv(op, 3, Direction::min, 1, 0), std::invalid_argument);
    EXPECT_THROW(estimate_rcsv(op, 0, Direction::min, 1, 0), std::invalid_argument);
}

TEST(Mric, Formula) {
    EXPECT_EQ(mric_upper_bound(1.0, 1.0), 0.0);
    EXPECT_NEAR(mric_upper_bound(0.8, 1.1), 0.36, 1e-15);
    EXPECT_THROW(mric_upper_bound(1.2, 1.1), std::invalid_argument);
    EXPECT_THROW(mric_upper_bound(-0.1, 1.1), std::invalid_argument);
}

TEST(Sandwich, RankConstrainedInsideLstarConstrained) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto op = gaussian_op(2, 2, 4, 110 + s);
        const double rho_min = brute_force_cmsv(op, 1.0, Direction::min, 100000, 4).value;
        const double rho_max = brute_force_cmsv(op, 1.0, Direction::max, 100000, 4).value;
        const double nu_min = estimate_rcsv(op, 1, Direction::min, 16, 5).value;
        const double nu_max = estimate_rcsv(op, 1, Direction::max, 16, 5).value;
        EXPECT_LE(rho_min, nu_min * 1.02);
        EXPECT_LE(nu_min, nu_max);
        EXPECT_LE(nu_max, rho_max * 1.02);
        EXPECT_LE(mric_from_rcsv(nu_min, nu_max), mric_upper_bound(rho_min, rho_max) * 1.04 + 1e-12);
    }
}
