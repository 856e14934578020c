#pragma once

#include <lstar/core/dense.hpp>
#include <lstar/measurement/operator.hpp>
#include <lstar/random/rng.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lstar {

enum class EnsembleKind { gaussian, rademacher };

inline std::string to_string(EnsembleKind k) {
    return k == EnsembleKind::gaussian ? "gaussian" : "rademacher";
}

inline EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "gaussian") return EnsembleKind::gaussian;
    if (s == "rademacher") return EnsembleKind::rademacher;
    throw std::invalid_argument("unknown ensemble kind '" + s + "'");
}

/// Isotropic subgaussian operator ensemble: i.i.d. N(0,1) or +-1 entries,
/// optionally pre-scaled by 1/sqrt(m).
struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::gaussian;
    Eigen::Index n1 = 1;
    Eigen::Index n2 = 1;
    Eigen::Index m = 1;
    std::uint64_t seed = 0;
    bool normalize = false;
};

/// Entries are generated measurement by measurement, each matrix in
/// column-major order, from a single CounterRng keyed by spec.seed.
inline MeasurementOperator draw_operator(const EnsembleSpec& spec) {
    if (spec.n1 < 1 || spec.n2 < 1 || spec.m < 1)
        throw std::invalid_argument("draw_operator: dimensions must be positive");
    CounterRng rng(spec.seed);
    const double c = spec.normalize ? 1.0 / std::sqrt(static_cast<double>(spec.m)) : 1.0;
    std::vector<Matrix> mats;
    mats.reserve(static_cast<std::size_t>(spec.m));
    for (Eigen::Index k = 0; k < spec.m; ++k) {
        Matrix a(spec.n1, spec.n2);
        for (Eigen::Index j = 0; j < spec.n2; ++j)
            for (Eigen::Index i = 0; i < spec.n1; ++i)
                a(i, j) = c * (spec.kind == EnsembleKind::gaussian ? rng.normal() : rng.sign());
        mats.push_back(std::move(a));
    }
    return MeasurementOperator(std::move(mats));
}

/// Standard normal matrix.
inline Matrix draw_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
    Matrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = rng.normal();
    return a;
}

/// i.i.d. N(0, sigma^2) vector.
inline Vector draw_gaussian_noise(Eigen::Index m, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0)) throw std::invalid_argument("draw_gaussian_noise: sigma must be nonnegative");
    CounterRng rng(seed);
    Vector w(m);
    for (Eigen::Index k = 0; k < m; ++k) w(k) = sigma * rng.normal();
    return w;
}

/// Uniformly oriented vector with ||w||_2 = epsilon exactly (up to rounding),
/// i.e. on the boundary of the admissible noise ball.
inline Vector draw_bounded_noise(Eigen::Index m, double epsilon, std::uint64_t seed) {
    if (!(epsilon >= 0)) throw std::invalid_argument("draw_bounded_noise: epsilon must be nonnegative");
    if (epsilon == 0.0) return Vector::Zero(m);
    Vector g = draw_gaussian_noise(m, 1.0, seed);
    Vector w = g * (epsilon / g.norm());
    // keep ||w|| <= epsilon in floating point
    const double n = w.norm();
    if (n > epsilon) w *= epsilon / n * (1.0 - 1e-15);
    return w;
}

/// X = L R^T with Gaussian factors, rescaled so that ||X||_F = scale.
inline Matrix draw_low_rank_signal(Eigen::Index n1, Eigen::Index n2, Eigen::Index r, double scale,
                                   std::uint64_t seed) {
    if (r < 1 || r > std::min(n1, n2))
        throw std::invalid_argument("draw_low_rank_signal: rank must lie in [1, min(n1, n2)]");
    CounterRng rng(seed);
    const Matrix l = draw_gaussian_matrix(n1, r, rng);
    const Matrix rt = draw_gaussian_matrix(n2, r, rng);
    Matrix x = l * rt.transpose();
    x *= scale / x.norm();
    return x;
}

} // namespace lstar
