#pragma once

#include <lstar/core/dense.hpp>
#include <lstar/measurement/operator.hpp>
#include <lstar/random/ensembles.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lstar {

enum class NoiseKind { none, bounded, gaussian };

inline std::string to_string(NoiseKind k) {
    switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::bounded: return "bounded";
    case NoiseKind::gaussian: return "gaussian";
    }
    return "none";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "none") return NoiseKind::none;
    if (s == "bounded") return NoiseKind::bounded;
    if (s == "gaussian") return NoiseKind::gaussian;
    throw std::invalid_argument("unknown noise kind '" + s + "'");
}

/// Noise model plus the realized vector w. Bounded noise is drawn on the
/// sphere of radius epsilon; Gaussian noise is i.i.d. N(0, sigma^2).
struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double epsilon = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    Vector realized_w;

    static NoiseSpec none() { return {}; }
    static NoiseSpec bounded(double epsilon, std::uint64_t seed) {
        return {NoiseKind::bounded, epsilon, 0.0, seed, {}};
    }
    static NoiseSpec gaussian(double sigma, std::uint64_t seed) {
        return {NoiseKind::gaussian, 0.0, sigma, seed, {}};
    }
};

inline Vector realize_noise(const NoiseSpec& spec, Eigen::Index m) {
    switch (spec.kind) {
    case NoiseKind::none: return Vector::Zero(m);
    case NoiseKind::bounded: return draw_bounded_noise(m, spec.epsilon, spec.seed);
    case NoiseKind::gaussian: return draw_gaussian_noise(m, spec.sigma, spec.seed);
    }
    return Vector::Zero(m);
}

/// y = A(x_true) + w.
struct MeasurementScenario {
    MeasurementOperator op;
    Matrix x_true;
    NoiseSpec noise;
    Vector y;
};

/// Draws w from the noise spec (recording it) and forms y.
inline MeasurementScenario make_scenario(MeasurementOperator op, Matrix x_true, NoiseSpec noise) {
    noise.realized_w = realize_noise(noise, op.size());
    Vector y = apply(op, x_true) + noise.realized_w;
    return {std::move(op), std::move(x_true), std::move(noise), std::move(y)};
}

/// Scenario with externally supplied data y and no known signal.
inline MeasurementScenario observed_scenario(MeasurementOperator op, Vector y) {
    if (y.size() != op.size()) throw std::invalid_argument("observed_scenario: y length must equal m");
    Matrix zero = Matrix::Zero(op.rows(), op.cols());
    NoiseSpec noise;
    noise.realized_w = Vector::Zero(op.size());
    return {std::move(op), std::move(zero), std::move(noise), std::move(y)};
}

} // namespace lstar
