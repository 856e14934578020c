#pragma once

#include <lstar/bounds/bounds.hpp>
#include <lstar/cmsv/estimate.hpp>
#include <lstar/core/format.hpp>
#include <lstar/core/norms.hpp>
#include <lstar/measurement/scenario.hpp>
#include <lstar/random/ensembles.hpp>
#include <lstar/solvers/common.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lstar {

enum class Algorithm { mbp, mds, mlasso };

inline std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::mbp: return "mbp";
    case Algorithm::mds: return "mds";
    case Algorithm::mlasso: return "mlasso";
    }
    return "mbp";
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "mbp") return Algorithm::mbp;
    if (s == "mds") return Algorithm::mds;
    if (s == "mlasso") return Algorithm::mlasso;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

struct BoundParams {
    int r = 1;
    double epsilon = 0.0;  // mbp
    double lambda = 0.0;   // mds
    double mu = 0.0;       // mlasso
    double kappa = 0.5;    // mlasso, ||A^*(w)||_2 <= kappa mu
};

struct ConeCheck {
    double tau_h = 0.0;      // l*-rank of H (0 when H = 0)
    double tau_limit = 0.0;  // 8r, or 8r / (1 - kappa)^2
    bool satisfied = true;
    double hc_nuclear = 0.0;
    double h0_nuclear = 0.0;
    double cone_factor = 1.0;  // 1, or (1 + kappa) / (1 - kappa)
    bool cone_satisfied = true;
};

struct BoundReport {
    Algorithm algorithm = Algorithm::mbp;
    double realized_error = 0.0;
    double bound_value = 0.0;
    BoundParams inputs;
    double rho_estimate = 0.0;
    double rho_subscript = 0.0;
    bool holds = false;
    /// rho is only an upper bound on the true rho_min, so the computed bound
    /// is optimistic; a failed check is reported, not treated as a violation.
    bool rho_onesided = true;
    double slack_ratio = 0.0;
    ConeCheck cone;
};

/// l*-rank level required by each algorithm's bound, capped at min(n1, n2)
/// (every matrix satisfies tau(X) <= min(n1, n2)).
inline double required_subscript(Algorithm a, const BoundParams& p, Eigen::Index n1, Eigen::Index n2) {
    const double cap = static_cast<double>(std::min(n1, n2));
    const double raw = a == Algorithm::mlasso ? lasso_subscript(p.r, p.kappa) : 8.0 * p.r;
    return std::min(raw, cap);
}

/// Error matrix H = X_hat - X_true checked against the bound and against the
/// cone / l*-rank conditions. `tol` is the absolute slack applied to the
/// bound, the cone inequality and the tau(H) limit.
inline BoundReport verify_bound(const MeasurementScenario& scenario, const RecoveryResult& result,
                                Algorithm algorithm, const BoundParams& params,
                                const CmsvEstimate& rho_estimate, double tol = 1e-6) {
    const auto n1 = scenario.op.rows(), n2 = scenario.op.cols();
    const double need = required_subscript(algorithm, params, n1, n2);
    if (std::abs(rho_estimate.tau - need) > 1e-12 * need)
        throw std::invalid_argument("verify_bound: rho estimate taken at tau = " +
                                    format_double(rho_estimate.tau) + ", bound needs " + format_double(need));
    if (rho_estimate.direction != Direction::min)
        throw std::invalid_argument("verify_bound: bounds need a minimal singular value estimate");

    BoundReport rep;
    rep.algorithm = algorithm;
    rep.inputs = params;
    rep.rho_estimate = rho_estimate.value;
    rep.rho_subscript = need;

    const Matrix h = result.x_hat - scenario.x_true;
    rep.realized_error = h.norm();
    switch (algorithm) {
    case Algorithm::mbp: rep.bound_value = bound_mbp(params.epsilon, rho_estimate.value); break;
    case Algorithm::mds: rep.bound_value = bound_mds(params.r, params.lambda, rho_estimate.value); break;
    case Algorithm::mlasso:
        rep.bound_value = bound_mlasso(params.r, params.mu, params.kappa, rho_estimate.value);
        break;
    }
    rep.holds = rep.realized_error <= rep.bound_value + tol;
    rep.rho_onesided = !rep.holds;
    rep.slack_ratio = rep.bound_value / std::max(rep.realized_error, 1e-12);

    ConeCheck& c = rep.cone;
    c.tau_limit = algorithm == Algorithm::mlasso ? lasso_subscript(params.r, params.kappa) : 8.0 * params.r;
    c.cone_factor = algorithm == Algorithm::mlasso ? (1.0 + params.kappa) / (1.0 - params.kappa) : 1.0;
    if (rep.realized_error > 0) {
        c.tau_h = lstar_rank(h);
        const ErrorDecomposition d = decompose_error(h, scenario.x_true);
        c.hc_nuclear = nuclear_norm(d.hc);
        c.h0_nuclear = nuclear_norm(d.h0);
    }
    c.satisfied = c.tau_h <= c.tau_limit + tol;
    c.cone_satisfied = c.hc_nuclear <= c.cone_factor * c.h0_nuclear + tol;
    return rep;
}

inline nlohmann::json bound_report_to_json(const BoundReport& r) {
    nlohmann::json j;
    j["algorithm"] = to_string(r.algorithm);
    j["realized_error"] = r.realized_error;
    j["bound_value"] = r.bound_value;
    j["bound_inputs"] = {{"r", r.inputs.r},         {"epsilon", r.inputs.epsilon},
                         {"lambda", r.inputs.lambda}, {"mu", r.inputs.mu},
                         {"kappa", r.inputs.kappa},  {"rho_estimate", r.rho_estimate},
                         {"rho_subscript", r.rho_subscript}};
    j["holds"] = r.holds;
    j["rho_onesided"] = r.rho_onesided;
    j["slack_ratio"] = r.slack_ratio;
    j["cone_check"] = {{"tau_H", r.cone.tau_h},
                       {"tau_limit", r.cone.tau_limit},
                       {"satisfied", r.cone.satisfied},
                       {"hc_nuclear", r.cone.hc_nuclear},
                       {"h0_nuclear", r.cone.h0_nuclear},
                       {"cone_factor", r.cone.cone_factor},
                       {"cone_satisfied", r.cone.cone_satisfied}};
    return j;
}

/// Column order of bound_report_csv_row.
inline std::vector<std::string> bound_report_csv_header() {
    return {"algorithm", "r",           "epsilon",       "lambda",    "mu",
            "kappa",     "rho_estimate", "rho_subscript", "realized_error", "bound_value",
            "holds",     "rho_onesided", "slack_ratio",   "tau_H",     "tau_limit",
            "tau_satisfied", "hc_nuclear", "h0_nuclear", "cone_factor", "cone_satisfied"};
}

inline std::vector<std::string> bound_report_csv_row(const BoundReport& r) {
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    return {to_string(r.algorithm),          std::to_string(r.inputs.r),
            format_double(r.inputs.epsilon), format_double(r.inputs.lambda),
            format_double(r.inputs.mu),      format_double(r.inputs.kappa),
            format_double(r.rho_estimate),   format_double(r.rho_subscript),
            format_double(r.realized_error), format_double(r.bound_value),
            b(r.holds),                      b(r.rho_onesided),
            format_double(r.slack_ratio),    format_double(r.cone.tau_h),
            format_double(r.cone.tau_limit), b(r.cone.satisfied),
            format_double(r.cone.hc_nuclear), format_double(r.cone.h0_nuclear),
            format_double(r.cone.cone_factor), b(r.cone.cone_satisfied)};
}

/// Empirical distribution of ||A^*(w)||_2 for w ~ N(0, sigma^2 I_m).
struct NoiseOperatorRecord {
    double sigma = 0.0;
    double c = 0.0;
    double threshold = 0.0;  // c sqrt(n2) sigma, n2 = max(n1, n2)
    std::vector<double> values;
    double exceed_fraction = 0.0;

    /// Linear-interpolation quantile (type 7) of the recorded values.
    double quantile(double q) const {
        if (values.empty()) return 0.0;
        std::vector<double> s = values;
        std::sort(s.begin(), s.end());
        const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, s.size() - 1);
        return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
    }
};

/// Trial t uses noise seed derive_seed(seed, t), so runs at different sigma
/// share their underlying normal draws.
inline NoiseOperatorRecord noise_operator_bound(const MeasurementOperator& op, double sigma, double c,
                                                int trials, std::uint64_t seed) {
    if (!(sigma >= 0)) throw std::invalid_argument("noise_operator_bound: sigma must be nonnegative");
    if (trials < 1) throw std::invalid_argument("noise_operator_bound: trials must be >= 1");
    NoiseOperatorRecord rec;
    rec.sigma = sigma;
    rec.c = c;
    const double n2 = static_cast<double>(std::max(op.rows(), op.cols()));
    rec.threshold = c * std::sqrt(n2) * sigma;
    const Matrix vm = op.vectorized();
    int exceed = 0;
    for (int t = 0; t < trials; ++t) {
        const Vector w = draw_gaussian_noise(op.size(), sigma, derive_seed(seed, static_cast<std::uint64_t>(t)));
        const double v = sigma == 0.0 ? 0.0 : operator_norm(unvec(vm.transpose() * w, op.rows(), op.cols()));
        rec.values.push_back(v);
        if (v > rec.threshold) ++exceed;
    }
    rec.exceed_fraction = static_cast<double>(exceed) / trials;
    return rec;
}

} // namespace lstar
