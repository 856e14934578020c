#pragma once

#include <lstar/bounds/verify.hpp>
#include <lstar/core/format.hpp>
#include <lstar/measurement/scenario.hpp>
#include <lstar/random/ensembles.hpp>
#include <lstar/solvers/common.hpp>
#include <lstar/version.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Experiment configuration: one JSON document per run, see
// schema/experiment.schema.json. Every field has a default, so a config only
// needs the keys it changes.

namespace lstar {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { recover, cmsv, montecarlo, bounds, noise_calibration };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::recover: return "recover";
    case ExperimentKind::cmsv: return "cmsv";
    case ExperimentKind::montecarlo: return "montecarlo";
    case ExperimentKind::bounds: return "bounds";
    case ExperimentKind::noise_calibration: return "noise-calibration";
    }
    return "recover";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "recover") return ExperimentKind::recover;
    if (s == "cmsv") return ExperimentKind::cmsv;
    if (s == "montecarlo") return ExperimentKind::montecarlo;
    if (s == "bounds") return ExperimentKind::bounds;
    if (s == "noise-calibration" || s == "noise-cal") return ExperimentKind::noise_calibration;
    throw config_error("unknown experiment kind '" + s + "'");
}

struct SignalSpec {
    int r = 1;
    double scale = 1.0;
};

/// rho estimation for bound checks and cmsv runs.
struct EstimationSpec {
    std::vector<double> taus{2.0};
    int r = 0;  // rank-constrained estimate as well when > 0
    int starts = 32;
    int samples = 0;  // brute-force oracle samples, 0 disables
    std::string rho_method = "auto";  // auto | estimate | brute-force
    SolverConfig solver{2000, 1e-7, 1e-6};
};

struct SweepSpec {
    std::vector<int> m_values{64, 128, 256, 512};
    std::vector<EnsembleKind> ensembles{EnsembleKind::gaussian};
    double band = 0.35;
};

struct CalibrationSpec {
    double sigma = 0.1;
    double c = 8.0;
    double quantile = 0.95;
    int holdout_trials = 200;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::recover;
    EnsembleSpec ensemble{EnsembleKind::gaussian, 8, 8, 48, 0, true};
    SignalSpec signal;
    NoiseKind noise_kind = NoiseKind::none;
    double noise_epsilon = 0.0;
    double noise_sigma = 0.0;
    Algorithm algorithm = Algorithm::mbp;
    BoundParams params;
    EstimationSpec estimation;
    SweepSpec sweep;
    std::vector<double> noise_levels{0.0, 0.01, 0.05, 0.1};
    CalibrationSpec calibration;
    int trials = 1;
    std::uint64_t seed = 0;
    std::string output_path = "out";
    SolverConfig solver;
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config key '") + key + "': " + e.what());
    }
}

inline nlohmann::json solver_to_json(const SolverConfig& s) {
    return {{"max_iters", s.max_iters},
            {"abs_tol", s.abs_tol},
            {"rel_tol", s.rel_tol},
            {"admm_rho", s.admm_rho},
            {"residual_balancing", s.residual_balancing},
            {"step_rule",
             {{"kind", s.step_rule.kind == StepRuleKind::fixed ? "fixed" : "backtracking"},
              {"t", s.step_rule.t},
              {"beta", s.step_rule.beta},
              {"t0", s.step_rule.t0}}}};
}

inline SolverConfig solver_from_json(const nlohmann::json& j, SolverConfig s) {
    s.max_iters = get_or(j, "max_iters", s.max_iters);
    s.abs_tol = get_or(j, "abs_tol", s.abs_tol);
    s.rel_tol = get_or(j, "rel_tol", s.rel_tol);
    s.admm_rho = get_or(j, "admm_rho", s.admm_rho);
    s.residual_balancing = get_or(j, "residual_balancing", s.residual_balancing);
    if (j.contains("step_rule")) {
        const auto& r = j.at("step_rule");
        const auto kind = get_or<std::string>(r, "kind", "fixed");
        if (kind == "fixed") s.step_rule = StepRule::fixed(get_or(r, "t", 0.0));
        else if (kind == "backtracking")
            s.step_rule = StepRule::backtracking(get_or(r, "beta", 0.5), get_or(r, "t0", 1.0));
        else throw config_error("solver.step_rule.kind must be 'fixed' or 'backtracking'");
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return s;
}

} // namespace detail

/// Canonical JSON form. Keys are sorted, so dump() is a stable byte string.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json ens = nlohmann::json::array();
    for (auto k : c.sweep.ensembles) ens.push_back(to_string(k));
    return {
        {"kind", to_string(c.kind)},
        {"ensemble",
         {{"kind", to_string(c.ensemble.kind)},
          {"n1", c.ensemble.n1},
          {"n2", c.ensemble.n2},
          {"m", c.ensemble.m},
          {"normalize", c.ensemble.normalize}}},
        {"signal", {{"r", c.signal.r}, {"scale", c.signal.scale}}},
        {"noise", {{"kind", to_string(c.noise_kind)}, {"epsilon", c.noise_epsilon}, {"sigma", c.noise_sigma}}},
        {"algorithm", to_string(c.algorithm)},
        {"params",
         {{"epsilon", c.params.epsilon}, {"lambda", c.params.lambda}, {"mu", c.params.mu}, {"kappa", c.params.kappa}}},
        {"estimation",
         {{"taus", c.estimation.taus},
          {"r", c.estimation.r},
          {"starts", c.estimation.starts},
          {"samples", c.estimation.samples},
          {"rho_method", c.estimation.rho_method},
          {"solver", detail::solver_to_json(c.estimation.solver)}}},
        {"sweep", {{"m", c.sweep.m_values}, {"ensembles", ens}, {"band", c.sweep.band}}},
        {"noise_levels", c.noise_levels},
        {"calibration",
         {{"sigma", c.calibration.sigma},
          {"c", c.calibration.c},
          {"quantile", c.calibration.quantile},
          {"holdout_trials", c.calibration.holdout_trials}}},
        {"trials", c.trials},
        {"seed", c.seed},
        {"output_path", c.output_path},
        {"solver", detail::solver_to_json(c.solver)},
    };
}

/// Checks ranges and cross-field consistency.
inline void validate_config(const ExperimentConfig& c) {
    auto fail = [](const std::string& m) { throw config_error(m); };
    const auto& e = c.ensemble;
    if (e.n1 < 1 || e.n2 < 1 || e.m < 1) fail("ensemble: n1, n2 and m must be positive");
    if (c.trials < 1) fail("trials must be >= 1");
    const int full = static_cast<int>(std::min(e.n1, e.n2));
    if (c.signal.r < 1 || c.signal.r > full) fail("signal.r must lie in [1, min(n1, n2)]");
    if (!(c.signal.scale > 0)) fail("signal.scale must be positive");
    if (!(c.noise_epsilon >= 0) || !(c.noise_sigma >= 0)) fail("noise: epsilon and sigma must be nonnegative");
    if (!(c.params.epsilon >= 0) || !(c.params.lambda >= 0) || !(c.params.mu >= 0))
        fail("params: epsilon, lambda and mu must be nonnegative");
    if (!(c.params.kappa > 0 && c.params.kappa < 1)) fail("params.kappa must lie in (0, 1)");
    const auto& est = c.estimation;
    if (est.starts < 1) fail("estimation.starts must be >= 1");
    if (est.samples != 0 && est.samples < 10000) fail("estimation.samples must be 0 or >= 10000");
    if (est.r < 0 || est.r > full) fail("estimation.r must lie in [0, min(n1, n2)]");
    if (est.taus.empty()) fail("estimation.taus must not be empty");
    for (double t : est.taus)
        if (!(t >= 1.0 && t <= full)) fail("estimation.taus entries must lie in [1, min(n1, n2)]");
    if (est.rho_method != "auto" && est.rho_method != "estimate" && est.rho_method != "brute-force")
        fail("estimation.rho_method must be auto, estimate or brute-force");
    if (est.rho_method == "brute-force" && e.n1 * e.n2 > 9) fail("brute-force rho needs n1 * n2 <= 9");
    if (c.sweep.m_values.empty() || c.sweep.ensembles.empty()) fail("sweep: m and ensembles must not be empty");
    for (int m : c.sweep.m_values)
        if (m < 1) fail("sweep.m entries must be positive");
    if (!(c.sweep.band > 0 && c.sweep.band < 1)) fail("sweep.band must lie in (0, 1)");
    if (c.noise_levels.empty()) fail("noise_levels must not be empty");
    for (double v : c.noise_levels)
        if (!(v >= 0)) fail("noise_levels entries must be nonnegative");
    if (c.kind == ExperimentKind::bounds && e.n1 * e.n2 > 9) fail("bounds ledger needs n1 * n2 <= 9");
    const auto& cal = c.calibration;
    if (!(cal.sigma >= 0) || !(cal.c > 0)) fail("calibration: sigma >= 0 and c > 0 required");
    if (!(cal.quantile >= 0 && cal.quantile <= 1)) fail("calibration.quantile must lie in [0, 1]");
    if (cal.holdout_trials < 0) fail("calibration.holdout_trials must be nonnegative");
    if (c.output_path.empty()) fail("output_path must not be empty");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    ExperimentConfig c;
    using detail::get_or;
    c.kind = experiment_kind_from_string(get_or<std::string>(j, "kind", to_string(c.kind)));
    try {
        if (j.contains("ensemble")) {
            const auto& e = j.at("ensemble");
            c.ensemble.kind = ensemble_kind_from_string(get_or<std::string>(e, "kind", to_string(c.ensemble.kind)));
            c.ensemble.n1 = get_or<Eigen::Index>(e, "n1", c.ensemble.n1);
            c.ensemble.n2 = get_or<Eigen::Index>(e, "n2", c.ensemble.n2);
            c.ensemble.m = get_or<Eigen::Index>(e, "m", c.ensemble.m);
            c.ensemble.normalize = get_or(e, "normalize", c.ensemble.normalize);
        }
        if (j.contains("signal")) {
            c.signal.r = get_or(j.at("signal"), "r", c.signal.r);
            c.signal.scale = get_or(j.at("signal"), "scale", c.signal.scale);
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            c.noise_kind = noise_kind_from_string(get_or<std::string>(n, "kind", to_string(c.noise_kind)));
            c.noise_epsilon = get_or(n, "epsilon", c.noise_epsilon);
            c.noise_sigma = get_or(n, "sigma", c.noise_sigma);
        }
        c.algorithm = algorithm_from_string(get_or<std::string>(j, "algorithm", to_string(c.algorithm)));
        if (j.contains("params")) {
            const auto& p = j.at("params");
            c.params.epsilon = get_or(p, "epsilon", c.params.epsilon);
            c.params.lambda = get_or(p, "lambda", c.params.lambda);
            c.params.mu = get_or(p, "mu", c.params.mu);
            c.params.kappa = get_or(p, "kappa", c.params.kappa);
        }
        if (j.contains("estimation")) {
            const auto& e = j.at("estimation");
            c.estimation.taus = get_or(e, "taus", c.estimation.taus);
            c.estimation.r = get_or(e, "r", c.estimation.r);
            c.estimation.starts = get_or(e, "starts", c.estimation.starts);
            c.estimation.samples = get_or(e, "samples", c.estimation.samples);
            c.estimation.rho_method = get_or(e, "rho_method", c.estimation.rho_method);
            if (e.contains("solver"))
                c.estimation.solver = detail::solver_from_json(e.at("solver"), c.estimation.solver);
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            c.sweep.m_values = get_or(s, "m", c.sweep.m_values);
            if (s.contains("ensembles")) {
                c.sweep.ensembles.clear();
                for (const auto& k : s.at("ensembles")) c.sweep.ensembles.push_back(ensemble_kind_from_string(k));
            }
            c.sweep.band = get_or(s, "band", c.sweep.band);
        }
        c.noise_levels = get_or(j, "noise_levels", c.noise_levels);
        if (j.contains("calibration")) {
            const auto& k = j.at("calibration");
            c.calibration.sigma = get_or(k, "sigma", c.calibration.sigma);
            c.calibration.c = get_or(k, "c", c.calibration.c);
            c.calibration.quantile = get_or(k, "quantile", c.calibration.quantile);
            c.calibration.holdout_trials = get_or(k, "holdout_trials", c.calibration.holdout_trials);
        }
        c.trials = get_or(j, "trials", c.trials);
        c.seed = get_or(j, "seed", c.seed);
        c.output_path = get_or(j, "output_path", c.output_path);
        if (j.contains("solver")) c.solver = detail::solver_from_json(j.at("solver"), c.solver);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    validate_config(c);
    return c;
}

/// FNV-1a of the canonical dump with output_path removed, as 16 hex digits.
/// Moving the output directory does not change the hash.
inline std::string config_hash(const ExperimentConfig& c) {
    nlohmann::json j = config_to_json(c);
    j.erase("output_path");
    return hex64(fnv1a64(j.dump()));
}

} // namespace lstar
