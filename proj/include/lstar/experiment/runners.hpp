#pragma once

#include <lstar/bounds/bounds.hpp>
#include <lstar/bounds/verify.hpp>
#include <lstar/cmsv/estimate.hpp>
#include <lstar/core/format.hpp>
#include <lstar/experiment/config.hpp>
#include <lstar/experiment/parallel.hpp>
#include <lstar/random/ensembles.hpp>
#include <lstar/random/rng.hpp>
#include <lstar/solvers/mbp.hpp>
#include <lstar/solvers/mds.hpp>
#include <lstar/solvers/mlasso.hpp>
#include <lstar/version.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

// Experiment drivers behind the lstar CLI. Each runner is a pure function of
// its config (and seed) that returns tables; writing them is a separate step.
//
// Seeding: trial t uses s = trial_seed(seed, t) = seed ^ t, and every random
// object inside the trial takes its own stream derive_seed(s, k), so results
// do not depend on the worker count or scheduling.

namespace lstar {

/// Output file could not be written (CLI exit code 4).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Cell = nlohmann::json;

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

struct RunOutput {
    std::vector<Table> tables;
    nlohmann::json summary = nlohmann::json::object();
    int nonconverged = 0;
};

/// Empirical counterpart of the concentration statement for one
/// (ensemble, m) point of a sweep.
struct MonteCarloSummary {
    EnsembleKind ensemble = EnsembleKind::gaussian;
    int m = 0;
    double tau = 0.0;
    double band = 0.0;
    std::vector<double> rho_min;
    std::vector<double> rho_max;
    double mean_min = 0.0, std_min = 0.0;
    double mean_max = 0.0, std_max = 0.0;
    double in_band_fraction = 0.0;
};

namespace detail {

inline std::string csv_cell(const Cell& c) {
    if (c.is_null()) return "";
    if (c.is_boolean()) return c.get<bool>() ? "1" : "0";
    if (c.is_number_float()) return format_double(c.get<double>());
    if (c.is_string()) return c.get<std::string>();
    return c.dump();
}

inline Cell num(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);  // JSON has no inf / nan
}

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return {mean, sd};
}

inline std::vector<Cell> bound_cells(const BoundReport& r) {
    return {to_string(r.algorithm), r.inputs.r,         num(r.inputs.epsilon), num(r.inputs.lambda),
            num(r.inputs.mu),       num(r.inputs.kappa), num(r.rho_estimate), num(r.rho_subscript),
            num(r.realized_error),  num(r.bound_value),  r.holds,              r.rho_onesided,
            num(r.slack_ratio),     num(r.cone.tau_h),   num(r.cone.tau_limit), r.cone.satisfied,
            num(r.cone.hc_nuclear), num(r.cone.h0_nuclear), num(r.cone.cone_factor), r.cone.cone_satisfied};
}

inline MeasurementScenario draw_trial_scenario(const ExperimentConfig& c, std::uint64_t s, NoiseKind kind,
                                               double epsilon, double sigma) {
    EnsembleSpec spec = c.ensemble;
    spec.seed = derive_seed(s, 0);
    MeasurementOperator op = draw_operator(spec);
    Matrix x = draw_low_rank_signal(spec.n1, spec.n2, c.signal.r, c.signal.scale, derive_seed(s, 1));
    NoiseSpec noise;
    noise.kind = kind;
    noise.epsilon = epsilon;
    noise.sigma = sigma;
    noise.seed = derive_seed(s, 2);
    return make_scenario(std::move(op), std::move(x), std::move(noise));
}

inline bool use_brute_force(const ExperimentConfig& c) {
    if (c.estimation.rho_method == "brute-force") return true;
    if (c.estimation.rho_method == "estimate") return false;
    return c.ensemble.n1 * c.ensemble.n2 <= 9;
}

inline int brute_samples(const ExperimentConfig& c) {
    return c.estimation.samples > 0 ? c.estimation.samples : 100000;
}

inline CmsvEstimate rho_min_at(const ExperimentConfig& c, const MeasurementOperator& op, double tau,
                               std::uint64_t seed) {
    if (use_brute_force(c)) return brute_force_cmsv(op, tau, Direction::min, brute_samples(c), seed);
    return estimate_cmsv(op, tau, Direction::min, c.estimation.starts, seed, c.estimation.solver);
}

} // namespace detail

/// Recovery trials with bound verification. Parameters left at 0 take their
/// oracle value from the realized noise w: epsilon = noise.epsilon for mBP,
/// lambda = ||A^*(w)||_2 for mDS, mu = ||A^*(w)||_2 / kappa for mLASSO.
inline RunOutput run_recover(const ExperimentConfig& c, int jobs = 1) {
    struct TrialResult {
        std::vector<Cell> row;
        bool converged = false, feasible = false, exact = false, holds = false, cone = false, tau_ok = false;
    };
    auto trial = [&](std::size_t t) {
        const std::uint64_t s = trial_seed(c.seed, t);
        const auto sc = detail::draw_trial_scenario(c, s, c.noise_kind, c.noise_epsilon, c.noise_sigma);
        BoundParams p = c.params;
        p.r = c.signal.r;
        const double noise_spec = operator_norm(adjoint(sc.op, sc.noise.realized_w));
        RecoveryResult res;
        double used = 0.0;
        switch (c.algorithm) {
        case Algorithm::mbp:
            if (p.epsilon == 0.0 && c.noise_kind == NoiseKind::bounded) p.epsilon = c.noise_epsilon;
            used = p.epsilon;
            res = solve_mbp(sc, p.epsilon, c.solver);
            break;
        case Algorithm::mds:
            if (p.lambda == 0.0) p.lambda = noise_spec;
            used = p.lambda;
            res = solve_mds(sc, p.lambda, c.solver);
            break;
        case Algorithm::mlasso:
            if (p.mu == 0.0) p.mu = noise_spec / p.kappa;
            if (!(p.mu > 0)) throw config_error("mlasso needs params.mu > 0 when the noise is zero");
            used = p.mu;
            res = solve_mlasso(sc, p.mu, c.solver);
            break;
        }
        const double need = required_subscript(c.algorithm, p, sc.op.rows(), sc.op.cols());
        const auto rho = detail::rho_min_at(c, sc.op, need, derive_seed(s, 3));
        BoundReport rep;
        if (rho.value > 0) {
            rep = verify_bound(sc, res, c.algorithm, p, rho);
        } else {
            // rho = 0: the bound is vacuous, the cone checks still apply
            auto unit = rho;
            unit.value = 1.0;
            rep = verify_bound(sc, res, c.algorithm, p, unit);
            rep.rho_estimate = 0.0;
            rep.bound_value = rep.slack_ratio = std::numeric_limits<double>::infinity();
            rep.holds = true;
            rep.rho_onesided = false;
        }
        const double rel = rep.realized_error / sc.x_true.norm();

        TrialResult out;
        out.converged = res.converged;
        out.feasible = res.feasible;
        out.exact = rel <= 1e-4;
        out.holds = rep.holds;
        out.cone = rep.cone.cone_satisfied;
        out.tau_ok = rep.cone.satisfied;
        out.row = {static_cast<std::uint64_t>(t), s,
                   res.converged, res.feasible,
                   res.iterations, detail::num(used),
                   detail::num(res.objective), detail::num(res.gap()),
                   detail::num(res.constraint_value), detail::num(rel)};
        for (auto& cell : detail::bound_cells(rep)) out.row.push_back(std::move(cell));
        return out;
    };
    const auto results = parallel_map(static_cast<std::size_t>(c.trials), jobs, trial);

    Table tab{"trials",
              {"trial", "seed", "converged", "feasible", "iterations", "param", "objective", "gap",
               "constraint_value", "relative_error"},
              {}};
    for (const auto& h : bound_report_csv_header()) tab.header.push_back(h);
    RunOutput out;
    int conv = 0, exact = 0, holds = 0, cone = 0, tau_ok = 0;
    for (const auto& r : results) {
        tab.rows.push_back(r.row);
        conv += r.converged;
        exact += r.exact;
        holds += r.holds;
        cone += r.converged && r.cone;
        tau_ok += r.converged && r.tau_ok;
    }
    out.nonconverged = c.trials - conv;
    out.summary = {{"trials", c.trials},        {"converged", conv},     {"exact_recoveries", exact},
                   {"bound_holds", holds},      {"cone_satisfied", cone}, {"tau_satisfied", tau_ok}};
    out.tables.push_back(std::move(tab));
    return out;
}

/// rho_tau^min / rho_tau^max estimates for each tau, with optional
/// brute-force comparison (n1 n2 <= 9) and rank-constrained estimates.
inline RunOutput run_cmsv(const ExperimentConfig& c, int jobs = 1) {
    const bool brute = c.estimation.samples > 0 && c.ensemble.n1 * c.ensemble.n2 <= 9;
    struct TrialResult {
        std::vector<std::vector<Cell>> rows;
        std::vector<std::vector<Cell>> mric;
    };
    auto trial = [&](std::size_t t) {
        const std::uint64_t s = trial_seed(c.seed, t);
        EnsembleSpec spec = c.ensemble;
        spec.seed = derive_seed(s, 0);
        const auto op = draw_operator(spec);
        TrialResult out;
        std::map<std::pair<double, int>, double> at;
        for (std::size_t i = 0; i < c.estimation.taus.size(); ++i) {
            const double tau = c.estimation.taus[i];
            for (auto dir : {Direction::min, Direction::max}) {
                const auto e = estimate_cmsv(op, tau, dir, c.estimation.starts, derive_seed(s, 10 + i),
                                             c.estimation.solver);
                at[{tau, static_cast<int>(dir)}] = e.value;
                double lo = e.per_start_values.front(), hi = lo;
                for (double v : e.per_start_values) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                Cell bf;
                if (brute)
                    bf = detail::num(brute_force_cmsv(op, tau, dir, c.estimation.samples, derive_seed(s, 1000 + i)).value);
                out.rows.push_back({static_cast<std::uint64_t>(t), detail::num(tau), to_string(dir),
                                    detail::num(e.value), to_string(e.evidence), e.starts, e.converged_starts,
                                    detail::num(lo), detail::num(hi), bf});
            }
        }
        if (c.estimation.r > 0) {
            const int r = c.estimation.r;
            const auto nmin = estimate_rcsv(op, r, Direction::min, c.estimation.starts, derive_seed(s, 5),
                                            c.estimation.solver);
            const auto nmax = estimate_rcsv(op, r, Direction::max, c.estimation.starts, derive_seed(s, 6),
                                            c.estimation.solver);
            const double rmin = estimate_cmsv(op, r, Direction::min, c.estimation.starts, derive_seed(s, 7),
                                              c.estimation.solver).value;
            const double rmax = estimate_cmsv(op, r, Direction::max, c.estimation.starts, derive_seed(s, 8),
                                              c.estimation.solver).value;
            out.mric.push_back({static_cast<std::uint64_t>(t), r, detail::num(rmin), detail::num(nmin.value),
                                detail::num(nmax.value), detail::num(rmax),
                                detail::num(mric_from_rcsv(nmin.value, nmax.value)),
                                detail::num(mric_upper_bound(rmin, std::max(rmin, rmax)))});
        }
        return out;
    };
    const auto results = parallel_map(static_cast<std::size_t>(c.trials), jobs, trial);
    RunOutput out;
    Table est{"estimates",
              {"trial", "tau", "direction", "value", "evidence", "starts", "converged_starts", "start_min",
               "start_max", "brute_force"},
              {}};
    Table mric{"mric",
               {"trial", "r", "rho_min", "nu_min", "nu_max", "rho_max", "delta_from_nu", "delta_bound_from_rho"},
               {}};
    for (const auto& r : results) {
        for (const auto& row : r.rows) est.rows.push_back(row);
        for (const auto& row : r.mric) mric.rows.push_back(row);
    }
    out.summary = {{"trials", c.trials}, {"estimates", est.rows.size()}};
    out.tables.push_back(std::move(est));
    if (c.estimation.r > 0) out.tables.push_back(std::move(mric));
    return out;
}

/// Sweep over tau, ensembles and m: normalized operators A / sqrt(m),
/// estimates of rho_tau^min and rho_tau^max, and the fraction of trials with
/// both inside [1 - band, 1 + band]. Operators depend on (trial, m, ensemble)
/// only, so every tau sees the same draws.
inline std::vector<MonteCarloSummary> montecarlo_sweep(const ExperimentConfig& c, int jobs = 1) {
    const auto& taus = c.estimation.taus;
    const std::size_t nm = c.sweep.m_values.size(), ne = c.sweep.ensembles.size();
    const std::size_t nt = static_cast<std::size_t>(c.trials);
    const std::size_t total = taus.size() * ne * nm * nt;
    auto job = [&](std::size_t idx) {
        const std::size_t t = idx % nt, mi = (idx / nt) % nm, ki = (idx / (nt * nm)) % ne;
        const std::size_t ti = idx / (nt * nm * ne);
        const std::uint64_t s = trial_seed(c.seed, t);
        const auto kind = c.sweep.ensembles[ki];
        const Eigen::Index m = c.sweep.m_values[mi];
        const std::uint64_t op_seed =
            derive_seed(derive_seed(s, static_cast<std::uint64_t>(m)), static_cast<std::uint64_t>(kind));
        const auto op = draw_operator({kind, c.ensemble.n1, c.ensemble.n2, m, op_seed, true});
        const auto& sv = c.estimation.solver;
        const double lo = estimate_cmsv(op, taus[ti], Direction::min, c.estimation.starts, derive_seed(s, 7), sv).value;
        const double hi = estimate_cmsv(op, taus[ti], Direction::max, c.estimation.starts, derive_seed(s, 7), sv).value;
        return std::pair{lo, hi};
    };
    const auto vals = parallel_map(total, jobs, job);
    std::vector<MonteCarloSummary> out;
    for (std::size_t ti = 0; ti < taus.size(); ++ti)
        for (std::size_t ki = 0; ki < ne; ++ki)
            for (std::size_t mi = 0; mi < nm; ++mi) {
                MonteCarloSummary sm;
                sm.ensemble = c.sweep.ensembles[ki];
                sm.m = c.sweep.m_values[mi];
                sm.tau = taus[ti];
                sm.band = c.sweep.band;
                int inside = 0;
                for (std::size_t t = 0; t < nt; ++t) {
                    const auto [lo, hi] = vals[((ti * ne + ki) * nm + mi) * nt + t];
                    sm.rho_min.push_back(lo);
                    sm.rho_max.push_back(hi);
                    inside += lo >= 1.0 - sm.band && hi <= 1.0 + sm.band;
                }
                std::tie(sm.mean_min, sm.std_min) = detail::mean_std(sm.rho_min);
                std::tie(sm.mean_max, sm.std_max) = detail::mean_std(sm.rho_max);
                sm.in_band_fraction = static_cast<double>(inside) / static_cast<double>(nt);
                out.push_back(std::move(sm));
            }
    return out;
}

inline RunOutput run_montecarlo_cmsv(const ExperimentConfig& c, int jobs = 1) {
    const auto sweep = montecarlo_sweep(c, jobs);
    RunOutput out;
    Table per{"trials", {"tau", "ensemble", "m", "trial", "rho_min", "rho_max", "in_band", "mric_upper_bound"}, {}};
    Table sum{"summary",
              {"ensemble", "m", "tau", "band", "trials", "mean_min", "std_min", "mean_max", "std_max",
               "in_band_fraction"},
              {}};
    nlohmann::json trend = nlohmann::json::array();
    for (const auto& sm : sweep) {
        for (std::size_t t = 0; t < sm.rho_min.size(); ++t) {
            const double lo = sm.rho_min[t], hi = sm.rho_max[t];
            const bool in = lo >= 1.0 - sm.band && hi <= 1.0 + sm.band;
            per.rows.push_back({detail::num(sm.tau), to_string(sm.ensemble), sm.m, static_cast<std::uint64_t>(t), detail::num(lo),
                                detail::num(hi), in, detail::num(mric_upper_bound(lo, std::max(lo, hi)))});
        }
        sum.rows.push_back({to_string(sm.ensemble), sm.m, detail::num(sm.tau), detail::num(sm.band),
                            static_cast<int>(sm.rho_min.size()), detail::num(sm.mean_min), detail::num(sm.std_min),
                            detail::num(sm.mean_max), detail::num(sm.std_max), detail::num(sm.in_band_fraction)});
    }
    for (double tau : c.estimation.taus)
        for (auto kind : c.sweep.ensembles) {
            bool nondecreasing = true;
            double prev = -1.0;
            for (const auto& sm : sweep)
                if (sm.ensemble == kind && sm.tau == tau) {
                    nondecreasing = nondecreasing && sm.in_band_fraction >= prev;
                    prev = sm.in_band_fraction;
                }
            trend.push_back({{"tau", tau}, {"ensemble", to_string(kind)},
                             {"nondecreasing_in_m", nondecreasing}, {"final_fraction", prev}});
        }
    out.summary = {{"trend", trend}};
    out.tables.push_back(std::move(per));
    out.tables.push_back(std::move(sum));
    return out;
}

/// Bound ledger on an oracle-sized instance: for every noise level and
/// trial, mBP (epsilon) and mDS (lambda = ||A^*(w)||_2) errors against the
/// l*-CMSV bound with brute-force rho and the mRIC bound with delta estimated
/// from rank-constrained singular values at rank min(4r, n1, n2).
inline RunOutput run_bounds_ledger(const ExperimentConfig& c, int jobs = 1) {
    const auto n1 = c.ensemble.n1, n2 = c.ensemble.n2;
    const int r = c.signal.r;
    const int rank4 = static_cast<int>(std::min<Eigen::Index>(4 * r, std::min(n1, n2)));
    const double need = std::min(8.0 * r, static_cast<double>(std::min(n1, n2)));
    struct TrialResult {
        std::vector<std::vector<std::vector<Cell>>> per_level;
        int nonconverged = 0;
    };
    auto trial = [&](std::size_t t) {
        const std::uint64_t s = trial_seed(c.seed, t);
        EnsembleSpec spec = c.ensemble;
        spec.seed = derive_seed(s, 0);
        const auto op = draw_operator(spec);
        const Matrix x = draw_low_rank_signal(n1, n2, r, c.signal.scale, derive_seed(s, 1));
        const double rho = brute_force_cmsv(op, need, Direction::min, detail::brute_samples(c), derive_seed(s, 3)).value;
        const double nu_min = estimate_rcsv(op, rank4, Direction::min, c.estimation.starts, derive_seed(s, 4),
                                            c.estimation.solver).value;
        const double nu_max = estimate_rcsv(op, rank4, Direction::max, c.estimation.starts, derive_seed(s, 4),
                                            c.estimation.solver).value;
        const double delta = mric_from_rcsv(nu_min, nu_max);
        TrialResult out;
        for (double eps : c.noise_levels) {
            NoiseSpec noise = NoiseSpec::bounded(eps, derive_seed(s, 2));
            const auto sc = make_scenario(op, x, noise);
            std::vector<std::vector<Cell>> rows;
            for (auto alg : {Algorithm::mbp, Algorithm::mds}) {
                const double lambda = operator_norm(adjoint(op, sc.noise.realized_w));
                const RecoveryResult res =
                    alg == Algorithm::mbp ? solve_mbp(sc, eps, c.solver) : solve_mds(sc, lambda, c.solver);
                out.nonconverged += !res.converged;
                const double err = (res.x_hat - x).norm();
                const double param = alg == Algorithm::mbp ? eps : lambda;
                Cell lbound, lslack, lholds;
                if (rho > 0) {
                    const double b = alg == Algorithm::mbp ? bound_mbp(eps, rho) : bound_mds(r, lambda, rho);
                    lbound = detail::num(b);
                    lslack = detail::num(b / std::max(err, 1e-12));
                    lholds = err <= b + 1e-6;
                }
                const auto mb = alg == Algorithm::mbp ? bound_mbp_mric(eps, delta) : bound_mds_mric(r, lambda, delta);
                const Cell mbound = mb ? detail::num(*mb) : Cell("inapplicable");
                const Cell mslack = mb ? detail::num(*mb / std::max(err, 1e-12)) : Cell();
                rows.push_back({to_string(alg), detail::num(eps), static_cast<std::uint64_t>(t), detail::num(param),
                                res.converged, detail::num(err), detail::num(rho), detail::num(need), lbound,
                                lslack, lholds, detail::num(delta), rank4, mbound, mslack});
            }
            out.per_level.push_back(std::move(rows));
        }
        return out;
    };
    const auto results = parallel_map(static_cast<std::size_t>(c.trials), jobs, trial);
    RunOutput out;
    Table led{"ledger",
              {"algorithm", "noise_level", "trial", "param", "converged", "realized_error", "rho_estimate",
               "rho_subscript", "lstar_bound", "lstar_slack", "lstar_holds", "delta_hat", "delta_rank",
               "mric_bound", "mric_slack"},
              {}};
    int applicable = 0, rows = 0;
    for (std::size_t e = 0; e < c.noise_levels.size(); ++e)
        for (const auto& tr : results)
            for (const auto& row : tr.per_level[e]) {
                led.rows.push_back(row);
                applicable += !row[13].is_string();
                ++rows;
            }
    for (const auto& tr : results) out.nonconverged += tr.nonconverged;
    out.summary = {{"rows", rows}, {"mric_applicable_rows", applicable}};
    out.tables.push_back(std::move(led));
    return out;
}

/// Distribution of ||A^*(w)||_2 for w ~ N(0, sigma^2 I), the lambda it
/// suggests for mDS (the configured quantile), mu = lambda / kappa for
/// mLASSO, and the fraction of fresh noise draws for which X_true is then
/// mDS-feasible.
inline RunOutput run_noise_calibration(const ExperimentConfig& c, int jobs = 1) {
    EnsembleSpec spec = c.ensemble;
    spec.seed = derive_seed(c.seed, 0);
    const auto op = draw_operator(spec);
    const auto& cal = c.calibration;
    const auto rec = noise_operator_bound(op, cal.sigma, cal.c, c.trials, derive_seed(c.seed, 1));
    const double lambda = rec.quantile(cal.quantile);
    const Matrix vm = op.vectorized();
    const std::uint64_t holdout_seed = derive_seed(c.seed, 2);
    const auto fresh = parallel_map(static_cast<std::size_t>(cal.holdout_trials), jobs, [&](std::size_t t) {
        const Vector w = draw_gaussian_noise(op.size(), cal.sigma, derive_seed(holdout_seed, t));
        return operator_norm(unvec(vm.transpose() * w, op.rows(), op.cols()));
    });
    int feasible = 0;
    for (double v : fresh) feasible += v <= lambda;
    const double frac = cal.holdout_trials > 0 ? static_cast<double>(feasible) / cal.holdout_trials : 0.0;

    RunOutput out;
    Table vals{"values", {"trial", "value", "exceeds"}, {}};
    for (std::size_t t = 0; t < rec.values.size(); ++t)
        vals.rows.push_back({static_cast<std::uint64_t>(t), detail::num(rec.values[t]), rec.values[t] > rec.threshold});
    Table sum{"summary",
              {"sigma", "c", "threshold", "trials", "exceed_fraction", "q50", "q90", "q95", "q99", "quantile",
               "lambda", "kappa", "mu", "holdout_trials", "holdout_feasible_fraction"},
              {}};
    const double mu = lambda / c.params.kappa;
    sum.rows.push_back({detail::num(cal.sigma), detail::num(cal.c), detail::num(rec.threshold), c.trials,
                        detail::num(rec.exceed_fraction), detail::num(rec.quantile(0.5)),
                        detail::num(rec.quantile(0.9)), detail::num(rec.quantile(0.95)),
                        detail::num(rec.quantile(0.99)), detail::num(cal.quantile), detail::num(lambda),
                        detail::num(c.params.kappa), detail::num(mu), cal.holdout_trials, detail::num(frac)});
    out.summary = {{"lambda", detail::num(lambda)}, {"mu", detail::num(mu)}, {"holdout_feasible_fraction", frac}};
    out.tables.push_back(std::move(vals));
    out.tables.push_back(std::move(sum));
    return out;
}

inline RunOutput run_experiment(const ExperimentConfig& c, int jobs = 1) {
    switch (c.kind) {
    case ExperimentKind::recover: return run_recover(c, jobs);
    case ExperimentKind::cmsv: return run_cmsv(c, jobs);
    case ExperimentKind::montecarlo: return run_montecarlo_cmsv(c, jobs);
    case ExperimentKind::bounds: return run_bounds_ledger(c, jobs);
    case ExperimentKind::noise_calibration: return run_noise_calibration(c, jobs);
    }
    throw config_error("unknown experiment kind");
}

/// CSV text of one table. Every row ends with the config hash and the
/// library version so each file identifies the run that produced it.
inline std::string table_to_csv(const Table& t, const std::string& hash) {
    std::vector<std::string> header = t.header;
    header.push_back("config_hash");
    header.push_back("version");
    std::string out = csv_line(header);
    for (const auto& row : t.rows) {
        std::vector<std::string> f;
        f.reserve(row.size() + 2);
        for (const auto& c : row) f.push_back(detail::csv_cell(c));
        f.push_back(hash);
        f.push_back(kVersion);
        out += csv_line(f);
    }
    return out;
}

inline nlohmann::json run_to_json(const ExperimentConfig& c, const RunOutput& r) {
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& t : r.tables) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json o = nlohmann::json::object();
            for (std::size_t i = 0; i < row.size(); ++i) o[t.header[i]] = row[i];
            rows.push_back(std::move(o));
        }
        tables[t.name] = std::move(rows);
    }
    nlohmann::json cfg = config_to_json(c);
    cfg.erase("output_path");  // where the file lives is not part of its content
    return {{"config_hash", config_hash(c)}, {"version", kVersion},       {"config", cfg},
            {"summary", r.summary},          {"nonconverged", r.nonconverged}, {"tables", tables}};
}

/// Writes <dir>/<kind>_<table>.csv per table, or <dir>/<kind>.json. Returns
/// the paths written.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& c, const RunOutput& r,
                                                         const std::string& format) {
    namespace fs = std::filesystem;
    const fs::path dir(c.output_path);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    auto write = [&](const fs::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot open '" + p.string() + "' for writing");
        f << text;
        f.close();
        if (!f) throw io_error("write to '" + p.string() + "' failed");
    };
    std::vector<fs::path> paths;
    const std::string stem = to_string(c.kind);
    if (format == "json") {
        paths.push_back(dir / (stem + ".json"));
        write(paths.back(), run_to_json(c, r).dump(2) + "\n");
    } else if (format == "csv") {
        const std::string hash = config_hash(c);
        for (const auto& t : r.tables) {
            paths.push_back(dir / (stem + "_" + t.name + ".csv"));
            write(paths.back(), table_to_csv(t, hash));
        }
    } else {
        throw config_error("format must be csv or json");
    }
    return paths;
}

} // namespace lstar
