#include <lstar/experiment/runners.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNonConvergence = 3, kIoError = 4 };

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out;
    int jobs = 1;
    std::string format = "csv";
};

lstar::ExperimentConfig load_config(const Options& o, lstar::ExperimentKind kind) {
    nlohmann::json j = nlohmann::json::object();
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) throw lstar::config_error("cannot read config '" + o.config_path + "'");
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            throw lstar::config_error("config '" + o.config_path + "': " + e.what());
        }
        if (!j.is_object()) throw lstar::config_error("config must be a JSON object");
    }
    if (j.contains("kind") && lstar::experiment_kind_from_string(j.at("kind").get<std::string>()) != kind)
        throw lstar::config_error("config kind '" + j.at("kind").get<std::string>() + "' does not match subcommand");
    j["kind"] = lstar::to_string(kind);
    if (o.seed) j["seed"] = *o.seed;
    if (o.trials) j["trials"] = *o.trials;
    if (o.out) j["output_path"] = *o.out;
    return lstar::config_from_json(j);
}

int run(const Options& o, lstar::ExperimentKind kind) {
    lstar::ExperimentConfig cfg;
    try {
        cfg = load_config(o, kind);
    } catch (const lstar::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    lstar::RunOutput out;
    try {
        out = lstar::run_experiment(cfg, o.jobs);
    } catch (const lstar::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNonConvergence;
    }

    try {
        for (const auto& p : lstar::write_outputs(cfg, out, o.format)) std::cout << p.string() << '\n';
    } catch (const lstar::io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    }
    std::cout << out.summary.dump() << '\n';
    if (out.nonconverged > 0) {
        std::cerr << out.nonconverged << " solve(s) did not converge; partial results written\n";
        return kNonConvergence;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank matrix recovery experiments"};
    app.set_version_flag("--version", std::string(lstar::kVersion));
    app.require_subcommand(1);

    Options o;
    std::uint64_t seed = 0;
    int trials = 1;
    std::string out_dir;

    const std::pair<const char*, lstar::ExperimentKind> commands[] = {
        {"recover", lstar::ExperimentKind::recover},
        {"cmsv", lstar::ExperimentKind::cmsv},
        {"montecarlo", lstar::ExperimentKind::montecarlo},
        {"bounds", lstar::ExperimentKind::bounds},
        {"noise-cal", lstar::ExperimentKind::noise_calibration},
    };
    const char* help[] = {
        "Recover low-rank signals and check the error bounds",
        "Estimate the l*-constrained minimal and maximal singular values",
        "Concentration sweep of normalized random operators over m",
        "Compare l*-CMSV and mRIC bounds on an oracle-sized instance",
        "Calibrate lambda and mu from ||A^*(w)|| for Gaussian noise",
    };
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* s = app.add_subcommand(commands[i].first, help[i]);
        s->add_option("--config", o.config_path, "Experiment JSON config")->check(CLI::ExistingFile);
        s->add_option("--seed", seed, "Base seed (overrides the config)");
        s->add_option("--trials", trials, "Number of trials (overrides the config)")->check(CLI::PositiveNumber);
        s->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
        s->add_option("--out", out_dir, "Output directory (overrides the config)");
        s->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto* s = subs[i];
        if (!s->parsed()) continue;
        if (s->count("--seed")) o.seed = seed;
        if (s->count("--trials")) o.trials = trials;
        if (s->count("--out")) o.out = out_dir;
        return run(o, commands[i].second);
    }
    return kConfigError;
}
