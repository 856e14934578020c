#include <gtest/gtest.h>

#include <lstar/experiment/runners.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace lstar;
using nlohmann::json;

namespace {

ExperimentConfig parse(const char* text) { return config_from_json(json::parse(text)); }

const Table& table(const RunOutput& r, const std::string& name) {
    for (const auto& t : r.tables)
        if (t.name == name) return t;
    throw std::runtime_error("no table " + name);
}

std::size_t column(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return i;
    throw std::runtime_error("no column " + name);
}

} // namespace

TEST(Config, DefaultsAndRoundTrip) {
    const auto c = parse("{}");
    EXPECT_EQ(c.kind, ExperimentKind::recover);
    EXPECT_EQ(c.trials, 1);
    const auto back = config_from_json(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));

    const auto d = parse(R"({"kind":"montecarlo","sweep":{"m":[10,20],"ensembles":["rademacher"],"band":0.2},
                             "estimation":{"taus":[1.5,2.5],"starts":3},"seed":99,"trials":4})");
    EXPECT_EQ(d.kind, ExperimentKind::montecarlo);
    EXPECT_EQ(d.sweep.m_values, (std::vector<int>{10, 20}));
    EXPECT_EQ(d.sweep.ensembles.front(), EnsembleKind::rademacher);
    EXPECT_EQ(d.estimation.taus.size(), 2u);
    EXPECT_EQ(d.seed, 99u);
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(d))), config_to_json(d));
    EXPECT_EQ(parse(R"({"kind":"noise-cal"})").kind, ExperimentKind::noise_calibration);
}

TEST(Config, HashIgnoresOutputPathOnly) {
    auto a = parse(R"({"seed":1})");
    auto b = a;
    b.output_path = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, RejectsInvalidInput) {
    for (const char* bad : {R"({"trials":0})", R"({"kind":"nope"})", R"({"trials":"three"})",
                            R"({"ensemble":{"n1":0}})", R"({"signal":{"r":9}})",
                            R"({"kind":"bounds","ensemble":{"n1":3,"n2":4}})", R"({"estimation":{"samples":5}})",
                            R"({"estimation":{"taus":[0.5]}})", R"({"params":{"kappa":1.0}})",
                            R"({"solver":{"step_rule":{"kind":"magic"}}})", R"({"sweep":{"band":1.5}})", "[1,2]"})
        EXPECT_THROW(parse(bad), config_error) << bad;
}

TEST(ParallelMap, OrderedAndIndependentOfWorkers) {
    auto sq = [](std::size_t i) { return static_cast<int>(i * i); };
    const auto one = parallel_map(50, 1, sq);
    for (int jobs : {2, 4, 64}) EXPECT_EQ(parallel_map(50, jobs, sq), one);
    EXPECT_TRUE(parallel_map(0, 3, sq).empty());
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i], static_cast<int>(i * i));
}

TEST(ParallelMap, RethrowsLowestFailingIndex) {
    std::atomic<int> calls{0};
    auto fn = [&](std::size_t i) {
        ++calls;
        if (i == 7 || i == 3) throw std::runtime_error(std::to_string(i));
        return 0;
    };
    try {
        parallel_map(10, 3, fn);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "3");
    }
    EXPECT_EQ(calls.load(), 10);
}

TEST(Output, CsvCellsAndTrailingColumns) {
    Table t{"x", {"a", "b", "c", "d"}, {{1, 0.1, true, "inapplicable"}, {-2, 1e300, false, json()}}};
    const std::string csv = table_to_csv(t, "00ff");
    EXPECT_EQ(csv, std::string("a,b,c,d,config_hash,version\n1,0.1,1,inapplicable,00ff,") + kVersion + "\n" +
                       "-2,1e+300,0,,00ff," + kVersion + "\n");
}

TEST(Output, WritesFilesAndMapsIoErrors) {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "lstar_test_experiment";
    fs::remove_all(root);
    auto c = parse(R"({"kind":"noise-cal","ensemble":{"n1":3,"n2":3,"m":9},"trials":5,
                       "calibration":{"holdout_trials":5}})");
    c.output_path = (root / "out").string();
    const auto r = run_experiment(c);
    const auto csv = write_outputs(c, r, "csv");
    ASSERT_EQ(csv.size(), 2u);
    EXPECT_EQ(csv[0].filename(), "noise-calibration_values.csv");
    const auto js = write_outputs(c, r, "json");
    std::ifstream f(js.front());
    const json doc = json::parse(f);
    EXPECT_EQ(doc.at("config_hash"), config_hash(c));
    EXPECT_EQ(doc.at("version"), kVersion);
    EXPECT_FALSE(doc.at("config").contains("output_path"));
    EXPECT_EQ(doc.at("tables").at("values").size(), 5u);
    EXPECT_THROW(write_outputs(c, r, "xml"), config_error);

    std::ofstream(root / "file") << "x";
    c.output_path = (root / "file" / "sub").string();
    EXPECT_THROW(write_outputs(c, r, "csv"), io_error);
    fs::remove_all(root);
}

TEST(RunRecover, DeterministicAcrossWorkerCounts) {
    const auto c = parse(R"({"ensemble":{"n1":4,"n2":4,"m":16},"noise":{"kind":"bounded","epsilon":0.05},
                             "algorithm":"mds","estimation":{"starts":2},"trials":4,"seed":5})");
    const auto a = run_recover(c, 1), b = run_recover(c, 3);
    EXPECT_EQ(table_to_csv(a.tables[0], "h"), table_to_csv(b.tables[0], "h"));
    EXPECT_EQ(a.tables[0].rows.size(), 4u);
}

TEST(RunRecover, NoiselessRankOneRecovers) {
    const auto c = parse(R"({"ensemble":{"n1":8,"n2":8,"m":48},"estimation":{"starts":1},"trials":20,"seed":1})");
    const auto r = run_recover(c);
    EXPECT_GE(r.summary.at("exact_recoveries").get<int>(), 18);
    EXPECT_EQ(r.nonconverged, 0);
}

TEST(RunRecover, BoundedNoiseSatisfiesConeChecks) {
    for (const char* alg : {"mbp", "mds", "mlasso"}) {
        auto j = json::parse(R"({"ensemble":{"n1":5,"n2":5,"m":50},"noise":{"kind":"bounded","epsilon":0.05},
                                "estimation":{"starts":2},"trials":5,"seed":3})");
        j["algorithm"] = alg;
        const auto r = run_recover(config_from_json(j));
        const int conv = r.summary.at("converged");
        EXPECT_EQ(conv, 5) << alg;
        EXPECT_EQ(r.summary.at("cone_satisfied").get<int>(), conv) << alg;
        EXPECT_EQ(r.summary.at("tau_satisfied").get<int>(), conv) << alg;
    }
}

TEST(RunMontecarlo, MaxNotBelowMinAndFractionsInRange) {
    const auto c = parse(R"({"kind":"montecarlo","ensemble":{"n1":3,"n2":3},"estimation":{"taus":[1.5,2.0],"starts":2},
                             "sweep":{"m":[9,36],"ensembles":["gaussian","rademacher"]},"trials":4})");
    const auto sweep = montecarlo_sweep(c);
    ASSERT_EQ(sweep.size(), 8u);
    for (const auto& sm : sweep) {
        EXPECT_EQ(sm.rho_min.size(), 4u);
        for (std::size_t t = 0; t < 4; ++t) EXPECT_GE(sm.rho_max[t], sm.rho_min[t]);
        EXPECT_GE(sm.in_band_fraction, 0.0);
        EXPECT_LE(sm.in_band_fraction, 1.0);
    }
    const auto out = run_montecarlo_cmsv(c);
    EXPECT_EQ(table(out, "trials").rows.size(), 32u);
    EXPECT_EQ(table(out, "summary").rows.size(), 8u);
}

TEST(RunBounds, ZeroNoiseRowsAndInapplicableMarking) {
    const auto c = parse(R"({"kind":"bounds","ensemble":{"n1":2,"n2":2,"m":4},"estimation":{"starts":4,
                             "samples":10000},"noise_levels":[0.0,0.05],"trials":3})");
    const auto r = run_bounds_ledger(c);
    const auto& t = table(r, "ledger");
    ASSERT_EQ(t.rows.size(), 12u);
    const auto level = column(t, "noise_level"), err = column(t, "realized_error"), lb = column(t, "lstar_bound"),
               mb = column(t, "mric_bound"), delta = column(t, "delta_hat"), rho = column(t, "rho_estimate"),
               alg = column(t, "algorithm"), conv = column(t, "converged");
    for (const auto& row : t.rows) {
        if (row[alg] == "mbp") EXPECT_TRUE(row[conv].get<bool>());
        const bool inapplicable = row[mb].is_string();
        EXPECT_EQ(inapplicable, row[delta].get<double>() >= kMricLimit);
        if (row[rho].get<double>() > 0) EXPECT_TRUE(std::isfinite(row[lb].get<double>()));
        if (row[level].get<double>() == 0.0) {
            if (row[conv].get<bool>()) EXPECT_LE(row[err].get<double>(), 1e-6);
            EXPECT_EQ(row[lb].get<double>(), 0.0);
            if (!inapplicable) EXPECT_EQ(row[mb].get<double>(), 0.0);
        }
    }
}

TEST(RunBounds, BothFamiliesWhenDeltaIsSmall) {
    const auto c = parse(R"({"kind":"bounds","ensemble":{"n1":2,"n2":2,"m":400},"estimation":{"starts":4,
                             "samples":10000},"noise_levels":[0.05],"trials":3})");
    const auto r = run_bounds_ledger(c);
    const auto& t = table(r, "ledger");
    const auto mb = column(t, "mric_bound"), delta = column(t, "delta_hat");
    for (const auto& row : t.rows) {
        ASSERT_LT(row[delta].get<double>(), kMricLimit);
        EXPECT_TRUE(row[mb].is_number());
    }
}

TEST(RunNoiseCalibration, ZeroSigmaAndLinearity) {
    auto c = parse(R"({"kind":"noise-cal","ensemble":{"n1":4,"n2":4,"m":32},"trials":40,
                       "calibration":{"sigma":0.0,"holdout_trials":10}})");
    const auto zero = run_noise_calibration(c);
    for (const auto& row : table(zero, "values").rows) EXPECT_EQ(row[1].get<double>(), 0.0);

    c.calibration.sigma = 0.1;
    const auto a = table(run_noise_calibration(c), "summary");
    c.calibration.sigma = 0.2;
    const auto b = table(run_noise_calibration(c), "summary");
    for (const char* q : {"q50", "q90", "q95", "q99", "lambda"})
        EXPECT_EQ(b.rows[0][column(b, q)].get<double>(), 2.0 * a.rows[0][column(a, q)].get<double>()) << q;
    EXPECT_EQ(b.rows[0][column(b, "holdout_feasible_fraction")], a.rows[0][column(a, "holdout_feasible_fraction")]);
}

TEST(RunNoiseCalibration, HoldoutCoverageNearQuantile) {
    const auto c = parse(R"({"kind":"noise-cal","ensemble":{"n1":6,"n2":6,"m":72},"trials":2000,
                             "calibration":{"sigma":0.1,"quantile":0.95,"holdout_trials":2000},"seed":8})");
    const auto r = run_noise_calibration(c);
    EXPECT_GE(r.summary.at("holdout_feasible_fraction").get<double>(), 0.93);
}
