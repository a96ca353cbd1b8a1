#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "swarm/experiments.hpp"

using namespace swarm;
using namespace swarm::experiments;

namespace {

const char* kDiscreteSpec = R"({
  "mode": "discrete",
  "system_sizes": [6],
  "noise_grid": [{"p": 0.2}],
  "repeats": 3,
  "horizon": 400,
  "seed": 11
})";

}  // namespace

TEST_CASE("spec parsing: happy path and defaults") {
    const ExperimentSpec spec = parse_spec(kDiscreteSpec);
    CHECK(spec.mode == Mode::kDiscrete);
    CHECK(spec.system_sizes == std::vector<int>{6});
    REQUIRE(spec.noise_grid.size() == 1);
    CHECK(spec.noise_grid[0].p == doctest::Approx(0.2));
    CHECK_FALSE(spec.noise_grid[0].d_star.has_value());
    CHECK(spec.repeats == 3);
    CHECK(spec.horizon == doctest::Approx(400));
    CHECK(spec.seed == 11);
    CHECK(spec.aggregation_threshold == doctest::Approx(0.15));
    CHECK(spec.beta_grid.empty());
}

TEST_CASE("spec parsing: errors name the offending field") {
    CHECK_THROWS_WITH_AS(
        parse_spec(R"({"mode":"continuous","system_sizes":[4],"typo_field":1})"),
        doctest::Contains("typo_field"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_spec(R"({"system_sizes":[4]})"), doctest::Contains("mode"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_spec(R"({"mode":"sideways","system_sizes":[4]})"),
                         doctest::Contains("mode"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_spec(R"({"mode":"discrete","system_sizes":[4],"noise_grid":[{"q":0.1}]})"),
        doctest::Contains("q"), std::invalid_argument);
    CHECK_THROWS_AS(parse_spec(R"({"mode":"discrete","system_sizes":[4],"repeats":0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_spec(R"({"mode":"discrete","system_sizes":[4],"aggregation_threshold":1.5})"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_spec("not json at all"), std::invalid_argument);
}

TEST_CASE("detect_aggregation: immediate, cutoff, and mid-series crossings") {
    const int n = 7;
    const double baseline = min_dispersion_baseline(n, 1.0);
    auto sample = [](double t, double disp) {
        MetricsSample s;
        s.time = t;
        s.dispersion = disp;
        return s;
    };

    std::vector<MetricsSample> below{sample(0.0, baseline)};
    CHECK(detect_aggregation(below, n, 0.15, 1.0) == 0.0);

    std::vector<MetricsSample> flat;
    for (int k = 0; k < 10; ++k) flat.push_back(sample(k, 10.0 * baseline));
    CHECK_FALSE(detect_aggregation(flat, n, 0.15, 1.0).has_value());

    std::vector<MetricsSample> crossing;
    for (int k = 0; k < 12; ++k)
        crossing.push_back(sample(k, k < 7 ? 2.0 * baseline : 1.1 * baseline));
    CHECK(detect_aggregation(crossing, n, 0.15, 1.0) == doctest::Approx(7.0));
    CHECK_THROWS_AS(detect_aggregation({}, n, 0.15, 1.0), std::invalid_argument);
}

TEST_CASE("format_double: nine significant digits") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.333333333");
    CHECK(format_double(123456789.0) == "123456789");
    CHECK(format_double(1234567891.0) == "1.23456789e+09");
}

TEST_CASE("metrics_csv emits the documented schema") {
    MetricsSample s;
    s.time = 1.5;
    s.sed_circumference = 10.0 / 3.0;
    s.hull_perimeter = 2.0;
    s.dispersion = 1.0;
    s.cluster_fraction = 0.5;
    const std::string csv = metrics_csv({s});
    CHECK(csv == "t,sed_circumference,hull_perimeter,dispersion,cluster_fraction\n"
                 "1.5,3.33333333,2,1,0.5\n");
}

TEST_CASE("sweep: derived seeds, reproducibility, and summary consistency") {
    const ExperimentSpec spec = parse_spec(kDiscreteSpec);
    const SweepResult a = sweep(spec);
    REQUIRE(a.records.size() == 3);
    CHECK(a.records[0].seed == 11);
    CHECK(a.records[1].seed == 12);
    CHECK(a.records[2].seed == 13);
    for (const RunRecord& rec : a.records) CHECK(rec.error.empty());

    const SweepResult b = sweep(spec);
    CHECK(a.summary_csv == b.summary_csv);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        REQUIRE(a.records[i].series.size() == b.records[i].series.size());
        CHECK(metrics_csv(a.records[i].series) == metrics_csv(b.records[i].series));
    }

    // The summary mean equals the arithmetic mean of per-run detections.
    double mean = 0.0;
    int counted = 0, cutoffs = 0;
    for (const RunRecord& rec : a.records) {
        const auto t = detect_aggregation(rec.series, rec.n, spec.aggregation_threshold, 1.0);
        REQUIRE((t.has_value() == rec.aggregation_time.has_value()));
        if (t) {
            mean += *t;
            ++counted;
        } else {
            ++cutoffs;
        }
    }
    std::istringstream summary(a.summary_csv);
    std::string header, row;
    std::getline(summary, header);
    std::getline(summary, row);
    CHECK(header == "mode,n,param_name,param_value,mean_time,std_time,cutoff_fraction,repeats");
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row_ss(row);
    while (std::getline(row_ss, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 8);
    CHECK(fields[0] == "discrete");
    CHECK(fields[1] == "6");
    CHECK(fields[2] == "p");
    CHECK(fields[3] == format_double(0.2));
    if (counted > 0)
        CHECK(std::stod(fields[4]) == doctest::Approx(mean / counted).epsilon(1e-9));
    CHECK(std::stod(fields[6]) == doctest::Approx(static_cast<double>(cutoffs) / 3.0));
    CHECK(fields[7] == "3");
}

TEST_CASE("sweep outputs land on disk") {
    const ExperimentSpec spec = parse_spec(kDiscreteSpec);
    const SweepResult result = sweep(spec);
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "swarm_sweep_test_out";
    std::filesystem::remove_all(dir);
    write_sweep_outputs(result, dir);
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "runs.csv"));
    CHECK(std::filesystem::exists(dir / "run_00000.csv"));
    CHECK(std::filesystem::exists(dir / "run_00002.csv"));
    std::ifstream in(dir / "run_00000.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,sed_circumference,hull_perimeter,dispersion,cluster_fraction");
    std::filesystem::remove_all(dir);
}

TEST_CASE("continuous runs through the harness stop at aggregation") {
    ExperimentSpec spec;
    spec.mode = Mode::kContinuous;
    spec.system_sizes = {2};
    spec.repeats = 2;
    spec.horizon = 300.0;
    spec.seed = 424242;
    const SweepResult result = sweep(spec);
    REQUIRE(result.records.size() == 2);
    for (const RunRecord& rec : result.records) {
        REQUIRE(rec.error.empty());
        REQUIRE(rec.aggregation_time.has_value());  // two robots always aggregate
        CHECK(*rec.aggregation_time <= 300.0);
    }
}

TEST_CASE("run sidecar text captures the run configuration") {
    World w = gen_random(3, 80.0, PhysicsParams::epuck(0.5), Controller::aggregation_default(),
                         NoiseModel{2.0, 0.1}, 555);
    const std::string text = run_sidecar_text(w, 300.0, 0.5);
    CHECK(text.find("seed=555") != std::string::npos);
    CHECK(text.find("n=3") != std::string::npos);
    CHECK(text.find("beta=0.5") != std::string::npos);
    CHECK(text.find("controller=-0.7,-1,1,-1") != std::string::npos);
    CHECK(text.find("error_probability=0.1") != std::string::npos);
}
