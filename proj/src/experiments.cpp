#include "swarm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace swarm::experiments {

using nlohmann::json;

std::string to_string(Mode mode) {
    return mode == Mode::kContinuous ? "continuous" : "discrete";
}

void ExperimentSpec::validate() const {
    if (system_sizes.empty()) throw std::invalid_argument("system_sizes must be non-empty");
    for (int n : system_sizes)
        if (n < 1) throw std::invalid_argument("system_sizes entries must be >= 1");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (horizon <= 0.0) throw std::invalid_argument("horizon must be > 0");
    if (aggregation_threshold <= 0.0 || aggregation_threshold >= 1.0)
        throw std::invalid_argument("aggregation_threshold must be in (0, 1)");
    if (sample_cadence <= 0.0) throw std::invalid_argument("sample_cadence must be > 0");
    for (const NoisePoint& np : noise_grid) {
        if (np.m_star < 0.0) throw std::invalid_argument("m_star must be >= 0");
        if (np.p < 0.0 || np.p > 1.0) throw std::invalid_argument("p must be in [0, 1]");
        if (np.d_star && *np.d_star <= 0) throw std::invalid_argument("d_star must be > 0");
    }
    for (double b : beta_grid)
        if (b < 0.0 || b >= kPi) throw std::invalid_argument("beta_grid entries must be in [0, pi)");
}

namespace {

void require_known_fields(const json& obj, std::initializer_list<const char*> known,
                          const char* where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string("unknown field '") + item.key() + "' in " +
                                        where);
    }
}

NoisePoint parse_noise_point(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("noise_grid entries must be objects");
    require_known_fields(obj, {"m_star", "p", "d_star"}, "noise_grid entry");
    NoisePoint np;
    if (obj.contains("m_star")) np.m_star = obj.at("m_star").get<double>();
    if (obj.contains("p")) np.p = obj.at("p").get<double>();
    if (obj.contains("d_star")) np.d_star = obj.at("d_star").get<int>();
    return np;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");
    require_known_fields(root,
                         {"mode", "system_sizes", "noise_grid", "beta_grid", "repeats", "horizon",
                          "seed", "aggregation_threshold", "sample_cadence"},
                         "experiment spec");

    ExperimentSpec spec;
    if (!root.contains("mode")) throw std::invalid_argument("missing field 'mode'");
    const std::string mode = root.at("mode").get<std::string>();
    if (mode == "continuous")
        spec.mode = Mode::kContinuous;
    else if (mode == "discrete")
        spec.mode = Mode::kDiscrete;
    else
        throw std::invalid_argument("field 'mode' must be 'continuous' or 'discrete'");

    if (!root.contains("system_sizes"))
        throw std::invalid_argument("missing field 'system_sizes'");
    spec.system_sizes = root.at("system_sizes").get<std::vector<int>>();

    if (root.contains("noise_grid"))
        for (const json& obj : root.at("noise_grid")) spec.noise_grid.push_back(parse_noise_point(obj));
    if (root.contains("beta_grid")) spec.beta_grid = root.at("beta_grid").get<std::vector<double>>();
    if (root.contains("repeats")) spec.repeats = root.at("repeats").get<int>();
    if (root.contains("horizon")) spec.horizon = root.at("horizon").get<double>();
    if (root.contains("seed")) spec.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("aggregation_threshold"))
        spec.aggregation_threshold = root.at("aggregation_threshold").get<double>();
    if (root.contains("sample_cadence"))
        spec.sample_cadence = root.at("sample_cadence").get<double>();
    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open spec file: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

std::optional<double> detect_aggregation(const std::vector<MetricsSample>& series, int n,
                                         double threshold, double spacing) {
    if (series.empty()) throw std::invalid_argument("series must be non-empty");
    const double limit = (1.0 + threshold) * min_dispersion_baseline(n, spacing);
    for (const MetricsSample& s : series)
        if (s.dispersion <= limit) return s.time;
    return std::nullopt;
}

double continuous_arena_side(int n, double robot_radius) {
    constexpr double kDensity = 0.05;
    return std::sqrt(n * kPi * robot_radius * robot_radius / kDensity);
}

RunRecord execute_run(const ExperimentSpec& spec, int n, const NoisePoint& noise, double beta,
                      std::uint64_t run_seed, int run_index) {
    RunRecord rec;
    rec.mode = spec.mode;
    rec.n = n;
    rec.noise = noise;
    rec.beta = beta;
    rec.seed = run_seed;
    rec.run_index = run_index;
    try {
        if (spec.mode == Mode::kContinuous) {
            const PhysicsParams params = PhysicsParams::epuck(beta);
            const double spacing = 2.0 * params.robot_radius;
            const double stop =
                (1.0 + spec.aggregation_threshold) * min_dispersion_baseline(n, spacing);
            World world = gen_random(n, continuous_arena_side(n, params.robot_radius), params,
                                     Controller::aggregation_default(),
                                     NoiseModel{noise.m_star, noise.p}, run_seed);
            RunResult rr = run(world, spec.horizon, spec.sample_cadence, stop);
            rec.series = std::move(rr.series);
            rec.contact_overflows = rr.contact_overflows;
            rec.aggregation_time =
                detect_aggregation(rec.series, n, spec.aggregation_threshold, spacing);
        } else {
            lattice::DiscreteNoise dn;
            dn.error_probability = noise.p;
            dn.perturbation_threshold = noise.d_star;
            const double stop = (1.0 + spec.aggregation_threshold) * min_dispersion_baseline(n, 1.0);
            lattice::LatticeWorld world = lattice::gen_random_lattice(n, run_seed, dn);
            lattice::LatticeRunResult rr =
                run_rounds(world, static_cast<long>(std::llround(spec.horizon)), stop);
            rec.series = std::move(rr.series);
            rec.aggregation_time =
                detect_aggregation(rec.series, n, spec.aggregation_threshold, 1.0);
        }
        if (!rec.series.empty()) rec.final_sample = rec.series.back();
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

namespace {

struct Cell {
    int n = 0;
    NoisePoint noise;
    double beta = 0.0;
};

int worker_count(std::size_t runs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SWARM_WORKERS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return static_cast<int>(std::min<std::size_t>(hw, runs));
}

// The summary's parameter column follows the axis that actually varies, in
// priority order beta, p, m_star, d_star; ties fall back to p.
std::string varying_axis(const ExperimentSpec& spec) {
    auto distinct = [](auto&& values) {
        auto v = values;
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v.size();
    };
    if (distinct(spec.beta_grid) > 1) return "beta";
    std::vector<double> ps, ms;
    std::vector<int> ds;
    for (const NoisePoint& np : spec.noise_grid) {
        ps.push_back(np.p);
        ms.push_back(np.m_star);
        ds.push_back(np.d_star.value_or(0));
    }
    if (distinct(ps) > 1) return "p";
    if (distinct(ms) > 1) return "m_star";
    if (distinct(ds) > 1) return "d_star";
    return "p";
}

double axis_value(const std::string& axis, const Cell& cell) {
    if (axis == "beta") return cell.beta;
    if (axis == "m_star") return cell.noise.m_star;
    if (axis == "d_star") return static_cast<double>(cell.noise.d_star.value_or(0));
    return cell.noise.p;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string metrics_csv(const std::vector<MetricsSample>& series) {
    std::string out = "t,sed_circumference,hull_perimeter,dispersion,cluster_fraction\n";
    for (const MetricsSample& s : series) {
        out += format_double(s.time);
        out += ',';
        out += format_double(s.sed_circumference);
        out += ',';
        out += format_double(s.hull_perimeter);
        out += ',';
        out += format_double(s.dispersion);
        out += ',';
        out += format_double(s.cluster_fraction);
        out += '\n';
    }
    return out;
}

std::string run_sidecar_text(const World& world, double duration, double sample_every) {
    const PhysicsParams& p = world.params();
    const NoiseModel& nm = world.noise();
    const Controller& c = world.controller();
    std::ostringstream out;
    out << "seed=" << world.seed() << "\n";
    out << "n=" << world.size() << "\n";
    out << "robot_radius=" << format_double(p.robot_radius) << "\n";
    out << "axle_length=" << format_double(p.axle_length) << "\n";
    out << "max_wheel_speed=" << format_double(p.max_wheel_speed) << "\n";
    out << "timestep=" << format_double(p.timestep) << "\n";
    out << "beta=" << format_double(p.beta()) << "\n";
    out << "damping=" << format_double(p.damping) << "\n";
    out << "controller=" << format_double(c.v_l0) << "," << format_double(c.v_r0) << ","
        << format_double(c.v_l1) << "," << format_double(c.v_r1) << "\n";
    out << "motion_noise_max=" << format_double(nm.motion_noise_max) << "\n";
    out << "error_probability=" << format_double(nm.error_probability) << "\n";
    out << "duration=" << format_double(duration) << "\n";
    out << "sample_every=" << format_double(sample_every) << "\n";
    return out.str();
}

SweepResult sweep(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<NoisePoint> noise_grid = spec.noise_grid;
    if (noise_grid.empty()) noise_grid.push_back(NoisePoint{});
    std::vector<double> beta_grid = spec.beta_grid;
    if (beta_grid.empty()) beta_grid.push_back(0.0);

    std::vector<Cell> cells;
    for (int n : spec.system_sizes)
        for (const NoisePoint& np : noise_grid)
            for (double beta : beta_grid) cells.push_back({n, np, beta});

    struct Plan {
        Cell cell;
        std::uint64_t seed;
        int run_index;
    };
    std::vector<Plan> plan;
    int run_index = 0;
    for (const Cell& cell : cells)
        for (int rep = 0; rep < spec.repeats; ++rep, ++run_index)
            plan.push_back({cell, spec.seed + static_cast<std::uint64_t>(run_index), run_index});

    SweepResult result;
    result.records.resize(plan.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= plan.size()) return;
            const Plan& p = plan[idx];
            result.records[idx] =
                execute_run(spec, p.cell.n, p.cell.noise, p.cell.beta, p.seed, p.run_index);
        }
    };
    const int workers = worker_count(plan.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    // Summary: one row per cell, means over aggregated runs only.
    const std::string axis = varying_axis(spec);
    std::string csv = "mode,n,param_name,param_value,mean_time,std_time,cutoff_fraction,repeats\n";
    std::size_t offset = 0;
    for (const Cell& cell : cells) {
        std::vector<double> times;
        int cutoffs = 0;
        for (int rep = 0; rep < spec.repeats; ++rep) {
            const RunRecord& rec = result.records[offset + rep];
            if (!rec.error.empty()) continue;
            if (rec.aggregation_time)
                times.push_back(*rec.aggregation_time);
            else
                ++cutoffs;
        }
        offset += spec.repeats;
        double mean = std::numeric_limits<double>::quiet_NaN();
        double sd = std::numeric_limits<double>::quiet_NaN();
        if (!times.empty()) {
            mean = 0.0;
            for (double t : times) mean += t;
            mean /= static_cast<double>(times.size());
            sd = 0.0;
            if (times.size() > 1) {
                for (double t : times) sd += (t - mean) * (t - mean);
                sd = std::sqrt(sd / static_cast<double>(times.size() - 1));
            }
        }
        csv += to_string(spec.mode) + "," + std::to_string(cell.n) + "," + axis + "," +
               format_double(axis_value(axis, cell)) + "," + format_double(mean) + "," +
               format_double(sd) + "," +
               format_double(static_cast<double>(cutoffs) / spec.repeats) + "," +
               std::to_string(spec.repeats) + "\n";
    }
    result.summary_csv = std::move(csv);
    return result;
}

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "summary.csv", std::ios::binary);
        out << result.summary_csv;
    }
    std::string index = "run_index,mode,n,m_star,p,d_star,beta,seed,aggregation_time,"
                        "contact_overflows,error\n";
    for (const RunRecord& rec : result.records) {
        char name[32];
        std::snprintf(name, sizeof(name), "run_%05d.csv", rec.run_index);
        std::ofstream out(out_dir / name, std::ios::binary);
        out << metrics_csv(rec.series);
        index += std::to_string(rec.run_index) + "," + to_string(rec.mode) + "," +
                 std::to_string(rec.n) + "," + format_double(rec.noise.m_star) + "," +
                 format_double(rec.noise.p) + "," +
                 (rec.noise.d_star ? std::to_string(*rec.noise.d_star) : "") + "," +
                 format_double(rec.beta) + "," + std::to_string(rec.seed) + "," +
                 (rec.aggregation_time ? format_double(*rec.aggregation_time) : "CUTOFF") + "," +
                 std::to_string(rec.contact_overflows) + "," + rec.error + "\n";
    }
    std::ofstream out(out_dir / "runs.csv", std::ios::binary);
    out << index;
}

}  // namespace swarm::experiments
