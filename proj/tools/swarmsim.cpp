// swarmsim: headless driver for aggregation runs, sweeps, deadlock demos,
// rotation-bound verification, and one-off metric evaluation.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarm/cone_analysis.hpp"
#include "swarm/experiments.hpp"
#include "swarm/lattice.hpp"
#include "swarm/metrics.hpp"
#include "swarm/world.hpp"

namespace {

using namespace swarm;

int cmd_run(const std::string& mode, int n, double horizon, double sample_every,
            std::uint64_t seed, double m_star, double p, int d_star, double beta,
            double arena, const std::string& out) {
    if (mode == "continuous") {
        const PhysicsParams params = PhysicsParams::epuck(beta);
        const double side =
            arena > 0.0 ? arena : experiments::continuous_arena_side(n, params.robot_radius);
        World world = gen_random(n, side, params, Controller::aggregation_default(),
                                 NoiseModel{m_star, p}, seed);
        const RunResult rr = run(world, horizon, sample_every);
        std::ofstream csv(out + ".csv", std::ios::binary);
        csv << experiments::metrics_csv(rr.series);
        std::ofstream meta(out + ".meta.txt", std::ios::binary);
        meta << experiments::run_sidecar_text(world, horizon, sample_every);
        meta << "arena_side=" << experiments::format_double(side) << "\n";
        meta << "contact_overflows=" << rr.contact_overflows << "\n";
        std::cout << "wrote " << out << ".csv (" << rr.series.size() << " samples)\n";
        if (rr.contact_overflows > 0)
            std::cerr << "warning: " << rr.contact_overflows << " contact overflow event(s)\n";
    } else if (mode == "discrete") {
        lattice::DiscreteNoise noise;
        noise.error_probability = p;
        if (d_star > 0) noise.perturbation_threshold = d_star;
        lattice::LatticeWorld world = lattice::gen_random_lattice(n, seed, noise);
        const lattice::LatticeRunResult rr =
            run_rounds(world, static_cast<long>(horizon));
        std::ofstream csv(out + ".csv", std::ios::binary);
        csv << experiments::metrics_csv(rr.series);
        std::ofstream meta(out + ".meta.txt", std::ios::binary);
        meta << "mode=discrete\nseed=" << seed << "\nn=" << n << "\nrounds=" << (long)horizon
             << "\nerror_probability=" << experiments::format_double(p) << "\nd_star="
             << (d_star > 0 ? std::to_string(d_star) : "disabled") << "\n";
        std::cout << "wrote " << out << ".csv (" << rr.series.size() << " samples)\n";
    } else {
        throw std::invalid_argument("field 'mode' must be 'continuous' or 'discrete'");
    }
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir) {
    const experiments::ExperimentSpec spec = experiments::load_spec(spec_path);
    const experiments::SweepResult result = experiments::sweep(spec);
    experiments::write_sweep_outputs(result, out_dir);
    int errors = 0;
    for (const auto& rec : result.records)
        if (!rec.error.empty()) ++errors;
    std::cout << "completed " << result.records.size() << " runs";
    if (errors > 0) std::cout << " (" << errors << " failed; see runs.csv)";
    std::cout << "\nsummary: " << (std::filesystem::path(out_dir) / "summary.csv").string()
              << "\n";
    return 0;
}

int cmd_deadlock_demo(const std::string& construction, int n, double seconds) {
    const PhysicsParams params = PhysicsParams::epuck();
    World world = [&] {
        if (construction == "even") return gen_deadlock_even(n, params);
        if (construction == "odd") return gen_deadlock_odd(n, params);
        if (construction == "ring") return gen_ring_deadlock(n, params);
        throw std::invalid_argument("field 'construction' must be even, odd, or ring");
    }();
    const auto start = world.positions();
    const MetricsSample before = world.sample_metrics();
    const long steps = std::lround(seconds / params.timestep);
    for (long s = 0; s < steps; ++s) world.step();
    double worst = 0.0;
    for (int i = 0; i < world.size(); ++i)
        worst = std::max(worst, distance(world.poses()[i].position, start[i]));
    const MetricsSample after = world.sample_metrics();
    std::cout << "construction=" << construction << " n=" << n << " simulated=" << seconds
              << " s\n";
    std::cout << "max_center_displacement_cm=" << experiments::format_double(worst) << "\n";
    std::cout << "dispersion_before=" << experiments::format_double(before.dispersion)
              << " dispersion_after=" << experiments::format_double(after.dispersion) << "\n";
    std::cout << "cluster_fraction=" << experiments::format_double(after.cluster_fraction)
              << "\n";
    return 0;
}

int cmd_verify_bounds(const std::vector<double>& betas, const std::vector<double>& d0s,
                      const std::string& out) {
    const PhysicsParams params = PhysicsParams::epuck();
    std::ostringstream csv;
    csv << "beta,d0,measured_m,bound_m,pass\n";
    bool all_pass = true;
    for (double beta : betas) {
        for (double d0 : d0s) {
            const cone::BoundVerification v = cone::verify_bound_by_simulation(d0, beta, params);
            all_pass = all_pass && v.pass;
            csv << experiments::format_double(beta) << "," << experiments::format_double(d0)
                << "," << v.measured_m << "," << v.bound_m << "," << (v.pass ? "1" : "0")
                << "\n";
        }
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out, std::ios::binary);
        f << csv.str();
        std::cout << "wrote " << out << "\n";
    }
    return all_pass ? 0 : 2;
}

int cmd_metrics(const std::string& input, double radius, double touch_tol) {
    std::ifstream in(input);
    if (!in) throw std::invalid_argument("cannot open point file: " + input);
    std::vector<Point2> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double x, y;
        char comma;
        if (ss >> x >> comma >> y)
            pts.push_back({x, y});
        else if (line.find("x") == std::string::npos)
            throw std::invalid_argument("malformed point line: " + line);
    }
    if (pts.empty()) throw std::invalid_argument("point file has no points");
    const MetricsSample s = evaluate_metrics(0.0, pts, radius, touch_tol);
    std::cout << "n=" << pts.size() << "\n";
    std::cout << "sed_circumference=" << experiments::format_double(s.sed_circumference) << "\n";
    std::cout << "hull_perimeter=" << experiments::format_double(s.hull_perimeter) << "\n";
    std::cout << "dispersion=" << experiments::format_double(s.dispersion) << "\n";
    std::cout << "cluster_fraction=" << experiments::format_double(s.cluster_fraction) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary-sensor swarm aggregation simulator"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "execute one configured run");
    std::string run_mode = "continuous", run_out = "run";
    int run_n = 10, run_dstar = 0;
    double run_horizon = 300.0, run_sample = 0.5, run_mstar = 0.0, run_p = 0.0, run_beta = 0.0,
           run_arena = 0.0;
    std::uint64_t run_seed = 0;
    run_cmd->add_option("--mode", run_mode, "continuous|discrete");
    run_cmd->add_option("--n", run_n, "number of robots")->check(CLI::PositiveNumber);
    run_cmd->add_option("--horizon", run_horizon, "seconds (continuous) or rounds (discrete)");
    run_cmd->add_option("--sample-every", run_sample, "sample cadence in seconds");
    run_cmd->add_option("--seed", run_seed, "RNG seed");
    run_cmd->add_option("--m-star", run_mstar, "motion noise cap in newtons");
    run_cmd->add_option("--p", run_p, "sensor error probability");
    run_cmd->add_option("--d-star", run_dstar, "perturbation delay (0 = disabled)");
    run_cmd->add_option("--beta", run_beta, "cone apex angle in radians");
    run_cmd->add_option("--arena", run_arena, "arena side in cm (0 = auto)");
    run_cmd->add_option("--out", run_out, "output prefix");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "execute an experiment spec file");
    std::string sweep_spec, sweep_out = "sweep_out";
    sweep_cmd->add_option("--spec", sweep_spec, "JSON experiment spec")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory");

    // deadlock-demo
    auto* dl_cmd = app.add_subcommand("deadlock-demo", "build a deadlock and report motion");
    std::string dl_construction = "even";
    int dl_n = 4;
    double dl_seconds = 60.0;
    dl_cmd->add_option("--construction", dl_construction, "even|odd|ring");
    dl_cmd->add_option("--n", dl_n, "number of robots");
    dl_cmd->add_option("--seconds", dl_seconds, "simulated seconds");

    // verify-bounds
    auto* vb_cmd = app.add_subcommand("verify-bounds", "rotation-bound verification grid");
    std::vector<double> vb_betas{0.2, 0.6, 1.0};
    std::vector<double> vb_d0s{50.0, 100.0};
    std::string vb_out;
    vb_cmd->add_option("--beta", vb_betas, "cone apex angles (rad)")->delimiter(',');
    vb_cmd->add_option("--d0", vb_d0s, "initial center distances (cm)")->delimiter(',');
    vb_cmd->add_option("--out", vb_out, "CSV output file (default stdout)");

    // metrics
    auto* m_cmd = app.add_subcommand("metrics", "evaluate the four metrics on a point file");
    std::string m_input;
    double m_radius = 3.7, m_tol = 0.37;
    m_cmd->add_option("--input", m_input, "CSV of x,y points")->required();
    m_cmd->add_option("--radius", m_radius, "robot radius in cm");
    m_cmd->add_option("--touch-tol", m_tol, "contact slack in cm");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd)
            return cmd_run(run_mode, run_n, run_horizon, run_sample, run_seed, run_mstar, run_p,
                           run_dstar, run_beta, run_arena, run_out);
        if (*sweep_cmd) return cmd_sweep(sweep_spec, sweep_out);
        if (*dl_cmd) return cmd_deadlock_demo(dl_construction, dl_n, dl_seconds);
        if (*vb_cmd) return cmd_verify_bounds(vb_betas, vb_d0s, vb_out);
        if (*m_cmd) return cmd_metrics(m_input, m_radius, m_tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
