#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarm/lattice.hpp"
#include "swarm/metrics.hpp"
#include "swarm/world.hpp"

namespace swarm::experiments {

enum class Mode { kContinuous, kDiscrete };

std::string to_string(Mode mode);

/// One grid point of explicitly modeled noise: (m*, p) for continuous runs,
/// (p, d*) for discrete runs.
struct NoisePoint {
    double m_star = 0.0;
    double p = 0.0;
    std::optional<int> d_star;
};

/// A sweep configuration: full cross product of system sizes x noise grid x
/// beta grid x repeats. Parsed from strict UTF-8 JSON (unknown fields are an
/// error), with derived per-run seeds seed + run index.
struct ExperimentSpec {
    Mode mode = Mode::kContinuous;
    std::vector<int> system_sizes;
    std::vector<NoisePoint> noise_grid;  // empty -> single zero-noise cell
    std::vector<double> beta_grid;       // empty -> {0}
    int repeats = 1;
    double horizon = 300.0;  // seconds (continuous) or rounds (discrete)
    std::uint64_t seed = 0;
    double aggregation_threshold = 0.15;
    double sample_cadence = 0.5;  // seconds between samples (continuous)

    void validate() const;
};

ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::filesystem::path& file);

struct RunRecord {
    Mode mode = Mode::kContinuous;
    int n = 0;
    NoisePoint noise;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int run_index = 0;
    std::optional<double> aggregation_time;  // nullopt = CUTOFF
    MetricsSample final_sample;
    int contact_overflows = 0;
    std::string error;  // non-empty when the run failed
    std::vector<MetricsSample> series;
};

/// First sample time at which dispersion is within `threshold` of the
/// hexagonal-packing baseline for n robots at the given spacing; nullopt
/// (CUTOFF) when the series never gets there.
std::optional<double> detect_aggregation(const std::vector<MetricsSample>& series, int n,
                                         double threshold, double spacing);

/// Arena side used for random continuous initial conditions: the swarm
/// covers about 5% of the arena area.
double continuous_arena_side(int n, double robot_radius);

/// Execute one run of a cell. Continuous runs draw initial conditions from
/// gen_random; discrete runs from gen_random_lattice at ~10% density.
RunRecord execute_run(const ExperimentSpec& spec, int n, const NoisePoint& noise, double beta,
                      std::uint64_t run_seed, int run_index);

struct SweepResult {
    std::vector<RunRecord> records;
    std::string summary_csv;
};

/// Run the full cross product in a worker pool (capped by the SWARM_WORKERS
/// environment variable). Individual run errors are recorded and the sweep
/// continues. Output is deterministic for a given spec.
SweepResult sweep(const ExperimentSpec& spec);

/// Write per-run metric CSVs, a run index, and the summary table to out_dir.
void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& out_dir);

/// Format with 9 significant digits (all CSV floats).
std::string format_double(double v);

/// Metric series as CSV text: t,sed_circumference,hull_perimeter,dispersion,cluster_fraction.
std::string metrics_csv(const std::vector<MetricsSample>& series);

/// Sidecar text describing one continuous run's configuration.
std::string run_sidecar_text(const World& world, double duration, double sample_every);

}  // namespace swarm::experiments
