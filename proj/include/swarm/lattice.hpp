#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "swarm/geometry.hpp"
#include "swarm/metrics.hpp"

namespace swarm::lattice {

/// Axial coordinates on the triangular lattice. Direction k points at
/// 60k degrees in the Cartesian embedding.
struct AxialCoord {
    int q = 0;
    int r = 0;
    bool operator==(const AxialCoord&) const = default;
    AxialCoord operator+(AxialCoord o) const { return {q + o.q, r + o.r}; }
    AxialCoord operator-(AxialCoord o) const { return {q - o.q, r - o.r}; }
};

inline constexpr AxialCoord kDirections[6] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};

/// Rotate an axial vector by +60 degrees (counter-clockwise).
inline AxialCoord rotate_ccw60(AxialCoord v) { return {-v.r, v.q + v.r}; }

/// Rotate an axial vector by -60 degrees (clockwise).
inline AxialCoord rotate_cw60(AxialCoord v) { return {v.q + v.r, -v.q}; }

/// Planar embedding with unit lattice constant: x = q + r/2, y = r*sqrt(3)/2.
Point2 axial_to_cartesian(AxialCoord node);

/// True iff the bearing of `target` from `origin` lies in the 60-degree
/// sector (60k, 60(k+1)] degrees: inclusive on the counter-clockwise boundary
/// ray, exclusive on the clockwise one. Exact integer arithmetic; infinite
/// range. Throws if target == origin.
bool cone_contains(AxialCoord origin, int orientation, AxialCoord target);

struct LatticeRobot {
    AxialCoord node;
    int orientation = 0;      // cone sector index k in 0..5
    int blocked_counter = 0;  // d
};

/// The two explicit noise mechanisms of the discrete adaptation. Both may be
/// active; a disabled threshold turns deadlock perturbation off.
struct DiscreteNoise {
    double error_probability = 0.0;
    std::optional<int> perturbation_threshold;  // d*, > 0 when present

    void validate() const;
};

struct AxialHash {
    std::size_t operator()(AxialCoord a) const {
        const std::uint64_t q = static_cast<std::uint32_t>(a.q);
        const std::uint64_t r = static_cast<std::uint32_t>(a.r);
        std::uint64_t h = (q << 32) | r;
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return static_cast<std::size_t>(h);
    }
};

/// Triangular-lattice world with random sequential scheduling in rounds.
class LatticeWorld {
  public:
    LatticeWorld(std::vector<LatticeRobot> robots, DiscreteNoise noise, std::uint64_t seed);

    /// Sensor bit of robot i: 1 iff any other robot's node lies in its cone,
    /// then flipped with probability p.
    int sense(int i);

    /// Sensor bit without the error flip (no RNG use).
    int sense_geometric(int i) const;

    /// Neighbor node in lattice direction (k+2) mod 6: the cone axis bisects
    /// sector k at 60k+30 degrees, so 90 degrees counter-clockwise of it
    /// lands exactly on direction k+2.
    AxialCoord center_of_rotation(int i) const;

    /// One activation of robot i:
    ///   1. bit 0, clockwise orbit node free: move there, turn cone -60 deg.
    ///   2. bit 1: turn cone -60 degrees in place.
    ///   3. otherwise blocked: do nothing, except that with perturbation
    ///      enabled the blocked counter advances and at d* the robot rotates
    ///      once in place instead.
    void activate(int i);

    /// Activate a uniformly chosen robot (the scheduler of a run).
    void activate_random();

    int size() const { return static_cast<int>(robots_.size()); }
    const std::vector<LatticeRobot>& robots() const { return robots_; }
    const DiscreteNoise& noise() const { return noise_; }
    long activation_count() const { return activation_count_; }
    long round_count() const { return round_count_; }
    std::uint64_t seed() const { return seed_; }

    bool occupied(AxialCoord node) const { return occupancy_.contains(node); }
    std::optional<int> robot_at(AxialCoord node) const;

    /// Embedded robot centers (unit lattice constant).
    std::vector<Point2> positions() const;

    /// Metrics over embedded centers; time is the round index, contact radius
    /// one half so touching robots sit at unit spacing.
    MetricsSample sample_metrics() const;

    /// Cluster fraction computed on lattice adjacency (graph edges between
    /// robots on neighboring nodes) rather than embedded distances.
    double lattice_cluster_fraction() const;

    /// Throws if the occupancy index disagrees with the robot list.
    void check_occupancy() const;

  private:
    std::vector<LatticeRobot> robots_;
    DiscreteNoise noise_;
    std::mt19937_64 rng_;
    std::uint64_t seed_ = 0;
    std::unordered_map<AxialCoord, int, AxialHash> occupancy_;
    long activation_count_ = 0;
    long round_count_ = 0;
    std::vector<char> seen_this_round_;
    int unseen_in_round_ = 0;

    void note_activated(int i);
};

/// Uniform random non-overlapping nodes in a rhombic region sized for the
/// given occupancy density (default ~10%), with uniform orientations.
LatticeWorld gen_random_lattice(int n, std::uint64_t seed, DiscreteNoise noise,
                                double density = 0.10);

struct LatticeRunResult {
    std::vector<MetricsSample> series;  // one sample per completed round
};

/// Repeatedly activate uniformly random robots, sampling metrics once per
/// completed round (plus the initial state at round 0). Stops after
/// max_rounds, or earlier when dispersion reaches `stop_dispersion_below`.
LatticeRunResult run_rounds(LatticeWorld& world, long max_rounds,
                            std::optional<double> stop_dispersion_below = std::nullopt);

}  // namespace swarm::lattice
