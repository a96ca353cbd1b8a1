#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "swarm/controller.hpp"
#include "swarm/geometry.hpp"
#include "swarm/metrics.hpp"

namespace swarm {

/// Pose of one disc robot: center position and sensor-axis direction.
struct RobotPose {
    Point2 position;
    double heading = 0.0;  // rad, normalized to [0, 2*pi)
};

/// Symmetric pairwise overlap projection: repeatedly push each overlapping
/// pair apart equally along its center line by half the overlap (all pairs
/// updated simultaneously per sweep), until the worst overlap is below
/// 1e-9 cm or 64 sweeps have run. On non-convergence the current positions
/// are returned unchanged and *overflow is set. Robots flagged in
/// `immovable` absorb no push; their side of the correction goes entirely
/// to the mobile partner.
std::vector<Point2> resolve_contacts(const std::vector<Point2>& current,
                                     std::vector<Point2> proposed, double robot_radius,
                                     bool* overflow = nullptr,
                                     const std::vector<char>* immovable = nullptr);

/// Continuous-plane simulation of n disc robots executing a binary-sensor
/// controller with line- or cone-of-sight sensing.
///
/// Step semantics: all sensor bits are sampled from the pre-step state, then
/// each robot's instantaneous velocity (drive along the sensor axis plus
/// motion noise) is projected onto the contact constraints: every touching
/// pair loses its relative normal approach, split evenly, with no tangential
/// friction. Robots pushing head-on with equal and opposite intent cancel
/// exactly and stall (no translation, no yaw: the wheels slip), which makes
/// the deadlock constructions exact fixed points; oblique contact slides.
/// Free robots integrate their twist as an exact arc. Residual overlaps are
/// removed by the symmetric position projection.
class World {
  public:
    World(std::vector<RobotPose> poses, PhysicsParams params, NoiseModel noise,
          Controller controller, std::uint64_t seed);

    /// Sensor bit of robot i: 1 iff another robot's disc intersects the
    /// closed cone (apex at robot center, axis along heading, half-angle
    /// beta/2; a ray when beta = 0), then flipped with probability p.
    int sense(int i);

    /// Sensor bit without the error flip (no RNG use).
    int sense_geometric(int i) const;

    /// Advance the world by one timestep.
    void step();

    /// Mark robot i as static: it ignores its controller and noise and is
    /// never displaced, acting as a fixed anchor other robots collide with.
    void set_static(int i, bool is_static);
    bool is_static(int i) const { return static_[i] != 0; }

    int size() const { return static_cast<int>(poses_.size()); }
    const std::vector<RobotPose>& poses() const { return poses_; }
    const PhysicsParams& params() const { return params_; }
    const NoiseModel& noise() const { return noise_; }
    const Controller& controller() const { return controller_; }
    double time() const { return time_; }
    std::uint64_t seed() const { return seed_; }
    int contact_overflow_count() const { return contact_overflows_; }

    /// Sensor bits used by the most recent step().
    const std::vector<int>& last_sensor_bits() const { return last_bits_; }

    std::vector<Point2> positions() const;

    /// Turning center for robot i's 0-bit twist (90 degrees counter-clockwise
    /// of the sensor axis for a clockwise-searching controller).
    Point2 center_of_rotation(int i) const;

    /// All four metrics over robot centers at the current time, using the
    /// default touch tolerance of 0.1 r.
    MetricsSample sample_metrics() const;

    /// Smallest pairwise center distance; n < 2 yields +inf.
    double min_pairwise_distance() const;

  private:
    std::vector<RobotPose> poses_;
    PhysicsParams params_;
    NoiseModel noise_;
    Controller controller_;
    std::mt19937_64 rng_;
    std::uint64_t seed_ = 0;
    double time_ = 0.0;
    int contact_overflows_ = 0;
    std::vector<int> last_bits_;
    std::vector<char> static_;
};

/// Even-n deadlock: n/2 mutually blocking vertical pairs, pair i centered at
/// x = 3 r i, tops heading +y and bottoms heading -y. Requires even n > 3.
World gen_deadlock_even(int n, const PhysicsParams& params,
                        Controller controller = Controller::aggregation_default(),
                        NoiseModel noise = {}, std::uint64_t seed = 0);

/// Odd-n deadlock: the even construction on the first n-3 robots plus one
/// mutually blocking triplet. Requires odd n > 3.
World gen_deadlock_odd(int n, const PhysicsParams& params,
                       Controller controller = Controller::aggregation_default(),
                       NoiseModel noise = {}, std::uint64_t seed = 0);

/// Connected ring deadlock: n robots evenly spaced on a circle sized so
/// adjacent robots touch, each heading radially outward. Verifies that no
/// robot sees another and that every orbit step is blocked by the clockwise
/// neighbor; throws if either check fails. Requires n >= 6.
World gen_ring_deadlock(int n, const PhysicsParams& params,
                        Controller controller = Controller::aggregation_default(),
                        NoiseModel noise = {}, std::uint64_t seed = 0);

/// Regular n-gon with each heading offset by the same angle from its radial
/// direction (default: +90 degrees, the counter-clockwise tangent).
World gen_symmetric_cycle(int n, double circumradius, const PhysicsParams& params,
                          Controller controller = Controller::aggregation_default(),
                          NoiseModel noise = {}, std::uint64_t seed = 0,
                          double heading_offset = kPi / 2.0);

/// Uniform non-overlapping positions and headings in [0, arena_side]^2 by
/// rejection sampling (at most 10^4 * n attempts; throws "arena too dense").
World gen_random(int n, double arena_side, const PhysicsParams& params,
                 Controller controller = Controller::aggregation_default(),
                 NoiseModel noise = {}, std::uint64_t seed = 0);

struct RunResult {
    std::vector<MetricsSample> series;
    int contact_overflows = 0;
};

/// Step the world for `duration` seconds, recording metrics every
/// `sample_every` seconds (including t = 0). If `stop_dispersion_below` is
/// set, the run ends early at the first sample at or below that value.
RunResult run(World& world, double duration, double sample_every,
              std::optional<double> stop_dispersion_below = std::nullopt);

}  // namespace swarm
