#include "swarm/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace swarm {

namespace {

constexpr double kContactSlack = 1e-6;   // cm; gap below which robots count as touching
constexpr double kOverlapStop = 1e-9;    // cm; projection convergence threshold
constexpr double kApproachTol = 1e-12;   // cm/s; residual approach tolerated by projection
constexpr double kStallSpeed = 1e-7;     // cm/s; below this a pressed robot counts as stalled
constexpr int kMaxProjectionSweeps = 64;

// Exact arc integration: chord of rotating about the instantaneous center by
// omega*dt, so a constant twist traces a drift-free circle.
Point2 arc_chord(double heading, const Twist& t, double dt) {
    if (std::abs(t.angular) < 1e-12) return unit_vector(heading) * (t.linear * dt);
    const double rr = t.linear / t.angular;
    const Point2 center_rel{-rr * std::sin(heading), rr * std::cos(heading)};
    const Point2 from_center = center_rel * -1.0;  // p - c
    return rotate(from_center, t.angular * dt) - from_center;
}

}  // namespace

PhysicsParams PhysicsParams::epuck(double beta) {
    PhysicsParams p;
    p.sensor_half_angle = beta / 2.0;
    p.validate();
    const Controller c = Controller::aggregation_default();
    const Twist search = body_twist(c, 0, p);
    const Twist spin = body_twist(c, 1, p);
    if (std::abs(std::abs(orbit_radius(search)) - 14.45) > 1e-9 ||
        std::abs(search.angular + 0.75) > 5e-3 || std::abs(spin.linear) > 1e-12 ||
        std::abs(spin.angular + 5.02) > 5e-3)
        throw std::logic_error("e-puck calibration drift: orbit radius or spin rates off");
    return p;
}

World::World(std::vector<RobotPose> poses, PhysicsParams params, NoiseModel noise,
             Controller controller, std::uint64_t seed)
    : poses_(std::move(poses)),
      params_(params),
      noise_(noise),
      controller_(controller),
      rng_(seed),
      seed_(seed) {
    params_.validate();
    noise_.validate();
    controller_.validate();
    if (poses_.empty()) throw std::invalid_argument("world needs at least one robot");
    for (auto& pose : poses_) {
        if (!std::isfinite(pose.position.x) || !std::isfinite(pose.position.y))
            throw std::invalid_argument("non-finite robot position");
        pose.heading = normalize_angle(pose.heading);
    }
    if (min_pairwise_distance() < 2.0 * params_.robot_radius - kContactSlack)
        throw std::invalid_argument("robots overlap in initial configuration");
    last_bits_.assign(poses_.size(), 0);
    static_.assign(poses_.size(), 0);
}

void World::set_static(int i, bool is_static) { static_.at(i) = is_static ? 1 : 0; }

int World::sense_geometric(int i) const {
    const Point2 p = poses_[i].position;
    const Point2 axis = unit_vector(poses_[i].heading);
    const double cos_half = std::cos(params_.sensor_half_angle);
    const double sin_half = std::sin(params_.sensor_half_angle);
    const double r = params_.robot_radius;
    for (int j = 0; j < size(); ++j) {
        if (j == i) continue;
        const Point2 u = poses_[j].position - p;
        const double d = norm(u);
        if (d <= r) return 1;  // apex inside the other disc
        // Seen iff the bearing offset is at most beta/2 + asin(r/d); compare
        // cosines to avoid transcendentals in the O(n^2) inner loop.
        const double s = r / d;
        const double cos_delta = std::sqrt(1.0 - s * s);
        const double cos_limit = cos_half * cos_delta - sin_half * s;
        if (dot(u, axis) / d >= cos_limit) return 1;
    }
    return 0;
}

int World::sense(int i) {
    int bit = sense_geometric(i);
    if (noise_.error_probability > 0.0) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        if (u01(rng_) < noise_.error_probability) bit = 1 - bit;
    }
    return bit;
}

std::vector<Point2> World::positions() const {
    std::vector<Point2> out;
    out.reserve(poses_.size());
    for (const auto& pose : poses_) out.push_back(pose.position);
    return out;
}

Point2 World::center_of_rotation(int i) const {
    const Twist search = body_twist(controller_, 0, params_);
    if (std::abs(search.angular) < 1e-12)
        throw std::logic_error("controller has no 0-bit turning center");
    const double rr = orbit_radius(search);
    const double h = poses_[i].heading;
    return poses_[i].position + Point2{-rr * std::sin(h), rr * std::cos(h)};
}

MetricsSample World::sample_metrics() const {
    const auto pts = positions();
    return evaluate_metrics(time_, pts, params_.robot_radius,
                            default_touch_tolerance(params_.robot_radius));
}

double World::min_pairwise_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            best = std::min(best, distance(poses_[i].position, poses_[j].position));
    return best;
}

std::vector<Point2> resolve_contacts(const std::vector<Point2>& current,
                                     std::vector<Point2> proposed, double robot_radius,
                                     bool* overflow, const std::vector<char>* immovable) {
    if (overflow) *overflow = false;
    const int n = static_cast<int>(proposed.size());
    const double target = 2.0 * robot_radius;
    auto fixed = [&](int i) { return immovable && (*immovable)[i]; };
    std::vector<Point2> push(n);
    for (int sweep = 0; sweep < kMaxProjectionSweeps; ++sweep) {
        double max_overlap = 0.0;
        std::fill(push.begin(), push.end(), Point2{});
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const Point2 u = proposed[i] - proposed[j];
                const double d = norm(u);
                const double overlap = target - d;
                if (overlap <= kOverlapStop) continue;
                const Point2 dir = d > 1e-12 ? u * (1.0 / d) : Point2{1.0, 0.0};
                const double share_i = fixed(i) ? 0.0 : (fixed(j) ? 1.0 : 0.5);
                const double share_j = fixed(j) ? 0.0 : (fixed(i) ? 1.0 : 0.5);
                push[i] += dir * (overlap * share_i);
                push[j] -= dir * (overlap * share_j);
                max_overlap = std::max(max_overlap, overlap);
            }
        }
        if (max_overlap <= kOverlapStop) return proposed;
        for (int i = 0; i < n; ++i) proposed[i] += push[i];
    }
    double residual = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            residual = std::max(residual, target - distance(proposed[i], proposed[j]));
    if (residual > kOverlapStop) {
        if (overflow) *overflow = true;
        return current;
    }
    return proposed;
}

void World::step() {
    const int n = size();
    const double r = params_.robot_radius;
    const double dt = params_.timestep;

    // Sense everyone from the pre-step state.
    last_bits_.resize(n);
    for (int i = 0; i < n; ++i) last_bits_[i] = sense(i);

    std::vector<Twist> twists(n);
    std::vector<Point2> noise_vel(n);
    std::vector<Point2> velocity(n);  // instantaneous drive + noise, cm/s
    if (noise_.motion_noise_max > 0.0) {
        std::uniform_real_distribution<double> mag(0.0, noise_.motion_noise_max);
        std::uniform_real_distribution<double> ang(0.0, kTwoPi);
        for (int i = 0; i < n; ++i) {
            if (static_[i]) continue;
            const double f = mag(rng_);
            const double a = ang(rng_);
            noise_vel[i] = unit_vector(a) * (f / params_.damping);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (static_[i]) continue;
        twists[i] = body_twist(controller_, last_bits_[i], params_);
        velocity[i] = unit_vector(poses_[i].heading) * twists[i].linear + noise_vel[i];
    }
    const std::vector<Point2> commanded = velocity;

    // Contacts at current positions; unit normals point from j to i.
    struct Contact {
        int i, j;
        Point2 normal;
    };
    std::vector<Contact> contacts;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Point2 u = poses_[i].position - poses_[j].position;
            const double d = norm(u);
            if (d <= 2.0 * r + kContactSlack)
                contacts.push_back({i, j, d > 1e-12 ? u * (1.0 / d) : Point2{1.0, 0.0}});
        }
    }

    // Contact blocking at the velocity level: remove relative normal approach
    // across every touching pair (split evenly, no tangential friction), so
    // head-on pushes cancel exactly while oblique contact slides. All pairs
    // update simultaneously per sweep; the result is independent of robot
    // indexing.
    std::vector<char> constrained(n, 0);
    if (!contacts.empty()) {
        std::vector<Point2> correction(n);
        for (int sweep = 0; sweep < kMaxProjectionSweeps; ++sweep) {
            double worst = 0.0;
            std::fill(correction.begin(), correction.end(), Point2{});
            for (const Contact& c : contacts) {
                const double rel = dot(velocity[c.i] - velocity[c.j], c.normal);
                if (rel >= -kApproachTol) continue;
                const double share_i = static_[c.i] ? 0.0 : (static_[c.j] ? 1.0 : 0.5);
                const double share_j = static_[c.j] ? 0.0 : (static_[c.i] ? 1.0 : 0.5);
                correction[c.i] += c.normal * (-rel * share_i);
                correction[c.j] -= c.normal * (-rel * share_j);
                if (share_i > 0.0) constrained[c.i] = 1;
                if (share_j > 0.0) constrained[c.j] = 1;
                worst = std::max(worst, -rel);
            }
            if (worst <= kApproachTol) break;
            for (int i = 0; i < n; ++i) velocity[i] += correction[i];
        }
    }

    // A robot whose commanded motion is annihilated by the contacts is
    // stalled: wheels slip and the body neither translates nor yaws, which
    // freezes the deadlock constructions exactly. Noise enters the commanded
    // velocity above, so noise is what lets a robot slip past its blocker.
    std::vector<Point2> disp(n);
    std::vector<double> new_heading(n);
    for (int i = 0; i < n; ++i) {
        if (static_[i]) {
            new_heading[i] = poses_[i].heading;
            continue;
        }
        const bool stalled =
            constrained[i] && norm(commanded[i]) > kStallSpeed && norm(velocity[i]) <= kStallSpeed;
        if (stalled) {
            new_heading[i] = poses_[i].heading;
        } else if (constrained[i]) {
            disp[i] = velocity[i] * dt;
            new_heading[i] = normalize_angle(poses_[i].heading + twists[i].angular * dt);
        } else {
            // Free motion: exact arc plus the noise drift.
            disp[i] = arc_chord(poses_[i].heading, twists[i], dt) + noise_vel[i] * dt;
            new_heading[i] = normalize_angle(poses_[i].heading + twists[i].angular * dt);
        }
    }

    std::vector<Point2> current(n), proposed(n);
    for (int i = 0; i < n; ++i) {
        current[i] = poses_[i].position;
        proposed[i] = poses_[i].position + disp[i];
    }
    bool any_static = std::any_of(static_.begin(), static_.end(), [](char c) { return c != 0; });
    bool overflow = false;
    std::vector<Point2> resolved =
        resolve_contacts(current, proposed, r, &overflow, any_static ? &static_ : nullptr);
    if (overflow) ++contact_overflows_;

    for (int i = 0; i < n; ++i) {
        poses_[i].position = resolved[i];
        poses_[i].heading = new_heading[i];
    }
    time_ += dt;
}

World gen_deadlock_even(int n, const PhysicsParams& params, Controller controller,
                        NoiseModel noise, std::uint64_t seed) {
    if (n <= 3 || n % 2 != 0)
        throw std::invalid_argument("even deadlock construction requires even n > 3");
    const double r = params.robot_radius;
    std::vector<RobotPose> poses;
    poses.reserve(n);
    for (int i = 0; i < n / 2; ++i) {
        poses.push_back({{3.0 * r * i, r}, kPi / 2.0});
        poses.push_back({{3.0 * r * i, -r}, 3.0 * kPi / 2.0});
    }
    return World(std::move(poses), params, noise, controller, seed);
}

World gen_deadlock_odd(int n, const PhysicsParams& params, Controller controller,
                       NoiseModel noise, std::uint64_t seed) {
    if (n <= 3 || n % 2 == 0)
        throw std::invalid_argument("odd deadlock construction requires odd n > 3");
    const double r = params.robot_radius;
    std::vector<RobotPose> poses;
    poses.reserve(n);
    for (int i = 0; i < (n - 3) / 2; ++i) {
        poses.push_back({{3.0 * r * i, r}, kPi / 2.0});
        poses.push_back({{3.0 * r * i, -r}, 3.0 * kPi / 2.0});
    }
    const double xt = 3.0 * r * (n / 2.0 - 1.0);
    poses.push_back({{xt, r}, 2.0 * kPi / 3.0});
    poses.push_back({{xt, -r}, 4.0 * kPi / 3.0});
    poses.push_back({{xt + std::sqrt(3.0) * r, 0.0}, 0.0});
    return World(std::move(poses), params, noise, controller, seed);
}

World gen_ring_deadlock(int n, const PhysicsParams& params, Controller controller,
                        NoiseModel noise, std::uint64_t seed) {
    if (n < 6) throw std::invalid_argument("ring deadlock requires n >= 6");
    const double r = params.robot_radius;
    const double rho = r / std::sin(kPi / n);
    std::vector<RobotPose> poses;
    poses.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double phi = kTwoPi * i / n;
        poses.push_back({{rho * std::cos(phi), rho * std::sin(phi)}, phi});
    }
    World w(std::move(poses), params, noise, controller, seed);

    for (int i = 0; i < n; ++i)
        if (w.sense_geometric(i) != 0)
            throw std::runtime_error("ring deadlock verification failed: a robot sees another");
    const Twist search = body_twist(controller, 0, params);
    for (int i = 0; i < n; ++i) {
        const int cw = (i + n - 1) % n;
        const Point2 di = arc_chord(w.poses()[i].heading, search, params.timestep);
        const Point2 dcw = arc_chord(w.poses()[cw].heading, search, params.timestep);
        const Point2 u = w.poses()[i].position - w.poses()[cw].position;
        const Point2 normal = u * (1.0 / norm(u));
        if (dot(di - dcw, normal) >= -kApproachTol)
            throw std::runtime_error(
                "ring deadlock verification failed: orbit step not blocked by clockwise neighbor");
    }
    return w;
}

World gen_symmetric_cycle(int n, double circumradius, const PhysicsParams& params,
                          Controller controller, NoiseModel noise, std::uint64_t seed,
                          double heading_offset) {
    if (n < 2) throw std::invalid_argument("symmetric cycle requires n >= 2");
    if (circumradius <= 0.0) throw std::invalid_argument("circumradius must be > 0");
    std::vector<RobotPose> poses;
    poses.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double phi = kTwoPi * i / n;
        poses.push_back({{circumradius * std::cos(phi), circumradius * std::sin(phi)},
                         normalize_angle(phi + heading_offset)});
    }
    return World(std::move(poses), params, noise, controller, seed);
}

World gen_random(int n, double arena_side, const PhysicsParams& params, Controller controller,
                 NoiseModel noise, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const double r = params.robot_radius;
    if (arena_side < 2.0 * r) throw std::invalid_argument("arena too dense");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(r, arena_side - r);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);

    std::vector<RobotPose> poses;
    poses.reserve(n);
    long attempts_left = 10000L * n;
    while (static_cast<int>(poses.size()) < n) {
        if (attempts_left-- <= 0) throw std::runtime_error("arena too dense");
        const Point2 candidate{coord(rng), coord(rng)};
        bool clear = true;
        for (const auto& pose : poses) {
            if (distance(pose.position, candidate) < 2.0 * r) {
                clear = false;
                break;
            }
        }
        if (clear) poses.push_back({candidate, angle(rng)});
    }
    return World(std::move(poses), params, noise, controller, seed);
}

RunResult run(World& world, double duration, double sample_every,
              std::optional<double> stop_dispersion_below) {
    if (duration <= 0.0) throw std::invalid_argument("duration must be > 0");
    if (sample_every <= 0.0) throw std::invalid_argument("sample cadence must be > 0");
    RunResult result;
    MetricsSample first = world.sample_metrics();
    result.series.push_back(first);
    if (stop_dispersion_below && first.dispersion <= *stop_dispersion_below) {
        result.contact_overflows = world.contact_overflow_count();
        return result;
    }
    const double dt = world.params().timestep;
    const long steps = std::llround(duration / dt);
    const long stride = std::max(1L, std::lround(sample_every / dt));
    for (long s = 1; s <= steps; ++s) {
        world.step();
        if (s % stride == 0 || s == steps) {
            MetricsSample m = world.sample_metrics();
            result.series.push_back(m);
            if (stop_dispersion_below && m.dispersion <= *stop_dispersion_below) break;
        }
    }
    result.contact_overflows = world.contact_overflow_count();
    return result;
}

}  // namespace swarm
