#include "swarm/cone_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "swarm/world.hpp"

namespace swarm::cone {

namespace {

constexpr double kSinGuard = 1e-12;

double checked_sin_half_alpha(double alpha) {
    const double s = std::sin(alpha / 2.0);
    if (s < kSinGuard) throw std::invalid_argument("alpha too small: sin(alpha/2) singular");
    return s;
}

}  // namespace

double gamma_linear_lb(double beta) { return (1.0 - 1.0 / std::sqrt(3.0)) * beta / 2.0; }

double gamma_exact_lb(double beta, double r_i) {
    if (beta <= 0.0 || beta >= kPi) throw std::invalid_argument("beta must be in (0, pi)");
    if (r_i <= 0.0) throw std::invalid_argument("r_i must be > 0");
    // At touch the tangent construction gives sin(theta) = r_i sin(beta/2) / z
    // with z >= r_i sqrt(3); the radius cancels.
    return beta / 2.0 - std::asin(std::sin(beta / 2.0) / std::sqrt(3.0));
}

Point2 p_j_position(double alpha, double gamma, double R, double r_j) {
    if (alpha <= 0.0 || alpha >= kPi) throw std::invalid_argument("alpha must be in (0, pi)");
    if (gamma < 0.0 || gamma >= kPi / 2.0)
        throw std::invalid_argument("gamma must be in [0, pi/2)");
    const double s = checked_sin_half_alpha(alpha);
    return {r_j * std::cos(alpha / 2.0 + gamma) / s,
            -(R + r_j * std::sin(alpha / 2.0 + gamma) / s)};
}

double d_prime(double d, double alpha, double gamma, double R, double r_j) {
    const double s = checked_sin_half_alpha(alpha);
    const double radicand = d * d - 4.0 * R * r_j * std::sin(alpha / 2.0 + gamma) / s;
    if (radicand < 0.0)
        throw std::runtime_error("robots aggregate within this revolution");
    return std::sqrt(radicand);
}

namespace {

// Pose of the orbiting mover at orbit phase psi (turning center at origin):
// position R*(cos psi, sin psi), sensor axis at psi + pi/2. The mover orbits
// clockwise, so psi decreases over time.
struct OrbitPose {
    Point2 position;
    double axis;
};

OrbitPose orbit_pose(double psi, double R) {
    return {{R * std::cos(psi), R * std::sin(psi)}, psi + kPi / 2.0};
}

// Signed clearance of the seeing condition: >= 0 iff the cone intersects the
// target disc.
double sight_clearance(double psi, double R, double r_j, double beta, Point2 p_j) {
    const OrbitPose pose = orbit_pose(psi, R);
    const Point2 u = p_j - pose.position;
    const double dist = norm(u);
    if (dist <= r_j) return kPi;  // apex inside the disc
    const double bearing = std::atan2(u.y, u.x);
    const double rel = std::abs(wrap_angle(bearing - pose.axis));
    return beta / 2.0 + std::asin(r_j / dist) - rel;
}

}  // namespace

double alpha_at_distance(double dist, double r_j) {
    if (dist < r_j) throw std::invalid_argument("requires dist >= r_j");
    return 2.0 * std::asin(r_j / dist);
}

AlphaGamma solve_alpha_gamma(double d, double R, double r_i, double r_j, double beta) {
    if (d <= R + r_j) throw std::invalid_argument("requires d > R + r_j");
    if (R <= 0.0 || r_i <= 0.0 || r_j <= 0.0)
        throw std::invalid_argument("R, r_i, r_j must be > 0");
    if (beta < 0.0 || beta >= kPi) throw std::invalid_argument("beta must be in [0, pi)");

    const Point2 p_j{d, 0.0};
    auto visible = [&](double psi) { return sight_clearance(psi, R, r_j, beta, p_j) >= 0.0; };

    // Sweep clockwise (decreasing psi) for a not-seeing anchor, then for the
    // 0 -> 1 flip. The scan step stays well under the visibility window,
    // which shrinks like r_j / d at long range.
    const double scan = std::min(1e-3, 0.5 * r_j / (d + R));
    double psi = kPi;
    double limit = psi - 2.0 * kTwoPi;
    while (visible(psi)) {
        psi -= scan;
        if (psi < limit)
            throw std::runtime_error("cone sees the target from every orbit pose");
    }
    double hi = psi;  // not visible
    double lo = psi;
    bool found = false;
    while (lo > limit) {
        lo = hi - scan;
        if (visible(lo)) {
            found = true;
            break;
        }
        hi = lo;
    }
    if (!found) throw std::runtime_error("target never visible along the orbit");

    // Bisect [lo, hi], visible at lo, not at hi.
    while (hi - lo > 1e-10) {
        const double mid = (lo + hi) / 2.0;
        if (visible(mid))
            lo = mid;
        else
            hi = mid;
    }
    const double psi_first = lo;
    const OrbitPose pose = orbit_pose(psi_first, R);
    const Point2 u = p_j - pose.position;
    const double dist = norm(u);
    const double delta = std::asin(r_j / dist);
    // Near tangent sits at bearing + delta; gamma is its offset below the axis.
    const double bearing = std::atan2(u.y, u.x);
    const double gamma = -(wrap_angle(bearing - pose.axis) + delta);
    return {alpha_at_distance(dist, r_j), std::clamp(gamma, 0.0, beta / 2.0)};
}

long rotation_bound(double d0, double R, double r_i, double r_j, double beta) {
    if (beta <= 0.0 || beta >= kPi) throw std::invalid_argument("beta must be in (0, pi)");
    if (std::abs(r_i - r_j) > 1e-12) throw std::invalid_argument("requires r_i = r_j");
    if (!(r_i > 0.0 && r_i < R)) throw std::invalid_argument("requires 0 < r_i < R");
    if (d0 < R + r_i + r_j - 1e-12)
        throw std::invalid_argument("requires d0 >= R + r_i + r_j");
    const double slack = d0 - R - r_i - r_j;
    if (slack < 1e-9) return 0;  // already aggregated up to rounding
    const double denominator =
        2.0 * std::sqrt(3.0) * R * r_i * std::sin(gamma_linear_lb(beta));
    return static_cast<long>(std::ceil(slack * (R + 2.0 * r_i) / denominator));
}

BoundParams make_bound_params(double d0, double R, double r_i, double r_j, double beta) {
    BoundParams b;
    b.d0 = d0;
    b.k1 = R / r_i;
    b.k2 = 1.0 / (1.0 + 2.0 / b.k1);
    b.m = rotation_bound(d0, R, r_i, r_j, beta);
    return b;
}

ChaseTrace simulate_chase(double d0, double beta, const PhysicsParams& base,
                          long max_revolutions) {
    PhysicsParams params = base;
    params.sensor_half_angle = beta / 2.0;
    params.validate();

    const Controller ctrl = Controller::aggregation_default();
    const Twist search = body_twist(ctrl, 0, params);
    const double R = std::abs(orbit_radius(search));
    const double r = params.robot_radius;
    if (d0 <= R + 2.0 * r) throw std::invalid_argument("requires d0 > R + r_i + r_j");

    // Turning center at the origin, target on the +x axis at distance d0 from
    // it. The mover starts at the top of its orbit looking along -x, which
    // cannot see the target for any beta < pi, so the first sighting is a
    // clean boundary crossing.
    std::vector<RobotPose> poses{{{0.0, R}, kPi}, {{d0, 0.0}, kPi / 2.0}};
    World world(std::move(poses), params, NoiseModel{}, ctrl, 0);
    world.set_static(1, true);
    if (world.sense_geometric(0) != 0)
        throw std::logic_error("chase fixture starts in sight of the target");

    // Steps per revolution: a full orbit plus the in-place sweep, padded.
    const double dt = params.timestep;
    const long steps_per_rev =
        static_cast<long>(std::ceil(kTwoPi / (std::abs(search.angular) * dt))) + 2000;

    ChaseTrace trace;
    trace.revolutions = 1;  // the initial orbit segment
    int prev_bit = 0;
    const Point2 target = world.poses()[1].position;
    long budget = (max_revolutions + 1) * steps_per_rev;
    while (budget-- > 0) {
        world.step();
        const int bit = world.last_sensor_bits()[0];
        if (prev_bit == 1 && bit == 0) {
            trace.d_at_sight_loss.push_back(distance(target, world.center_of_rotation(0)));
            ++trace.revolutions;
        }
        prev_bit = bit;
        const double gap = distance(world.poses()[0].position, target);
        if (gap <= 2.0 * r + 1e-6) {
            trace.touched = true;
            trace.final_distance = gap;
            return trace;
        }
        if (trace.revolutions > max_revolutions) break;
    }
    trace.final_distance = distance(world.poses()[0].position, target);
    return trace;
}

BoundVerification verify_bound_by_simulation(double d0, double beta,
                                             const PhysicsParams& params) {
    const Controller ctrl = Controller::aggregation_default();
    const Twist search = body_twist(ctrl, 0, params);
    const double R = std::abs(orbit_radius(search));
    const double r = params.robot_radius;

    BoundVerification v;
    v.bound_m = rotation_bound(d0, R, r, r, beta);
    const ChaseTrace trace = simulate_chase(d0, beta, params, 2 * v.bound_m);
    v.measured_m = trace.revolutions;
    v.pass = trace.touched && trace.revolutions <= v.bound_m;
    return v;
}

double measure_one_revolution(double d0, double beta, const PhysicsParams& params) {
    const ChaseTrace trace = simulate_chase(d0, beta, params, 2);
    if (trace.d_at_sight_loss.empty())
        throw std::runtime_error("chase ended before the first lose-sight event");
    return trace.d_at_sight_loss.front();
}

}  // namespace swarm::cone
