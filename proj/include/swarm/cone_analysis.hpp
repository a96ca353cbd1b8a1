#pragma once

#include <vector>

#include "swarm/controller.hpp"
#include "swarm/geometry.hpp"

namespace swarm::cone {

/// The symbols of the one-mover-vs-one-static-robot analysis: orbit radius R,
/// robot radii, cone size beta, current center-target distance d, the
/// line-of-sight visibility arc alpha and the axis-to-tangent angle gamma.
struct ConeGeometry {
    double orbit_radius = 0.0;  // R, cm
    double r_i = 0.0;           // mover radius, cm
    double r_j = 0.0;           // target radius, cm
    double beta = 0.0;          // cone apex angle, rad
    double d = 0.0;             // ||p_j - c_i||, cm
    double alpha = 0.0;         // rad
    double gamma = 0.0;         // rad
};

/// Constants of the rotation bound: r_i = R / k1 and k2 = 1 / (1 + 2/k1).
struct BoundParams {
    double d0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    long m = 0;
};

/// Linearized lower bound (1 - 1/sqrt(3)) * beta / 2.
double gamma_linear_lb(double beta);

/// Exact lower bound beta/2 - asin(sin(beta/2) / sqrt(3)). Independent of the
/// robot radius; the parameter is kept so oracle checks can confirm the
/// cancellation.
double gamma_exact_lb(double beta, double r_i = 1.0);

/// Position of the static robot at the moment of first sight, in the frame
/// with the mover's turning center at the origin and the cone axis along +x:
/// [ r_j cos(a/2+g)/sin(a/2), -(R + r_j sin(a/2+g)/sin(a/2)) ].
Point2 p_j_position(double alpha, double gamma, double R, double r_j);

/// Distance from the static robot to the mover's turning center after one
/// revolution: sqrt(d^2 - 4 R r_j sin(a/2+g)/sin(a/2)). Throws when the
/// radicand is negative (the robots aggregate within this revolution).
double d_prime(double d, double alpha, double gamma, double R, double r_j);

struct AlphaGamma {
    double alpha = 0.0;
    double gamma = 0.0;
};

/// Line-of-sight visibility arc of a disc of radius r_j seen from distance
/// `dist`: the angular diameter 2 asin(r_j / dist). Equals pi/3 when
/// equal-radius robots touch (dist = 2 r_j) and shrinks with distance.
double alpha_at_distance(double dist, double r_j);

/// Geometric oracle for alpha and gamma: sweep the mover clockwise around an
/// orbit of radius R about the origin with the target disc at distance d, and
/// bisect (to 1e-10 rad of orbit angle) for the pose at which the cone of
/// apex angle beta first intersects the disc. alpha is the angular diameter
/// of the disc from the mover at that pose, gamma the angle from the cone
/// axis to the near tangent.
AlphaGamma solve_alpha_gamma(double d, double R, double r_i, double r_j, double beta);

/// Number of revolutions after which aggregation is guaranteed:
/// ceil((d0 - R - r_i - r_j)(R + 2 r_i) / (2 sqrt(3) R r_i sin((1-1/sqrt(3)) beta/2))).
/// Requires d0 >= R + r_i + r_j, beta in (0, pi), and r_i = r_j < R.
long rotation_bound(double d0, double R, double r_i, double r_j, double beta);

/// rotation_bound together with its k1/k2 constants.
BoundParams make_bound_params(double d0, double R, double r_i, double r_j, double beta);

/// Trace of a two-robot chase: one mover orbiting with cone size beta, one
/// static target placed so that the initial ||p_j - c_i|| equals d0.
struct ChaseTrace {
    bool touched = false;
    long revolutions = 0;                 // orbit segments started
    std::vector<double> d_at_sight_loss;  // ||p_j - c_i|| at each lose-sight event
    double final_distance = 0.0;          // ||p_j - p_i|| when the trace ended
};

/// Simulate the chase until touch or until `max_revolutions` orbit segments
/// have started. beta = 0 gives the line-of-sight special case.
ChaseTrace simulate_chase(double d0, double beta, const PhysicsParams& params,
                          long max_revolutions);

struct BoundVerification {
    long measured_m = 0;
    long bound_m = 0;
    bool pass = false;
};

/// Run the chase and compare the measured revolution count against
/// rotation_bound; capped at 2x the bound and reported as failure if the
/// robots have not touched by then.
BoundVerification verify_bound_by_simulation(double d0, double beta,
                                             const PhysicsParams& params);

/// One measured d -> d' update: the value of ||p_j - c_i|| after the first
/// lose-sight event of a chase starting at distance d0.
double measure_one_revolution(double d0, double beta, const PhysicsParams& params);

}  // namespace swarm::cone
