#pragma once

#include <stdexcept>

#include "swarm/geometry.hpp"

namespace swarm {

/// Wheel-command 4-tuple: (v_l0, v_r0) drive the wheels when the sensor bit
/// is 0, (v_l1, v_r1) when it is 1. Components are normalized to [-1, 1].
struct Controller {
    double v_l0 = 0.0;
    double v_r0 = 0.0;
    double v_l1 = 0.0;
    double v_r1 = 0.0;

    /// The aggregation controller: orbit clockwise when nothing is seen,
    /// spin clockwise in place when a robot is seen.
    static Controller aggregation_default() { return {-0.7, -1.0, 1.0, -1.0}; }

    /// True iff v_r0 < v_l0 < 0: on a 0-bit the robot orbits clockwise about
    /// a center 90 degrees counter-clockwise of its sensor axis.
    bool is_clockwise_searching() const { return v_r0 < v_l0 && v_l0 < 0.0; }

    void validate() const {
        for (double v : {v_l0, v_r0, v_l1, v_r1})
            if (!(v >= -1.0 && v <= 1.0))
                throw std::invalid_argument("controller component outside [-1, 1]");
    }
};

/// Body twist of a differential-drive robot: forward speed along the sensor
/// axis (cm/s) and yaw rate (rad/s, counter-clockwise positive).
struct Twist {
    double linear = 0.0;
    double angular = 0.0;
};

struct PhysicsParams {
    double robot_radius = 3.7;      // cm
    double axle_length = 5.1;       // cm
    double max_wheel_speed = 12.8;  // cm/s
    double timestep = 0.005;        // s
    double sensor_half_angle = 0.0; // rad; beta/2, 0 => line of sight
    double damping = 1.0;           // N*s/cm; maps noise force to velocity

    /// Full cone apex angle beta.
    double beta() const { return 2.0 * sensor_half_angle; }

    void validate() const {
        if (robot_radius <= 0.0) throw std::invalid_argument("robot_radius must be > 0");
        if (axle_length <= 0.0) throw std::invalid_argument("axle_length must be > 0");
        if (max_wheel_speed <= 0.0) throw std::invalid_argument("max_wheel_speed must be > 0");
        if (timestep <= 0.0) throw std::invalid_argument("timestep must be > 0");
        if (sensor_half_angle < 0.0 || sensor_half_angle >= kPi / 2.0)
            throw std::invalid_argument("sensor half-angle must be in [0, pi/2)");
        if (damping <= 0.0) throw std::invalid_argument("damping must be > 0");
    }

    /// e-puck scale calibration. The defaults reproduce an orbit radius of
    /// 14.45 cm with angular speeds of about -0.75 rad/s (searching) and
    /// -5.02 rad/s (spinning) under the default controller; this is checked
    /// on construction.
    static PhysicsParams epuck(double beta = 0.0);
};

/// Map a controller and sensor bit to the body twist.
inline Twist body_twist(const Controller& c, int sensor_bit, const PhysicsParams& p) {
    const double vl = sensor_bit ? c.v_l1 : c.v_l0;
    const double vr = sensor_bit ? c.v_r1 : c.v_r0;
    return {p.max_wheel_speed * (vl + vr) / 2.0,
            p.max_wheel_speed * (vr - vl) / p.axle_length};
}

/// Signed orbit radius v/omega; positive places the turning center 90
/// degrees counter-clockwise of the sensor axis.
inline double orbit_radius(const Twist& t) { return t.linear / t.angular; }

/// Per-step sensing error probability and per-step motion-noise force cap.
struct NoiseModel {
    double motion_noise_max = 0.0;   // m*, newtons
    double error_probability = 0.0;  // p

    void validate() const {
        if (motion_noise_max < 0.0) throw std::invalid_argument("motion_noise_max must be >= 0");
        if (error_probability < 0.0 || error_probability > 1.0)
            throw std::invalid_argument("error_probability must be in [0, 1]");
    }
};

}  // namespace swarm
