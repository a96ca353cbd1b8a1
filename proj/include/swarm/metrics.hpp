#pragma once

#include <random>
#include <span>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

/// One timestamped evaluation of the four aggregation metrics.
/// `time` is seconds for continuous runs and the round index for lattice runs.
struct MetricsSample {
    double time = 0.0;
    double sed_circumference = 0.0;
    double hull_perimeter = 0.0;
    double dispersion = 0.0;
    double cluster_fraction = 0.0;
};

/// Smallest enclosing disc of a non-empty point set.
///
/// Randomized incremental construction (Welzl), expected linear time; the
/// caller-supplied generator drives the shuffle so results are reproducible.
Disc smallest_enclosing_disc(std::span<const Point2> points, std::mt19937_64& rng);

/// Overload with an internal fixed-seed generator. Deliberately independent of
/// any simulation RNG stream: evaluating metrics must not perturb a run's
/// dynamics, so the shuffle uses its own deterministic seed.
Disc smallest_enclosing_disc(std::span<const Point2> points);

/// Perimeter of the convex hull (monotone chain). A single point has
/// perimeter 0; collinear sets count the degenerate hull out and back,
/// giving twice the segment length.
double convex_hull_perimeter(std::span<const Point2> points);

/// Sum of Euclidean distances from each point to the centroid.
double dispersion(std::span<const Point2> points);

/// Fraction of points in the largest connected component of the contact
/// graph, where (i,j) is an edge iff ||p_i - p_j|| <= 2*robot_radius +
/// touch_tolerance.
double cluster_fraction(std::span<const Point2> points, double robot_radius,
                        double touch_tolerance);

/// Default contact slack used when evaluating cluster fraction: 10% of a
/// robot radius, generous enough to absorb integration jitter.
inline double default_touch_tolerance(double robot_radius) { return 0.1 * robot_radius; }

/// Dispersion of the canonical hexagonally packed arrangement of n points
/// with the given center-to-center spacing: lattice sites are filled ring by
/// ring around a center site, greedily choosing within each ring the site
/// that minimizes the dispersion of the filled set. Deterministic in n.
double min_dispersion_baseline(int n, double spacing);

/// Evaluate all four metrics for one snapshot.
MetricsSample evaluate_metrics(double time, std::span<const Point2> points,
                               double robot_radius, double touch_tolerance);

}  // namespace swarm
