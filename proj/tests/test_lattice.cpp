#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "swarm/lattice.hpp"
#include "swarm/metrics.hpp"

using namespace swarm;
using namespace swarm::lattice;

namespace {

// Two robots mutually blocking on adjacent orbits: each robot's clockwise
// orbit target is the other's node and neither sees the other.
LatticeWorld mutual_block_fixture(DiscreteNoise noise = {}, std::uint64_t seed = 0) {
    return LatticeWorld({{{0, 0}, 0, 0}, {{-1, 0}, 3, 0}}, noise, seed);
}

}  // namespace

TEST_CASE("axial embedding: unit spacing in all six directions") {
    CHECK(axial_to_cartesian({0, 0}) == Point2{0.0, 0.0});
    const Point2 a = axial_to_cartesian({1, 0});
    const Point2 b = axial_to_cartesian({0, 1});
    CHECK(norm(a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    for (const AxialCoord& d : kDirections)
        CHECK(norm(axial_to_cartesian(d)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cone boundaries: inclusive counter-clockwise, exclusive clockwise") {
    const AxialCoord origin{0, 0};
    for (int k = 0; k < 6; ++k) {
        // Along direction k+1 (the CCW boundary): inside.
        CHECK(cone_contains(origin, k, kDirections[(k + 1) % 6]));
        // Along direction k (the CW boundary): outside.
        CHECK_FALSE(cone_contains(origin, k, kDirections[k]));
        // Behind: outside.
        CHECK_FALSE(cone_contains(origin, k, kDirections[(k + 3) % 6]));
    }
    CHECK_THROWS_AS(cone_contains(origin, 0, origin), std::invalid_argument);
}

TEST_CASE("the six cones partition every direction") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> coord(-20, 20);
    for (int t = 0; t < 2000; ++t) {
        const AxialCoord target{coord(rng), coord(rng)};
        if (target == AxialCoord{0, 0}) continue;
        int hits = 0;
        for (int k = 0; k < 6; ++k)
            if (cone_contains({0, 0}, k, target)) ++hits;
        CHECK(hits == 1);
    }
}

TEST_CASE("center of rotation and orbit closure") {
    LatticeWorld w({{{0, 0}, 0, 0}}, {}, 0);
    CHECK(w.center_of_rotation(0) == AxialCoord{-1, 1});  // direction 2

    // Six unblocked, unseen activations return to the start pose around a
    // fixed center.
    const AxialCoord c = w.center_of_rotation(0);
    for (int step = 0; step < 6; ++step) {
        w.activate(0);
        CHECK(w.center_of_rotation(0) == c);
        w.check_occupancy();
    }
    CHECK(w.robots()[0].node == AxialCoord{0, 0});
    CHECK(w.robots()[0].orientation == 0);
}

TEST_CASE("empty-lattice sensing and forced error") {
    LatticeWorld solo({{{2, 3}, 1, 0}}, {}, 0);
    CHECK(solo.sense_geometric(0) == 0);
    CHECK(solo.sense(0) == 0);

    DiscreteNoise certain_error;
    certain_error.error_probability = 1.0;
    LatticeWorld w({{{0, 0}, 0, 0}, {{2, 1}, 0, 0}}, certain_error, 0);
    CHECK(w.sense_geometric(0) == 1);  // (2,1) sits in sector (0, 60]
    CHECK(w.sense(0) == 0);            // p = 1 inverts every reading
}

TEST_CASE("two-robot rule sequence: orbit, one-sided sighting, orbit") {
    LatticeWorld w({{{0, 0}, 0, 0}, {{1, 0}, 0, 0}}, {}, 0);
    // State a: neither robot sees the other; both will orbit.
    CHECK(w.sense_geometric(0) == 0);
    CHECK(w.sense_geometric(1) == 0);
    w.activate(0);
    CHECK(w.robots()[0].node == AxialCoord{-1, 0});
    CHECK(w.robots()[0].orientation == 5);
    w.activate(1);
    CHECK(w.robots()[1].node == AxialCoord{0, 0});
    CHECK(w.robots()[1].orientation == 5);
    // State b: robot 0 now sees robot 1, robot 1 does not see robot 0.
    CHECK(w.sense_geometric(0) == 1);
    CHECK(w.sense_geometric(1) == 0);
    w.activate(0);  // spins in place
    CHECK(w.robots()[0].node == AxialCoord{-1, 0});
    CHECK(w.robots()[0].orientation == 4);
    w.activate(1);  // orbits
    CHECK(w.robots()[1].node == AxialCoord{-1, 1});
    CHECK(w.robots()[1].orientation == 4);
    // State c: again neither sees the other.
    CHECK(w.sense_geometric(0) == 0);
    CHECK(w.sense_geometric(1) == 0);
    w.check_occupancy();
}

TEST_CASE("mutual block is a fixed point without noise") {
    LatticeWorld w = mutual_block_fixture();
    CHECK(w.sense_geometric(0) == 0);
    CHECK(w.sense_geometric(1) == 0);
    const auto before = w.robots();
    for (int t = 0; t < 1000; ++t) {
        w.activate(t % 2);
        REQUIRE(w.robots()[0].node == before[0].node);
        REQUIRE(w.robots()[0].orientation == before[0].orientation);
        REQUIRE(w.robots()[1].node == before[1].node);
        REQUIRE(w.robots()[1].orientation == before[1].orientation);
    }
}

TEST_CASE("deadlock perturbation: threshold, reset, and bounded counter") {
    DiscreteNoise noise;
    noise.perturbation_threshold = 3;
    LatticeWorld w = mutual_block_fixture(noise);

    // Two blocked activations raise the counter without moving anything.
    w.activate(0);
    CHECK(w.robots()[0].blocked_counter == 1);
    w.activate(0);
    CHECK(w.robots()[0].blocked_counter == 2);
    CHECK(w.robots()[0].orientation == 0);
    // The third blocked activation fires the perturbation: rotate in place.
    w.activate(0);
    CHECK(w.robots()[0].blocked_counter == 0);
    CHECK(w.robots()[0].orientation == 5);
    CHECK(w.robots()[0].node == AxialCoord{0, 0});

    // d* = 1 perturbs on the very next blocked activation.
    DiscreteNoise eager;
    eager.perturbation_threshold = 1;
    LatticeWorld v = mutual_block_fixture(eager);
    v.activate(0);
    CHECK(v.robots()[0].orientation == 5);
    CHECK(v.robots()[0].blocked_counter == 0);

    // Counter stays within [0, d*] and resets on any unblocked activation.
    DiscreteNoise slow;
    slow.perturbation_threshold = 50;
    LatticeWorld u = mutual_block_fixture(slow);
    for (int t = 0; t < 20; ++t) {
        u.activate(0);
        REQUIRE(u.robots()[0].blocked_counter <= 50);
    }
    CHECK(u.robots()[0].blocked_counter == 20);
    u.activate(1);  // unblock robot 0 is not needed; robot 1 is also blocked
    CHECK(u.robots()[1].blocked_counter == 1);
}

TEST_CASE("unblocked activation resets the blocked counter") {
    DiscreteNoise noise;
    noise.perturbation_threshold = 10;
    // Robot 1 blocks robot 0's orbit target but will be activated away later.
    LatticeWorld w({{{0, 0}, 0, 2}, {{-1, 0}, 1, 0}}, noise, 0);
    CHECK(w.robots()[0].blocked_counter == 2);
    w.activate(0);  // still blocked: counter rises
    CHECK(w.robots()[0].blocked_counter == 3);
    w.activate(1);  // robot 1 orbits away
    CHECK(w.robots()[1].node == AxialCoord{-1, -1});
    w.activate(0);  // now free: moves and resets
    CHECK(w.robots()[0].node == AxialCoord{-1, 0});
    CHECK(w.robots()[0].blocked_counter == 0);
    w.check_occupancy();
}

TEST_CASE("rounds: coupon collector pacing and monotone bookkeeping") {
    const int n = 20;
    std::vector<LatticeRobot> robots;
    for (int i = 0; i < n; ++i) robots.push_back({{3 * i, 0}, 0, 0});
    LatticeWorld w(std::move(robots), {}, 777);
    const long rounds = 1000;
    while (w.round_count() < rounds) w.activate_random();
    const double mean_acts = static_cast<double>(w.activation_count()) / rounds;
    double harmonic = 0.0;
    for (int k = 1; k <= n; ++k) harmonic += 1.0 / k;
    CHECK(mean_acts == doctest::Approx(n * harmonic).epsilon(0.10));
}

TEST_CASE("single robot run: constant zero dispersion") {
    LatticeWorld w({{{4, -2}, 2, 0}}, {}, 9);
    const LatticeRunResult rr = run_rounds(w, 50);
    REQUIRE(rr.series.size() == 51);
    for (const MetricsSample& s : rr.series) CHECK(s.dispersion == doctest::Approx(0.0));
}

TEST_CASE("lattice and embedded cluster fractions agree on random configurations") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coord(0, 14);
    std::uniform_int_distribution<int> orient(0, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        std::unordered_map<AxialCoord, int, AxialHash> used;
        std::vector<LatticeRobot> robots;
        while (robots.size() < 25) {
            AxialCoord node{coord(rng), coord(rng)};
            if (used.contains(node)) continue;
            used.emplace(node, 0);
            robots.push_back({node, orient(rng), 0});
        }
        LatticeWorld w(std::move(robots), {}, trial);
        const double embedded =
            cluster_fraction(w.positions(), 0.5, default_touch_tolerance(0.5));
        CHECK(w.lattice_cluster_fraction() == doctest::Approx(embedded));
    }
}

TEST_CASE("occupancy exclusivity holds through noisy runs") {
    DiscreteNoise noise;
    noise.error_probability = 0.2;
    noise.perturbation_threshold = 4;
    LatticeWorld w = gen_random_lattice(40, 4242, noise);
    for (int t = 0; t < 20000; ++t) {
        w.activate_random();
        if (t % 500 == 0) w.check_occupancy();
    }
    w.check_occupancy();
}

TEST_CASE("gen_random_lattice: determinism and density sizing") {
    LatticeWorld a = gen_random_lattice(30, 5, {});
    LatticeWorld b = gen_random_lattice(30, 5, {});
    for (int i = 0; i < 30; ++i) {
        CHECK(a.robots()[i].node == b.robots()[i].node);
        CHECK(a.robots()[i].orientation == b.robots()[i].orientation);
    }
    // ~10% density in a rhombic side**2 region.
    const int side = static_cast<int>(std::ceil(std::sqrt(30 / 0.10)));
    for (const auto& r : a.robots()) {
        CHECK(r.node.q >= 0);
        CHECK(r.node.q < side);
        CHECK(r.node.r >= 0);
        CHECK(r.node.r < side);
    }
    CHECK_THROWS_AS(LatticeWorld({{{0, 0}, 0, 0}, {{0, 0}, 1, 0}}, {}, 0),
                    std::invalid_argument);
}

TEST_CASE("discrete runs with matched seeds are reproducible") {
    DiscreteNoise noise;
    noise.error_probability = 0.15;
    LatticeWorld a = gen_random_lattice(25, 31, noise);
    LatticeWorld b = gen_random_lattice(25, 31, noise);
    const LatticeRunResult ra = run_rounds(a, 200);
    const LatticeRunResult rb = run_rounds(b, 200);
    REQUIRE(ra.series.size() == rb.series.size());
    for (std::size_t i = 0; i < ra.series.size(); ++i)
        CHECK(ra.series[i].dispersion == rb.series[i].dispersion);
}

TEST_CASE("perturbation noise drives a small swarm toward aggregation") {
    DiscreteNoise noise;
    noise.perturbation_threshold = 4;
    LatticeWorld w = gen_random_lattice(20, 6, noise);
    const double limit = 1.15 * min_dispersion_baseline(20, 1.0);
    const LatticeRunResult rr = run_rounds(w, 4000, limit);
    CHECK(rr.series.back().dispersion <= limit);
}
