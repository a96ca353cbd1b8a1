#include "swarm/lattice.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace swarm::lattice {

Point2 axial_to_cartesian(AxialCoord node) {
    return {node.q + node.r / 2.0, node.r * std::sqrt(3.0) / 2.0};
}

bool cone_contains(AxialCoord origin, int orientation, AxialCoord target) {
    AxialCoord w = target - origin;
    if (w.q == 0 && w.r == 0) throw std::invalid_argument("target equals origin");
    for (int k = orientation % 6; k > 0; --k) w = rotate_cw60(w);
    // Sector (0, 60] degrees in axial integers: strictly above the direction-0
    // ray and not counter-clockwise of the direction-1 ray.
    return w.r > 0 && w.q >= 0;
}

void DiscreteNoise::validate() const {
    if (error_probability < 0.0 || error_probability > 1.0)
        throw std::invalid_argument("error_probability must be in [0, 1]");
    if (perturbation_threshold && *perturbation_threshold <= 0)
        throw std::invalid_argument("perturbation_threshold must be > 0");
}

LatticeWorld::LatticeWorld(std::vector<LatticeRobot> robots, DiscreteNoise noise,
                           std::uint64_t seed)
    : robots_(std::move(robots)), noise_(noise), rng_(seed), seed_(seed) {
    noise_.validate();
    if (robots_.empty()) throw std::invalid_argument("lattice world needs at least one robot");
    for (int i = 0; i < size(); ++i) {
        LatticeRobot& r = robots_[i];
        if (r.orientation < 0 || r.orientation > 5)
            throw std::invalid_argument("orientation must be in 0..5");
        if (r.blocked_counter < 0) throw std::invalid_argument("blocked counter must be >= 0");
        if (!occupancy_.emplace(r.node, i).second)
            throw std::invalid_argument("two robots on one node");
    }
    seen_this_round_.assign(robots_.size(), 0);
    unseen_in_round_ = size();
}

int LatticeWorld::sense_geometric(int i) const {
    const LatticeRobot& self = robots_[i];
    for (int j = 0; j < size(); ++j) {
        if (j == i) continue;
        if (cone_contains(self.node, self.orientation, robots_[j].node)) return 1;
    }
    return 0;
}

int LatticeWorld::sense(int i) {
    int bit = sense_geometric(i);
    if (noise_.error_probability > 0.0) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        if (u01(rng_) < noise_.error_probability) bit = 1 - bit;
    }
    return bit;
}

AxialCoord LatticeWorld::center_of_rotation(int i) const {
    const LatticeRobot& r = robots_[i];
    return r.node + kDirections[(r.orientation + 2) % 6];
}

void LatticeWorld::note_activated(int i) {
    ++activation_count_;
    if (!seen_this_round_[i]) {
        seen_this_round_[i] = 1;
        if (--unseen_in_round_ == 0) {
            ++round_count_;
            std::fill(seen_this_round_.begin(), seen_this_round_.end(), 0);
            unseen_in_round_ = size();
        }
    }
}

void LatticeWorld::activate(int i) {
    LatticeRobot& robot = robots_.at(i);
    const int bit = sense(i);
    if (bit == 0) {
        const AxialCoord c = center_of_rotation(i);
        // Next node clockwise around c from the robot's node.
        const AxialCoord u = c + kDirections[(robot.orientation + 4) % 6];
        if (!occupied(u)) {
            occupancy_.erase(robot.node);
            robot.node = u;
            robot.orientation = (robot.orientation + 5) % 6;
            occupancy_.emplace(robot.node, i);
            robot.blocked_counter = 0;
        } else if (noise_.perturbation_threshold) {
            if (++robot.blocked_counter == *noise_.perturbation_threshold) {
                robot.blocked_counter = 0;
                robot.orientation = (robot.orientation + 5) % 6;
            }
        }
        // Blocked without perturbation: do nothing.
    } else {
        robot.orientation = (robot.orientation + 5) % 6;
        robot.blocked_counter = 0;
    }
    note_activated(i);
}

void LatticeWorld::activate_random() {
    std::uniform_int_distribution<int> pick(0, size() - 1);
    activate(pick(rng_));
}

std::optional<int> LatticeWorld::robot_at(AxialCoord node) const {
    auto it = occupancy_.find(node);
    if (it == occupancy_.end()) return std::nullopt;
    return it->second;
}

std::vector<Point2> LatticeWorld::positions() const {
    std::vector<Point2> out;
    out.reserve(robots_.size());
    for (const auto& r : robots_) out.push_back(axial_to_cartesian(r.node));
    return out;
}

MetricsSample LatticeWorld::sample_metrics() const {
    const auto pts = positions();
    return evaluate_metrics(static_cast<double>(round_count_), pts, 0.5,
                            default_touch_tolerance(0.5));
}

double LatticeWorld::lattice_cluster_fraction() const {
    const int n = size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int i = 0; i < n; ++i) {
        for (const AxialCoord& d : kDirections) {
            if (auto j = robot_at(robots_[i].node + d)) {
                int ra = find(i), rb = find(*j);
                if (ra != rb) parent[rb] = ra;
            }
        }
    }
    std::vector<int> count(n, 0);
    int best = 0;
    for (int i = 0; i < n; ++i) best = std::max(best, ++count[find(i)]);
    return static_cast<double>(best) / static_cast<double>(n);
}

void LatticeWorld::check_occupancy() const {
    if (occupancy_.size() != robots_.size())
        throw std::logic_error("occupancy index size mismatch");
    for (int i = 0; i < size(); ++i) {
        auto it = occupancy_.find(robots_[i].node);
        if (it == occupancy_.end() || it->second != i)
            throw std::logic_error("occupancy index inconsistent with robot list");
    }
}

LatticeWorld gen_random_lattice(int n, std::uint64_t seed, DiscreteNoise noise,
                                double density) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (density <= 0.0 || density > 1.0) throw std::invalid_argument("density must be in (0, 1]");
    const int side = static_cast<int>(std::ceil(std::sqrt(n / density)));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coord(0, side - 1);
    std::uniform_int_distribution<int> orient(0, 5);

    std::unordered_map<AxialCoord, int, AxialHash> used;
    std::vector<LatticeRobot> robots;
    robots.reserve(n);
    long attempts_left = 10000L * n;
    while (static_cast<int>(robots.size()) < n) {
        if (attempts_left-- <= 0) throw std::runtime_error("lattice region too dense");
        const AxialCoord node{coord(rng), coord(rng)};
        if (used.contains(node)) continue;
        used.emplace(node, static_cast<int>(robots.size()));
        robots.push_back({node, orient(rng), 0});
    }
    return LatticeWorld(std::move(robots), noise, seed);
}

LatticeRunResult run_rounds(LatticeWorld& world, long max_rounds,
                            std::optional<double> stop_dispersion_below) {
    if (max_rounds <= 0) throw std::invalid_argument("max_rounds must be > 0");
    LatticeRunResult result;
    MetricsSample first = world.sample_metrics();
    result.series.push_back(first);
    if (stop_dispersion_below && first.dispersion <= *stop_dispersion_below) return result;

    long last_round = world.round_count();
    const long target_round = last_round + max_rounds;
    while (world.round_count() < target_round) {
        world.activate_random();
        if (world.round_count() != last_round) {
            last_round = world.round_count();
            MetricsSample m = world.sample_metrics();
            result.series.push_back(m);
            if (stop_dispersion_below && m.dispersion <= *stop_dispersion_below) break;
        }
    }
    return result;
}

}  // namespace swarm::lattice
