#ifndef GRFSWARM_WORLD_HPP_
#define GRFSWARM_WORLD_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "scenario.hpp"
#include "vec2.hpp"

namespace grfswarm {

using RobotId = std::size_t;

struct Bounds {
  double width = 0.0;
  double height = 0.0;

  bool contains(const Vec2 &p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  Vec2 clamp(const Vec2 &p) const {
    return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
  }
  friend bool operator==(const Bounds &, const Bounds &) = default;
};

struct RobotState {
  RobotId id = 0;
  SpeciesIndex species = 0;
  Vec2 pose;
  Vec2 velocity;
  bool is_anchor = false;
  friend bool operator==(const RobotState &, const RobotState &) = default;
};

/// Tick counter plus every robot. The velocity list is the random-field configuration.
struct WorldState {
  std::int64_t tick = 0;
  std::vector<RobotState> robots; // robots[k].id == k
  Bounds bounds;
  std::uint64_t master_seed = 0;
  friend bool operator==(const WorldState &, const WorldState &) = default;
};

inline Bounds bounds_of(const Scenario &s) { return {s.world_width, s.world_height}; }

class PlacementError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Anchors take ids 0..A-1 at their fixed poses; the population follows in
/// species order, placed uniformly at random by rejection sampling so that
/// every pair is at least kMinSeparationFactor * sensing_radius apart.
inline WorldState init_world(const Scenario &s, std::uint64_t seed) {
  constexpr int kMaxRetries = 10000;
  WorldState w;
  w.bounds = bounds_of(s);
  w.master_seed = seed;
  const double min_sep = kMinSeparationFactor * s.sensing_radius;

  for (const auto &a : s.anchors) {
    RobotState r;
    r.id = w.robots.size();
    r.species = a.species;
    r.pose = a.pose;
    r.is_anchor = true;
    w.robots.push_back(r);
  }

  auto rng = make_stream(seed, StreamKind::placement);
  std::uniform_real_distribution<double> ux(0.0, s.world_width), uy(0.0, s.world_height);
  for (std::size_t k = 0; k < s.population.size(); ++k) {
    for (int n = 0; n < s.population[k]; ++n) {
      Vec2 p;
      bool placed = false;
      for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
        p = {ux(rng), uy(rng)};
        placed = true;
        for (const auto &other : w.robots)
          if (distance(p, other.pose) < min_sep) {
            placed = false;
            break;
          }
      }
      if (!placed)
        throw PlacementError("could not place robot " + std::to_string(w.robots.size()) +
                             " after " + std::to_string(kMaxRetries) +
                             " attempts; world too dense for minimum separation");
      RobotState r;
      r.id = w.robots.size();
      r.species = k;
      r.pose = p;
      w.robots.push_back(r);
    }
  }
  return w;
}

} // namespace grfswarm

#endif // GRFSWARM_WORLD_HPP_
