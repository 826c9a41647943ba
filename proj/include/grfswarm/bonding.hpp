#ifndef GRFSWARM_BONDING_HPP_
#define GRFSWARM_BONDING_HPP_

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "scenario.hpp"
#include "vec2.hpp"
#include "world.hpp"

namespace grfswarm {

/// What robot `observer` perceives about one peer inside its sensing disk.
struct NeighborObservation {
  RobotId id = 0;
  SpeciesIndex species = 0;
  Vec2 rel_pos;
  Vec2 rel_vel;
  double distance = 0.0;
  friend bool operator==(const NeighborObservation &, const NeighborObservation &) = default;
};

/// Neighbors sorted ascending by distance, ties by id.
struct OrderedNeighborhood {
  RobotId observer = 0;
  std::vector<NeighborObservation> entries;
};

struct BondGroup {
  double charge = 0.0;
  std::vector<NeighborObservation> members; // ascending distance
  friend bool operator==(const BondGroup &, const BondGroup &) = default;
};

/// Cap-limited bonding selection; groups in strictly descending charge.
struct BondPartition {
  RobotId observer = 0;
  std::vector<BondGroup> groups;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto &g : groups) n += g.members.size();
    return n;
  }
  bool contains(RobotId id) const {
    for (const auto &g : groups)
      for (const auto &m : g.members)
        if (m.id == id) return true;
    return false;
  }
  template <class F> void for_each_member(F &&f) const {
    for (const auto &g : groups)
      for (const auto &m : g.members) f(m);
  }
  friend bool operator==(const BondPartition &, const BondPartition &) = default;
};

/// Mutual bonds across the whole swarm. `edges` holds (i, j) with i < j, sorted.
struct BondGraph {
  std::vector<std::pair<RobotId, RobotId>> edges;
  std::vector<std::vector<RobotId>> adjacency;

  std::size_t degree(RobotId i) const { return adjacency[i].size(); }
  friend bool operator==(const BondGraph &, const BondGraph &) = default;
};

namespace detail {
inline bool closer(double da, RobotId ia, double db, RobotId ib) {
  return da < db || (da == db && ia < ib);
}
} // namespace detail

inline OrderedNeighborhood sense_neighbors(const WorldState &world, RobotId robot,
                                           double sensing_radius) {
  OrderedNeighborhood n;
  n.observer = robot;
  const auto &self = world.robots[robot];
  for (const auto &other : world.robots) {
    if (other.id == robot) continue;
    Vec2 rel = other.pose - self.pose;
    double d = norm(rel);
    if (d <= sensing_radius)
      n.entries.push_back({other.id, other.species, rel, other.velocity - self.velocity, d});
  }
  std::sort(n.entries.begin(), n.entries.end(), [](const auto &a, const auto &b) {
    return detail::closer(a.distance, a.id, b.distance, b.id);
  });
  return n;
}

/// Neighborhoods of every robot, using a uniform cell grid of side `sensing_radius`.
inline std::vector<OrderedNeighborhood> sense_all(const WorldState &world, double sensing_radius) {
  const std::size_t n = world.robots.size();
  std::vector<OrderedNeighborhood> out(n);
  if (n == 0) return out;
  const double cell = sensing_radius;
  const int nx = std::max(1, static_cast<int>(std::ceil(world.bounds.width / cell)));
  const int ny = std::max(1, static_cast<int>(std::ceil(world.bounds.height / cell)));
  auto cell_of = [&](const Vec2 &p) {
    int cx = std::clamp(static_cast<int>(std::floor(p.x / cell)), 0, nx - 1);
    int cy = std::clamp(static_cast<int>(std::floor(p.y / cell)), 0, ny - 1);
    return std::pair{cx, cy};
  };
  std::vector<std::vector<RobotId>> grid(static_cast<std::size_t>(nx) * ny);
  for (const auto &r : world.robots) {
    auto [cx, cy] = cell_of(r.pose);
    grid[static_cast<std::size_t>(cy) * nx + cx].push_back(r.id);
  }
  for (const auto &self : world.robots) {
    auto &nb = out[self.id];
    nb.observer = self.id;
    auto [cx, cy] = cell_of(self.pose);
    for (int gy = std::max(0, cy - 1); gy <= std::min(ny - 1, cy + 1); ++gy)
      for (int gx = std::max(0, cx - 1); gx <= std::min(nx - 1, cx + 1); ++gx)
        for (RobotId j : grid[static_cast<std::size_t>(gy) * nx + gx]) {
          if (j == self.id) continue;
          const auto &other = world.robots[j];
          Vec2 rel = other.pose - self.pose;
          double d = norm(rel);
          if (d <= sensing_radius)
            nb.entries.push_back({j, other.species, rel, other.velocity - self.velocity, d});
        }
    std::sort(nb.entries.begin(), nb.entries.end(), [](const auto &a, const auto &b) {
      return detail::closer(a.distance, a.id, b.distance, b.id);
    });
  }
  return out;
}

/// Would robot `k` (as seen from the observer) still accept a robot of
/// `species` sitting `d` away with id `id`? Counts robots of that species that
/// k senses and that are closer to k; the observer itself sits at the origin.
inline bool sensed_room(const OrderedNeighborhood &nbhd, SpeciesIndex observer_species,
                        const Vec2 &k_pos, SpeciesIndex k_species, RobotId k_id,
                        SpeciesIndex species, double d, RobotId id, const Scenario &s) {
  const int cap = s.species[k_species].pair_cap(species);
  if (cap <= 0) return false;
  int ahead = 0;
  auto consider = [&](RobotId other, SpeciesIndex other_species, const Vec2 &pos) {
    if (other == k_id || other == id || other_species != species) return;
    const double dk = distance(pos, k_pos);
    if (dk <= s.sensing_radius && detail::closer(dk, other, d, id)) ++ahead;
  };
  consider(nbhd.observer, observer_species, Vec2{});
  for (const auto &o : nbhd.entries) consider(o.id, o.species, o.rel_pos);
  return ahead < cap;
}

/// Reciprocal-capacity test: does `j` still have room for a robot of the
/// observer's species? j's slots for that species are estimated from what the
/// observer senses: robots of the observer's species that are closer to j than
/// the observer and that would themselves accept j.
inline bool neighbor_has_room(const OrderedNeighborhood &nbhd, const NeighborObservation &j,
                              SpeciesIndex observer_species, const Scenario &s) {
  const int cap = s.species[j.species].pair_cap(observer_species);
  if (cap <= 0) return false;
  int ahead = 0;
  for (const auto &k : nbhd.entries) {
    if (k.id == j.id || k.species != observer_species) continue;
    const double dkj = distance(k.rel_pos, j.rel_pos);
    if (dkj > s.sensing_radius || !detail::closer(dkj, k.id, j.distance, nbhd.observer)) continue;
    if (!sensed_room(nbhd, observer_species, k.rel_pos, k.species, k.id, j.species, dkj, j.id, s))
      continue;
    if (++ahead >= cap) return false;
  }
  return true;
}

/// Builds the observer's bond partition: nearest-first admission under the
/// per-pair caps and the reciprocal test, then charge-ordered truncation to
/// the total cap.
inline BondPartition bond_partition(const OrderedNeighborhood &nbhd, const Scenario &s,
                                    SpeciesIndex observer_species) {
  BondPartition out;
  out.observer = nbhd.observer;
  const auto &self = s.species[observer_species];
  std::vector<int> admitted(s.species.size(), 0);
  std::vector<BondGroup> groups;
  for (const auto &j : nbhd.entries) {
    if (!neighbor_has_room(nbhd, j, observer_species, s)) continue;
    if (admitted[j.species] >= self.pair_cap(j.species)) continue;
    ++admitted[j.species];
    const double c = s.species[j.species].charge;
    auto g = std::find_if(groups.begin(), groups.end(), [c](const auto &b) { return b.charge == c; });
    if (g == groups.end()) {
      groups.push_back({c, {}});
      g = std::prev(groups.end());
    }
    g->members.push_back(j);
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto &a, const auto &b) { return a.charge > b.charge; });
  int bonds = 0;
  for (auto &g : groups) {
    const auto room = static_cast<std::size_t>(std::max(0, self.total_cap - bonds));
    if (g.members.size() > room) g.members.resize(room);
    bonds += static_cast<int>(g.members.size());
    if (!g.members.empty()) out.groups.push_back(std::move(g));
  }
  return out;
}

inline BondPartition bond_partition(const OrderedNeighborhood &nbhd, const Scenario &s,
                                    const WorldState &world) {
  return bond_partition(nbhd, s, world.robots[nbhd.observer].species);
}

inline std::vector<BondPartition> bond_partitions(const WorldState &world, const Scenario &s,
                                                  const std::vector<OrderedNeighborhood> &nbhds) {
  std::vector<BondPartition> out;
  out.reserve(nbhds.size());
  for (const auto &n : nbhds) out.push_back(bond_partition(n, s, world));
  return out;
}

/// Edge (i, j) iff each robot is in the other's partition and they are
/// within the bond distance threshold.
inline BondGraph bond_graph(const WorldState &world, const std::vector<BondPartition> &parts,
                            double threshold) {
  BondGraph g;
  g.adjacency.resize(world.robots.size());
  for (const auto &p : parts) {
    const RobotId i = p.observer;
    p.for_each_member([&](const NeighborObservation &m) {
      if (m.id > i && m.distance <= threshold && parts[m.id].contains(i)) {
        g.edges.emplace_back(i, m.id);
        g.adjacency[i].push_back(m.id);
        g.adjacency[m.id].push_back(i);
      }
    });
  }
  std::sort(g.edges.begin(), g.edges.end());
  for (auto &a : g.adjacency) std::sort(a.begin(), a.end());
  return g;
}

inline BondGraph bond_graph(const WorldState &world, const Scenario &s) {
  auto parts = bond_partitions(world, s, sense_all(world, s.sensing_radius));
  return bond_graph(world, parts, s.bond_distance_threshold());
}

} // namespace grfswarm

#endif // GRFSWARM_BONDING_HPP_
