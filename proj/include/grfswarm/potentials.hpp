#ifndef GRFSWARM_POTENTIALS_HPP_
#define GRFSWARM_POTENTIALS_HPP_

#include <cmath>
#include <vector>

#include "bonding.hpp"
#include "scenario.hpp"
#include "vec2.hpp"
#include "world.hpp"

namespace grfswarm {

/// Signed charge product: negative (attractive) for partition members, positive otherwise.
constexpr double charge_product(double charge_i, double charge_j, bool bonded) {
  const double mag = charge_i * charge_j < 0.0 ? -(charge_i * charge_j) : charge_i * charge_j;
  return bonded ? -mag : mag;
}

inline double charge_product(const Scenario &s, const RobotState &i, const RobotState &j,
                             const BondPartition &partition_of_i) {
  return charge_product(s.species[i.species].charge, s.species[j.species].charge,
                        partition_of_i.contains(j.id));
}

/// exp-6 term without the Coulomb part; equals -epsilon at r0.
inline double buckingham(double r, const PotentialParams &p) {
  const double rc = std::max(r, p.r_min_clamp);
  const double a6 = p.alpha - 6.0;
  const double inv = p.r0 / rc;
  const double inv2 = inv * inv;
  const double inv6 = inv2 * inv2 * inv2;
  return p.epsilon * ((6.0 / a6) * std::exp(p.alpha * (1.0 - rc / p.r0)) - (p.alpha / a6) * inv6);
}

/// Coulomb-Buckingham pair energy, distance clamped at r_min_clamp.
inline double coulomb_buckingham(double r, double product, const PotentialParams &p) {
  const double rc = std::max(r, p.r_min_clamp);
  return buckingham(rc, p) + p.coulomb_constant * product / rc;
}

struct KineticMember {
  Vec2 velocity;
  double mass = 0.0;
};

/// Consensus energy of the candidate against the partition members' velocities.
inline double kinetic_energy(const Vec2 &candidate, double self_mass,
                             const std::vector<KineticMember> &members, KineticMode mode) {
  if (members.empty()) return 0.0;
  Vec2 sum;
  double mass = self_mass;
  for (const auto &m : members) {
    sum += mode == KineticMode::relative ? m.velocity - candidate : m.velocity;
    mass += m.mass;
  }
  if (mode == KineticMode::literal) sum += candidate;
  return 0.5 * mass * dot(sum, sum);
}

inline double kinetic_energy(const Vec2 &candidate, const BondPartition &partition,
                             const WorldState &world, const Scenario &s) {
  std::vector<KineticMember> members;
  partition.for_each_member([&](const NeighborObservation &m) {
    const auto &r = world.robots[m.id];
    members.push_back({r.velocity, s.species[r.species].mass});
  });
  const auto &self = world.robots[partition.observer];
  return kinetic_energy(candidate, s.species[self.species].mass, members, s.potential.kinetic_mode);
}

/// Purely repulsive boundary term, evaluated at the dt-predicted position for
/// every wall within the sensing radius.
inline double wall_potential(const Vec2 &pose, const Vec2 &candidate, const Bounds &bounds,
                             const PotentialParams &p, double dt, double sensing_radius,
                             double self_charge) {
  const Vec2 q = pose + candidate * dt;
  const double dists[4] = {q.x, bounds.width - q.x, q.y, bounds.height - q.y};
  double e = 0.0;
  for (double d : dists) {
    if (d > sensing_radius) continue;
    const double dc = std::max(d, p.r_min_clamp);
    e += p.epsilon * (6.0 / (p.alpha - 6.0)) * std::exp(p.alpha * (1.0 - dc / p.r0)) +
         p.coulomb_constant * std::abs(self_charge * p.wall_charge) / dc;
  }
  return e;
}

/// Local Hamiltonian of one robot as a function of its candidate velocity,
/// with everything independent of the candidate precomputed from the tick snapshot.
class LocalEnergy {
public:
  LocalEnergy(const WorldState &world, const Scenario &s, const OrderedNeighborhood &nbhd,
              const BondPartition &partition)
      : params_(s.potential), bounds_(world.bounds), dt_(s.dt), sensing_radius_(s.sensing_radius) {
    const auto &self = world.robots[nbhd.observer];
    const auto &spec = s.species[self.species];
    pose_ = self.pose;
    charge_ = spec.charge;
    mass_ = spec.mass;
    pairs_.reserve(nbhd.entries.size());
    for (const auto &n : nbhd.entries) {
      const auto &other = world.robots[n.id];
      const bool bonded = partition.contains(n.id);
      pairs_.push_back({other.pose + other.velocity * dt_,
                        charge_product(charge_, s.species[other.species].charge, bonded)});
      if (bonded) members_.push_back({other.velocity, s.species[other.species].mass});
    }
  }

  double kinetic(const Vec2 &candidate) const {
    return kinetic_energy(candidate, mass_, members_, params_.kinetic_mode);
  }
  double walls(const Vec2 &candidate) const {
    return wall_potential(pose_, candidate, bounds_, params_, dt_, sensing_radius_, charge_);
  }
  double pairs(const Vec2 &candidate) const {
    const Vec2 q = pose_ + candidate * dt_;
    double e = 0.0;
    for (const auto &p : pairs_) e += coulomb_buckingham(distance(q, p.predicted), p.product, params_);
    return e;
  }

  double operator()(const Vec2 &candidate) const {
    return params_.weight_kinetic * kinetic(candidate) + walls(candidate) +
           params_.weight_cb * pairs(candidate);
  }

private:
  struct Pair {
    Vec2 predicted;
    double product;
  };
  PotentialParams params_;
  Bounds bounds_;
  double dt_;
  double sensing_radius_;
  Vec2 pose_;
  double charge_ = 0.0;
  double mass_ = 0.0;
  std::vector<Pair> pairs_;
  std::vector<KineticMember> members_;
};

inline double local_hamiltonian(const WorldState &world, const Scenario &s,
                                const OrderedNeighborhood &nbhd, const BondPartition &partition,
                                const Vec2 &candidate) {
  return LocalEnergy(world, s, nbhd, partition)(candidate);
}

/// Sum of pair energies over all sensed pairs at current poses (each unordered pair once,
/// sign taken from the lower-id robot's partition). Used for trend diagnostics.
inline double total_pair_energy(const WorldState &world, const Scenario &s,
                                const std::vector<OrderedNeighborhood> &nbhds,
                                const std::vector<BondPartition> &parts) {
  double e = 0.0;
  for (const auto &n : nbhds)
    for (const auto &m : n.entries) {
      if (m.id < n.observer) continue;
      const auto &a = world.robots[n.observer];
      const auto &b = world.robots[m.id];
      e += coulomb_buckingham(m.distance, charge_product(s, a, b, parts[n.observer]), s.potential);
    }
  return e;
}

} // namespace grfswarm

#endif // GRFSWARM_POTENTIALS_HPP_
