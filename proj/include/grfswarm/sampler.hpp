#ifndef GRFSWARM_SAMPLER_HPP_
#define GRFSWARM_SAMPLER_HPP_

#include <cmath>
#include <random>

#include "potentials.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "vec2.hpp"
#include "world.hpp"

namespace grfswarm {

struct ChainStats {
  int proposals = 0;
  int accepted = 0;
  int out_of_disk = 0;
};

/// Metropolis-Hastings chain over the velocity disk ||v|| <= v_max.
///
/// Independent mode centers every Gaussian proposal on `current` (the robot's
/// tick-t velocity); walk mode centers on the last chain state. A proposal
/// outside the disk is redrawn up to 8 times, after which the step counts as
/// a rejection. `visit(k, state, accepted)` sees every chain state k = 1..I.
template <class Energy, class Rng, class Visit>
ChainStats run_chain(const Vec2 &current, Energy &&energy, const SamplerParams &params,
                     double v_max, Rng &rng, Visit &&visit) {
  constexpr int kDiskRetries = 8;
  ChainStats stats;
  std::normal_distribution<double> gauss(0.0, params.proposal_sigma);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vec2 state = current;
  double state_energy = energy(state);
  for (int k = 1; k <= params.iterations; ++k) {
    const Vec2 center = params.proposal_mode == ProposalMode::walk ? state : current;
    Vec2 proposal;
    bool inside = false;
    for (int attempt = 0; attempt < kDiskRetries && !inside; ++attempt) {
      proposal = center + Vec2{gauss(rng), gauss(rng)};
      inside = norm(proposal) <= v_max;
      if (!inside) ++stats.out_of_disk;
    }
    bool accepted = false;
    if (inside) {
      ++stats.proposals;
      const double e = energy(proposal);
      const double delta = (e - state_energy) / PotentialParams::temperature;
      const double g = std::exp(-delta);
      const double r = unif(rng);
      if (delta < 0.0 || r < g) {
        state = proposal;
        state_energy = e;
        accepted = true;
        ++stats.accepted;
      }
    }
    visit(k, state, accepted);
  }
  return stats;
}

/// Runs the chain, drops the first `burn_in` states and returns the mean of
/// the rest, norm-clamped to v_max.
template <class Energy, class Rng>
Vec2 sample_velocity(const Vec2 &current, Energy &&energy, const SamplerParams &params,
                     double v_max, Rng &rng, ChainStats *stats = nullptr) {
  Vec2 sum;
  int kept = 0;
  auto s = run_chain(current, energy, params, v_max, rng, [&](int k, const Vec2 &v, bool) {
    if (k > params.burn_in) {
      sum += v;
      ++kept;
    }
  });
  if (stats) *stats = s;
  if (kept == 0) return clamp_norm(current, v_max);
  return clamp_norm(sum * (1.0 / kept), v_max);
}

/// Samples the next velocity of `robot` against the immutable tick snapshot,
/// drawing from the stream keyed by (master seed, robot, tick).
inline Vec2 sample_robot_velocity(const WorldState &snapshot, const Scenario &s,
                                  const OrderedNeighborhood &nbhd, const BondPartition &partition) {
  const auto &self = snapshot.robots[nbhd.observer];
  auto rng = make_stream(snapshot.master_seed, StreamKind::sampler, self.id,
                         static_cast<std::uint64_t>(snapshot.tick));
  LocalEnergy energy(snapshot, s, nbhd, partition);
  return sample_velocity(self.velocity, energy, s.sampler, s.v_max, rng);
}

} // namespace grfswarm

#endif // GRFSWARM_SAMPLER_HPP_
