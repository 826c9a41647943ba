#include <cmath>

#include <gtest/gtest.h>

#include "grfswarm/rng.hpp"
#include "grfswarm/sampler.hpp"
#include "oracles.hpp"

using namespace grfswarm;

TEST(Sampler, FlatLandscapeAveragesToDiskTruncatedProposalMean) {
  SamplerParams params;
  const Vec2 current{0.2, -0.1};
  // With no energy every proposal is accepted, so kept states are draws from
  // the proposal Gaussian restricted to the disk.
  const double sig = params.proposal_sigma;
  const auto [mx, my] = oracle::gibbs_mean(
      [&](double x, double y) {
        const double dx = x - current.x, dy = y - current.y;
        return (dx * dx + dy * dy) / (2.0 * sig * sig);
      },
      1.0, 1000);
  const int trials = 400;
  Vec2 sum;
  for (int t = 0; t < trials; ++t) {
    auto rng = make_stream(1, StreamKind::sampler, 0, static_cast<std::uint64_t>(t));
    sum += sample_velocity(current, [](const Vec2 &) { return 0.0; }, params, 1.0, rng);
  }
  const Vec2 mean = sum * (1.0 / trials);
  const double bound = 4.0 * sig / std::sqrt(trials * (params.iterations - params.burn_in));
  EXPECT_LT(std::abs(mean.x - mx), bound);
  EXPECT_LT(std::abs(mean.y - my), bound);
}

TEST(Sampler, ConstantEnergyAcceptsEveryProposal) {
  SamplerParams params;
  params.proposal_sigma = 0.05;
  auto rng = make_stream(3, StreamKind::sampler);
  ChainStats stats;
  sample_velocity({0, 0}, [](const Vec2 &) { return 4.2; }, params, 1.0, rng, &stats);
  EXPECT_EQ(stats.proposals, params.iterations);
  EXPECT_EQ(stats.accepted, params.iterations);
}

TEST(Sampler, ZeroSpeedLimitReturnsRest) {
  SamplerParams params;
  auto rng = make_stream(3, StreamKind::sampler);
  EXPECT_EQ(sample_velocity({0, 0}, [](const Vec2 &v) { return v.x; }, params, 0.0, rng), (Vec2{0, 0}));
}

TEST(Sampler, QuadraticBowlMatchesGridBoltzmannMean) {
  auto energy = [](const Vec2 &v) { return 50.0 * dot(v - Vec2{0.3, 0.0}, v - Vec2{0.3, 0.0}); };
  const auto [mx, my] = oracle::gibbs_mean([&](double x, double y) { return energy({x, y}); }, 1.0, 800);
  SamplerParams params;
  params.iterations = 200;
  params.burn_in = 100;
  params.proposal_sigma = 1.0 / 3.0;
  Vec2 sum;
  const int trials = 50;
  for (int seed = 0; seed < trials; ++seed) {
    auto rng = make_stream(static_cast<std::uint64_t>(seed), StreamKind::sampler);
    Vec2 v = sample_velocity({0, 0}, energy, params, 1.0, rng);
    EXPECT_LT(distance(v, {mx, my}), 0.1) << "seed " << seed;
    sum += v;
  }
  EXPECT_LT(distance(sum * (1.0 / trials), {mx, my}), 0.05);
}

TEST(Sampler, OutputNeverExceedsSpeedLimit) {
  SamplerParams params;
  params.proposal_sigma = 2.0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto rng = make_stream(seed, StreamKind::sampler);
    const double vmax = 0.1 + 0.01 * static_cast<double>(seed % 50);
    // Energy pulls hard toward the disk edge.
    Vec2 v = sample_velocity({0, 0}, [](const Vec2 &c) { return -10.0 * c.x; }, params, vmax, rng);
    EXPECT_LE(norm(v), vmax + 1e-12);
  }
}

TEST(Sampler, ChainNeverLeavesDisk) {
  SamplerParams params;
  params.proposal_sigma = 1.5;
  params.proposal_mode = ProposalMode::walk;
  auto rng = make_stream(5, StreamKind::sampler);
  int visits = 0;
  run_chain({0.5, 0.5}, [](const Vec2 &) { return 0.0; }, params, 1.0, rng,
            [&](int, const Vec2 &v, bool) {
              ++visits;
              EXPECT_LE(norm(v), 1.0);
            });
  EXPECT_EQ(visits, params.iterations);
}

TEST(Sampler, SameStreamSameResult) {
  SamplerParams params;
  auto e = [](const Vec2 &v) { return dot(v, v) * 3.0 + v.y; };
  auto r1 = make_stream(9, StreamKind::sampler, 4, 17);
  auto r2 = make_stream(9, StreamKind::sampler, 4, 17);
  EXPECT_EQ(sample_velocity({0.1, 0.1}, e, params, 1.0, r1), sample_velocity({0.1, 0.1}, e, params, 1.0, r2));
}

TEST(Sampler, AllRejectedRetainsPreviousVelocity) {
  SamplerParams params;
  auto rng = make_stream(2, StreamKind::sampler);
  // Every proposal is infinitely worse than the start.
  const Vec2 start{0.25, 0.0};
  auto energy = [&](const Vec2 &v) { return v == start ? 0.0 : 1e300; };
  EXPECT_EQ(sample_velocity(start, energy, params, 1.0, rng), start);
}

namespace {

Scenario bonded_pair() {
  Scenario s;
  s.species = {{"H", 1, 1, 1, {1}, "#fff"}};
  s.population = {2};
  return s;
}

} // namespace

TEST(Sampler, BondedPairDrawsTowardEachOther) {
  auto s = bonded_pair();
  const int trials = 200;
  std::vector<double> vx;
  for (int t = 0; t < trials; ++t) {
    WorldState w;
    w.bounds = {10.0, 10.0};
    w.master_seed = 100 + t;
    w.robots = {{0, 0, {5.0, 5.0}, {}, false}, {1, 0, {5.45, 5.0}, {}, false}};
    auto n = sense_neighbors(w, 0, s.sensing_radius);
    auto part = bond_partition(n, s, w);
    ASSERT_TRUE(part.contains(1));
    vx.push_back(sample_robot_velocity(w, s, n, part).x);
  }
  double mean = 0.0, var = 0.0;
  for (double v : vx) mean += v / trials;
  for (double v : vx) var += (v - mean) * (v - mean) / (trials - 1);
  // Robot 1 sits at +x beyond r0: the mean draw must point at it, clearly.
  EXPECT_GT(mean, 3.0 * std::sqrt(var / trials));
}
