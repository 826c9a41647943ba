#ifndef GRFSWARM_ENGINE_HPP_
#define GRFSWARM_ENGINE_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "bonding.hpp"
#include "metrics.hpp"
#include "sampler.hpp"
#include "scenario.hpp"
#include "world.hpp"

namespace grfswarm {

/// Holonomic Euler step, hard-clamped to the world rectangle.
inline Vec2 integrate(const Vec2 &pose, const Vec2 &velocity, double dt, const Bounds &bounds) {
  return bounds.clamp(pose + velocity * dt);
}

/// Advances one synchronous tick. Every robot's new velocity is computed from
/// the same tick-t snapshot; `order` only sets the evaluation sequence and
/// cannot change the result.
inline WorldState step(const WorldState &world, const Scenario &s, std::span<const RobotId> order) {
  const auto nbhds = sense_all(world, s.sensing_radius);
  const auto parts = bond_partitions(world, s, nbhds);
  std::vector<Vec2> next_velocity(world.robots.size());
  for (RobotId i : order) {
    if (world.robots[i].is_anchor) continue;
    next_velocity[i] = sample_robot_velocity(world, s, nbhds[i], parts[i]);
  }
  WorldState next = world;
  for (auto &r : next.robots) {
    r.velocity = r.is_anchor ? Vec2{} : next_velocity[r.id];
    r.pose = integrate(r.pose, r.velocity, s.dt, next.bounds);
  }
  ++next.tick;
  return next;
}

inline WorldState step(const WorldState &world, const Scenario &s) {
  std::vector<RobotId> order(world.robots.size());
  std::iota(order.begin(), order.end(), RobotId{0});
  return step(world, s, order);
}

// ---------------------------------------------------------------------------
// Commands

struct MoveAnchor {
  RobotId id = 0;
  Vec2 pose;
  friend bool operator==(const MoveAnchor &, const MoveAnchor &) = default;
};
struct AddAnchor {
  SpeciesIndex species = 0;
  Vec2 pose;
  friend bool operator==(const AddAnchor &, const AddAnchor &) = default;
};
struct RemoveAnchor {
  RobotId id = 0;
  friend bool operator==(const RemoveAnchor &, const RemoveAnchor &) = default;
};
struct Pause {
  friend bool operator==(const Pause &, const Pause &) = default;
};
struct Resume {
  friend bool operator==(const Resume &, const Resume &) = default;
};
struct Reset {
  std::uint64_t seed = 0;
  friend bool operator==(const Reset &, const Reset &) = default;
};
struct SetTickRate {
  double hz = 30.0;
  friend bool operator==(const SetTickRate &, const SetTickRate &) = default;
};

using CommandKind =
    std::variant<MoveAnchor, AddAnchor, RemoveAnchor, Pause, Resume, Reset, SetTickRate>;

/// `issue_tick` is the number of engine steps completed when the command takes effect.
struct Command {
  CommandKind kind;
  std::int64_t issue_tick = 0;
  friend bool operator==(const Command &, const Command &) = default;
};

class CommandError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reason the command cannot apply to `world`, or nullopt if it can.
inline std::optional<std::string> check_command(const WorldState &world, const Scenario &s,
                                                const Command &cmd) {
  auto anchor_target = [&](RobotId id) -> std::optional<std::string> {
    if (id >= world.robots.size()) return "no such anchor";
    if (!world.robots[id].is_anchor) return "not an anchor";
    return std::nullopt;
  };
  auto in_bounds = [&](const Vec2 &p) -> std::optional<std::string> {
    if (!world.bounds.contains(p)) return "coordinates out of bounds";
    return std::nullopt;
  };
  return std::visit(
      [&](const auto &k) -> std::optional<std::string> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MoveAnchor>) {
          if (auto e = anchor_target(k.id)) return e;
          return in_bounds(k.pose);
        } else if constexpr (std::is_same_v<T, AddAnchor>) {
          if (k.species >= s.species.size()) return "unknown species";
          return in_bounds(k.pose);
        } else if constexpr (std::is_same_v<T, RemoveAnchor>) {
          return anchor_target(k.id);
        } else if constexpr (std::is_same_v<T, SetTickRate>) {
          if (!(k.hz > 0.0)) return "tick rate must be > 0";
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      cmd.kind);
}

/// Applies the world-changing part of a command. Pause, Resume and
/// SetTickRate leave the world untouched; they steer the live driver.
/// Removing an anchor renumbers the robots after it so ids stay dense.
inline WorldState apply_command(const WorldState &world, const Scenario &s, const Command &cmd) {
  if (auto err = check_command(world, s, cmd)) throw CommandError(*err);
  WorldState next = world;
  std::visit(
      [&](const auto &k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MoveAnchor>) {
          next.robots[k.id].pose = k.pose;
        } else if constexpr (std::is_same_v<T, AddAnchor>) {
          RobotState r;
          r.id = next.robots.size();
          r.species = k.species;
          r.pose = k.pose;
          r.is_anchor = true;
          next.robots.push_back(r);
        } else if constexpr (std::is_same_v<T, RemoveAnchor>) {
          next.robots.erase(next.robots.begin() + static_cast<std::ptrdiff_t>(k.id));
          for (std::size_t n = 0; n < next.robots.size(); ++n) next.robots[n].id = n;
        } else if constexpr (std::is_same_v<T, Reset>) {
          next = init_world(s, k.seed);
        }
      },
      cmd.kind);
  return next;
}

// ---------------------------------------------------------------------------
// Headless runs

struct RunOptions {
  std::optional<int> ticks;      // overrides scenario.ticks
  std::vector<Command> commands; // applied when their issue_tick is reached
  /// Called for every metrics frame, after the frame is appended.
  std::function<void(const MetricsFrame &, const WorldState &, const BondGraph &)> on_frame;
};

struct RunResult {
  std::vector<MetricsFrame> metrics_series;
  WorldState final_state;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string error;
};

/// Initializes the world, then steps it `ticks` times, recording a frame every
/// metrics_stride steps (or the initial frame alone when ticks is 0).
inline RunResult run(const Scenario &s, std::uint64_t seed, const RunOptions &opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.seed = seed;
  const int ticks = opt.ticks.value_or(s.ticks);

  auto commands = opt.commands;
  std::stable_sort(commands.begin(), commands.end(),
                   [](const auto &a, const auto &b) { return a.issue_tick < b.issue_tick; });
  std::size_t next_cmd = 0;

  WorldState world = init_world(s, seed);
  auto emit = [&] {
    auto graph = bond_graph(world, s);
    res.metrics_series.push_back(measure(world, graph, s));
    if (opt.on_frame) opt.on_frame(res.metrics_series.back(), world, graph);
  };

  try {
    if (ticks == 0) emit();
    for (std::int64_t done = 0; done < ticks; ++done) {
      while (next_cmd < commands.size() && commands[next_cmd].issue_tick <= done)
        world = apply_command(world, s, commands[next_cmd++]);
      world = step(world, s);
      if ((done + 1) % s.metrics_stride == 0) emit();
    }
    // Commands issued after the last step still shape the final state.
    while (next_cmd < commands.size() && commands[next_cmd].issue_tick <= ticks)
      world = apply_command(world, s, commands[next_cmd++]);
  } catch (const CommandError &) {
    throw;
  } catch (const std::exception &e) {
    res.aborted = true;
    res.error = e.what();
  }
  res.final_state = std::move(world);
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

} // namespace grfswarm

#endif // GRFSWARM_ENGINE_HPP_
