#ifndef GRFSWARM_SERVICE_PROTOCOL_HPP_
#define GRFSWARM_SERVICE_PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../bonding.hpp"
#include "../engine.hpp"
#include "../metrics.hpp"
#include "../scenario.hpp"
#include "../world.hpp"

// Wire format of the live service. Every message is a JSON text envelope
//   {"type": "frame" | "command" | "error", "payload": {...}}

namespace grfswarm::service {

using nlohmann::json;

struct RobotView {
  RobotId id = 0;
  std::string species;
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
  bool is_anchor = false;
  friend bool operator==(const RobotView &, const RobotView &) = default;
};

struct SpeciesView {
  std::string name;
  std::string color;
  friend bool operator==(const SpeciesView &, const SpeciesView &) = default;
};

/// Projection of one engine snapshot.
struct StateFrame {
  std::int64_t tick = 0;
  double world_width = 0.0;
  double world_height = 0.0;
  std::vector<SpeciesView> species;
  std::vector<RobotView> robots;
  std::vector<std::pair<RobotId, RobotId>> bonds;
  MetricsFrame metrics;
  bool paused = false;
  friend bool operator==(const StateFrame &, const StateFrame &) = default;
};

inline StateFrame make_frame(const WorldState &world, const BondGraph &graph,
                             const MetricsFrame &metrics, const Scenario &s, bool paused) {
  StateFrame f;
  f.tick = world.tick;
  f.world_width = world.bounds.width;
  f.world_height = world.bounds.height;
  for (const auto &sp : s.species) f.species.push_back({sp.name, sp.color});
  for (const auto &r : world.robots)
    f.robots.push_back({r.id, s.species[r.species].name, r.pose.x, r.pose.y, r.velocity.x,
                        r.velocity.y, r.is_anchor});
  f.bonds = graph.edges;
  f.metrics = metrics;
  f.paused = paused;
  return f;
}

inline std::string encode_frame(const StateFrame &f) {
  json robots = json::array();
  for (const auto &r : f.robots)
    robots.push_back({{"id", r.id},
                      {"species", r.species},
                      {"x", r.x},
                      {"y", r.y},
                      {"vx", r.vx},
                      {"vy", r.vy},
                      {"is_anchor", r.is_anchor}});
  json bonds = json::array();
  for (const auto &[a, b] : f.bonds) bonds.push_back({a, b});
  json species = json::array();
  for (const auto &s : f.species) species.push_back({{"name", s.name}, {"color", s.color}});
  json payload = {{"tick", f.tick},
                  {"world", {{"width", f.world_width}, {"height", f.world_height}}},
                  {"species", species},
                  {"robots", robots},
                  {"bonds", bonds},
                  {"metrics",
                   {{"tick", f.metrics.tick},
                    {"velocity_error", f.metrics.velocity_error},
                    {"remaining_bonds", f.metrics.remaining_bonds},
                    {"molecule_count", f.metrics.molecule_count},
                    {"composition", f.metrics.composition}}},
                  {"paused", f.paused}};
  return json{{"type", "frame"}, {"payload", payload}}.dump();
}

inline std::string encode_frame(const WorldState &world, const BondGraph &graph,
                                const MetricsFrame &metrics, const Scenario &s, bool paused = false) {
  return encode_frame(make_frame(world, graph, metrics, s, paused));
}

/// Inverse of encode_frame; throws json::exception on malformed input.
inline StateFrame decode_frame(std::string_view text) {
  const json doc = json::parse(text);
  if (doc.at("type") != "frame") throw std::invalid_argument("not a frame message");
  const json &p = doc.at("payload");
  StateFrame f;
  f.tick = p.at("tick").get<std::int64_t>();
  f.world_width = p.at("world").at("width").get<double>();
  f.world_height = p.at("world").at("height").get<double>();
  for (const auto &s : p.at("species"))
    f.species.push_back({s.at("name").get<std::string>(), s.at("color").get<std::string>()});
  for (const auto &r : p.at("robots"))
    f.robots.push_back({r.at("id").get<RobotId>(), r.at("species").get<std::string>(),
                        r.at("x").get<double>(), r.at("y").get<double>(), r.at("vx").get<double>(),
                        r.at("vy").get<double>(), r.at("is_anchor").get<bool>()});
  for (const auto &b : p.at("bonds")) f.bonds.emplace_back(b.at(0).get<RobotId>(), b.at(1).get<RobotId>());
  const json &m = p.at("metrics");
  f.metrics.tick = m.at("tick").get<std::int64_t>();
  f.metrics.velocity_error = m.at("velocity_error").get<double>();
  f.metrics.remaining_bonds = m.at("remaining_bonds").get<int>();
  f.metrics.molecule_count = m.at("molecule_count").get<int>();
  f.metrics.composition = m.at("composition").get<CompositionHistogram>();
  f.paused = p.at("paused").get<bool>();
  return f;
}

/// A command the service refused, naming the offending field.
struct Rejection {
  std::string field;
  std::string reason;
  friend bool operator==(const Rejection &, const Rejection &) = default;
};

using DecodeResult = std::variant<Command, Rejection>;

inline std::string encode_error(const Rejection &r) {
  return json{{"type", "error"}, {"payload", {{"field", r.field}, {"reason", r.reason}}}}.dump();
}

inline json command_payload(const Command &cmd, const Scenario &s) {
  return std::visit(
      [&](const auto &k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MoveAnchor>)
          return {{"kind", "move_anchor"}, {"id", k.id}, {"x", k.pose.x}, {"y", k.pose.y}};
        else if constexpr (std::is_same_v<T, AddAnchor>)
          return {{"kind", "add_anchor"},
                  {"species", s.species.at(k.species).name},
                  {"x", k.pose.x},
                  {"y", k.pose.y}};
        else if constexpr (std::is_same_v<T, RemoveAnchor>)
          return {{"kind", "remove_anchor"}, {"id", k.id}};
        else if constexpr (std::is_same_v<T, Pause>)
          return {{"kind", "pause"}};
        else if constexpr (std::is_same_v<T, Resume>)
          return {{"kind", "resume"}};
        else if constexpr (std::is_same_v<T, Reset>)
          return {{"kind", "reset"}, {"seed", k.seed}};
        else
          return {{"kind", "set_tick_rate"}, {"hz", k.hz}};
      },
      cmd.kind);
}

inline std::string encode_command(const Command &cmd, const Scenario &s) {
  return json{{"type", "command"}, {"payload", command_payload(cmd, s)}}.dump();
}

namespace detail {
template <class T>
std::optional<T> get_field(const json &obj, const char *key, Rejection &err) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    err = {key, "missing field"};
    return std::nullopt;
  }
  if constexpr (std::is_same_v<T, double>) {
    if (!it->is_number()) {
      err = {key, "expected number"};
      return std::nullopt;
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer() || (std::is_unsigned_v<T> && it->get<std::int64_t>() < 0)) {
      err = {key, "expected non-negative integer"};
      return std::nullopt;
    }
  } else {
    if (!it->is_string()) {
      err = {key, "expected string"};
      return std::nullopt;
    }
  }
  return it->get<T>();
}
} // namespace detail

/// Schema-level parse of a command payload; no checks against a world.
inline DecodeResult parse_command(const json &doc, const Scenario &s) {
  if (!doc.is_object()) return Rejection{"", "expected object"};
  Rejection err;
  auto kind = detail::get_field<std::string>(doc, "kind", err);
  if (!kind) return err;

  Command cmd;
  auto pose = [&]() -> std::optional<Vec2> {
    auto x = detail::get_field<double>(doc, "x", err);
    if (!x) return std::nullopt;
    auto y = detail::get_field<double>(doc, "y", err);
    if (!y) return std::nullopt;
    return Vec2{*x, *y};
  };
  if (*kind == "move_anchor") {
    auto id = detail::get_field<RobotId>(doc, "id", err);
    if (!id) return err;
    auto p = pose();
    if (!p) return err;
    cmd.kind = MoveAnchor{*id, *p};
  } else if (*kind == "add_anchor") {
    auto name = detail::get_field<std::string>(doc, "species", err);
    if (!name) return err;
    auto idx = s.species_index(*name);
    if (idx == s.species.size()) return Rejection{"species", "unknown species"};
    auto p = pose();
    if (!p) return err;
    cmd.kind = AddAnchor{idx, *p};
  } else if (*kind == "remove_anchor") {
    auto id = detail::get_field<RobotId>(doc, "id", err);
    if (!id) return err;
    cmd.kind = RemoveAnchor{*id};
  } else if (*kind == "pause") {
    cmd.kind = Pause{};
  } else if (*kind == "resume") {
    cmd.kind = Resume{};
  } else if (*kind == "reset") {
    auto seed = detail::get_field<std::uint64_t>(doc, "seed", err);
    if (!seed) return err;
    cmd.kind = Reset{*seed};
  } else if (*kind == "set_tick_rate") {
    auto hz = detail::get_field<double>(doc, "hz", err);
    if (!hz) return err;
    cmd.kind = SetTickRate{*hz};
  } else {
    return Rejection{"kind", "unknown kind"};
  }
  return cmd;
}

/// Parses a command message (either the envelope or a bare payload) and checks
/// it against the current world. Never throws.
inline DecodeResult decode_command(std::string_view text, const WorldState &world, const Scenario &s) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return Rejection{"", "malformed JSON"};
  if (auto t = doc.find("type"); t != doc.end()) {
    if (*t != "command") return Rejection{"type", "expected command"};
    auto p = doc.find("payload");
    if (p == doc.end() || !p->is_object()) return Rejection{"payload", "missing payload"};
    doc = json(*p);
  }
  auto result = parse_command(doc, s);
  auto *cmd = std::get_if<Command>(&result);
  if (!cmd) return result;
  cmd->issue_tick = world.tick;
  if (auto problem = check_command(world, s, *cmd)) {
    std::string field = "id";
    if (*problem == "coordinates out of bounds") field = "x";
    else if (*problem == "tick rate must be > 0") field = "hz";
    else if (*problem == "unknown species") field = "species";
    return Rejection{field, *problem};
  }
  return result;
}

/// Reads a replay log: one JSON object per line, {"step": n, "command": {...}}.
/// Lines without a "command" key (such as the session header) are skipped.
inline std::vector<Command> parse_command_log(std::string_view text, const Scenario &s) {
  std::vector<Command> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object())
      throw std::invalid_argument("command log line " + std::to_string(line_no) + ": malformed JSON");
    auto c = rec.find("command");
    if (c == rec.end()) continue;
    auto result = parse_command(*c, s);
    if (auto *rej = std::get_if<Rejection>(&result))
      throw std::invalid_argument("command log line " + std::to_string(line_no) + ": " + rej->field +
                                  ": " + rej->reason);
    auto cmd = std::get<Command>(result);
    auto step = rec.find("step");
    if (step == rec.end() || !step->is_number_integer())
      throw std::invalid_argument("command log line " + std::to_string(line_no) + ": missing step");
    cmd.issue_tick = step->get<std::int64_t>();
    out.push_back(cmd);
  }
  return out;
}

} // namespace grfswarm::service

#endif // GRFSWARM_SERVICE_PROTOCOL_HPP_
