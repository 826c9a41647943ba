#ifndef GRFSWARM_SCENARIO_HPP_
#define GRFSWARM_SCENARIO_HPP_

#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vec2.hpp"

namespace grfswarm {

using SpeciesIndex = std::size_t;

/// One robot type: mass, charge magnitude and its bond-capacity table.
/// `pair_caps` is dense and indexed by species index of the scenario.
struct SpeciesSpec {
  std::string name;
  double mass = 1.0;
  double charge = 1.0;
  int total_cap = 0;
  std::vector<int> pair_caps;
  std::string color = "#888888";

  int pair_cap(SpeciesIndex other) const {
    return other < pair_caps.size() ? pair_caps[other] : 0;
  }
  friend bool operator==(const SpeciesSpec &, const SpeciesSpec &) = default;
};

enum class KineticMode { relative, literal };
enum class ProposalMode { independent, walk };

/// Default r_min_clamp as a fraction of r0. For alpha = 12 the exp-6 curve
/// peaks near 0.30 r0 and collapses toward -inf below it; clamping at the
/// peak keeps the energy finite and the global minimum at r0.
inline constexpr double kClampFraction = 0.3;

struct PotentialParams {
  double epsilon = 1.0;
  double r0 = 0.25;
  double alpha = 12.0;
  double coulomb_constant = 0.5;
  double r_min_clamp = kClampFraction * 0.25;
  double wall_charge = 2.0;
  double weight_cb = 1.0;
  double weight_kinetic = 1.0;
  KineticMode kinetic_mode = KineticMode::relative;

  /// Gibbs temperature; fixed at one.
  static constexpr double temperature = 1.0;

  friend bool operator==(const PotentialParams &, const PotentialParams &) = default;
};

struct SamplerParams {
  int iterations = 100;
  int burn_in = 50;
  double proposal_sigma = 1.0 / 3.0;
  ProposalMode proposal_mode = ProposalMode::independent;

  friend bool operator==(const SamplerParams &, const SamplerParams &) = default;
};

struct AnchorSpec {
  SpeciesIndex species = 0;
  Vec2 pose;
  friend bool operator==(const AnchorSpec &, const AnchorSpec &) = default;
};

struct Scenario {
  double world_width = 10.0;
  double world_height = 10.0;
  double sensing_radius = 0.5;
  double v_max = 1.0;
  double dt = 0.1;
  int ticks = 20000;
  std::uint64_t rng_seed = 1;
  std::vector<SpeciesSpec> species;
  std::vector<int> population; // per species index
  std::vector<AnchorSpec> anchors;
  SamplerParams sampler;
  PotentialParams potential;
  double bond_distance_factor = 1.5; // bond counts when distance <= factor * r0
  int metrics_stride = 10;
  bool count_anchors = true;

  int robot_count() const { return std::accumulate(population.begin(), population.end(), 0); }
  double bond_distance_threshold() const { return bond_distance_factor * potential.r0; }
  std::size_t species_index(std::string_view name) const {
    for (std::size_t k = 0; k < species.size(); ++k)
      if (species[k].name == name) return k;
    return species.size();
  }

  friend bool operator==(const Scenario &, const Scenario &) = default;
};

/// Minimum initial pairwise separation as a fraction of the sensing radius.
inline constexpr double kMinSeparationFactor = 0.3;

class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Lists every violated invariant; empty means the scenario is usable.
inline std::vector<std::string> validate_scenario(const Scenario &s) {
  std::vector<std::string> out;
  if (!(s.world_width > 0.0) || !(s.world_height > 0.0))
    out.push_back("world: width and height must be > 0");
  if (!(s.sensing_radius > 0.0)) out.push_back("sensing_radius must be > 0");
  if (!(s.v_max >= 0.0)) out.push_back("v_max must be >= 0");
  if (!(s.dt > 0.0)) out.push_back("dt must be > 0");
  if (s.ticks < 0) out.push_back("ticks must be >= 0");
  if (s.species.empty()) out.push_back("species: at least one species required");
  for (const auto &sp : s.species) {
    if (!(sp.mass > 0.0)) out.push_back("species " + sp.name + ": mass must be > 0");
    if (!(sp.charge > 0.0)) out.push_back("species " + sp.name + ": charge must be > 0");
    if (sp.total_cap < 0) out.push_back("species " + sp.name + ": total_cap must be >= 0");
    for (int c : sp.pair_caps)
      if (c < 0) {
        out.push_back("species " + sp.name + ": pair caps must be >= 0");
        break;
      }
  }
  if (s.population.size() != s.species.size())
    out.push_back("population: one count per species required");
  for (int c : s.population)
    if (c < 0) {
      out.push_back("population: counts must be >= 0");
      break;
    }
  if (s.robot_count() <= 0) out.push_back("empty population");
  for (std::size_t a = 0; a < s.anchors.size(); ++a) {
    const auto &an = s.anchors[a];
    if (an.species >= s.species.size())
      out.push_back("anchor " + std::to_string(a) + " has unknown species");
    if (an.pose.x < 0.0 || an.pose.x > s.world_width || an.pose.y < 0.0 ||
        an.pose.y > s.world_height)
      out.push_back("anchor " + std::to_string(a) + " outside bounds");
  }
  const auto &p = s.potential;
  if (!(p.alpha > 6.0)) out.push_back("potential.alpha must be > 6");
  if (!(p.r0 > 0.0)) out.push_back("potential.r0 must be > 0");
  if (!(p.epsilon > 0.0)) out.push_back("potential.epsilon must be > 0");
  if (!(p.r_min_clamp > 0.0 && p.r_min_clamp < p.r0))
    out.push_back("potential.r_min_clamp must lie in (0, r0)");
  const auto &m = s.sampler;
  if (m.iterations < 1) out.push_back("sampler.iterations must be >= 1");
  if (m.burn_in < 0 || m.burn_in >= m.iterations)
    out.push_back("sampler.burn_in must satisfy 0 <= burn_in < iterations");
  if (!(m.proposal_sigma > 0.0)) out.push_back("sampler.proposal_sigma must be > 0");
  if (!(s.bond_distance_factor > 0.0)) out.push_back("bond_distance_factor must be > 0");
  if (s.metrics_stride < 1) out.push_back("metrics.stride must be >= 1");
  return out;
}

namespace detail {

using nlohmann::json;

template <class T> T field(const json &obj, const char *key, const std::string &path, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    throw ScenarioError(path + key + ": wrong type");
  }
}

template <class T> T required(const json &obj, const char *key, const std::string &path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(path + key + ": missing required field");
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    throw ScenarioError(path + key + ": wrong type");
  }
}

inline const char *to_string(KineticMode m) {
  return m == KineticMode::literal ? "literal" : "relative";
}
inline const char *to_string(ProposalMode m) {
  return m == ProposalMode::walk ? "walk" : "independent";
}

} // namespace detail

/// Parses a scenario document without checking invariants. Throws
/// ScenarioError naming the offending field or the parser position.
inline Scenario parse_scenario(std::string_view text) {
  using nlohmann::json;
  using detail::field;
  using detail::required;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("parse error: top level must be an object");

  Scenario s;
  if (auto w = doc.find("world"); w != doc.end()) {
    if (!w->is_object()) throw ScenarioError("world: expected object");
    s.world_width = field(*w, "width", "world.", s.world_width);
    s.world_height = field(*w, "height", "world.", s.world_height);
  }
  s.sensing_radius = field(doc, "sensing_radius", "", s.sensing_radius);
  s.v_max = field(doc, "v_max", "", s.v_max);
  s.dt = field(doc, "dt", "", s.dt);
  s.ticks = field(doc, "ticks", "", s.ticks);
  s.rng_seed = field<std::uint64_t>(doc, "rng_seed", "", s.rng_seed);
  s.bond_distance_factor = field(doc, "bond_distance_factor", "", s.bond_distance_factor);

  auto sp = doc.find("species");
  if (sp == doc.end() || !sp->is_array()) throw ScenarioError("species: expected array");
  for (std::size_t k = 0; k < sp->size(); ++k) {
    const auto &e = (*sp)[k];
    const std::string path = "species[" + std::to_string(k) + "].";
    SpeciesSpec spec;
    spec.name = required<std::string>(e, "name", path);
    spec.mass = required<double>(e, "mass", path);
    spec.charge = required<double>(e, "charge", path);
    spec.total_cap = required<int>(e, "total_cap", path);
    spec.color = field<std::string>(e, "color", path, spec.color);
    s.species.push_back(std::move(spec));
  }
  for (std::size_t k = 0; k < sp->size(); ++k) {
    const auto &e = (*sp)[k];
    const std::string path = "species[" + std::to_string(k) + "].pair_caps.";
    auto &caps = s.species[k].pair_caps;
    caps.assign(s.species.size(), 0);
    if (auto pc = e.find("pair_caps"); pc != e.end()) {
      if (!pc->is_object()) throw ScenarioError(path + ": expected object");
      for (const auto &[name, value] : pc->items()) {
        auto idx = s.species_index(name);
        if (idx == s.species.size())
          throw ScenarioError("species " + s.species[k].name + ": unknown species '" + name +
                              "' in pair_caps");
        if (!value.is_number_integer()) throw ScenarioError(path + name + ": expected integer");
        caps[idx] = value.get<int>();
      }
    }
  }

  s.population.assign(s.species.size(), 0);
  if (auto pop = doc.find("population"); pop != doc.end()) {
    if (!pop->is_object()) throw ScenarioError("population: expected object");
    for (const auto &[name, value] : pop->items()) {
      auto idx = s.species_index(name);
      if (idx == s.species.size())
        throw ScenarioError("population: unknown species '" + name + "'");
      if (!value.is_number_integer()) throw ScenarioError("population." + name + ": expected integer");
      s.population[idx] = value.get<int>();
    }
  }

  if (auto an = doc.find("anchors"); an != doc.end()) {
    if (!an->is_array()) throw ScenarioError("anchors: expected array");
    for (std::size_t k = 0; k < an->size(); ++k) {
      const auto &e = (*an)[k];
      const std::string path = "anchors[" + std::to_string(k) + "].";
      auto name = required<std::string>(e, "species", path);
      auto idx = s.species_index(name);
      if (idx == s.species.size())
        throw ScenarioError(path + "species: unknown species '" + name + "'");
      s.anchors.push_back({idx, {required<double>(e, "x", path), required<double>(e, "y", path)}});
    }
  }

  if (auto sm = doc.find("sampler"); sm != doc.end()) {
    if (!sm->is_object()) throw ScenarioError("sampler: expected object");
    auto &m = s.sampler;
    m.iterations = field(*sm, "iterations", "sampler.", m.iterations);
    m.burn_in = field(*sm, "burn_in", "sampler.", m.iterations / 2);
    m.proposal_sigma = field(*sm, "proposal_sigma", "sampler.", s.v_max / 3.0);
    auto mode = field<std::string>(*sm, "proposal_mode", "sampler.", "independent");
    if (mode == "independent") m.proposal_mode = ProposalMode::independent;
    else if (mode == "walk") m.proposal_mode = ProposalMode::walk;
    else throw ScenarioError("sampler.proposal_mode: expected 'independent' or 'walk'");
  } else {
    s.sampler.proposal_sigma = s.v_max / 3.0;
  }

  auto &p = s.potential;
  if (auto pt = doc.find("potential"); pt != doc.end()) {
    if (!pt->is_object()) throw ScenarioError("potential: expected object");
    p.epsilon = field(*pt, "epsilon", "potential.", p.epsilon);
    p.r0 = field(*pt, "r0", "potential.", p.r0);
    p.alpha = field(*pt, "alpha", "potential.", p.alpha);
    p.coulomb_constant = field(*pt, "coulomb_constant", "potential.", p.coulomb_constant);
    p.r_min_clamp = field(*pt, "r_min_clamp", "potential.", kClampFraction * p.r0);
    p.wall_charge = field(*pt, "wall_charge", "potential.", p.wall_charge);
    p.weight_cb = field(*pt, "weight_cb", "potential.", p.weight_cb);
    p.weight_kinetic = field(*pt, "weight_kinetic", "potential.", p.weight_kinetic);
    auto mode = field<std::string>(*pt, "kinetic_mode", "potential.", "relative");
    if (mode == "relative") p.kinetic_mode = KineticMode::relative;
    else if (mode == "literal") p.kinetic_mode = KineticMode::literal;
    else throw ScenarioError("potential.kinetic_mode: expected 'relative' or 'literal'");
  }

  if (auto mt = doc.find("metrics"); mt != doc.end()) {
    if (!mt->is_object()) throw ScenarioError("metrics: expected object");
    s.metrics_stride = field(*mt, "stride", "metrics.", s.metrics_stride);
    s.count_anchors = field(*mt, "count_anchors", "metrics.", s.count_anchors);
  }

  return s;
}

/// parse_scenario followed by validate_scenario; every violation lands in the error message.
inline Scenario load_scenario(std::string_view text) {
  Scenario s = parse_scenario(text);
  if (auto v = validate_scenario(s); !v.empty()) {
    std::string msg = v.front();
    for (std::size_t k = 1; k < v.size(); ++k) msg += "; " + v[k];
    throw ScenarioError(msg);
  }
  return s;
}

inline std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": file not found");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Scenario load_scenario_file(const std::string &path) {
  return load_scenario(read_text_file(path));
}

/// Serializes with every default made explicit, so reloading yields an equal Scenario.
inline nlohmann::json scenario_to_json(const Scenario &s) {
  using nlohmann::json;
  json doc;
  doc["world"] = {{"width", s.world_width}, {"height", s.world_height}};
  doc["sensing_radius"] = s.sensing_radius;
  doc["v_max"] = s.v_max;
  doc["dt"] = s.dt;
  doc["ticks"] = s.ticks;
  doc["rng_seed"] = s.rng_seed;
  doc["bond_distance_factor"] = s.bond_distance_factor;
  json species = json::array();
  for (const auto &sp : s.species) {
    json caps = json::object();
    for (std::size_t k = 0; k < s.species.size(); ++k) caps[s.species[k].name] = sp.pair_cap(k);
    species.push_back({{"name", sp.name},
                       {"mass", sp.mass},
                       {"charge", sp.charge},
                       {"total_cap", sp.total_cap},
                       {"pair_caps", caps},
                       {"color", sp.color}});
  }
  doc["species"] = species;
  json pop = json::object();
  for (std::size_t k = 0; k < s.species.size(); ++k) pop[s.species[k].name] = s.population[k];
  doc["population"] = pop;
  json anchors = json::array();
  for (const auto &a : s.anchors)
    anchors.push_back({{"species", s.species[a.species].name}, {"x", a.pose.x}, {"y", a.pose.y}});
  doc["anchors"] = anchors;
  doc["sampler"] = {{"iterations", s.sampler.iterations},
                    {"burn_in", s.sampler.burn_in},
                    {"proposal_sigma", s.sampler.proposal_sigma},
                    {"proposal_mode", detail::to_string(s.sampler.proposal_mode)}};
  const auto &p = s.potential;
  doc["potential"] = {{"epsilon", p.epsilon},
                      {"r0", p.r0},
                      {"alpha", p.alpha},
                      {"coulomb_constant", p.coulomb_constant},
                      {"r_min_clamp", p.r_min_clamp},
                      {"wall_charge", p.wall_charge},
                      {"weight_cb", p.weight_cb},
                      {"weight_kinetic", p.weight_kinetic},
                      {"kinetic_mode", detail::to_string(p.kinetic_mode)}};
  doc["metrics"] = {{"stride", s.metrics_stride}, {"count_anchors", s.count_anchors}};
  return doc;
}

} // namespace grfswarm

#endif // GRFSWARM_SCENARIO_HPP_
