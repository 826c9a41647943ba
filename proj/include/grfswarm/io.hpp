#ifndef GRFSWARM_IO_HPP_
#define GRFSWARM_IO_HPP_

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bonding.hpp"
#include "metrics.hpp"
#include "scenario.hpp"
#include "world.hpp"

namespace grfswarm {

inline constexpr const char *kVersion = "0.1.0";

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip-safe formatting keeps CSVs byte-stable across runs.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char *kMetricsHeader = "tick,velocity_error,remaining_bonds,molecule_count";

inline void write_metrics_row(std::ostream &out, const MetricsFrame &f) {
  out << f.tick << ',' << format_number(f.velocity_error) << ',' << f.remaining_bonds << ','
      << f.molecule_count << '\n';
}

inline void write_metrics_csv(std::ostream &out, const std::vector<MetricsFrame> &series) {
  out << kMetricsHeader << '\n';
  for (const auto &f : series) write_metrics_row(out, f);
}

/// Aggregate CSV; CI columns are left empty when fewer than two runs contributed.
inline void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows) {
  out << "tick,runs";
  for (const char *m : {"velocity_error", "remaining_bonds", "molecule_count"})
    out << ',' << m << "_mean," << m << "_ci_lo," << m << "_ci_hi";
  out << '\n';
  for (const auto &r : rows) {
    out << r.tick << ',' << r.runs;
    for (const Estimate *e : {&r.velocity_error, &r.remaining_bonds, &r.molecule_count}) {
      out << ',' << format_number(e->mean) << ',';
      if (r.ci_defined) out << format_number(e->ci_lo) << ',' << format_number(e->ci_hi);
      else out << ',';
    }
    out << '\n';
  }
}

/// Per-frame composition histograms of one run.
inline nlohmann::json composition_json(const std::vector<MetricsFrame> &series) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto &f : series) frames.push_back({{"tick", f.tick}, {"composition", f.composition}});
  return {{"frames", frames}};
}

/// One newline-delimited record per robot for the given snapshot.
inline void write_trajectory(std::ostream &out, const WorldState &world, const BondGraph &graph,
                             const Scenario &s) {
  for (const auto &r : world.robots) {
    nlohmann::json rec = {{"tick", world.tick},
                          {"id", r.id},
                          {"species", s.species[r.species].name},
                          {"x", r.pose.x},
                          {"y", r.pose.y},
                          {"vx", r.velocity.x},
                          {"vy", r.velocity.y},
                          {"bonds", graph.adjacency[r.id]}};
    out << rec.dump() << '\n';
  }
}

/// FNV-1a over the canonical JSON form: stable across platforms and builds.
inline std::string scenario_hash(const Scenario &s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : scenario_to_json(s).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::ofstream open_output(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

} // namespace grfswarm

#endif // GRFSWARM_IO_HPP_
