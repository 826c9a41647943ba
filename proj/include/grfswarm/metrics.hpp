#ifndef GRFSWARM_METRICS_HPP_
#define GRFSWARM_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bonding.hpp"
#include "disjoint_set.hpp"
#include "scenario.hpp"
#include "world.hpp"

namespace grfswarm {

/// Species-count signature ("H:2,O:1", names ascending) -> number of molecules.
using CompositionHistogram = std::map<std::string, int>;

struct MetricsFrame {
  std::int64_t tick = 0;
  double velocity_error = 0.0;
  int remaining_bonds = 0;
  int molecule_count = 0;
  CompositionHistogram composition;
  friend bool operator==(const MetricsFrame &, const MetricsFrame &) = default;
};

/// Connected components of the bond graph, each as an ascending id list.
inline std::vector<std::vector<RobotId>> bond_components(const BondGraph &g) {
  const std::size_t n = g.adjacency.size();
  DisjointSet ds(n);
  for (const auto &[a, b] : g.edges) ds.unite(a, b);
  std::map<std::size_t, std::vector<RobotId>> by_root;
  for (std::size_t i = 0; i < n; ++i) by_root[ds.find(i)].push_back(i);
  std::vector<std::vector<RobotId>> out;
  out.reserve(by_root.size());
  for (auto &[root, members] : by_root) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.front() < b.front(); });
  return out;
}

/// True when a bond-graph path joins robots a and b.
inline bool bond_connected(const BondGraph &g, RobotId a, RobotId b) {
  DisjointSet ds(g.adjacency.size());
  for (const auto &[x, y] : g.edges) ds.unite(x, y);
  return ds.find(a) == ds.find(b);
}

/// Mean over bonded components (>= 2 members) of the mean deviation of member
/// velocities from the component mean; 0 when there are no such components.
inline double velocity_consensus_error(const WorldState &world, const BondGraph &g) {
  double total = 0.0;
  int groups = 0;
  for (const auto &comp : bond_components(g)) {
    if (comp.size() < 2) continue;
    Vec2 mean;
    for (RobotId i : comp) mean += world.robots[i].velocity;
    mean *= 1.0 / static_cast<double>(comp.size());
    double dev = 0.0;
    for (RobotId i : comp) dev += norm(world.robots[i].velocity - mean);
    total += dev / static_cast<double>(comp.size());
    ++groups;
  }
  return groups ? total / groups : 0.0;
}

/// Unfilled bond slots summed over robots.
inline int remaining_bonds(const WorldState &world, const BondGraph &g, const Scenario &s) {
  int rem = 0;
  for (const auto &r : world.robots) {
    if (r.is_anchor && !s.count_anchors) continue;
    rem += s.species[r.species].total_cap - static_cast<int>(g.degree(r.id));
  }
  return rem;
}

struct MoleculeCount {
  int count = 0;
  CompositionHistogram composition;
};

inline std::string composition_signature(const std::vector<RobotId> &members,
                                         const WorldState &world, const Scenario &s) {
  std::map<std::string, int> counts;
  for (RobotId i : members) ++counts[s.species[world.robots[i].species].name];
  std::string key;
  for (const auto &[name, n] : counts) {
    if (!key.empty()) key += ',';
    key += name + ':' + std::to_string(n);
  }
  return key;
}

/// A molecule is a component of >= 2 robots where every member has exhausted its total cap.
inline MoleculeCount count_molecules(const WorldState &world, const BondGraph &g, const Scenario &s) {
  MoleculeCount out;
  for (const auto &comp : bond_components(g)) {
    if (comp.size() < 2) continue;
    bool saturated = true;
    for (RobotId i : comp)
      if (static_cast<int>(g.degree(i)) != s.species[world.robots[i].species].total_cap) {
        saturated = false;
        break;
      }
    if (!saturated) continue;
    ++out.count;
    ++out.composition[composition_signature(comp, world, s)];
  }
  return out;
}

inline MetricsFrame measure(const WorldState &world, const BondGraph &g, const Scenario &s) {
  MetricsFrame f;
  f.tick = world.tick;
  f.velocity_error = velocity_consensus_error(world, g);
  f.remaining_bonds = remaining_bonds(world, g, s);
  auto m = count_molecules(world, g, s);
  f.molecule_count = m.count;
  f.composition = std::move(m.composition);
  return f;
}

inline MetricsFrame measure(const WorldState &world, const Scenario &s) {
  return measure(world, bond_graph(world, s), s);
}

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.576;

struct Estimate {
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct AggregateRow {
  std::int64_t tick = 0;
  int runs = 0;
  bool ci_defined = false;
  Estimate velocity_error;
  Estimate remaining_bonds;
  Estimate molecule_count;
};

/// Sample mean and mean +/- z * s / sqrt(n) of `values`; CI needs n >= 2.
inline Estimate estimate(const std::vector<double> &values, bool &ci_defined) {
  Estimate e;
  const auto n = static_cast<double>(values.size());
  if (values.empty()) return e;
  for (double v : values) e.mean += v;
  e.mean /= n;
  ci_defined = values.size() >= 2;
  if (!ci_defined) {
    e.ci_lo = e.ci_hi = e.mean;
    return e;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  const double half = kZ99 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  e.ci_lo = e.mean - half;
  e.ci_hi = e.mean + half;
  return e;
}

class AggregateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per-tick mean and 99% CI across runs. All series must share the tick grid.
inline std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<MetricsFrame>> &series) {
  std::vector<AggregateRow> out;
  if (series.empty()) return out;
  const std::size_t len = series.front().size();
  for (const auto &s : series)
    if (s.size() != len) throw AggregateError("aggregate_runs: series lengths differ");
  for (std::size_t t = 0; t < len; ++t) {
    AggregateRow row;
    row.tick = series.front()[t].tick;
    row.runs = static_cast<int>(series.size());
    std::vector<double> ve, rb, mc;
    for (const auto &s : series) {
      if (s[t].tick != row.tick) throw AggregateError("aggregate_runs: tick grids differ");
      ve.push_back(s[t].velocity_error);
      rb.push_back(s[t].remaining_bonds);
      mc.push_back(s[t].molecule_count);
    }
    row.velocity_error = estimate(ve, row.ci_defined);
    row.remaining_bonds = estimate(rb, row.ci_defined);
    row.molecule_count = estimate(mc, row.ci_defined);
    out.push_back(row);
  }
  return out;
}

} // namespace grfswarm

#endif // GRFSWARM_METRICS_HPP_
