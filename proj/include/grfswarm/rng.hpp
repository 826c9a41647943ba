#ifndef GRFSWARM_RNG_HPP_
#define GRFSWARM_RNG_HPP_

#include <cstdint>
#include <random>

namespace grfswarm {

using Engine = std::mt19937_64;

namespace detail {
// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
} // namespace detail

/// Stream labels; keep values stable, they are part of the reproducibility contract.
enum class StreamKind : std::uint64_t { placement = 1, sampler = 2 };

/// Derives an independent engine keyed by (master seed, stream kind, robot, tick).
/// The result depends only on the key, never on call order.
inline Engine make_stream(std::uint64_t master_seed, StreamKind kind,
                          std::uint64_t robot = 0, std::uint64_t tick = 0) {
  std::uint64_t h = detail::mix64(master_seed);
  h = detail::mix64(h ^ static_cast<std::uint64_t>(kind));
  h = detail::mix64(h ^ robot);
  h = detail::mix64(h ^ (tick * 0xd1b54a32d192ed03ULL));
  return Engine{h};
}

} // namespace grfswarm

#endif // GRFSWARM_RNG_HPP_
