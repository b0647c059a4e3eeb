#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mlppde/ledger.hpp"

// Splittable, stateless random streams indexed by a root seed and a finite
// path of signed integers. Every value is a pure function of
// (root_seed, path, slot): deriving a child key is one keyed Threefry2x64-20
// application, and draws are Threefry blocks under the derived 128-bit key
// with domain-separated counters. No sequential state anywhere, so
// generation order and thread assignment cannot change any value.

namespace mlppde {

/// One element of the index family: a root seed plus a path of signed
/// integer components, carried alongside the derived 128-bit key state.
struct StreamKey {
  static constexpr std::size_t kMaxPath = 32;

  std::uint64_t root_seed = 0;
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  std::array<std::int64_t, kMaxPath> path{};
  std::uint8_t path_len = 0;

  static StreamKey root(std::uint64_t seed);
  static StreamKey from_path(std::uint64_t seed, std::span<const std::int64_t> components);

  /// Derived key with the path extended by one component.
  StreamKey child(std::int64_t component) const;

  std::span<const std::int64_t> path_view() const { return {path.data(), path_len}; }

  friend bool operator==(const StreamKey& a, const StreamKey& b) {
    return a.root_seed == b.root_seed && a.hi == b.hi && a.lo == b.lo &&
           a.path_len == b.path_len && a.path == b.path;
  }
};

struct GaussianVector {
  std::vector<double> values;
};

/// Uniform draw in (0,1), deterministic per (key, slot). Adds 1 scalar draw.
double uniform01(const StreamKey& key, std::uint64_t slot, CostLedger& ledger);

/// Fills out with i.i.d. standard normals, deterministic per (key, slot, d).
/// Adds out.size() scalar draws.
void gaussian_fill(const StreamKey& key, std::uint64_t slot, std::span<double> out,
                   CostLedger& ledger);

GaussianVector gaussian_vector(const StreamKey& key, std::uint64_t slot, std::size_t d,
                               CostLedger& ledger);

} // namespace mlppde
