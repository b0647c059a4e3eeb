#include "mlppde/streams.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "mlppde/kernels.hpp"

namespace mlppde {

StreamKey StreamKey::root(std::uint64_t seed) {
  StreamKey k;
  k.root_seed = seed;
  kern::threefry1(seed, kern::kSaltRootK1, kern::kSaltRootC0, kern::kSaltRootC1, k.hi, k.lo);
  return k;
}

StreamKey StreamKey::child(std::int64_t component) const {
  if (path_len >= kMaxPath)
    throw std::runtime_error("StreamKey: path depth limit exceeded");
  StreamKey k = *this;
  kern::threefry1(hi, lo, std::bit_cast<std::uint64_t>(component), kern::kSaltDerive,
                  k.hi, k.lo);
  k.path[k.path_len++] = component;
  return k;
}

StreamKey StreamKey::from_path(std::uint64_t seed, std::span<const std::int64_t> components) {
  StreamKey k = root(seed);
  for (std::int64_t c : components) k = k.child(c);
  return k;
}

double uniform01(const StreamKey& key, std::uint64_t slot, CostLedger& ledger) {
  std::uint64_t y0, y1;
  kern::threefry1(key.hi, key.lo, slot, kern::kSaltUniform, y0, y1);
  ledger.scalar_draws += 1;
  return kern::u01_from_word(y0);
}

void gaussian_fill(const StreamKey& key, std::uint64_t slot, std::span<double> out,
                   CostLedger& ledger) {
  kern::active().fill_gaussian(key.hi, key.lo, kern::kSaltGauss + slot, out.size(),
                               out.data());
  ledger.scalar_draws += out.size();
}

GaussianVector gaussian_vector(const StreamKey& key, std::uint64_t slot, std::size_t d,
                               CostLedger& ledger) {
  if (d < 1) throw std::invalid_argument("gaussian_vector: d must be >= 1");
  GaussianVector g;
  g.values.resize(d);
  gaussian_fill(key, slot, g.values, ledger);
  return g;
}

} // namespace mlppde
