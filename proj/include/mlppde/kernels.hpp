#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Data-parallel inner loops of the solver: keyed counter-based random bits,
// uniform/Gaussian variate generation, diffusion transition steps, and the
// reductions used by the built-in initial-value functions.
//
// Two backends exist: a scalar reference implementation and an AVX2 variant.
// Both execute the same IEEE operation sequence per element (shared cores,
// no FMA, fixed 4-stripe reduction order), so their outputs are required to
// be bit-identical; the equivalence tests assert exactly that. Selection
// happens once at runtime (CPU probe, overridable via MLPPDE_KERNEL or
// select_backend()).

namespace mlppde::kern {

struct KernelTable {
  const char* name;

  // n uniforms in (0,1) from counters (slot0 + i, uniform salt) under key (hi, lo).
  void (*fill_uniform)(std::uint64_t hi, std::uint64_t lo, std::uint64_t slot0,
                       std::size_t n, double* out);
  // n standard normals from counters (i, salt) under key (hi, lo).
  void (*fill_gaussian)(std::uint64_t hi, std::uint64_t lo, std::uint64_t salt,
                        std::size_t n, double* out);
  // out[i] = x[i] + scale * z[i]
  void (*heat_step)(const double* x, const double* z, double scale, double* out,
                    std::size_t n);
  // out[i] = x[i] * exp(drift + volscale * z[i])
  void (*gbm_step)(const double* x, const double* z, double drift, double volscale,
                   double* out, std::size_t n);

  double (*sum)(const double* x, std::size_t n);       // 4-stripe deterministic order
  double (*norm_sq)(const double* x, std::size_t n);   // 4-stripe deterministic order
  double (*min_coord)(const double* x, std::size_t n);

  void (*map_exp)(const double* x, double* out, std::size_t n);
  void (*map_log)(const double* x, double* out, std::size_t n);
  void (*map_invnorm)(const double* u, double* out, std::size_t n);
};

const KernelTable& scalar_table();
#if MLPPDE_HAVE_AVX2
const KernelTable& avx2_table();
#endif

/// Currently active backend (selected on first use).
const KernelTable& active();

/// Force a backend: "scalar", "avx2", or "auto". Returns false if the
/// requested backend is unavailable on this machine.
bool select_backend(std::string_view name);

std::vector<std::string> available_backends();

// Scalar single-value entry points. These are the same code path as the
// scalar backend's per-element math, used for one-off draws and final
// scalar folds so that values never depend on the active backend.
double u01_from_word(std::uint64_t word);
double exp1(double x);
double log1(double x);
double invnorm1(double u);
void threefry1(std::uint64_t k0, std::uint64_t k1, std::uint64_t c0, std::uint64_t c1,
               std::uint64_t& y0, std::uint64_t& y1);

// Domain-separation constants for the counter word c1 (documented in the
// README; third parties need these to reproduce the streams).
inline constexpr std::uint64_t kSaltUniform = 0x243F6A8885A308D3ull;
inline constexpr std::uint64_t kSaltGauss   = 0x452821E638D01377ull;
inline constexpr std::uint64_t kSaltDerive  = 0x13198A2E03707344ull;
inline constexpr std::uint64_t kSaltRootK1  = 0xA4093822299F31D0ull;
inline constexpr std::uint64_t kSaltRootC0  = 0x082EFA98EC4E6C89ull;
inline constexpr std::uint64_t kSaltRootC1  = 0xBE5466CF34E90C6Cull;

} // namespace mlppde::kern
