#pragma once

namespace mlppde {

inline constexpr const char* kVersion = "0.1.0";

// Compiler/version string embedded into CSV metadata so results can be
// tied to the build that produced them.
const char* build_id();

} // namespace mlppde
