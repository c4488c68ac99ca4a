#pragma once

namespace mapper {

inline constexpr const char *kToolName = "mapper-engine";
inline constexpr const char *kToolVersion = "0.1.0";

} // namespace mapper
