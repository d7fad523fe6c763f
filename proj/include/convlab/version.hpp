#pragma once

namespace convlab {

inline constexpr const char* tool_name = "convlab";
inline constexpr const char* tool_version = "0.1.0";

} // namespace convlab
