#pragma once

namespace latqed {

// Kept in step with the CMake project version.
inline constexpr const char* version = "0.1.0";

}  // namespace latqed
