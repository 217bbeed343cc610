#pragma once

namespace stkrig {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stkrig
