#pragma once

namespace stressfreq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stressfreq
