#pragma once

namespace osa {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace osa
