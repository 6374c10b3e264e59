#pragma once

namespace horizonlab {
inline constexpr const char* kVersion = "1.0.0";
}
