#pragma once

namespace qws {
inline constexpr const char* kVersion = "0.1.0";
}
