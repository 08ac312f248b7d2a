#pragma once

namespace betajac {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace betajac
