#pragma once

namespace deepcent {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace deepcent
