#pragma once

namespace mstlab {

inline constexpr const char* code_version = "0.1.0";

}  // namespace mstlab
