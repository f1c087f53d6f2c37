#pragma once

namespace lapgraph {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lapgraph
