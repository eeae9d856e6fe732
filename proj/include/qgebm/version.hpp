#pragma once

namespace qgebm {

inline constexpr const char* kVersion = "qgebm 0.1.0";

}  // namespace qgebm
