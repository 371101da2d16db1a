#pragma once

namespace mdpkit {

inline constexpr const char* kToolVersion = "0.1.0";

}
