#pragma once

namespace spikelab {

inline constexpr const char* kVersion = "1.0.0";

} // namespace spikelab
