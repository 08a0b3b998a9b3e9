// Tool identity, echoed into every report so an artifact names the code
// that produced it.
#pragma once

namespace spherefsb {

inline constexpr const char* kToolName = "spherefsb";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace spherefsb
