#pragma once

namespace phasecell {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace phasecell
