#pragma once

namespace blsac {

#ifdef BLSAC_VERSION
inline constexpr const char* kVersion = BLSAC_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

}  // namespace blsac
