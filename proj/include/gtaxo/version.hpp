#pragma once

#ifndef GTAXO_VERSION
#define GTAXO_VERSION "0.1.0"
#endif

namespace gtaxo {

inline constexpr const char* version = GTAXO_VERSION;

}  // namespace gtaxo
