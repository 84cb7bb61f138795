#pragma once

#include <string>
#include <string_view>

#include "streamlab/common/types.h"

namespace streamlab {

// Parses "500ms", "30s", "15m", "2h", "250us", "10ns". A bare number is
// interpreted as seconds. Throws ConfigError on malformed input.
SimTime ParseDuration(std::string_view text);

// Parses "HH:MM" into an offset within a virtual day.
SimTime ParseClockOfDay(std::string_view text);

std::string FormatDuration(SimTime t);

}  // namespace streamlab
