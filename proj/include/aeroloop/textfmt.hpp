#pragma once

#include <string>

namespace aeroloop {

/// printf-style "%.{decimals}f" rendering. All wire-visible numbers
/// (failure info strings, oscillation messages, conversation log
/// timestamps) go through this so the byte format is in one place.
std::string fixed(double value, int decimals);

} // namespace aeroloop
