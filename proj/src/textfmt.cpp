#include "aeroloop/textfmt.hpp"

#include <cstdio>

namespace aeroloop {

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

} // namespace aeroloop
