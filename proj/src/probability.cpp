#include "netrel/probability.hpp"

#include <cstdio>

namespace netrel {

std::string format_number(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace netrel
