#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace facegen {

// Contract violations throw; these stay on in release builds.
#define FG_CHECK(cond, msg)                                                    \
    do {                                                                       \
        if (!(cond)) {                                                         \
            throw std::runtime_error(std::string("check failed: ") + (msg));   \
        }                                                                      \
    } while (0)

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace facegen
