#pragma once

#include <stdexcept>
#include <string>

namespace netrel {

/// Malformed or contract-violating input data (files, terminal lists).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid combination of options or parameters.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configured resource cap (edge count, diagram width) was exceeded.
class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace netrel
