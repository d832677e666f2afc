#pragma once

#include <stdexcept>
#include <string>

namespace tifl {

// Caller passed an argument violating a documented precondition.
class invalid_parameter : public std::invalid_argument {
public:
    explicit invalid_parameter(const std::string& what) : std::invalid_argument(what) {}
};

// A file or byte stream did not match its declared format.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite parameter.
class training_diverged : public std::runtime_error {
public:
    explicit training_diverged(const std::string& what) : std::runtime_error(what) {}
};

// Input data cannot support the requested operation (e.g. constant images).
class degenerate_data : public std::runtime_error {
public:
    explicit degenerate_data(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tifl
