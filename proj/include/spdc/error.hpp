#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

enum class ErrorKind {
    parse,
    validation,
    not_found,
    out_of_range,
    no_solution,
    unsupported,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace spdc
