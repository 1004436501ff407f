#include "spdc/error.hpp"

namespace spdc {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parse: return "parse error";
        case ErrorKind::validation: return "validation error";
        case ErrorKind::not_found: return "not found";
        case ErrorKind::out_of_range: return "out of range";
        case ErrorKind::no_solution: return "no solution";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::io: return "i/o error";
    }
    return "error";
}

}  // namespace spdc
