#include "heatpath/error.hpp"

namespace heatpath {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input: return "invalid input";
        case ErrorCode::domain: return "domain error";
        case ErrorCode::unsupported: return "unsupported";
        case ErrorCode::undefined: return "undefined";
        case ErrorCode::validation: return "validation error";
        case ErrorCode::io: return "io error";
    }
    return "unknown error";
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace heatpath
