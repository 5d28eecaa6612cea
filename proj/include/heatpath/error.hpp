#pragma once

#include <stdexcept>
#include <string>

namespace heatpath {

enum class ErrorCode {
    invalid_input = 1,
    domain,
    unsupported,
    undefined,
    validation,
    io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace heatpath
