#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace serrinlab {

// Error with a stable machine-readable code ("NonPositiveC0", "InvalidAngle", ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace serrinlab
