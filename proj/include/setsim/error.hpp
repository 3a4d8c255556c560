#pragma once

#include <stdexcept>
#include <string>

namespace setsim {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    usage = 1,
    input = 2,
    invariant = 3,
};

// All library failures are reported through this type. `code` is a short
// machine-parsable tag such as "E_PARSE" or "E_PROFILE".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

inline Error input_error(std::string code, const std::string& message) {
    return {ErrorKind::input, std::move(code), message};
}

inline Error invariant_error(std::string code, const std::string& message) {
    return {ErrorKind::invariant, std::move(code), message};
}

inline Error usage_error(std::string code, const std::string& message) {
    return {ErrorKind::usage, std::move(code), message};
}

}  // namespace setsim
