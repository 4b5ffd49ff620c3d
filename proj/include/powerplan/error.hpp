#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace powerplan {

enum class ErrorKind {
    domain,        // argument outside the mathematical domain
    precondition,  // inconsistent or missing inputs
    numeric,       // iteration or quadrature failed to converge
    config,        // configuration document failed validation
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library. `where` names the module and operation,
// e.g. "robust_surrogate::solve_r_tol".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string where, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& where() const noexcept { return where_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string where_;
    std::string detail_;
};

// Schema validation failure carrying one message per offending path.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

[[noreturn]] void throw_domain(const char* where, const std::string& message);
[[noreturn]] void throw_precondition(const char* where, const std::string& message);
[[noreturn]] void throw_numeric(const char* where, const std::string& message);

}  // namespace powerplan
