#include "powerplan/error.hpp"

namespace powerplan {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::config: return "config error";
    }
    return "error";
}

Error::Error(ErrorKind kind, std::string where, const std::string& message)
    : std::runtime_error(where + ": " + to_string(kind) + ": " + message),
      kind_(kind),
      where_(std::move(where)),
      detail_(message) {}

namespace {
std::string join_problems(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) {
        if (!out.empty()) out += "; ";
        out += p;
    }
    return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(ErrorKind::config, "cli::parse_config", join_problems(problems)),
      problems_(std::move(problems)) {}

void throw_domain(const char* where, const std::string& message) {
    throw Error(ErrorKind::domain, where, message);
}

void throw_precondition(const char* where, const std::string& message) {
    throw Error(ErrorKind::precondition, where, message);
}

void throw_numeric(const char* where, const std::string& message) {
    throw Error(ErrorKind::numeric, where, message);
}

}  // namespace powerplan
