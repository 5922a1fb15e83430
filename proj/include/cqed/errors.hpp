// errors.hpp: exception hierarchy shared by all cqed modules
//
// Every error carries the module and operation that raised it so the CLI can
// emit machine-readable diagnostics and map each kind to a distinct exit code.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cqed {

enum class ErrorKind {
    invalid_parameter,
    contract,
    input,
    numeric,
    degenerate_kernel,
    no_feature,
    no_dip,
    ambiguous_window,
    no_decay,
    singular_system,
    inconsistent_data,
    config,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, std::string operation, const std::string& message)
        : std::runtime_error(message)
        , kind_(kind)
        , module_(std::move(module))
        , operation_(std::move(operation)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }
    const std::string& operation() const noexcept { return operation_; }

private:
    ErrorKind kind_;
    std::string module_;
    std::string operation_;
};

// Throws invalid_parameter unless `ok`.
inline void require(bool ok, std::string_view module, std::string_view operation,
                    const std::string& message) {
    if (!ok) {
        throw Error(ErrorKind::invalid_parameter, std::string(module), std::string(operation),
                    message);
    }
}

} // namespace cqed
