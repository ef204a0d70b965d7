#pragma once

#include <stdexcept>
#include <string>

namespace mvt {

// Invalid domain input (layout/context out of range, dimension mismatch,
// rejected configuration). `path` carries a field-path diagnostic such as
// "template.widgets[2]" when the error originates from a config document.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& message, std::string path = {})
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Layout space too large for an exhaustive operation.
class CapExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SnapshotError : public std::runtime_error {
public:
    enum class Kind { VersionMismatch, Corrupt, Io };

    SnapshotError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace mvt
