#pragma once

#include <stdexcept>
#include <string>

namespace hunter {

/// Bad or inconsistent configuration (YAML schema, detector geometry, scenario specs).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A file could not be opened or read.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (CSV layout, unparsable timestamps, empty files).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A remote data source failed after retries.
class SourceError : public std::runtime_error {
public:
    explicit SourceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hunter
