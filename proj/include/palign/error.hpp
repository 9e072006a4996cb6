#pragma once

#include <stdexcept>
#include <string>

namespace palign {

// Base class for all engine errors. CLI maps these to exit code 2
// (input/parse errors) or 3 (configuration errors).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed pattern file. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class DuplicateIdError : public Error {
public:
    DuplicateIdError(int line, const std::string& id)
        : Error("line " + std::to_string(line) + ": duplicate pattern id '" + id + "'") {}
};

class UnknownPatternError : public Error {
public:
    explicit UnknownPatternError(const std::string& id)
        : Error("unknown pattern id '" + id + "'") {}
};

// encode() refuses alignments whose row coverage cannot be replayed in order.
class NonDecodableError : public Error {
public:
    explicit NonDecodableError(const std::string& what) : Error(what) {}
};

// Invalid search parameters or an exhaustive search beyond safe bounds.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace palign
