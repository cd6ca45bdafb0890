// errors.hpp
//  Exception types shared by all pulsecomm modules.
#ifndef PULSECOMM_ERRORS_HPP
#define PULSECOMM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulsecomm
{

// Argument outside the mathematical domain of an operation
class DomainError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed binary data; carries the offending word/octet offset
class FormatError : public std::runtime_error
{
public:
    FormatError(const std::string &what, std::size_t offset)
            : std::runtime_error(what + " (at offset " +
                      std::to_string(offset) + ")")
            , offset_(offset)
    {
    }
    explicit FormatError(const std::string &what)
            : std::runtime_error(what)
    {
    }
    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_{0};
};

// Playback or trace memory would overflow
class CapacityError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Text input could not be parsed; carries the 1-based line number
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string &what, std::size_t line)
            : std::runtime_error("line " + std::to_string(line) + ": " + what)
            , line_(line)
    {
    }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_{0};
};

// Parsed input violates a semantic rule (e.g. duplicate spike times)
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Analysis inputs are mutually inconsistent
class ConsistencyError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration; message starts with the offending key path
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Simulator invariant broken; indicates a bug rather than bad input
class InvariantViolation : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

} // namespace pulsecomm

#endif
