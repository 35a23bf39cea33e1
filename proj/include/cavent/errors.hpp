#pragma once

#include <stdexcept>
#include <string>

namespace cavent {

// Base class for everything this library throws on invalid input or state.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed system description: duplicate ids, dangling references, bad ranges.
class SpecError : public Error {
public:
    explicit SpecError(const std::string& what) : Error(what) {}
};

// Operands were built over different composite bases.
class BasisMismatchError : public Error {
public:
    explicit BasisMismatchError(const std::string& what) : Error(what) {}
};

// Failure while executing a protocol step; carries the step index.
class ProtocolError : public Error {
public:
    ProtocolError(int step_index, const std::string& what)
        : Error("step " + std::to_string(step_index) + ": " + what),
          step_index_(step_index) {}
    explicit ProtocolError(const std::string& what) : Error(what), step_index_(-1) {}

    int step_index() const { return step_index_; }

private:
    int step_index_;
};

} // namespace cavent
