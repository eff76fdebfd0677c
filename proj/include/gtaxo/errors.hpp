#pragma once

#include <stdexcept>
#include <string>

namespace gtaxo {

// Exit codes used by the command-line front end.
enum class ErrorKind { usage = 2, input = 3, resource = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

// Malformed files, invalid indices, shape mismatches.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

// A size guard refused to run (dense eigensolver limit, FullyConn on huge graphs).
class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(ErrorKind::resource, what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

// Perturbation is not defined for this dataset (e.g. band-pass on d = 0).
class UnsupportedPerturbation : public InputError {
public:
    explicit UnsupportedPerturbation(const std::string& what) : InputError(what) {}
};

// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gtaxo
