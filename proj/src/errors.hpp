#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rcpp {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// A structural requirement on the inputs (graph connectivity, mixing-matrix
// support, step-size ranges) does not hold.
class PreconditionViolation : public Error {
public:
    explicit PreconditionViolation(const std::string& what) : Error(what) {}
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long iteration)
        : Error(what), iteration_(iteration) {}
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Carries every issue found in a config or data file, not just the first.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::vector<std::string> issues)
        : Error(what), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

}  // namespace rcpp
