#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qvi {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Stencil or index outside the grid.
class RangeError : public Error {
public:
    using Error::Error;
};

// Fields defined on different grids, or vectors of the wrong length.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation produced a non-finite value; path names the failing subexpression.
class EvalError : public Error {
public:
    EvalError(const std::string& what, std::string path)
        : Error(what + " (at " + path + ")"), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// A modeling assumption or input precondition failed; witness is a node index
// (or a human-readable location) that exhibits the failure.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::string witness = {})
        : Error(witness.empty() ? what : what + " [witness: " + witness + "]"),
          witness_(std::move(witness)) {}
    const std::string& witness() const { return witness_; }

private:
    std::string witness_;
};

class NonMonotoneStencil : public Error {
public:
    NonMonotoneStencil(const std::string& what, std::size_t node)
        : Error(what), node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

// Quadratic-cost oracles refuse inputs above their size budget.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

}  // namespace qvi
