#pragma once

#include <stdexcept>
#include <string>

namespace csl {

/// Malformed or structurally invalid input data (bad file schema, too few points, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file does not match the expected column schema or header format.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// The design of a fit is rank deficient (e.g. all chirp rates equal).
class DegenerateScanError : public DataError {
public:
    using DataError::DataError;
};

/// An iterative numerical routine did not reach its tolerance within budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// An approximation was requested outside the parameter regime that justifies it.
class RegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace csl
