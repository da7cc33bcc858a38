#ifndef BRANCHMAX_ERRORS_HPP
#define BRANCHMAX_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace branchmax {

// Raised for invalid user input (bad model parameters, malformed configs).
// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a numerical procedure fails its internal quality control.
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class InversionFailure : public NumericError {
public:
    InversionFailure(const std::string& what, double discrepancy)
        : NumericError(what), discrepancy(discrepancy) {}
    double discrepancy;
};

class ConvergenceFailure : public NumericError {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> history)
        : NumericError(what), update_history(std::move(history)) {}
    std::vector<double> update_history;
};

} // namespace branchmax

#endif
