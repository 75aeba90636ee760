#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace debatenet {

/// Malformed or inconsistent input (bad records, invalid parameters, infeasible degrees).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver ran out of iterations. Carries the residual after every iteration.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> trajectory)
        : std::runtime_error(what), trajectory_(std::move(trajectory)) {}

    const std::vector<double>& trajectory() const noexcept { return trajectory_; }

private:
    std::vector<double> trajectory_;
};

/// A pipeline stage was started before one of its upstream artifacts existed.
class StageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace debatenet
