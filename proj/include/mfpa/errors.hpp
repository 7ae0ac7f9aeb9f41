#pragma once

#include <stdexcept>
#include <string>

namespace mfpa {

// Parameter record rejected by semantic validation.
class InvalidParameter : public std::invalid_argument {
public:
    InvalidParameter(std::string name, const std::string& reason)
        : std::invalid_argument("invalid parameter '" + name + "': " + reason),
          name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// A model coefficient produced NaN or infinity.
class NonFiniteValue : public std::runtime_error {
public:
    explicit NonFiniteValue(const std::string& what) : std::runtime_error(what) {}
};

class EmptyGrid : public std::invalid_argument {
public:
    EmptyGrid() : std::invalid_argument("control grid is empty") {}
};

// The log argument in the closed-form h2 became nonpositive: the
// small-horizon validity condition of the coefficient system fails.
class HorizonTooLong : public std::runtime_error {
public:
    explicit HorizonTooLong(double t)
        : std::runtime_error("value-coefficient system invalid at t=" + std::to_string(t) +
                             ": horizon too long"),
          t_(t) {}
    double earliest_invalid_time() const { return t_; }

private:
    double t_;
};

class PicardNoConvergence : public std::runtime_error {
public:
    PicardNoConvergence(double gap, int iters)
        : std::runtime_error("mean-field fixed point not reached after " +
                             std::to_string(iters) + " iterations, gap=" + std::to_string(gap)),
          gap_(gap), iters_(iters) {}
    double final_gap() const { return gap_; }
    int iterations() const { return iters_; }

private:
    double gap_;
    int iters_;
};

class NonFiniteState : public std::runtime_error {
public:
    NonFiniteState(std::size_t path, std::size_t step)
        : std::runtime_error("non-finite state at path " + std::to_string(path) +
                             ", step " + std::to_string(step)),
          path_(path), step_(step) {}
    std::size_t path() const { return path_; }
    std::size_t step() const { return step_; }

private:
    std::size_t path_;
    std::size_t step_;
};

}  // namespace mfpa
