#pragma once

#include <stdexcept>
#include <string>

namespace ipp {

// Bad input: schema violations, infeasible requests, broken invariants.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Linear algebra gave up: non-PSD matrix after jitter escalation, failed fits.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An exhaustive planner exceeded its wall-clock allowance.
class TimeLimitError : public std::runtime_error {
public:
    explicit TimeLimitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ipp
