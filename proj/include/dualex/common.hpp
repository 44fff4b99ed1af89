#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualex {

using Vec = std::vector<double>;

// Dense row-major matrix, the only linear-algebra container we need.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A solver ran out of its iteration/query budget before certifying the
// requested accuracy; carries the best gap it could certify.
struct ConvergenceError : std::runtime_error {
    double best_gap;
    ConvergenceError(const std::string& what, double gap)
        : std::runtime_error(what + " (best certified gap " + std::to_string(gap) + ")"),
          best_gap(gap) {}
};

}  // namespace dualex
