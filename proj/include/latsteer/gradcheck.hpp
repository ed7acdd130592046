#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "latsteer/autodiff.hpp"
#include "latsteer/params.hpp"

namespace latsteer {

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
    // Location of the worst coordinate.
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
};

// Builds a scalar from the graph leaves bound to each tensor of theta (in order).
using ScalarFn = std::function<Var(Graph&, std::span<const Var>)>;

// Compares backward() gradients of f against central differences
// (f(theta+h) - f(theta-h)) / 2h, coordinate by coordinate. The relative
// error uses max(|analytic|, |numeric|, 1e-8) as denominator; pass iff the
// largest one is <= tol. theta is restored before returning.
GradCheckReport grad_check(const ScalarFn& f, Params& theta, double h, double tol);

}  // namespace latsteer
