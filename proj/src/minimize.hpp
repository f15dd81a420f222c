#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace lawkit::detail {

using Objective = std::function<double(const std::vector<double>&)>;

struct MinimizeOptions {
    int max_iterations = 2000;
    // Converged when the relative decrease stays below this for 5 iterations.
    double rel_tolerance = 1e-10;
    int stall_iterations = 5;
    double fd_step = 1e-6;  // relative central-difference step
};

struct MinimizeResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Dense BFGS with backtracking (Armijo) line search and central-difference
// gradients. Non-finite objective values are treated as +inf so the line
// search backs away from them. Suitable for the <= 12 dimensional problems
// used here.
MinimizeResult bfgs_minimize(const Objective& f, std::vector<double> x0,
                             const MinimizeOptions& opts = {});

}  // namespace lawkit::detail
