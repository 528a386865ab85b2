#pragma once

#include <functional>

namespace reprsize {

struct QuadResult {
    double value;
    double error;
    int evaluations;
};

struct QuadOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-11;
    int max_intervals = 4000;
};

// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Throws NumericError carrying the
// achieved error estimate if the tolerance cannot be met.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

}  // namespace reprsize
