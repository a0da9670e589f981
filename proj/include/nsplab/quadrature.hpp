#pragma once

#include <complex>
#include <functional>

namespace nsplab {

struct QuadResult {
    std::complex<double> value;
    double error = 0;
    int panels = 0;
    bool converged = true;
};

struct QuadOptions {
    double abs_tol = 1e-9;
    double max_width = 0;  // initial panel width cap; 0 means no cap
    int max_panels = 200000;
};

// Adaptive Gauss-Kronrod (7/15, Boost.Math) on [a, b]. The interval is first
// cut into panels no wider than max_width; Boost then bisects each panel.
// converged is false when the summed error estimate misses abs_tol.
QuadResult gauss_kronrod(const std::function<std::complex<double>(double)>& f, double a, double b,
                         const QuadOptions& opt);

// Golden-section search for a maximum of f on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b, double tol,
                  double* fmax = nullptr);

}  // namespace nsplab
