#include "nsplab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

namespace nsplab {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

// Bisect until the Kronrod-Gauss difference meets the absolute share.
void panel(const std::function<std::complex<double>(double)>& f, double lo, double hi, double share,
           int depth, QuadResult& res, int max_panels) {
    double err = 0;
    std::complex<double> v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    if (err <= share || depth == 0) {
        res.value += v;
        res.error += err;
        ++res.panels;
        if (err > share) res.converged = false;
        return;
    }
    if (res.panels > max_panels)
        throw std::runtime_error("quadrature: panel cap exceeded");
    double mid = 0.5 * (lo + hi);
    panel(f, lo, mid, share / 2, depth - 1, res, max_panels);
    panel(f, mid, hi, share / 2, depth - 1, res, max_panels);
}

}  // namespace

QuadResult gauss_kronrod(const std::function<std::complex<double>(double)>& f, double a, double b,
                         const QuadOptions& opt) {
    QuadResult res;
    res.panels = 0;
    if (b <= a) return res;
    long npan = 1;
    if (opt.max_width > 0) npan = static_cast<long>(std::ceil((b - a) / opt.max_width));
    if (npan > opt.max_panels)
        throw std::runtime_error("quadrature: panel cap exceeded (" + std::to_string(npan) + " panels)");
    const double h = (b - a) / static_cast<double>(npan);
    const double share = opt.abs_tol / static_cast<double>(npan);
    for (long k = 0; k < npan; ++k) {
        double lo = a + h * k, hi = (k + 1 == npan) ? b : lo + h;
        panel(f, lo, hi, share, 20, res, opt.max_panels);
    }
    return res;
}

double golden_max(const std::function<double(double)>& f, double a, double b, double tol,
                  double* fmax) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    double x = fc > fd ? c : d;
    if (fmax) *fmax = std::max(fc, fd);
    return x;
}

}  // namespace nsplab
