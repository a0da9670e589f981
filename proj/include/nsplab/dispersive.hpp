#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nsplab/cutoff.hpp"
#include "nsplab/semigroup.hpp"

namespace nsplab {

// Radial Fourier-side profile fhat(|xi|) in dimension 2 or 3.
struct RadialProfile {
    std::function<double(double)> fhat;
    int dim = 3;
    double rmax = 12.0;  // beyond this fhat is treated as zero (checked)
    std::string name = "custom";
};

RadialProfile gaussian_profile(int dim, double width = 1.0);  // exp(-r^2 / (2 width^2))
// Cubic B-spline through equispaced samples on [0, rmax].
RadialProfile sampled_profile(int dim, std::vector<double> samples, double rmax);
void check_tail(const RadialProfile& f);

struct DecayFit {
    std::vector<double> times, values;
    double exponent = 0;   // values ~ C t^{-exponent}
    double intercept = 0;  // log C
    double t_min = 0, t_max = 0;
    double residual = 0;   // rms of log residuals
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, double t_min,
                   double t_max);

// Surface-measure transform with full constants: |S^{d-1}| at s = 0.
// d = 3: 4 pi sin(s)/s, d = 2: 2 pi J0(s).
double sphere_kernel(int d, double s);

struct PropagatorOptions {
    double abs_tol = 1e-9;
    double width_factor = 1.0;  // scales the panel cap pi / (4 max(|t b'|, |x|))
    int max_panels = 400000;
};

// (2 pi)^{-d} int_0^inf e^{i t b(r)} chi(r) fhat(r) K_d(|x| r) r^{d-1} dr.
std::complex<double> propagator_point(double t, double x, const RadialProfile& f,
                                      const DispersionSymbol& sym, double kappa0,
                                      const PropagatorOptions& opt = {});

struct SupScanOptions {
    int x_samples = 241;
    double x_span = 3.0;  // scan |x| in [0, x_span * max(t, 1)]
    double fit_t_min = 10;
    double fit_t_max = 200;
    PropagatorOptions quad;
};

// sup_x |propagator| per t, then a log-log fit.
DecayFit sup_norm_scan(const RadialProfile& f, const DispersionSymbol& sym, double kappa0,
                       const std::vector<double>& t_list, const SupScanOptions& opt = {});

double sup_over_x(double t, const RadialProfile& f, const DispersionSymbol& sym, double kappa0,
                  const SupScanOptions& opt, double* argmax = nullptr);

// det of the Hessian of r -> b(r) + x.xi/t in closed form.
double hessian_det(double r, double eps, int d);
inline double hessian_det_bound(int d) {
    return 1.0 / (std::pow(2.0, d + 1) * std::pow(5.0, (d + 1) / 2.0));
}

struct HessianReport {
    std::vector<double> eps, min_det;
    double global_min = 0, bound = 0;
    bool pass = false;
};
HessianReport hessian_det_scan(const std::vector<double>& eps_grid, double kappa0, int d,
                               int r_samples = 4001);

struct IonBReport {
    std::vector<double> eps, min_bprime, r0, b3_at_r0, iota, c2;
    std::vector<int> zero_count;
    double min_bprime_all = 0;
    bool pass = false;
    std::vector<std::string> flags;
};

// On [0, sqrt(2 k0/eps)] for each eps: min b', zeros of b'' located in
// [1, 10] by bisection, and the interval around r0 where b''' stays positive.
IonBReport ion_b_properties(const std::vector<double>& eps_grid, double kappa0, int r_samples = 20001);

// r0 of p''(r) = 0, the eps -> 0 limit.
double ion_r0_limit();

DecayFit ion_decay_scan(const RadialProfile& f, double eps, double kappa0,
                        const std::vector<double>& t_list, const SupScanOptions& opt = {});

std::vector<double> geometric_times(double t0, double t1, int n);

}  // namespace nsplab
