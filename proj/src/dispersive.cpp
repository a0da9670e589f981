#include "nsplab/dispersive.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <math.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "nsplab/quadrature.hpp"

namespace nsplab {

RadialProfile gaussian_profile(int dim, double width) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("radial profile: dim must be 2 or 3");
    RadialProfile f;
    f.dim = dim;
    f.fhat = [width](double r) { return std::exp(-r * r / (2 * width * width)); };
    f.rmax = 12 * width;
    f.name = "gaussian";
    return f;
}

RadialProfile sampled_profile(int dim, std::vector<double> samples, double rmax) {
    if (samples.size() < 4) throw std::invalid_argument("sampled profile needs at least 4 samples");
    double h = rmax / static_cast<double>(samples.size() - 1);
    // flat start: radial profiles are even in r
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        samples.begin(), samples.end(), 0.0, h, 0.0);
    RadialProfile f;
    f.dim = dim;
    f.rmax = rmax;
    f.fhat = [spline, rmax](double r) { return r > rmax ? 0.0 : (*spline)(r); };
    f.name = "sampled";
    return f;
}

void check_tail(const RadialProfile& f) {
    if (f.dim != 2 && f.dim != 3) throw std::invalid_argument("radial profile: dim must be 2 or 3");
    // |fhat| <= C (1+r)^{-10} with C taken from the sampled envelope, and the
    // truncation at rmax must drop nothing visible.
    double peak = 0, C = 0;
    for (int i = 0; i <= 400; ++i) {
        double r = f.rmax * i / 400.0, v = std::abs(f.fhat(r));
        if (!std::isfinite(v)) throw std::domain_error("radial profile: non-finite sample");
        peak = std::max(peak, v);
        C = std::max(C, v * std::pow(1 + r, 10));
    }
    if (std::abs(f.fhat(f.rmax)) > 1e-12 * peak)
        throw std::domain_error("radial profile: tail not negligible at rmax");
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, double t_min,
                   double t_max) {
    if (t.size() != v.size()) throw std::invalid_argument("fit_decay: size mismatch");
    DecayFit fit;
    fit.times = t;
    fit.values = v;
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_min && t[i] <= t_max && v[i] > 0) {
            X.push_back(std::log(t[i]));
            Y.push_back(std::log(v[i]));
        }
    if (X.size() < 2 || (X.back() - X.front()) < 0.5 * std::log(10.0))
        throw std::invalid_argument("fit_decay: fit window shorter than half a decade");
    double n = static_cast<double>(X.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sx += X[i];
        sy += Y[i];
        sxx += X[i] * X[i];
        sxy += X[i] * Y[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - slope * sx) / n;
    fit.exponent = -slope;
    double ss = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double e = Y[i] - (fit.intercept + slope * X[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.t_min = std::exp(X.front());
    fit.t_max = std::exp(X.back());
    return fit;
}

double sphere_kernel(int d, double s) {
    s = std::abs(s);
    if (d == 3) {
        if (s < 1e-4) return 4 * kPi * (1 - s * s / 6);
        return 4 * kPi * std::sin(s) / s;
    }
    if (d == 2) return 2 * kPi * ::j0(s);
    throw std::invalid_argument("sphere_kernel: d must be 2 or 3");
}

namespace {

double support_radius(const RadialProfile& f, const DispersionSymbol& sym, double kappa0) {
    double R = std::min(2 * std::sqrt(kappa0 / sym.epsilon), f.rmax);
    if (radicand(R, sym) < 0) throw std::domain_error("propagator: overdamped modes inside the cutoff support");
    return R;
}

double max_bprime(double R, const DispersionSymbol& sym) {
    double m = 0;
    for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(b_prime(R * i / 256.0, sym)));
    return m;
}

}  // namespace

std::complex<double> propagator_point(double t, double x, const RadialProfile& f,
                                      const DispersionSymbol& sym, double kappa0,
                                      const PropagatorOptions& opt) {
    check_tail(f);
    CutoffParams p{sym.epsilon, kappa0};
    validate(p);
    const double R = support_radius(f, sym, kappa0);
    const int d = f.dim;
    const double norm = 1.0 / std::pow(2 * kPi, d);
    const double ax = std::abs(x);
    auto g = [&](double r) -> std::complex<double> {
        double w = chi_low(r, p) * f.fhat(r);
        if (w == 0) return 0.0;
        double ph = t * b_value(r, sym);
        double amp = w * sphere_kernel(d, ax * r) * std::pow(r, d - 1) * norm;
        return {amp * std::cos(ph), amp * std::sin(ph)};
    };
    double rate = std::max(std::abs(t) * max_bprime(R, sym), ax);
    QuadOptions q;
    q.abs_tol = opt.abs_tol;
    q.max_panels = opt.max_panels;
    q.max_width = rate > 0 ? opt.width_factor * kPi / (4 * rate) : 0;
    auto res = gauss_kronrod(g, 0.0, R, q);
    if (!res.converged) throw std::runtime_error("propagator_point: quadrature did not converge");
    return res.value;
}

double sup_over_x(double t, const RadialProfile& f, const DispersionSymbol& sym, double kappa0,
                  const SupScanOptions& opt, double* argmax) {
    const int n = std::max(opt.x_samples, 3);
    const double span = opt.x_span * std::max(t, 1.0);
    const double dx = span / (n - 1);
    std::vector<double> vals(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) vals[i] = std::abs(propagator_point(t, dx * i, f, sym, kappa0, opt.quad));
    int best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    double lo = std::max(0.0, dx * (best - 1)), hi = std::min(span, dx * (best + 1));
    double fbest = vals[best], xbest = dx * best, fg = 0;
    double xg = golden_max(
        [&](double xx) { return std::abs(propagator_point(t, xx, f, sym, kappa0, opt.quad)); }, lo, hi,
        1e-3 * dx + 1e-9, &fg);
    if (fg > fbest) {
        fbest = fg;
        xbest = xg;
    }
    if (argmax) *argmax = xbest;
    return fbest;
}

DecayFit sup_norm_scan(const RadialProfile& f, const DispersionSymbol& sym, double kappa0,
                       const std::vector<double>& t_list, const SupScanOptions& opt) {
    if (t_list.size() < 8) throw std::invalid_argument("sup_norm_scan: need at least 8 times");
    for (std::size_t i = 1; i < t_list.size(); ++i)
        if (!(t_list[i] > t_list[i - 1])) throw std::invalid_argument("sup_norm_scan: times must increase");
    if (t_list.back() < 10 * t_list.front())
        throw std::invalid_argument("sup_norm_scan: times must span at least one decade");
    std::vector<double> sups;
    for (double t : t_list) sups.push_back(sup_over_x(t, f, sym, kappa0, opt));
    return fit_decay(t_list, sups, opt.fit_t_min, opt.fit_t_max);
}

double hessian_det(double r, double eps, int d) {
    double e2r2 = eps * eps * r * r, r2 = r * r;
    double b2 = 1 + r2 - e2r2 * r2;
    double b = std::sqrt(b2);
    double u = 1 - 2 * e2r2;
    double num = 1 - 6 * e2r2 - 3 * e2r2 * r2 + 2 * e2r2 * e2r2 * r2;
    return std::pow(u / b, d) * num / (b2 * u);
}

HessianReport hessian_det_scan(const std::vector<double>& eps_grid, double kappa0, int d,
                               int r_samples) {
    HessianReport rep;
    rep.bound = hessian_det_bound(d);
    rep.global_min = INFINITY;
    for (double eps : eps_grid) {
        double R = std::min(2.0, std::sqrt(2 * kappa0 / eps));
        double m = INFINITY;
        for (int i = 0; i < r_samples; ++i) m = std::min(m, hessian_det(R * i / (r_samples - 1), eps, d));
        rep.eps.push_back(eps);
        rep.min_det.push_back(m);
        rep.global_min = std::min(rep.global_min, m);
    }
    rep.pass = rep.global_min >= rep.bound;
    return rep;
}

namespace {

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a);
    while (b - a > tol) {
        double m = 0.5 * (a + b), fm = f(m);
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

IonBReport ion_b_properties(const std::vector<double>& eps_grid, double kappa0, int r_samples) {
    IonBReport rep;
    rep.min_bprime_all = INFINITY;
    bool ok = true;
    for (double eps : eps_grid) {
        DispersionSymbol s{Variant::ion, eps};
        double R = std::sqrt(2 * kappa0 / eps);
        // stay strictly inside the oscillatory regime
        double Rb = R;
        while (radicand(Rb, s) <= 0) Rb *= 0.999;
        double mb = INFINITY;
        for (int i = 0; i < r_samples; ++i) mb = std::min(mb, b_prime(Rb * i / (r_samples - 1), s));
        rep.eps.push_back(eps);
        rep.min_bprime.push_back(mb);
        rep.min_bprime_all = std::min(rep.min_bprime_all, mb);

        double lo = 1.0, hi = std::min(10.0, Rb);
        std::vector<double> zeros;
        if (hi > lo) {
            auto b2 = [&](double r) { return b_second(r, s); };
            double prev = b2(lo);
            double h = (hi - lo) / (r_samples - 1);
            for (int i = 1; i < r_samples; ++i) {
                double r = lo + h * i, cur = b2(r);
                if ((cur > 0) != (prev > 0) || cur == 0) zeros.push_back(bisect(b2, r - h, r, 1e-8));
                prev = cur;
            }
        }
        rep.zero_count.push_back(static_cast<int>(zeros.size()));
        if (zeros.size() != 1) {
            ok = false;
            rep.flags.push_back("eps=" + std::to_string(eps) + ": b'' has " + std::to_string(zeros.size()) +
                                " zero(s) in [1,10] within the cutoff region r <= " + std::to_string(R));
            rep.r0.push_back(NAN);
            rep.b3_at_r0.push_back(NAN);
            rep.iota.push_back(NAN);
            rep.c2.push_back(NAN);
            continue;
        }
        double r0 = zeros[0], b3 = b_third(r0, s);
        double c2 = 0.5 * b3, iota = 0;
        if (b3 > 0) {
            const double step = 1e-3;
            while (iota < 1.0) {
                double nxt = iota + step;
                if (r0 - nxt < 0 || r0 + nxt >= Rb) break;
                if (b_third(r0 - nxt, s) < c2 || b_third(r0 + nxt, s) < c2) break;
                iota = nxt;
            }
        } else {
            ok = false;
            rep.flags.push_back("eps=" + std::to_string(eps) + ": b''' <= 0 at r0");
        }
        rep.r0.push_back(r0);
        rep.b3_at_r0.push_back(b3);
        rep.iota.push_back(iota);
        rep.c2.push_back(c2);
    }
    rep.pass = ok && rep.min_bprime_all >= 1 / (2 * std::sqrt(2.0)) - 1e-9;
    return rep;
}

double ion_r0_limit() {
    DispersionSymbol s{Variant::ion, 0.0};
    return bisect([&](double r) { return b_second(r, s); }, 1.0, 10.0, 1e-12);
}

DecayFit ion_decay_scan(const RadialProfile& f, double eps, double kappa0,
                        const std::vector<double>& t_list, const SupScanOptions& opt) {
    if (f.dim != 3) throw std::invalid_argument("ion_decay_scan: d = 3 only");
    return sup_norm_scan(f, {Variant::ion, eps}, kappa0, t_list, opt);
}

std::vector<double> geometric_times(double t0, double t1, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t0 * std::pow(t1 / t0, static_cast<double>(i) / (n - 1));
    return t;
}

}  // namespace nsplab
