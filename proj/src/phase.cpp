#include "nsplab/phase.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsplab {

namespace {

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

int sign_of(int j) {
    if (j != 1 && j != 2) throw std::invalid_argument("phase index must be 1 or 2");
    return j == 1 ? 1 : -1;
}

}  // namespace

double phase_value(int j, int k, const Vec3& xi, const Vec3& eta, const PhaseFamily& pf) {
    auto s = pf.symbol();
    return sign_of(j) * b_value(norm3(xi), s) + sign_of(k) * b_value(norm3(eta), s) -
           b_value(norm3(add(xi, eta)), s);
}

double quantity_A(const Vec3& xi, const Vec3& eta, double eps) {
    DispersionSymbol s{Variant::electron, eps};
    double sum = b_value(norm3(xi), s) + b_value(norm3(eta), s);
    double bz = b_value(norm3(add(xi, eta)), s);
    return sum * sum - bz * bz;
}

double quantity_A_expanded(const Vec3& xi, const Vec3& eta, double eps) {
    DispersionSymbol s{Variant::electron, eps};
    double a2 = dot(xi, xi), e2 = dot(eta, eta);
    Vec3 z = add(xi, eta);
    double z2 = dot(z, z);
    return 1 + 2 * b_value(std::sqrt(a2), s) * b_value(std::sqrt(e2), s) - 2 * dot(xi, eta) -
           eps * eps * (a2 * a2 + e2 * e2 - z2 * z2);
}

cplx nf_symbol(const Vec3& zeta, const Vec3& eta, const PhaseFamily& pf) {
    const CutoffParams p = pf.cutoff();
    Vec3 xi = add(zeta, eta);
    double rz = norm3(zeta), re = norm3(eta), rx = norm3(xi);
    double w = chi_tilde_low(rz, p);
    if (w == 0) return 0.0;
    w *= chi_tilde_low(re, p);
    if (w == 0) return 0.0;
    w *= chi_tilde_low(rx, p);
    if (w == 0) return 0.0;
    double bx = b_value(rx, pf.symbol());
    // <xi> / (2 i b) = -i <xi> / (2 b)
    return cplx(0, -w * omega(rx, pf.variant) / (2 * bx));
}

cplx nf_divided(int j, int k, int power, const Vec3& zeta, const Vec3& eta, const PhaseFamily& pf) {
    cplx m = nf_symbol(zeta, eta, pf);
    if (m == cplx(0)) return 0.0;
    double ph = phase_value(j, k, zeta, eta, pf);
    return m / std::pow(ph, power);
}

PhaseScanReport reciprocal_phase_bound_scan(const PhaseFamily& pf, int n0, int levels) {
    if (pf.variant != Variant::electron) throw std::invalid_argument("phase scan: electron variant only");
    if (n0 < 3 || levels < 1) throw std::invalid_argument("phase scan: need n0 >= 3 and levels >= 1");
    const CutoffParams cp = pf.cutoff();
    validate(cp);
    const double Rt = tilde_support_radius(cp);
    const DispersionSymbol s = pf.symbol();
    if (radicand(Rt * 2, s) <= 0) throw std::domain_error("phase scan: overdamped modes inside the support");

    PhaseScanReport rep;
    rep.epsilon = pf.epsilon;
    rep.kappa0 = pf.kappa0;
    rep.a_bound = 1 - 32 * pf.kappa0 * pf.kappa0;
    int n = n0;
    for (int lev = 0; lev < levels; ++lev, n = 2 * n - 1) {
        PhaseScanLevel L;
        L.n = n;
        L.min_phi11 = L.min_A = INFINITY;
        const double h = Rt / (n - 1);
        // b on the radial grid is reused across the inner loops
        std::vector<double> brad(n);
        for (int i = 0; i < n; ++i) brad[i] = b_value(h * i, s);
        for (int i = 0; i < n; ++i) {
            const double r1 = h * i, b1 = brad[i];
            for (int m = 0; m < n; ++m) {
                const double r2 = h * m, b2 = brad[m];
                for (int q = 0; q < n; ++q) {
                    const double c = -1 + 2.0 * q / (n - 1);
                    double z2 = r1 * r1 + r2 * r2 + 2 * r1 * r2 * c;
                    double rz = std::sqrt(std::max(z2, 0.0));
                    if (rz > Rt) continue;
                    ++L.points;
                    double bz = b_value(rz, s);
                    double phi = b1 + b2 - bz;
                    double A = (b1 + b2) * (b1 + b2) - bz * bz;
                    double Aexp = 1 + 2 * b1 * b2 - 2 * r1 * r2 * c -
                                  pf.epsilon * pf.epsilon * (r1 * r1 * r1 * r1 + r2 * r2 * r2 * r2 - z2 * z2);
                    L.min_phi11 = std::min(L.min_phi11, phi);
                    L.min_A = std::min(L.min_A, A);
                    double sumb = b1 + b2 + bz;
                    L.identity_err = std::max(L.identity_err, std::abs(A / phi - sumb) / sumb);
                    L.expansion_err = std::max(L.expansion_err, std::abs(A - Aexp) / std::abs(A));
                    double ratio = (1 / phi) / std::min({b1, b2, bz});
                    if (ratio > L.cstar) {
                        L.cstar = ratio;
                        L.cstar_at_r1 = r1;
                        L.cstar_at_r2 = r2;
                        L.cstar_at_cos = c;
                    }
                }
            }
        }
        rep.levels.push_back(L);
    }
    rep.refinement_factor = 1.0;
    for (std::size_t i = 1; i < rep.levels.size(); ++i)
        rep.refinement_factor = std::max(rep.refinement_factor, rep.levels[i].cstar / rep.levels[i - 1].cstar);
    bool ok = true;
    for (const auto& L : rep.levels) ok = ok && L.min_phi11 > 0 && L.min_A >= rep.a_bound && std::isfinite(L.cstar);
    rep.pass = ok && rep.refinement_factor < 1.05;
    return rep;
}

namespace {

// Stencil weights for one central derivative of order <= 2 along up to two axes.
struct Deriv {
    int order = 0;
    int ax[2] = {-1, -1};
};

std::vector<Deriv> derivative_list(int max_order) {
    std::vector<Deriv> out;
    out.push_back({});
    if (max_order >= 1)
        for (int a = 0; a < 4; ++a) {
            Deriv d;
            d.order = 1;
            d.ax[0] = a;
            out.push_back(d);
        }
    if (max_order >= 2)
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
                Deriv d;
                d.order = 2;
                d.ax[0] = a;
                d.ax[1] = b;
                out.push_back(d);
            }
    return out;
}

template <class F>
double central(const F& f, const double* x, const Deriv& d, double h) {
    double y[4] = {x[0], x[1], x[2], x[3]};
    if (d.order == 0) return std::abs(f(y));
    auto at = [&](double da, double db) {
        double z[4] = {x[0], x[1], x[2], x[3]};
        z[d.ax[0]] += da;
        if (d.ax[1] >= 0) z[d.ax[1]] += db;
        return f(z);
    };
    cplx v;
    if (d.order == 1) {
        v = (at(h, 0) - at(-h, 0)) / (2 * h);
    } else if (d.ax[0] == d.ax[1]) {
        double z[4] = {x[0], x[1], x[2], x[3]};
        z[d.ax[0]] += h;
        cplx p = f(z);
        z[d.ax[0]] -= 2 * h;
        cplx m = f(z);
        v = (p - 2.0 * f(y) + m) / (h * h);
    } else {
        v = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
    }
    return std::abs(v);
}

}  // namespace

namespace {

struct PointRatios {
    double phi = 0, phi2 = 0;  // max over (j, k, alpha) of the normalized derivative
    double gap = 0, dmax = 0;  // Richardson bookkeeping
};

// x = (xi1, xi2, eta1, eta2); the symbol is taken at (xi - eta, eta).
PointRatios point_ratios(const double* x, const PhaseFamily& pf, double Rt, const std::vector<Deriv>& derivs) {
    PointRatios out;
    Vec3 xi{x[0], x[1], 0}, eta{x[2], x[3], 0}, zeta{x[0] - x[2], x[1] - x[3], 0};
    if (norm3(eta) > Rt || norm3(zeta) > Rt || norm3(xi) > Rt) return out;
    const double mn = std::min({japan(norm3(xi)), japan(norm3(eta)), japan(norm3(zeta))});
    const double step = 1e-4 * japan(norm3(xi));
    for (int j = 1; j <= 2; ++j)
        for (int k = 1; k <= 2; ++k)
            for (int p = 1; p <= 2; ++p) {
                auto f = [&](const double* y) {
                    Vec3 e{y[2], y[3], 0}, z{y[0] - y[2], y[1] - y[3], 0};
                    return nf_divided(j, k, p, z, e, pf);
                };
                for (const auto& d : derivs) {
                    double v = central(f, x, d, step);
                    if (d.order > 0) {
                        out.gap = std::max(out.gap, std::abs(v - central(f, x, d, 2 * step)));
                        out.dmax = std::max(out.dmax, v);
                    }
                    double r = v / std::pow(mn, p);
                    if (p == 1) out.phi = std::max(out.phi, r);
                    else out.phi2 = std::max(out.phi2, r);
                }
            }
    return out;
}

// Compass search for a local maximum of g starting at x0.
template <class G>
double compass_max(const G& g, double* x0, double step, double min_step) {
    double best = g(x0);
    while (step > min_step) {
        bool moved = false;
        for (int a = 0; a < 4 && !moved; ++a)
            for (double sgn : {1.0, -1.0}) {
                double y[4] = {x0[0], x0[1], x0[2], x0[3]};
                y[a] += sgn * step;
                double v = g(y);
                if (v > best) {
                    best = v;
                    std::copy(y, y + 4, x0);
                    moved = true;
                    break;
                }
            }
        if (!moved) step *= 0.5;
    }
    return best;
}

}  // namespace

DerivativeScanReport symbol_derivative_scan(const PhaseFamily& pf, int n0, int levels, int max_order,
                                            double stable_factor) {
    if (max_order < 0 || max_order > 2) throw std::invalid_argument("derivative scan: orders 0..2 only");
    if (n0 < 3 || levels < 1) throw std::invalid_argument("derivative scan: need n0 >= 3 and levels >= 1");
    const CutoffParams cp = pf.cutoff();
    validate(cp);
    const double Rt = tilde_support_radius(cp);
    const auto derivs = derivative_list(max_order);
    constexpr int kStarts = 8;

    DerivativeScanReport rep;
    rep.epsilon = pf.epsilon;
    rep.kappa0 = pf.kappa0;
    rep.max_order = max_order;
    int n = n0;
    for (int lev = 0; lev < levels; ++lev, n = 2 * n - 1) {
        DerivativeScanLevel L;
        L.n = n;
        const double h = 2 * Rt / (n - 1);
        const long total = static_cast<long>(n) * n * n * n;
        auto coords = [&](long idx, double* x) {
            for (int a = 3; a >= 0; --a) {
                x[a] = -Rt + h * static_cast<double>(idx % n);
                idx /= n;
            }
        };
        std::vector<PointRatios> vals(total);
#pragma omp parallel for schedule(dynamic)
        for (long idx = 0; idx < total; ++idx) {
            double x[4];
            coords(idx, x);
            vals[idx] = point_ratios(x, pf, Rt, derivs);
        }
        double gap = 0, dmax = 0;
        for (const auto& v : vals) {
            gap = std::max(gap, v.gap);
            dmax = std::max(dmax, v.dmax);
            L.ratio_phi = std::max(L.ratio_phi, v.phi);
            L.ratio_phi2 = std::max(L.ratio_phi2, v.phi2);
        }
        // polish the largest grid values; the maxima sit inside the narrow cutoff rolloff
        for (int which = 0; which < 2; ++which) {
            std::vector<long> order(total);
            for (long i = 0; i < total; ++i) order[i] = i;
            auto key = [&](long i) { return which == 0 ? vals[i].phi : vals[i].phi2; };
            int K = static_cast<int>(std::min<long>(kStarts, total));
            std::partial_sort(order.begin(), order.begin() + K, order.end(),
                              [&](long a, long b) { return key(a) > key(b); });
            for (int s = 0; s < K; ++s) {
                double x[4];
                coords(order[s], x);
                auto g = [&](const double* y) {
                    PointRatios pr = point_ratios(y, pf, Rt, derivs);
                    gap = std::max(gap, pr.gap);
                    dmax = std::max(dmax, pr.dmax);
                    return which == 0 ? pr.phi : pr.phi2;
                };
                double v = compass_max(g, x, 0.5 * h, 1e-3 * h);
                if (which == 0) L.ratio_phi = std::max(L.ratio_phi, v);
                else L.ratio_phi2 = std::max(L.ratio_phi2, v);
            }
        }
        L.max_richardson_gap = dmax > 0 ? gap / dmax : 0;
        rep.levels.push_back(L);
    }
    rep.refinement_factor = 1.0;
    for (std::size_t i = 1; i < rep.levels.size(); ++i) {
        const auto &a = rep.levels[i - 1], &b = rep.levels[i];
        rep.refinement_factor = std::max({rep.refinement_factor, b.ratio_phi / a.ratio_phi, b.ratio_phi2 / a.ratio_phi2});
    }
    bool ok = true;
    for (const auto& L : rep.levels) {
        if (!std::isfinite(L.ratio_phi) || !std::isfinite(L.ratio_phi2)) ok = false;
        if (L.max_richardson_gap > 1e-3) {
            ok = false;
            rep.flags.push_back("finite-difference step too large for the cutoff rolloff at n=" + std::to_string(L.n));
        }
    }
    rep.pass = ok && rep.refinement_factor < stable_factor;
    return rep;
}

}  // namespace nsplab
