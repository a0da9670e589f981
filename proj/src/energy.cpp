#include "nsplab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsplab/spectral.hpp"

namespace nsplab {

std::vector<MultiIndex> multi_indices(int dim, int order) {
    if (dim < 1 || dim > 3 || order < 0) throw std::invalid_argument("multi_indices: bad dimension or order");
    std::vector<MultiIndex> out;
    for (int a = order; a >= 0; --a) {
        if (dim == 1) {
            if (a == order) out.push_back({a, 0, 0});
            continue;
        }
        for (int b = order - a; b >= 0; --b) {
            int c = order - a - b;
            if (dim == 2 && c != 0) continue;
            out.push_back({a, b, c});
        }
    }
    return out;
}

SpectralField derivative(const SpectralField& f, const MultiIndex& alpha) {
    SpectralField out = f;
    for (std::size_t i = 0; i < f.npoints(); ++i) {
        Vec3 xi = f.grid.xi(i);
        cplx m = 1;
        for (int a = 0; a < 3; ++a)
            for (int k = 0; k < alpha[a]; ++k) m *= cplx(0, xi[a]);
        for (int c = 0; c < f.ncomp; ++c) out.comp(c)[i] *= m;
    }
    return out;
}

namespace {

// sum over |alpha| = k of xi^{2 alpha}: the complete homogeneous polynomial in xi_a^2
double h_weight(const Vec3& xi, int dim, int k) {
    double acc = 0;
    for (const auto& a : multi_indices(dim, k)) {
        double m = 1;
        for (int c = 0; c < 3; ++c) m *= std::pow(xi[c] * xi[c], a[c]);
        acc += m;
    }
    return acc;
}

double weighted_sum(const SpectralField& f, const std::vector<double>& w) {
    double acc = 0;
    for (int c = 0; c < f.ncomp; ++c)
        for (std::size_t i = 0; i < f.npoints(); ++i) acc += w[i] * std::norm(f.comp(c)[i]);
    return acc * f.grid.volume();
}

std::vector<double> weights(const Grid& g, int kmin, int kmax) {
    std::vector<double> w(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 xi = g.xi(i);
        for (int k = kmin; k <= kmax; ++k) w[i] += h_weight(xi, g.dim, k);
    }
    return w;
}

// int rho_w |g|^2 with rho_w sampled on the collocation grid
double weighted_physical(const SpectralField& g, const std::vector<double>& rho_w) {
    std::vector<double> p = inverse_real(g);
    const std::size_t N = g.npoints();
    double acc = 0;
    for (int c = 0; c < g.ncomp; ++c)
        for (std::size_t i = 0; i < N; ++i) acc += rho_w[i] * p[c * N + i] * p[c * N + i];
    return acc * g.grid.volume() / static_cast<double>(N);
}

std::vector<double> total_density(const SpectralField& rho, const SpectralField* extra) {
    std::vector<double> r = inverse_real(rho);
    if (extra) {
        std::vector<double> e = inverse_real(*extra);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += e[i];
    }
    for (double& x : r) x += 1;
    return r;
}

// sum_{|alpha| <= N} int w |d^alpha g|^2
double weighted_sobolev(const SpectralField& g, int N, const std::vector<double>& w) {
    double acc = 0;
    for (int k = 0; k <= N; ++k)
        for (const auto& a : multi_indices(g.grid.dim, k)) acc += weighted_physical(derivative(g, a), w);
    return acc;
}

double ratio_or_zero(double num, double den) {
    if (den == 0) return num == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), num);
    return num / den;
}

}  // namespace

double seminorm_sq(const SpectralField& f, int k) { return weighted_sum(f, weights(f.grid, k, k)); }

double sobolev_sq(const SpectralField& f, int N) { return weighted_sum(f, weights(f.grid, 0, N)); }

double w_inf(const SpectralField& f, int m) {
    double acc = 0;
    for (int k = 0; k <= m; ++k)
        for (const auto& a : multi_indices(f.grid.dim, k)) acc += lp_norm(derivative(f, a), INFINITY);
    return acc;
}

double energy_EN(const FluidState& s, int N, bool density_weight) {
    SpectralField gphi = gradient(poisson_solve(s.rho, s.variant));
    double acc = sobolev_sq(s.rho, N) + sobolev_sq(gphi, N);
    if (density_weight) acc += weighted_sobolev(s.u, N, total_density(s.rho, nullptr));
    else acc += sobolev_sq(s.u, N);
    return 0.5 * acc;
}

double state_sobolev_sq(const FluidState& s, int N) {
    return sobolev_sq(s.rho, N) + sobolev_sq(gradient(poisson_solve(s.rho, s.variant)), N) + sobolev_sq(s.u, N);
}

double dissipation_N(const FluidState& s, int N, bool density_weight) {
    double acc = 0;
    for (int a = 0; a < s.grid.dim; ++a) {
        SpectralField da = partial(s.u, a);
        acc += density_weight ? weighted_sobolev(da, N, total_density(s.rho, nullptr)) : sobolev_sq(da, N);
    }
    return s.epsilon * acc;
}

double linear_dissipation(const FluidState& s, int N) {
    double acc = sobolev_sq(divergence(s.u), N);
    for (int a = 0; a < s.grid.dim; ++a) acc += sobolev_sq(partial(s.u, a), N);
    return s.epsilon * acc;
}

std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    if (y.size() != n) throw std::invalid_argument("time_derivative: size mismatch");
    if (n < 5) throw std::invalid_argument("time_derivative: need at least 5 samples");
    const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(t[i] - t.front() - h * static_cast<double>(i)) > 1e-9 * (1 + std::abs(t.back())))
            throw std::invalid_argument("time_derivative: samples must be equispaced");
    std::vector<double> d(n);
    for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (-y[i + 2] + 8 * y[i + 1] - 8 * y[i - 1] + y[i - 2]) / (12 * h);
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h);
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h);
    const std::size_t m = n - 1;
    d[m] = (25 * y[m] - 48 * y[m - 1] + 36 * y[m - 2] - 16 * y[m - 3] + 3 * y[m - 4]) / (12 * h);
    d[m - 1] = (3 * y[m] + 10 * y[m - 1] - 18 * y[m - 2] + 6 * y[m - 3] - y[m - 4]) / (12 * h);
    return d;
}

namespace {

// 2nd-order differences as a coarse-sampling detector
void check_sampling(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& d4) {
    const std::size_t n = t.size();
    const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
    double scale = 0, gap = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double d2 = (y[i + 1] - y[i - 1]) / (2 * h);
        scale = std::max(scale, std::abs(d4[i]));
        gap = std::max(gap, std::abs(d2 - d4[i]));
    }
    if (gap > 0.05 * scale + 1e-300)
        throw std::invalid_argument("energy residual: time sampling too coarse for the derivative (gap " +
                                    std::to_string(gap / std::max(scale, 1e-300)) + ")");
}

}  // namespace

EnergyLedger energy_inequality_residual(const std::vector<double>& t, const std::vector<FluidState>& states, int N,
                                        bool density_weight) {
    if (t.size() != states.size()) throw std::invalid_argument("energy residual: size mismatch");
    EnergyLedger L;
    L.times = t;
    for (const auto& s : states) {
        L.EN.push_back(energy_EN(s, N, density_weight));
        L.dissipation.push_back(dissipation_N(s, N, density_weight));
        L.majorant.push_back((w_inf(s.u, 1) + w_inf(s.rho, 1)) * state_sobolev_sq(s, N));
    }
    L.dEdt = time_derivative(t, L.EN);
    check_sampling(t, L.EN, L.dEdt);
    L.sup_residual = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        double num = L.dEdt[i] + L.dissipation[i];
        double r = L.majorant[i] == 0 && std::abs(num) < 1e-300 ? 0.0 : ratio_or_zero(num, L.majorant[i]);
        L.residual.push_back(r);
        L.sup_residual = std::max(L.sup_residual, r);
    }
    return L;
}

PerturbEnergyReport perturb_energy_report(const std::vector<double>& t, const std::vector<SplitPair>& pairs,
                                          double delta0, const PerturbOptions& opt) {
    if (t.size() != pairs.size() || t.size() < 5) throw std::invalid_argument("perturb energy: need >= 5 samples");
    if (opt.M < 1) throw std::invalid_argument("perturb energy: M must be >= 1");
    PerturbEnergyReport R;
    R.M = opt.M;
    R.C2 = opt.C2;
    R.epsilon = pairs.front().main.epsilon;
    const double eps = R.epsilon;
    R.delta = opt.delta;
    if (R.delta < 0) {
        R.delta = 0;
        for (const auto& p : pairs) R.delta = std::max(R.delta, state_norm(p.main, 3.0, false));
    }
    const int M = opt.M;
    const int dim = pairs.front().main.grid.dim;
    std::vector<double> EM, X, Et;
    R.all_zero = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const FluidState& m = pairs[i].main;
        const FluidState& p = pairs[i].perturb;
        PerturbEnergyPoint pt;
        pt.t = t[i];
        SpectralField psi = poisson_solve(p.rho, p.variant);
        SpectralField gpsi = gradient(psi);
        std::vector<double> rho_tot = total_density(m.rho, &p.rho);
        auto energy = [&](int k) {
            double a = weighted_sobolev(p.u, k, rho_tot) + sobolev_sq(p.rho, k) + sobolev_sq(gpsi, k);
            if (p.variant == Variant::ion) a += sobolev_sq(psi, k);
            return 0.5 * a;
        };
        pt.EM = energy(M);
        pt.E3 = M == 3 ? pt.EM : energy(3);
        SpectralField gn = gradient(p.rho);
        double x = 0;
        for (int k = 0; k <= M - 1; ++k)
            for (const auto& a : multi_indices(dim, k)) x += inner(derivative(gn, a), derivative(p.u, a));
        pt.X = x;
        pt.EM_tilde = pt.EM + 8 * opt.C2 * R.delta * eps * x;
        pt.n_HM = hs_norm(p.rho, M);
        pt.v_HM = hs_norm(p.u, M);
        if (std::abs(x) > pt.n_HM * pt.v_HM * (1 + 1e-12) + 1e-300) R.cauchy_schwarz_ok = false;
        pt.sandwich_precondition = 8 * opt.C2 * R.delta * eps * std::abs(x) <= 0.5 * pt.EM;
        pt.sandwich = 0.5 * pt.EM <= pt.EM_tilde && pt.EM_tilde <= 2 * pt.EM;
        if (pt.sandwich_precondition && !pt.sandwich) R.sandwich_ok = false;
        double gv = 0;
        for (int a = 0; a < dim; ++a) gv += sobolev_sq(partial(p.u, a), M);
        const double nM = sobolev_sq(p.rho, M);
        pt.damping = opt.C7 * eps * (nM + gv);
        pt.perturb_H3 = state_norm(p, 3.0, true);
        R.sup_ratio = std::max(R.sup_ratio, pt.perturb_H3 / (delta0 * eps));
        if (pt.EM != 0) R.all_zero = false;

        const double W = w_inf(m.rho, M + 2) + w_inf(m.u, M + 2);
        const double w34 = std::pow(W, 0.75), w54 = std::pow(W, 1.25);
        pt.lhs1 = 0.5 * eps * gv;  // derivative added below
        pt.maj1 = w34 * pt.EM + (std::sqrt(pt.E3) + eps * hs_norm(m.rho, M)) * (gv + nM) +
                  eps * eps * w54 * (sobolev_sq(m.rho, M) + pt.E3) + pt.E3 * w54;
        double nn = 0, vv = 0;
        for (int k = 0; k <= M - 1; ++k) {
            nn += seminorm_sq(p.rho, k) + seminorm_sq(p.rho, k + 1);
            vv += seminorm_sq(p.u, k + 1) + seminorm_sq(p.u, k + 2);
        }
        pt.lhs2 = 0.5 * nn;
        pt.maj2 = vv + w34 * 2 * pt.EM + eps * pt.E3 * w54;
        pt.lhs20 = pt.damping;
        pt.maj20 = std::pow(1 + t[i], -opt.a) * std::pow(R.delta, 0.75) * pt.EM +
                   std::pow(R.delta, 3) * eps * eps * std::pow(1 + t[i], -opt.b);
        EM.push_back(pt.EM);
        X.push_back(pt.X);
        Et.push_back(pt.EM_tilde);
        R.points.push_back(pt);
    }
    auto dEM = time_derivative(t, EM), dX = time_derivative(t, X), dEt = time_derivative(t, Et);
    auto fit = [](double lhs, double maj) {
        if (lhs <= 0) return 0.0;
        return maj > 0 ? lhs / maj : std::numeric_limits<double>::infinity();
    };
    double integral = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto& pt = R.points[i];
        pt.lhs1 += dEM[i];
        pt.lhs2 += dX[i];
        pt.lhs20 += dEt[i];
        R.C_fit1 = std::max(R.C_fit1, fit(pt.lhs1, pt.maj1));
        R.C_fit2 = std::max(R.C_fit2, fit(pt.lhs2, pt.maj2));
        R.C_fit20 = std::max(R.C_fit20, fit(pt.lhs20, pt.maj20));
        if (i > 0) integral += 0.5 * (t[i] - t[i - 1]) * (R.points[i].damping + R.points[i - 1].damping);
        double den = EM.front() + std::pow(R.delta, 3) * eps * eps;
        if (den > 0) R.gronwall_constant = std::max(R.gronwall_constant, (pt.EM + integral) / den);
    }
    R.damped_integral = integral;
    return R;
}

double interpolation_violation(const SpectralField& f, double s) {
    double l2 = std::sqrt(std::max(inner(f, f), 0.0));
    if (l2 == 0) return 0.0;
    double neg = hdot_neg_norm(f, s), one = hdot_norm(f, 1.0);
    double rhs = std::pow(neg, 1 / (1 + s)) * std::pow(one, s / (1 + s));
    return std::max(0.0, (l2 - rhs) / l2);
}

NegSobolevReport neg_sobolev_track(const std::vector<double>& t, const std::vector<FluidState>& perturb, double s,
                                   double interp_tol) {
    if (!(s > 0 && s < 0.5)) throw std::invalid_argument("neg_sobolev_track: s must lie in (0, 1/2)");
    if (t.size() != perturb.size() || t.empty()) throw std::invalid_argument("neg_sobolev_track: size mismatch");
    NegSobolevReport R;
    R.s = s;
    R.times = t;
    for (const auto& p : perturb) {
        require_mean_zero(p.rho, "neg_sobolev_track (n)");
        require_mean_zero(p.u, "neg_sobolev_track (v)");
        SpectralField gpsi = gradient(poisson_solve(p.rho, p.variant));
        double e = 0;
        for (const SpectralField* f : {&p.rho, static_cast<const SpectralField*>(&gpsi), &p.u}) {
            double v = hdot_neg_norm(*f, s);
            e += v * v;
            R.max_interp_violation = std::max(R.max_interp_violation, interpolation_violation(*f, s));
        }
        R.E.push_back(e);
    }
    R.E0 = R.E.front();
    R.sup = *std::max_element(R.E.begin(), R.E.end());
    R.C_recorded = R.sup > 0 ? std::max(0.0, R.sup - R.E0) / std::sqrt(R.sup) : 0.0;
    R.bounded = std::isfinite(R.sup) && R.sup <= 2 * R.E0 + R.C_recorded;
    R.pass = R.bounded && R.max_interp_violation <= interp_tol;
    return R;
}

DecayEntry decay_report(const std::string& name, const std::vector<double>& t, const std::vector<double>& v,
                        double predicted, double t_min, double t_max, bool torus) {
    DecayEntry e;
    e.name = name;
    e.fit = fit_decay(t, v, t_min, t_max);
    e.predicted = predicted;
    e.delta = e.fit.exponent - predicted;
    e.label = torus ? "qualitative (finite box)" : "whole space";
    return e;
}

double fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& v) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size() && i < v.size(); ++i) {
        if (!(v[i] > 0)) continue;
        double y = std::log(v[i]);
        n += 1;
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
    }
    if (n < 2) throw std::invalid_argument("fit_exponential_rate: need two positive samples");
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

EpsDeltaRReport eps_delta_r_decay_check(const std::vector<double>& t, const std::vector<SpectralField>& V,
                                        const PhaseFamily& pf, double k, double p) {
    if (t.size() != V.size() || t.empty()) throw std::invalid_argument("eps-delta-R check: size mismatch");
    EpsDeltaRReport R;
    R.epsilon = pf.epsilon;
    R.times = t;
    const CutoffParams cp = pf.cutoff();
    const DispersionSymbol sym = pf.symbol();
    const double eps = pf.epsilon;
    const double q = 1.5 * (1 - 2 / p);
    for (std::size_t i = 0; i < t.size(); ++i) {
        SpectralField low = low_high_split(V[i], cp).first;
        if (i == 0) R.norm0 = hs_norm(low, k);
        SpectralField Rv = q_transform(low, sym, cp);
        SpectralField a = apply_radial([eps](double r) { return -eps * r * r; }, Rv);
        SpectralField b = apply_radial([eps](double r) { return eps * eps * r * r * r * r; }, Rv);
        double w1 = (1 + t[i]) * hs_norm(a, k), w2 = std::pow(1 + t[i], q) * hs_norm(b, k);
        R.weighted1.push_back(w1);
        R.weighted2.push_back(w2);
        R.sup1 = std::max(R.sup1, w1);
        R.sup2 = std::max(R.sup2, w2);
    }
    R.finite = std::isfinite(R.sup1) && std::isfinite(R.sup2);
    if (R.norm0 > 0) {
        R.sup1_normalized = R.sup1 / R.norm0;
        R.sup2_normalized = R.sup2 / R.norm0;
    }
    return R;
}

}  // namespace nsplab
