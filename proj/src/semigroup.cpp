#include "nsplab/semigroup.hpp"

#include <cmath>
#include <stdexcept>

namespace nsplab {

const char* to_string(Variant v) { return v == Variant::electron ? "electron" : "ion"; }

Variant variant_from_string(const std::string& s) {
    if (s == "electron") return Variant::electron;
    if (s == "ion") return Variant::ion;
    throw std::invalid_argument("unknown variant '" + s + "' (expected electron or ion)");
}

double omega(double r, Variant v) {
    if (v == Variant::electron) return std::sqrt(1 + r * r);
    return r * std::sqrt((2 + r * r) / (1 + r * r));
}

namespace {

// g = b^2 and its first three radial derivatives.
struct G4 {
    double g, g1, g2, g3;
};

G4 g_derivs(double r, const DispersionSymbol& s) {
    double e2 = s.epsilon * s.epsilon, r2 = r * r;
    G4 out{};
    if (s.variant == Variant::electron) {
        out.g = 1 + r2 - e2 * r2 * r2;
        out.g1 = 2 * r - 4 * e2 * r2 * r;
        out.g2 = 2 - 12 * e2 * r2;
        out.g3 = -24 * e2 * r;
    } else {
        double q = 1 + r2;
        out.g = r2 * (2 + r2) / q - e2 * r2 * r2;
        out.g1 = 2 * r + 2 * r / (q * q) - 4 * e2 * r2 * r;
        out.g2 = 2 + 2 / (q * q) - 8 * r2 / (q * q * q) - 12 * e2 * r2;
        out.g3 = -24 * r / (q * q * q) + 48 * r2 * r / (q * q * q * q) - 24 * e2 * r;
    }
    return out;
}

// Ion b near the origin, where the g-based formulas cancel:
// b = sqrt2 (r - a/2 r^3 + (1/4 - a^2/8) r^5), a = (1+eps^2)/2.
constexpr double kIonSeriesR = 1e-3;

double ion_series(double r, double eps, int k) {
    const double a = 0.5 * (1 + eps * eps), c3 = -a / 2, c5 = 0.25 - a * a / 8;
    const double s2 = std::sqrt(2.0);
    switch (k) {
        case 1: return s2 * (1 + 3 * c3 * r * r + 5 * c5 * r * r * r * r);
        case 2: return s2 * (6 * c3 * r + 20 * c5 * r * r * r);
        default: return s2 * (6 * c3 + 60 * c5 * r * r);
    }
}

bool use_ion_series(double r, const DispersionSymbol& s) {
    return s.variant == Variant::ion && std::abs(r) < kIonSeriesR;
}

}  // namespace

double radicand(double r, const DispersionSymbol& s) {
    double w = omega(r, s.variant), a = s.epsilon * r * r;
    return (w - a) * (w + a);
}

double b_value(double r, const DispersionSymbol& s) {
    double d = radicand(r, s);
    if (d < 0) throw std::domain_error("b_value: negative radicand (overdamped mode)");
    return std::sqrt(d);
}

double tilde_b_value(double r, const DispersionSymbol& s) {
    double d = radicand(r, s);
    if (d > 0) throw std::domain_error("tilde_b_value: positive radicand (oscillatory mode)");
    return std::sqrt(-d);
}

double b_prime(double r, const DispersionSymbol& s) {
    if (use_ion_series(r, s)) return ion_series(r, s.epsilon, 1);
    G4 g = g_derivs(r, s);
    if (g.g <= 0) throw std::domain_error("b_prime: outside oscillatory regime");
    return g.g1 / (2 * std::sqrt(g.g));
}

double b_second(double r, const DispersionSymbol& s) {
    if (use_ion_series(r, s)) return ion_series(r, s.epsilon, 2);
    G4 g = g_derivs(r, s);
    if (g.g <= 0) throw std::domain_error("b_second: outside oscillatory regime");
    double sg = std::sqrt(g.g);
    return g.g2 / (2 * sg) - g.g1 * g.g1 / (4 * g.g * sg);
}

double b_third(double r, const DispersionSymbol& s) {
    if (use_ion_series(r, s)) return ion_series(r, s.epsilon, 3);
    G4 g = g_derivs(r, s);
    if (g.g <= 0) throw std::domain_error("b_third: outside oscillatory regime");
    double sg = std::sqrt(g.g);
    return g.g3 / (2 * sg) - 3 * g.g1 * g.g2 / (4 * g.g * sg) +
           3 * g.g1 * g.g1 * g.g1 / (8 * g.g * g.g * sg);
}

EigenPair eigenvalues(double r, const DispersionSymbol& s) {
    double a = s.epsilon * r * r;
    double d = radicand(r, s);
    EigenPair e;
    if (d >= 0) {
        double b = std::sqrt(d);
        e.plus = cplx(-a, b);
        e.minus = cplx(-a, -b);
    } else {
        double bt = std::sqrt(-d), w = omega(r, s.variant);
        e.overdamped = true;
        e.plus = cplx(-a - bt, 0);
        e.minus = cplx(-(w * w) / (a + bt), 0);  // -a + bt without cancellation
    }
    return e;
}

std::array<double, 4> a_matrix(double r, const DispersionSymbol& s) {
    double w = omega(r, s.variant);
    return {0, w, -w, 2 * s.epsilon * r * r};
}

std::array<double, 4> green_matrix(double t, double r, const DispersionSymbol& s) {
    if (t < 0) throw std::invalid_argument("green_matrix: t must be >= 0");
    const double w = omega(r, s.variant), a = s.epsilon * r * r;
    const double d = radicand(r, s);
    const double z = d * t * t;
    double eC, eS, g1, g3;  // e^{-at} C and e^{-at} S
    if (std::abs(z) < kCrossingZ) {
        double f = 1 - z / 6 * (1 - z / 20 * (1 - z / 42));
        double g = 1 - z / 2 * (1 - z / 12 * (1 - z / 30));
        double damp = std::exp(-a * t);
        eC = damp * g;
        eS = damp * t * f;
        g1 = eC + a * eS;
        g3 = eC - a * eS;
    } else if (d > 0) {
        double b = std::sqrt(d), damp = std::exp(-a * t);
        eC = damp * std::cos(b * t);
        eS = damp * std::sin(b * t) / b;
        g1 = eC + a * eS;
        g3 = eC - a * eS;
    } else {
        // Overdamped: slow and fast exponentials kept apart so nothing overflows
        // and the a - bt difference is never formed directly.
        double bt = std::sqrt(-d);
        double fast = a + bt, slow = w * w / fast;
        double em = std::exp(-slow * t), ep = std::exp(-fast * t);
        eC = 0.5 * (em + ep);
        eS = -em * std::expm1(-2 * bt * t) / (2 * bt);
        g1 = (em * fast - ep * slow) / (2 * bt);
        g3 = (ep * fast - em * slow) / (2 * bt);
        if (bt * t < 1) {
            g1 = eC + a * eS;
            g3 = eC - a * eS;
        }
    }
    double g2 = w * eS;
    return {g1, -g2, g2, g3};
}

SpectralField apply_semigroup(double t, const SpectralField& V, const DispersionSymbol& s) {
    if (V.ncomp != 2) throw std::invalid_argument("apply_semigroup: expects (h, c)");
    SpectralField out(V.grid, 2);
    for (std::size_t i = 0; i < V.npoints(); ++i) {
        auto G = green_matrix(t, norm3(V.grid.xi(i)), s);
        cplx h = V.comp(0)[i], c = V.comp(1)[i];
        out.comp(0)[i] = G[0] * h + G[1] * c;
        out.comp(1)[i] = G[2] * h + G[3] * c;
    }
    return out;
}

Mat2 q_matrix(double r, const DispersionSymbol& s) {
    double w = omega(r, s.variant);
    if (w == 0) return {1, 0, 0, 1};
    auto e = eigenvalues(r, s);
    if (e.overdamped) throw std::domain_error("q_matrix: overdamped mode");
    return {1, 1, -e.minus / w, -e.plus / w};
}

Mat2 q_inverse_matrix(double r, const DispersionSymbol& s) {
    double w = omega(r, s.variant);
    if (w == 0) return {1, 0, 0, 1};
    auto e = eigenvalues(r, s);
    if (e.overdamped) throw std::domain_error("q_inverse_matrix: overdamped mode");
    cplx k = 1.0 / (cplx(0, 2) * e.plus.imag());
    return {e.plus * k, w * k, -e.minus * k, -w * k};
}

namespace {

void check_low_support(const SpectralField& F, const CutoffParams& p, const char* what) {
    double out = 0, tot = 0;
    for (std::size_t i = 0; i < F.npoints(); ++i) {
        double m = std::norm(F.comp(0)[i]) + std::norm(F.comp(1)[i]);
        tot += m;
        if (chi_low(norm3(F.grid.xi(i)), p) == 0) out += m;
    }
    if (out > 1e-24 * tot)
        throw std::domain_error(std::string(what) + ": field has energy outside the low-frequency cutoff");
}

SpectralField apply_q(const SpectralField& F, const DispersionSymbol& s, const CutoffParams& p,
                      bool inverse) {
    if (F.ncomp != 2) throw std::invalid_argument("diagonalizer expects a 2-component field");
    check_low_support(F, p, inverse ? "q_transform" : "q_inverse");
    SpectralField out(F.grid, 2);
    for (std::size_t i = 0; i < F.npoints(); ++i) {
        cplx x0 = F.comp(0)[i], x1 = F.comp(1)[i];
        if (x0 == cplx(0, 0) && x1 == cplx(0, 0)) continue;
        double r = norm3(F.grid.xi(i));
        Mat2 m = inverse ? q_inverse_matrix(r, s) : q_matrix(r, s);
        out.comp(0)[i] = m[0] * x0 + m[1] * x1;
        out.comp(1)[i] = m[2] * x0 + m[3] * x1;
    }
    return out;
}

}  // namespace

SpectralField q_transform(const SpectralField& V, const DispersionSymbol& s, const CutoffParams& p) {
    return apply_q(V, s, p, true);
}

SpectralField q_inverse(const SpectralField& R, const DispersionSymbol& s, const CutoffParams& p) {
    return apply_q(R, s, p, false);
}

SpectralField diagonal_flow(double t, const SpectralField& R, const DispersionSymbol& s) {
    SpectralField out(R.grid, 2);
    for (std::size_t i = 0; i < R.npoints(); ++i) {
        double r = norm3(R.grid.xi(i));
        auto e = eigenvalues(r, s);
        if (s.variant == Variant::ion && r == 0) {
            out.comp(0)[i] = R.comp(0)[i];
            out.comp(1)[i] = R.comp(1)[i];
            continue;
        }
        out.comp(0)[i] = std::exp(e.minus * t) * R.comp(0)[i];
        out.comp(1)[i] = std::exp(e.plus * t) * R.comp(1)[i];
    }
    return out;
}

DampingReport verify_high_freq_damping(const std::vector<double>& eps_grid,
                                       const std::vector<double>& t_grid,
                                       const std::vector<double>& r_grid, double kappa0, Variant v,
                                       double bound) {
    DampingReport rep;
    rep.c0 = kappa0 / 4;
    rep.bound = bound;
    rep.measured_rate = INFINITY;
    for (double eps : eps_grid) {
        DispersionSymbol s{v, eps};
        CutoffParams p{eps, kappa0};
        validate(p);
        double sup_eps = 0;
        for (double r : r_grid) {
            double hi = chi_high(r, p);
            if (hi > 0) {
                auto e = eigenvalues(r, s);
                rep.measured_rate = std::min(rep.measured_rate, -std::max(e.plus.real(), e.minus.real()));
            }
            for (double t : t_grid) {
                auto G = green_matrix(t, r, s);
                double gmax = std::max({std::abs(G[0]), std::abs(G[2]), std::abs(G[3])});
                rep.sup_green = std::max(rep.sup_green, gmax);
                if (hi == 0) continue;
                double w = hi * gmax * std::exp(rep.c0 * t);
                if (w > sup_eps) sup_eps = w;
                if (w > rep.sup_weighted) {
                    rep.sup_weighted = w;
                    rep.worst_eps = eps;
                    rep.worst_t = t;
                    rep.worst_r = r;
                }
            }
        }
        rep.per_eps_sup.push_back(sup_eps);
    }
    rep.pass = std::isfinite(rep.sup_weighted) && rep.sup_weighted <= bound;
    return rep;
}

double heat_smoothing_sup(double eps, double kappa0, double t, int k, const std::vector<double>& r_grid) {
    CutoffParams p{eps, kappa0};
    double sup = 0;
    for (double r : r_grid) {
        double x = eps * r * r;
        double v = std::exp(-t * x) * std::pow(x, k) * chi_low(r, p) * std::pow(1 + t, k);
        sup = std::max(sup, v);
    }
    return sup;
}

}  // namespace nsplab
