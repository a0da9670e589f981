#include "nsplab/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nsplab {

namespace {
const cplx I(0, 1);

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
}  // namespace

SpectralField apply_multiplier(const ScalarSymbol& m, const SpectralField& f) {
    SpectralField out(f.grid, f.ncomp);
    const std::size_t N = f.npoints();
    for (std::size_t i = 0; i < N; ++i) {
        Vec3 xi = f.grid.xi(i);
        cplx s = m(xi);
        if (!finite(s)) {
            bool live = f.grid.in_mask(i);
            for (int a = 0; a < f.ncomp && !live; ++a) live = f.comp(a)[i] != cplx(0, 0);
            if (live)
                throw std::domain_error("apply_multiplier: non-finite symbol at lattice point " +
                                        std::to_string(i));
            continue;
        }
        for (int a = 0; a < f.ncomp; ++a) out.comp(a)[i] = s * f.comp(a)[i];
    }
    return out;
}

SpectralField apply_multiplier(const MatrixSymbol& m, const SpectralField& f) {
    if (f.ncomp != 2) throw std::invalid_argument("matrix symbol needs a 2-component field");
    SpectralField out(f.grid, 2);
    const std::size_t N = f.npoints();
    for (std::size_t i = 0; i < N; ++i) {
        Mat2 s = m(f.grid.xi(i));
        bool ok = true;
        for (auto z : s) ok = ok && finite(z);
        cplx x0 = f.comp(0)[i], x1 = f.comp(1)[i];
        if (!ok) {
            if (f.grid.in_mask(i) || x0 != cplx(0, 0) || x1 != cplx(0, 0))
                throw std::domain_error("apply_multiplier: non-finite matrix symbol at lattice point " +
                                        std::to_string(i));
            continue;
        }
        out.comp(0)[i] = s[0] * x0 + s[1] * x1;
        out.comp(1)[i] = s[2] * x0 + s[3] * x1;
    }
    return out;
}

SpectralField apply_radial(const std::function<double(double)>& m, const SpectralField& f) {
    return apply_multiplier([&](const Vec3& xi) { return cplx(m(norm3(xi)), 0); }, f);
}

std::pair<SpectralField, SpectralField> low_high_split(const SpectralField& f,
                                                       const CutoffParams& p) {
    validate(p);
    SpectralField lo = apply_radial([&](double r) { return chi_low(r, p); }, f);
    SpectralField hi = f;
    hi -= lo;
    return {lo, hi};
}

SpectralField littlewood_paley_block(const SpectralField& f, int j) {
    if (j < 0) throw std::invalid_argument("littlewood_paley_block: j must be >= 0");
    return apply_radial([j](double r) { return lp_symbol(j, r); }, f);
}

int lp_max_block(const Grid& g) {
    double rmax = g.dxi() * (g.n / 2) * std::sqrt(static_cast<double>(g.dim));
    int j = 0;
    while (std::ldexp(1.0, j - 1) <= rmax) ++j;  // block j lives on |xi| >= 2^{j-1}
    return j;
}

double lp_norm(const SpectralField& f, double p) {
    if (!(p >= 1)) throw std::invalid_argument("lp_norm: p must be >= 1");
    PhysicalField x = inverse_transform(f);
    const std::size_t N = f.npoints();
    const double dV = f.grid.volume() / static_cast<double>(N);
    double acc = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double m2 = 0;
        for (int a = 0; a < f.ncomp; ++a) m2 += std::norm(x.values[a * N + i]);
        double m = std::sqrt(m2);
        if (std::isinf(p))
            acc = std::max(acc, m);
        else
            acc += std::pow(m, p) * dV;
    }
    return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

static double weighted_l2(const SpectralField& f, const std::function<double(double)>& w2) {
    const std::size_t N = f.npoints();
    double acc = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double m2 = 0;
        for (int a = 0; a < f.ncomp; ++a) m2 += std::norm(f.comp(a)[i]);
        if (m2 == 0) continue;
        acc += w2(norm3(f.grid.xi(i))) * m2;
    }
    return std::sqrt(acc * f.grid.volume());
}

double hs_norm(const SpectralField& f, double s) {
    return weighted_l2(f, [s](double r) { return std::pow(1 + r * r, s); });
}

double hdot_norm(const SpectralField& f, double s) {
    if (s < 0) return hdot_neg_norm(f, -s);
    return weighted_l2(f, [s](double r) { return r == 0 ? (s == 0 ? 1.0 : 0.0) : std::pow(r, 2 * s); });
}

double hdot_neg_norm(const SpectralField& f, double s) {
    require_mean_zero(f, "negative Sobolev norm");
    return weighted_l2(f, [s](double r) { return r == 0 ? 0.0 : std::pow(r, -2 * s); });
}

double wsp_norm(const SpectralField& f, double s, double p) {
    SpectralField g = apply_radial([s](double r) { return std::pow(1 + r * r, s / 2); }, f);
    return lp_norm(g, p);
}

double besov_norm(const SpectralField& f, double s, double p, double r) {
    if (!(r >= 1)) throw std::invalid_argument("besov_norm: r must be >= 1");
    int J = lp_max_block(f.grid);
    double acc = 0;
    for (int j = 0; j <= J; ++j) {
        double v = std::pow(2.0, j * s) * lp_norm(littlewood_paley_block(f, j), p);
        if (std::isinf(r))
            acc = std::max(acc, v);
        else
            acc += std::pow(v, r);
    }
    return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

double norm(const SpectralField& f, const NormSpec& spec) {
    switch (spec.kind) {
        case NormKind::Lp: return lp_norm(f, spec.p);
        case NormKind::Hs: return hs_norm(f, spec.s);
        case NormKind::Wsp: return wsp_norm(f, spec.s, spec.p);
        case NormKind::HdotNeg: return hdot_neg_norm(f, spec.s);
        case NormKind::Hdot: return hdot_norm(f, spec.s);
        case NormKind::Besov: return besov_norm(f, spec.s, spec.p, spec.r);
    }
    throw std::invalid_argument("unknown norm kind");
}

double inner(const SpectralField& f, const SpectralField& g) {
    if (!(f.grid == g.grid) || f.ncomp != g.ncomp)
        throw std::invalid_argument("inner: shape mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        acc += (f.coeffs[i] * std::conj(g.coeffs[i])).real();
    return acc * f.grid.volume();
}

double mean_coefficient(const SpectralField& f) {
    double m = 0;
    for (int a = 0; a < f.ncomp; ++a) m = std::max(m, std::abs(f.comp(a)[0]));
    return m;
}

void require_mean_zero(const SpectralField& f, const char* what, double tol) {
    double scale = 0;
    for (auto c : f.coeffs) scale += std::norm(c);
    scale = std::sqrt(scale);
    if (mean_coefficient(f) > tol * std::max(scale, std::numeric_limits<double>::min()))
        throw std::domain_error(std::string(what) + ": field has nonzero mean (neutrality violated)");
}

std::pair<SpectralField, SpectralField> leray_project(const SpectralField& u) {
    if (u.ncomp != u.grid.dim) throw std::invalid_argument("leray_project: needs a vector field");
    SpectralField P = u, Q(u.grid, u.ncomp);
    const int d = u.grid.dim;
    for (std::size_t i = 0; i < u.npoints(); ++i) {
        Vec3 xi = u.grid.xi(i);
        double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if (r2 == 0) continue;
        cplx dot = 0;
        for (int a = 0; a < d; ++a) dot += xi[a] * u.comp(a)[i];
        for (int a = 0; a < d; ++a) {
            cplx q = xi[a] * dot / r2;
            Q.comp(a)[i] = q;
            P.comp(a)[i] = u.comp(a)[i] - q;
        }
    }
    return {P, Q};
}

SpectralField riesz(const SpectralField& f) {
    if (f.ncomp != 1) throw std::invalid_argument("riesz: needs a scalar field");
    SpectralField out = SpectralField::vector(f.grid);
    for (std::size_t i = 0; i < f.npoints(); ++i) {
        Vec3 xi = f.grid.xi(i);
        double r = norm3(xi);
        if (r == 0) continue;
        for (int a = 0; a < f.grid.dim; ++a) out.comp(a)[i] = I * (xi[a] / r) * f.comp(0)[i];
    }
    return out;
}

SpectralField riesz_adjoint(const SpectralField& v) {
    if (v.ncomp != v.grid.dim) throw std::invalid_argument("riesz_adjoint: needs a vector field");
    SpectralField out = SpectralField::scalar(v.grid);
    for (std::size_t i = 0; i < v.npoints(); ++i) {
        Vec3 xi = v.grid.xi(i);
        double r = norm3(xi);
        if (r == 0) continue;
        cplx acc = 0;
        for (int a = 0; a < v.grid.dim; ++a) acc += -I * (xi[a] / r) * v.comp(a)[i];
        out.comp(0)[i] = acc;
    }
    return out;
}

SpectralField partial(const SpectralField& f, int axis) {
    return apply_multiplier([axis](const Vec3& xi) { return I * xi[axis]; }, f);
}

SpectralField gradient(const SpectralField& f) {
    if (f.ncomp != 1) throw std::invalid_argument("gradient: needs a scalar field");
    SpectralField out = SpectralField::vector(f.grid);
    for (std::size_t i = 0; i < f.npoints(); ++i) {
        Vec3 xi = f.grid.xi(i);
        for (int a = 0; a < f.grid.dim; ++a) out.comp(a)[i] = I * xi[a] * f.comp(0)[i];
    }
    return out;
}

SpectralField divergence(const SpectralField& u) {
    if (u.ncomp != u.grid.dim) throw std::invalid_argument("divergence: needs a vector field");
    SpectralField out = SpectralField::scalar(u.grid);
    for (std::size_t i = 0; i < u.npoints(); ++i) {
        Vec3 xi = u.grid.xi(i);
        cplx acc = 0;
        for (int a = 0; a < u.grid.dim; ++a) acc += I * xi[a] * u.comp(a)[i];
        out.comp(0)[i] = acc;
    }
    return out;
}

SpectralField laplacian(const SpectralField& f) {
    return apply_multiplier(
        [](const Vec3& xi) { return cplx(-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0); }, f);
}

SpectralField curl(const SpectralField& u) {
    if (u.ncomp != u.grid.dim) throw std::invalid_argument("curl: needs a vector field");
    const Grid& g = u.grid;
    if (g.dim == 1) return SpectralField::scalar(g);
    if (g.dim == 2) {
        SpectralField w = SpectralField::scalar(g);
        for (std::size_t i = 0; i < u.npoints(); ++i) {
            Vec3 xi = g.xi(i);
            w.comp(0)[i] = I * (xi[0] * u.comp(1)[i] - xi[1] * u.comp(0)[i]);
        }
        return w;
    }
    SpectralField w = SpectralField::vector(g);
    for (std::size_t i = 0; i < u.npoints(); ++i) {
        Vec3 xi = g.xi(i);
        cplx a = u.comp(0)[i], b = u.comp(1)[i], c = u.comp(2)[i];
        w.comp(0)[i] = I * (xi[1] * c - xi[2] * b);
        w.comp(1)[i] = I * (xi[2] * a - xi[0] * c);
        w.comp(2)[i] = I * (xi[0] * b - xi[1] * a);
    }
    return w;
}

}  // namespace nsplab
