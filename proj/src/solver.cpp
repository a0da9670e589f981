#include "nsplab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nsplab {

FluidState::FluidState(const Grid& g, Variant v, double eps)
    : grid(g), variant(v), epsilon(eps), rho(g, 1), u(g, g.dim) {}

FluidState& FluidState::axpy(double a, const FluidState& o) {
    rho.axpy(a, o.rho);
    u.axpy(a, o.u);
    return *this;
}

SpectralField poisson_solve(const SpectralField& rho, Variant v) {
    if (rho.ncomp != 1) throw std::invalid_argument("poisson_solve: density must be scalar");
    if (v == Variant::electron) require_mean_zero(rho, "poisson_solve (electron neutrality)");
    SpectralField phi = SpectralField::scalar(rho.grid);
    for (std::size_t i = 0; i < rho.npoints(); ++i) {
        Vec3 xi = rho.grid.xi(i);
        double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if (v == Variant::electron) phi.coeffs[i] = r2 > 0 ? -rho.coeffs[i] / r2 : cplx(0);
        else phi.coeffs[i] = -rho.coeffs[i] / (1 + r2);
    }
    return phi;
}

namespace {

struct Phys {
    std::vector<double> v;
    int ncomp;
    std::size_t N;
    double at(int a, std::size_t i) const { return v[a * N + i]; }
};

Phys to_phys(const SpectralField& f) { return {inverse_real(f), f.ncomp, f.npoints()}; }

SpectralField to_spec(const Grid& g, std::vector<double> vals, int ncomp) {
    for (double x : vals)
        if (!std::isfinite(x)) throw std::runtime_error("solver: non-finite value in a nonlinear product");
    SpectralField f = forward_real(g, vals, ncomp);
    dealias(f);
    return f;
}

// eps L u with L = Delta + grad div (mu = 1, lambda = 0), or 2 eps Delta u.
SpectralField viscous(const SpectralField& u, double eps, bool reduction) {
    SpectralField out(u.grid, u.ncomp);
    const int d = u.grid.dim;
    for (std::size_t i = 0; i < u.npoints(); ++i) {
        Vec3 xi = u.grid.xi(i);
        double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        cplx xu = 0;
        for (int a = 0; a < d; ++a) xu += xi[a] * u.comp(a)[i];
        for (int a = 0; a < d; ++a)
            out.comp(a)[i] = reduction ? -2 * eps * r2 * u.comp(a)[i] : eps * (-r2 * u.comp(a)[i] - xi[a] * xu);
    }
    return out;
}

// (u . grad) w for vector w, pseudo-spectral.
std::vector<double> advect(const Phys& u, const SpectralField& w) {
    const int d = w.grid.dim;
    const std::size_t N = w.npoints();
    std::vector<double> out(d * N, 0.0);
    for (int b = 0; b < d; ++b) {
        Phys dw = to_phys(partial(w, b));
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < N; ++i) out[a * N + i] += u.at(b, i) * dw.at(a, i);
    }
    return out;
}

void check_floor(const Phys& rho_total_minus_one, double floor, const char* what) {
    for (double x : rho_total_minus_one.v)
        if (1 + x < floor)
            throw std::runtime_error(std::string(what) + ": density fell below the floor " + std::to_string(floor));
}

FluidState zero_like(const FluidState& s) {
    FluidState z(s.grid, s.variant, s.epsilon);
    z.time = s.time;
    return z;
}

FluidState linear_tendency(const FluidState& s, const RhsOptions& o) {
    FluidState t = zero_like(s);
    if (o.coupling) {
        t.rho = -1.0 * divergence(s.u);
        SpectralField phi = poisson_solve(s.rho, s.variant);
        t.u = gradient(phi - s.rho);
    }
    if (o.viscous) t.u += viscous(s.u, s.epsilon, o.irrotational_reduction);
    return t;
}

// -div(rho u), -(u.grad)u, plus the (1/(1+rho) - 1) eps L u correction when full.
FluidState nonlinear_main(const FluidState& s, const RhsOptions& o, bool full) {
    FluidState t = zero_like(s);
    const Grid& g = s.grid;
    const std::size_t N = g.size();
    const int d = g.dim;
    Phys rho = to_phys(s.rho), u = to_phys(s.u);
    check_floor(rho, o.density_floor, full ? "full system" : "main system");
    if (!o.nonlinear) return t;
    std::vector<double> flux(d * N);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < N; ++i) flux[a * N + i] = rho.at(0, i) * u.at(a, i);
    t.rho = -1.0 * divergence(to_spec(g, flux, d));
    std::vector<double> adv = advect(u, s.u);
    for (double& x : adv) x = -x;
    if (full && o.viscous) {
        Phys lu = to_phys(viscous(s.u, s.epsilon, false));
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < N; ++i) adv[a * N + i] += (1 / (1 + rho.at(0, i)) - 1) * lu.at(a, i);
    }
    t.u = to_spec(g, adv, d);
    return t;
}

// Perturbation remainder given the main state m.
FluidState nonlinear_perturb(const FluidState& p, const FluidState& m, const RhsOptions& o) {
    FluidState t = zero_like(p);
    const Grid& g = p.grid;
    const std::size_t N = g.size();
    const int d = g.dim;
    Phys rho = to_phys(m.rho), u = to_phys(m.u), n = to_phys(p.rho), v = to_phys(p.u);
    {
        Phys tot{rho.v, 1, N};
        for (std::size_t i = 0; i < N; ++i) tot.v[i] += n.v[i];
        check_floor(tot, o.density_floor, "perturbation system");
    }
    if (!o.nonlinear) return t;
    // n_t + div(rho v + n u + n v) = -div v
    std::vector<double> flux(d * N);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < N; ++i)
            flux[a * N + i] = rho.at(0, i) * v.at(a, i) + n.at(0, i) * (u.at(a, i) + v.at(a, i));
    t.rho = -1.0 * divergence(to_spec(g, flux, d));
    // -(u.grad v) - (v.grad)(u + v) + eps (1/(1+rho+n) - 1)(L v + L u)
    std::vector<double> acc = advect(u, p.u);
    SpectralField uv = m.u + p.u;
    std::vector<double> a2 = advect(v, uv);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = -(acc[i] + a2[i]);
    if (o.viscous) {
        Phys lw = to_phys(viscous(uv, p.epsilon, false));
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < N; ++i)
                acc[a * N + i] += (1 / (1 + rho.at(0, i) + n.at(0, i)) - 1) * lw.at(a, i);
    }
    t.u = to_spec(g, acc, d);
    return t;
}

FluidState sum(FluidState a, const FluidState& b) {
    a.axpy(1.0, b);
    return a;
}

}  // namespace

FluidState rhs_full(const FluidState& s, const RhsOptions& o) {
    RhsOptions oo = o;
    oo.irrotational_reduction = false;
    return sum(linear_tendency(s, oo), nonlinear_main(s, oo, true));
}

FluidState rhs_main(const FluidState& s, const RhsOptions& o) {
    return sum(linear_tendency(s, o), nonlinear_main(s, o, false));
}

FluidState rhs_perturb(const FluidState& p, const FluidState& main, const RhsOptions& o) {
    RhsOptions oo = o;
    oo.irrotational_reduction = false;
    return sum(linear_tendency(p, oo), nonlinear_perturb(p, main, oo));
}

FluidState linear_propagate(double tau, const FluidState& s, const RhsOptions& o) {
    FluidState out = s;
    out.time = s.time + tau;
    const Grid& g = s.grid;
    const int d = g.dim;
    const double eps = o.viscous ? s.epsilon : 0.0;
    const double nu_sol = o.irrotational_reduction ? 2 * eps : eps;
    const DispersionSymbol sym{s.variant, eps};
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 xi = g.xi(i);
        double r = norm3(xi);
        if (r == 0) continue;
        Vec3 e{xi[0] / r, xi[1] / r, xi[2] / r};
        cplx proj = 0;
        for (int a = 0; a < d; ++a) proj += e[a] * s.u.comp(a)[i];
        const cplx c0 = cplx(0, 1) * proj;
        cplx h = s.rho.coeffs[i], c = c0;
        if (o.coupling) {
            const double w = omega(r, s.variant) / r;
            auto G = green_matrix(tau, r, sym);
            cplx h0 = w * h;
            h = (G[0] * h0 + G[1] * c0) / w;
            c = G[2] * h0 + G[3] * c0;
        } else {
            c = std::exp(-2 * eps * r * r * tau) * c0;
        }
        const double fs = std::exp(-nu_sol * r * r * tau);
        out.rho.coeffs[i] = h;
        for (int a = 0; a < d; ++a) {
            cplx sol = s.u.comp(a)[i] - e[a] * proj;
            out.u.comp(a)[i] = fs * sol - cplx(0, 1) * e[a] * c;
        }
    }
    return out;
}

void check_cfl(const FluidState& s, double dt, const StepOptions& o) {
    if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
    double umax = 0;
    for (double x : inverse_real(s.u)) umax = std::max(umax, std::abs(x));
    const double dx = s.grid.dx();
    double lim = std::min({umax > 0 ? dx / umax : INFINITY, dx, 1.0});
    if (dt > o.cfl * lim)
        throw std::runtime_error("step: CFL violation, dt = " + std::to_string(dt) + " > " +
                                 std::to_string(o.cfl * lim));
}

namespace {

using Sys = std::vector<FluidState>;
using NonlinearFn = std::function<Sys(const Sys&)>;

Sys propagate_all(double tau, const Sys& y, const RhsOptions& o) {
    Sys out;
    for (const auto& s : y) out.push_back(linear_propagate(tau, s, o));
    return out;
}

Sys combine(const Sys& a, double c, const Sys& b) {
    Sys out = a;
    for (std::size_t i = 0; i < a.size(); ++i) out[i].axpy(c, b[i]);
    return out;
}

// Lawson RK4 with E(tau) the exact linear propagator.
Sys lawson_rk4(const Sys& y, double dt, const NonlinearFn& N, const RhsOptions& o) {
    const double h2 = dt / 2;
    Sys k1 = N(y);
    Sys Ey = propagate_all(h2, y, o);
    Sys y2 = propagate_all(h2, combine(y, h2, k1), o);
    for (auto& s : y2) s.time = y.front().time + h2;
    Sys k2 = N(y2);
    Sys y3 = combine(Ey, h2, k2);
    for (auto& s : y3) s.time = y.front().time + h2;
    Sys k3 = N(y3);
    Sys y4 = combine(propagate_all(dt, y, o), dt, propagate_all(h2, k3, o));
    Sys k4 = N(y4);
    // E(h) y + h/6 [E(h) k1 + 2 E(h/2)(k2 + k3) + k4]
    Sys acc = propagate_all(dt, combine(y, dt / 6, k1), o);
    Sys mid = propagate_all(h2, combine(k2, 1.0, k3), o);
    acc = combine(acc, dt / 3, mid);
    acc = combine(acc, dt / 6, k4);
    for (auto& s : acc) s.time = y.front().time + dt;
    return acc;
}

}  // namespace

FluidState step_full(const FluidState& s, double dt, const StepOptions& o) {
    check_cfl(s, dt, o);
    RhsOptions ro = o.rhs;
    ro.irrotational_reduction = false;
    NonlinearFn N = [&](const Sys& y) { return Sys{nonlinear_main(y[0], ro, true)}; };
    return lawson_rk4({s}, dt, N, ro)[0];
}

FluidState step_main(const FluidState& s, double dt, const StepOptions& o) {
    check_cfl(s, dt, o);
    NonlinearFn N = [&](const Sys& y) { return Sys{nonlinear_main(y[0], o.rhs, false)}; };
    return lawson_rk4({s}, dt, N, o.rhs)[0];
}

SplitPair make_split(const FluidState& full0) {
    auto [P, Pp] = leray_project(full0.u);
    SplitPair sp{full0, full0};
    sp.main.u = Pp;
    sp.perturb.rho = SpectralField::scalar(full0.grid);
    sp.perturb.u = P;
    return sp;
}

SplitPair step_split(const SplitPair& s, double dt, const StepOptions& o) {
    check_cfl(s.main, dt, o);
    RhsOptions ro = o.rhs;
    ro.irrotational_reduction = false;
    NonlinearFn N = [&](const Sys& y) { return Sys{nonlinear_main(y[0], ro, false), nonlinear_perturb(y[1], y[0], ro)}; };
    Sys r = lawson_rk4({s.main, s.perturb}, dt, N, ro);
    return {r[0], r[1]};
}

double curl_diagnostic(const SpectralField& u) {
    double nu = std::sqrt(std::max(inner(u, u), 0.0));
    SpectralField w = curl(u);
    double nw = std::sqrt(std::max(inner(w, w), 0.0));
    return nw / std::max(nu, 1e-300);
}

double state_norm(const FluidState& s, double sobolev, bool with_potential) {
    double a = hs_norm(s.rho, sobolev), b = hs_norm(s.u, sobolev);
    double c = with_potential ? hs_norm(gradient(poisson_solve(s.rho, s.variant)), sobolev) : 0.0;
    return std::sqrt(a * a + b * b + c * c);
}

FluidState difference(const FluidState& a, const FluidState& b) {
    FluidState d = a;
    d.axpy(-1.0, b);
    return d;
}

SpectralField symmetrize(const FluidState& s) {
    require_mean_zero(s.rho, "symmetrize");
    const Grid& g = s.grid;
    SpectralField V(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 xi = g.xi(i);
        double r = norm3(xi);
        if (r == 0) continue;
        cplx proj = 0;
        for (int a = 0; a < g.dim; ++a) proj += xi[a] / r * s.u.comp(a)[i];
        V.comp(0)[i] = omega(r, s.variant) / r * s.rho.coeffs[i];
        V.comp(1)[i] = cplx(0, 1) * proj;
    }
    return V;
}

FluidState desymmetrize(const SpectralField& V, Variant v, double eps) {
    if (V.ncomp != 2) throw std::invalid_argument("desymmetrize: V needs two components");
    const Grid& g = V.grid;
    FluidState s(g, v, eps);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 xi = g.xi(i);
        double r = norm3(xi);
        if (r == 0) continue;
        s.rho.coeffs[i] = r / omega(r, v) * V.comp(0)[i];
        for (int a = 0; a < g.dim; ++a) s.u.comp(a)[i] = -cplx(0, 1) * xi[a] / r * V.comp(1)[i];
    }
    return s;
}

SpectralField bvv(const SpectralField& V, Variant v) {
    FluidState s = desymmetrize(V, v, 0.0);
    const Grid& g = V.grid;
    const std::size_t N = g.size();
    const int d = g.dim;
    Phys rho = to_phys(s.rho), u = to_phys(s.u);
    std::vector<double> flux(d * N), u2(N, 0.0);
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < N; ++i) {
            flux[a * N + i] = rho.at(0, i) * u.at(a, i);
            u2[i] += u.at(a, i) * u.at(a, i);
        }
    SpectralField dv = divergence(to_spec(g, flux, d));
    SpectralField q = to_spec(g, u2, 1);
    SpectralField B(g, 2);
    for (std::size_t i = 0; i < N; ++i) {
        double r = norm3(g.xi(i));
        if (r == 0) continue;
        B.comp(0)[i] = -omega(r, v) / r * dv.coeffs[i];
        B.comp(1)[i] = 0.5 * r * q.coeffs[i];
    }
    return B;
}

SpectralField step_vform(const SpectralField& V, double dt, const DispersionSymbol& s, bool nonlinear) {
    auto E = [&](double tau, const SpectralField& x) { return apply_semigroup(tau, x, s); };
    if (!nonlinear) return E(dt, V);
    auto N = [&](const SpectralField& x) { return bvv(x, s.variant); };
    const double h2 = dt / 2;
    SpectralField k1 = N(V);
    SpectralField k2 = N(E(h2, V + h2 * k1));
    SpectralField k3 = N(E(h2, V) + h2 * k2);
    SpectralField k4 = N(E(dt, V) + dt * E(h2, k3));
    SpectralField out = E(dt, V + (dt / 6) * k1);
    out += (dt / 3) * E(h2, k2 + k3);
    out += (dt / 6) * k4;
    return out;
}

namespace {

// parity: +1 keeps the real part (even field), -1 the imaginary part (odd field)
SpectralField random_band(const Grid& g, int ncomp, double width, std::mt19937_64& rng, int parity = 0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    SpectralField f(g, ncomp);
    for (int a = 0; a < ncomp; ++a)
        for (std::size_t i = 0; i < g.size(); ++i) {
            double r = norm3(g.xi(i));
            double env = std::exp(-r * r / (2 * width * width));
            double re = nd(rng), im = nd(rng);
            if (parity > 0) im = 0;
            if (parity < 0) re = 0;
            f.comp(a)[i] = env * cplx(re, im);
        }
    enforce_hermitian(f);
    dealias(f);
    for (int a = 0; a < ncomp; ++a) f.comp(a)[0] = 0;
    return f;
}

void scale_to(SpectralField& f, double target) {
    double n = hs_norm(f, 3.0);
    if (n > 0) f *= target / n;
}

}  // namespace

FluidState make_initial_data(const Grid& g, Variant v, double eps, const InitialDataSpec& spec) {
    if (!(spec.delta0 >= 0) || !(spec.width > 0)) throw std::invalid_argument("initial data: bad amplitude or width");
    std::mt19937_64 rng(spec.seed);
    FluidState s(g, v, eps);
    const int even = spec.parity ? 1 : 0, odd = spec.parity ? -1 : 0;
    s.rho = random_band(g, 1, spec.width, rng, even);
    scale_to(s.rho, spec.rho_scale * spec.delta0);
    SpectralField w = random_band(g, g.dim, spec.width, rng, odd);
    auto [P, Pp] = leray_project(w);
    scale_to(Pp, spec.potential_scale * spec.delta0);
    s.u = Pp;
    if (spec.rotational && g.dim > 1) {
        SpectralField w2 = random_band(g, g.dim, spec.width, rng, odd);
        SpectralField sol = leray_project(w2).first;
        scale_to(sol, spec.delta0 * eps);
        s.u += sol;
    }
    return s;
}

SplittingReport run_splitting_consistency(const FluidState& full0, double T, double dt, const StepOptions& o) {
    if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("splitting run: T and dt must be positive");
    SplittingReport rep;
    FluidState full = full0;
    SplitPair sp = make_split(full0);
    const int steps = static_cast<int>(std::llround(T / dt));
    for (int s = 0; s < steps; ++s) {
        full = step_full(full, dt, o);
        sp = step_split(sp, dt, o);
        FluidState recon = sp.main;
        recon.axpy(1.0, sp.perturb);
        double nf = state_norm(full, 3.0);
        double dev = state_norm(difference(full, recon), 3.0) / std::max(nf, 1e-300);
        rep.max_rel_dev = std::max(rep.max_rel_dev, dev);
        rep.final_rel_dev = dev;
        rep.max_perturb_norm = std::max(rep.max_perturb_norm, state_norm(sp.perturb, 3.0));
    }
    rep.steps = steps;
    return rep;
}

}  // namespace nsplab
