#include "nsplab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

namespace nsplab {

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
}

double Grid::volume() const { return std::pow(box_length, dim); }

std::array<int, 3> Grid::kvec(std::size_t idx) const {
    std::array<int, 3> k{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        k[a] = wavenumber(static_cast<int>(idx % n));
        idx /= n;
    }
    return k;
}

Vec3 Grid::xi(std::size_t idx) const {
    auto k = kvec(idx);
    double h = dxi();
    return {h * k[0], h * k[1], h * k[2]};
}

Vec3 Grid::x(std::size_t idx) const {
    Vec3 p{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        p[a] = dx() * static_cast<double>(idx % n);
        idx /= n;
    }
    return p;
}

std::size_t Grid::index_of(const std::array<int, 3>& k) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim; ++a) {
        int i = ((k[a] % n) + n) % n;
        idx = idx * n + i;
    }
    return idx;
}

bool Grid::in_mask(std::size_t idx) const {
    if (dealias_fraction >= 1.0) return true;
    auto k = kvec(idx);
    double cut = dealias_fraction * n / 2.0;
    for (int a = 0; a < dim; ++a)
        if (std::abs(k[a]) > cut) return false;
    return true;
}

bool Grid::resolved(const std::array<int, 3>& k) const {
    for (int a = 0; a < dim; ++a)
        if (k[a] < -n / 2 || k[a] >= n / 2) return false;
    return true;
}

bool Grid::operator==(const Grid& o) const {
    return dim == o.dim && n == o.n && box_length == o.box_length &&
           dealias_fraction == o.dealias_fraction;
}

Grid make_grid(int dim, int n, double box_length, double dealias_fraction) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid: n must be a power of two >= 8, got " + std::to_string(n));
    if (!(box_length > 0) || !std::isfinite(box_length))
        throw std::invalid_argument("grid: box_length must be positive");
    if (!(dealias_fraction > 0 && dealias_fraction <= 1))
        throw std::invalid_argument("grid: dealias_fraction must lie in (0,1]");
    return Grid{dim, n, box_length, dealias_fraction};
}

Lattice::Lattice(const Grid& g) : grid(g) {
    std::size_t N = g.size();
    xi.resize(N);
    mod2.resize(N);
    mask.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        xi[i] = g.xi(i);
        mod2[i] = xi[i][0] * xi[i][0] + xi[i][1] * xi[i][1] + xi[i][2] * xi[i][2];
        mask[i] = g.in_mask(i) ? 1 : 0;
    }
}

SpectralField::SpectralField(const Grid& g, int components)
    : grid(g), ncomp(components), coeffs(g.size() * components, cplx(0, 0)) {}

SpectralField SpectralField::component(int a) const {
    SpectralField s(grid, 1);
    std::copy(comp(a), comp(a) + npoints(), s.coeffs.begin());
    return s;
}

void SpectralField::set_component(int a, const SpectralField& s) {
    std::copy(s.coeffs.begin(), s.coeffs.begin() + npoints(), comp(a));
}

static void check_same(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid == b.grid) || a.ncomp != b.ncomp)
        throw std::invalid_argument("field shape mismatch");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& o) {
    check_same(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += a * o.coeffs[i];
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

// Plans are cached per (dim, n, sign). Planning is serialized; execution
// through the new-array interface is thread safe.
namespace {
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan get_plan(const Grid& g, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(g.dim, g.n, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    std::vector<cplx> scratch(g.size());
    int dims[3] = {g.n, g.n, g.n};
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan =
        fftw_plan_dft(g.dim, dims, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_cache[key] = plan;
    return plan;
}
}  // namespace

void fft_forward(const Grid& g, cplx* data) {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(get_plan(g, FFTW_FORWARD), p, p);
    double s = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) data[i] *= s;
}

void fft_inverse(const Grid& g, cplx* data) {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(get_plan(g, FFTW_BACKWARD), p, p);
}

SpectralField forward_transform(const PhysicalField& f) {
    if (f.values.size() != f.grid.size() * f.ncomp)
        throw std::invalid_argument("forward_transform: sample count does not match grid");
    SpectralField out(f.grid, f.ncomp);
    out.coeffs = f.values;
    for (int a = 0; a < f.ncomp; ++a) fft_forward(f.grid, out.comp(a));
    return out;
}

PhysicalField inverse_transform(const SpectralField& f) {
    if (f.coeffs.size() != f.grid.size() * f.ncomp)
        throw std::invalid_argument("inverse_transform: coefficient count does not match grid");
    PhysicalField out{f.grid, f.ncomp, f.coeffs};
    for (int a = 0; a < f.ncomp; ++a) fft_inverse(f.grid, out.values.data() + a * f.grid.size());
    return out;
}

SpectralField forward_real(const Grid& g, const std::vector<double>& samples, int ncomp) {
    if (samples.size() != g.size() * ncomp)
        throw std::invalid_argument("forward_real: sample count does not match grid");
    PhysicalField p{g, ncomp, std::vector<cplx>(samples.begin(), samples.end())};
    return forward_transform(p);
}

std::vector<double> inverse_real(const SpectralField& f) {
    auto p = inverse_transform(f);
    std::vector<double> out(p.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.values[i].real();
    return out;
}

void dealias(SpectralField& f) {
    if (f.grid.dealias_fraction >= 1.0) return;
    std::size_t N = f.npoints();
    for (std::size_t i = 0; i < N; ++i) {
        if (f.grid.in_mask(i)) continue;
        for (int a = 0; a < f.ncomp; ++a) f.comp(a)[i] = 0;
    }
}

bool is_dealiased(const SpectralField& f, double tol) {
    std::size_t N = f.npoints();
    for (std::size_t i = 0; i < N; ++i) {
        if (f.grid.in_mask(i)) continue;
        for (int a = 0; a < f.ncomp; ++a)
            if (std::abs(f.comp(a)[i]) > tol) return false;
    }
    return true;
}

double hermitian_defect(const SpectralField& f) {
    const Grid& g = f.grid;
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto k = g.kvec(i);
        std::size_t j = g.index_of({-k[0], -k[1], -k[2]});
        for (int a = 0; a < f.ncomp; ++a)
            worst = std::max(worst, std::abs(f.comp(a)[j] - std::conj(f.comp(a)[i])));
    }
    return worst;
}

void enforce_hermitian(SpectralField& f) {
    const Grid& g = f.grid;
    SpectralField src = f;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto k = g.kvec(i);
        std::size_t j = g.index_of({-k[0], -k[1], -k[2]});
        for (int a = 0; a < f.ncomp; ++a)
            f.comp(a)[i] = 0.5 * (src.comp(a)[i] + std::conj(src.comp(a)[j]));
    }
}

}  // namespace nsplab
