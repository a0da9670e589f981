#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nsplab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

// Periodic box [0,L)^d with n points per axis. Coefficients are stored in
// FFT order, so flat index i along one axis carries wavenumber i or i-n.
struct Grid {
    int dim = 1;
    int n = 8;
    double box_length = 2 * kPi;
    double dealias_fraction = 2.0 / 3.0;

    std::size_t size() const;
    double dxi() const { return 2 * kPi / box_length; }
    double dx() const { return box_length / n; }
    double volume() const;

    int wavenumber(int i) const { return i < n / 2 ? i : i - n; }
    std::array<int, 3> kvec(std::size_t idx) const;
    Vec3 xi(std::size_t idx) const;
    Vec3 x(std::size_t idx) const;
    std::size_t index_of(const std::array<int, 3>& k) const;  // k taken mod n
    bool in_mask(std::size_t idx) const;
    bool resolved(const std::array<int, 3>& k) const;  // k in [-n/2, n/2)^d

    bool operator==(const Grid& o) const;
};

Grid make_grid(int dim, int n, double box_length, double dealias_fraction = 2.0 / 3.0);

// Precomputed wavevectors and moduli for hot loops.
struct Lattice {
    Grid grid;
    std::vector<Vec3> xi;
    std::vector<double> mod2;
    std::vector<unsigned char> mask;
    explicit Lattice(const Grid& g);
};

enum class Rank { scalar, vector };

// Fourier coefficients c_k with f(x) = sum_k c_k e^{i xi_k . x}.
// Vector fields stack their d components back to back.
struct SpectralField {
    Grid grid;
    int ncomp = 1;
    std::vector<cplx> coeffs;

    SpectralField() = default;
    SpectralField(const Grid& g, int components);
    static SpectralField scalar(const Grid& g) { return SpectralField(g, 1); }
    static SpectralField vector(const Grid& g) { return SpectralField(g, g.dim); }

    Rank rank() const { return ncomp == 1 ? Rank::scalar : Rank::vector; }
    std::size_t npoints() const { return grid.size(); }
    cplx* comp(int a) { return coeffs.data() + a * npoints(); }
    const cplx* comp(int a) const { return coeffs.data() + a * npoints(); }
    SpectralField component(int a) const;
    void set_component(int a, const SpectralField& s);

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    SpectralField& axpy(double a, const SpectralField& o);  // this += a*o
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Physical samples, component-stacked like SpectralField.
struct PhysicalField {
    Grid grid;
    int ncomp = 1;
    std::vector<cplx> values;
};

SpectralField forward_transform(const PhysicalField& f);
PhysicalField inverse_transform(const SpectralField& f);

SpectralField forward_real(const Grid& g, const std::vector<double>& samples, int ncomp = 1);
std::vector<double> inverse_real(const SpectralField& f);

// Raw in-place transforms on one component (n^d values). forward divides by N.
void fft_forward(const Grid& g, cplx* data);
void fft_inverse(const Grid& g, cplx* data);

void dealias(SpectralField& f);
bool is_dealiased(const SpectralField& f, double tol = 0.0);
double hermitian_defect(const SpectralField& f);  // max |c(-k) - conj c(k)|
void enforce_hermitian(SpectralField& f);

}  // namespace nsplab
