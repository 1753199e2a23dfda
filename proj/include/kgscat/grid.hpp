#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kgscat {

using cplx = std::complex<double>;

struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Periodic box [-L, L)^d sampled with n points per axis.
struct GridSpec {
    int d = 1;
    int n = 0;
    double L = 0.0;
    double dx = 0.0;

    double position(int i) const { return -L + dx * i; }
    // Momentum stored in FFT order: index i holds k = i for i < n/2, i - n otherwise.
    int wavenumber(int i) const { return i < n / 2 ? i : i - n; }
    double momentum(int i) const;
    double dp() const;

    int axes(int particles) const { return particles * d; }
    std::size_t points(int particles) const;

    bool operator==(const GridSpec& o) const { return d == o.d && n == o.n && L == o.L; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

GridSpec make_grid(int d, int n, double L);

enum class Representation { position, momentum };

// Flat row-major storage; axis 0 varies slowest. For two particles the axes are
// (x1_1..x1_d, x2_1..x2_d).
template <int Particles>
struct Field {
    static_assert(Particles == 1 || Particles == 2);
    static constexpr int particles = Particles;

    GridSpec grid;
    Eigen::VectorXcd values;
    Representation rep = Representation::position;

    Field() = default;
    explicit Field(const GridSpec& g, Representation r = Representation::position)
        : grid(g), values(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.points(Particles)))), rep(r) {}
    Field(const GridSpec& g, Eigen::VectorXcd v, Representation r = Representation::position);

    int axes() const { return grid.axes(Particles); }
    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

using ComplexField = Field<1>;
using ComplexField2P = Field<2>;

// Measure weight per sample: dx^axes in position space, (pi/L)^axes in momentum space.
double cell_weight(const GridSpec& g, int axes, Representation rep);

template <int P>
double l2_norm(const Field<P>& f);
template <int P>
double l2_norm_squared(const Field<P>& f);
template <int P>
cplx inner_product(const Field<P>& a, const Field<P>& b);

// Continuum transform fhat(p) = (2 pi)^{-D/2} \int e^{-ipx} f(x) dx on the lattice.
template <int P>
Field<P> fourier_forward(const Field<P>& f);
template <int P>
Field<P> fourier_inverse(const Field<P>& f);

// In-place variants used by the time steppers.
void fft_forward_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& v);
void fft_inverse_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& v);

// F^{-1} diag(m) F on position samples. Uses the bare lattice DFT pair with the exact
// 1/n^axes factor: the two rounded continuum factors would bias the norm on every call.
void fft_multiply_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& v, const Eigen::VectorXcd& m);
// Same map for u -> F^{-1} (a F u + b F r), the midpoint Duhamel update.
void fft_combine_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& u, const Eigen::VectorXcd& a,
                         Eigen::VectorXcd& r, const Eigen::VectorXcd& b);

// Coordinates of flat index idx along each axis.
void unflatten(const GridSpec& g, int axes, std::size_t idx, int* out);

// One-axis lattices: x_j = -L + j dx and p_i in FFT order.
std::vector<double> axis_positions(const GridSpec& g);
std::vector<double> axis_momenta(const GridSpec& g);

template <int P>
void require_same_grid(const Field<P>& a, const Field<P>& b)
{
    if (a.grid != b.grid) throw GridError("field grids differ");
    if (a.rep != b.rep) throw GridError("fields are in different representations");
}

}  // namespace kgscat
