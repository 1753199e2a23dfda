#include "kgscat/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace kgscat {

namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// fftw planning is not thread safe; execution with new-array execute is.
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, PlanPtr> plans;

fftw_plan get_plan(int n, int rank, int sign)
{
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(n, rank, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second.get();
    std::vector<int> dims(static_cast<std::size_t>(rank), n);
    std::size_t total = 1;
    for (int r = 0; r < rank; ++r) total *= static_cast<std::size_t>(n);
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(rank, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans.emplace(key, PlanPtr(p));
    return p;
}

void execute(const GridSpec& g, int axes, Eigen::VectorXcd& v, int sign)
{
    auto* data = reinterpret_cast<fftw_complex*>(v.data());
    fftw_execute_dft(get_plan(g.n, axes, sign), data, data);
}

// Multiplies by c * (-1)^{sum of lattice coordinates}; the checkerboard carries the
// e^{-i p_k x_0} phase of a box starting at x_0 = -L.
void scale_checkerboard(const GridSpec& g, int axes, Eigen::VectorXcd& v, double c)
{
    const int shift = std::countr_zero(static_cast<unsigned>(g.n));
    const auto size = static_cast<std::size_t>(v.size());
    for (std::size_t i = 0; i < size; ++i) {
        unsigned parity = 0;
        for (int a = 0; a < axes; ++a) parity ^= static_cast<unsigned>(i >> (a * shift)) & 1u;
        v[static_cast<Eigen::Index>(i)] *= parity ? -c : c;
    }
}

}  // namespace

double GridSpec::momentum(int i) const { return std::numbers::pi * wavenumber(i) / L; }

double GridSpec::dp() const { return std::numbers::pi / L; }

std::size_t GridSpec::points(int particles) const
{
    std::size_t total = 1;
    for (int a = 0; a < axes(particles); ++a) total *= static_cast<std::size_t>(n);
    return total;
}

GridSpec make_grid(int d, int n, double L)
{
    if (d != 1 && d != 2) throw GridError("dimension d must be 1 or 2");
    if (n < 16 || !std::has_single_bit(static_cast<unsigned>(n)))
        throw GridError("n must be a power of two >= 16, got " + std::to_string(n));
    if (!(L > 0.0) || !std::isfinite(L)) throw GridError("box half-length L must be positive");
    GridSpec g;
    g.d = d;
    g.n = n;
    g.L = L;
    g.dx = 2.0 * L / n;
    return g;
}

template <int P>
Field<P>::Field(const GridSpec& g, Eigen::VectorXcd v, Representation r) : grid(g), values(std::move(v)), rep(r)
{
    if (static_cast<std::size_t>(values.size()) != g.points(P))
        throw GridError("field length does not match grid");
}

double cell_weight(const GridSpec& g, int axes, Representation rep)
{
    const double h = rep == Representation::position ? g.dx : g.dp();
    return std::pow(h, axes);
}

template <int P>
double l2_norm_squared(const Field<P>& f)
{
    return f.values.squaredNorm() * cell_weight(f.grid, f.axes(), f.rep);
}

template <int P>
double l2_norm(const Field<P>& f)
{
    return std::sqrt(l2_norm_squared(f));
}

template <int P>
cplx inner_product(const Field<P>& a, const Field<P>& b)
{
    require_same_grid(a, b);
    return a.values.dot(b.values) * cell_weight(a.grid, a.axes(), a.rep);
}

void fft_forward_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& v)
{
    execute(g, axes, v, FFTW_FORWARD);
    const double c = std::pow(g.dx / std::sqrt(2.0 * std::numbers::pi), axes);
    scale_checkerboard(g, axes, v, c);
}

void fft_inverse_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& v)
{
    const double c = std::pow(g.dp() / std::sqrt(2.0 * std::numbers::pi), axes);
    scale_checkerboard(g, axes, v, c);
    execute(g, axes, v, FFTW_BACKWARD);
}

void fft_multiply_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& v, const Eigen::VectorXcd& m)
{
    if (v.size() != m.size()) throw GridError("multiplier length does not match field");
    const double inv = std::pow(1.0 / g.n, axes);
    execute(g, axes, v, FFTW_FORWARD);
    v.array() *= m.array() * inv;
    execute(g, axes, v, FFTW_BACKWARD);
}

void fft_combine_inplace(const GridSpec& g, int axes, Eigen::VectorXcd& u, const Eigen::VectorXcd& a,
                         Eigen::VectorXcd& r, const Eigen::VectorXcd& b)
{
    if (u.size() != a.size() || r.size() != b.size() || u.size() != r.size())
        throw GridError("combine lengths do not match");
    const double inv = std::pow(1.0 / g.n, axes);
    execute(g, axes, u, FFTW_FORWARD);
    execute(g, axes, r, FFTW_FORWARD);
    u.array() = (u.array() * a.array() + r.array() * b.array()) * inv;
    execute(g, axes, u, FFTW_BACKWARD);
}

template <int P>
Field<P> fourier_forward(const Field<P>& f)
{
    if (f.rep != Representation::position) throw GridError("fourier_forward expects a position-space field");
    Field<P> out = f;
    fft_forward_inplace(f.grid, f.axes(), out.values);
    out.rep = Representation::momentum;
    return out;
}

template <int P>
Field<P> fourier_inverse(const Field<P>& f)
{
    if (f.rep != Representation::momentum) throw GridError("fourier_inverse expects a momentum-space field");
    Field<P> out = f;
    fft_inverse_inplace(f.grid, f.axes(), out.values);
    out.rep = Representation::position;
    return out;
}

void unflatten(const GridSpec& g, int axes, std::size_t idx, int* out)
{
    for (int a = axes - 1; a >= 0; --a) {
        out[a] = static_cast<int>(idx % static_cast<std::size_t>(g.n));
        idx /= static_cast<std::size_t>(g.n);
    }
}

std::vector<double> axis_positions(const GridSpec& g)
{
    std::vector<double> x(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) x[static_cast<std::size_t>(i)] = g.position(i);
    return x;
}

std::vector<double> axis_momenta(const GridSpec& g)
{
    std::vector<double> p(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) p[static_cast<std::size_t>(i)] = g.momentum(i);
    return p;
}

template struct Field<1>;
template struct Field<2>;
template double l2_norm(const Field<1>&);
template double l2_norm(const Field<2>&);
template double l2_norm_squared(const Field<1>&);
template double l2_norm_squared(const Field<2>&);
template cplx inner_product(const Field<1>&, const Field<1>&);
template cplx inner_product(const Field<2>&, const Field<2>&);
template Field<1> fourier_forward(const Field<1>&);
template Field<2> fourier_forward(const Field<2>&);
template Field<1> fourier_inverse(const Field<1>&);
template Field<2> fourier_inverse(const Field<2>&);

}  // namespace kgscat
