#include "kgscat/specops.hpp"

#include <cmath>
#include <stdexcept>

namespace kgscat {

namespace {

void require_mass(double m)
{
    if (!(m > 0.0)) throw std::invalid_argument("mass m must be positive");
}

template <typename Fn>
void for_each_lattice_point(const GridSpec& g, int axes, bool momentum, Fn&& fn)
{
    const std::vector<double> axis = momentum ? axis_momenta(g) : axis_positions(g);
    const std::size_t total = g.points(axes / g.d);
    std::vector<int> idx(static_cast<std::size_t>(axes), 0);
    std::vector<double> coord(static_cast<std::size_t>(axes), axis[0]);
    for (std::size_t flat = 0; flat < total; ++flat) {
        fn(flat, coord.data());
        for (int a = axes - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++idx[ua] < g.n) {
                coord[ua] = axis[static_cast<std::size_t>(idx[ua])];
                break;
            }
            idx[ua] = 0;
            coord[ua] = axis[0];
        }
    }
}

}  // namespace

bool Multiplier::is_real(double tol) const { return samples.imag().cwiseAbs().maxCoeff() <= tol; }

double omega(double p2, double m) { return std::sqrt(p2 + m * m); }

Multiplier make_multiplier(const GridSpec& g, int particles, const std::function<cplx(const double* p)>& fn)
{
    if (particles != 1 && particles != 2) throw std::invalid_argument("multiplier arity must be 1 or 2");
    Multiplier mult{g, particles, Eigen::VectorXcd(static_cast<Eigen::Index>(g.points(particles)))};
    for_each_lattice_point(g, g.axes(particles), true,
                           [&](std::size_t i, const double* p) { mult.samples[static_cast<Eigen::Index>(i)] = fn(p); });
    return mult;
}

Multiplier omega_multiplier(const GridSpec& g, double m)
{
    require_mass(m);
    return make_multiplier(g, 1, [&](const double* p) {
        double p2 = 0.0;
        for (int j = 0; j < g.d; ++j) p2 += p[j] * p[j];
        return cplx(omega(p2, m), 0.0);
    });
}

std::vector<Multiplier> grad_omega_multiplier(const GridSpec& g, double m)
{
    require_mass(m);
    std::vector<Multiplier> out;
    for (int comp = 0; comp < g.d; ++comp)
        out.push_back(make_multiplier(g, 1, [&](const double* p) {
            double p2 = 0.0;
            for (int j = 0; j < g.d; ++j) p2 += p[j] * p[j];
            return cplx(p[comp] / omega(p2, m), 0.0);
        }));
    return out;
}

Multiplier omega_tilde_multiplier(const GridSpec& g, double m)
{
    require_mass(m);
    return make_multiplier(g, 2, [&](const double* p) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < g.d; ++j) {
            a += p[j] * p[j];
            b += p[g.d + j] * p[g.d + j];
        }
        return cplx(omega(a, m) + omega(b, m), 0.0);
    });
}

std::vector<Multiplier> grad_omega_tilde_multiplier(const GridSpec& g, double m)
{
    require_mass(m);
    std::vector<Multiplier> out;
    for (int comp = 0; comp < 2 * g.d; ++comp) {
        const int base = comp < g.d ? 0 : g.d;
        out.push_back(make_multiplier(g, 2, [&](const double* p) {
            double p2 = 0.0;
            for (int j = 0; j < g.d; ++j) p2 += p[base + j] * p[base + j];
            return cplx(p[comp] / omega(p2, m), 0.0);
        }));
    }
    return out;
}

void apply_multiplier_inplace(const Multiplier& mult, Eigen::VectorXcd& v)
{
    if (static_cast<std::size_t>(v.size()) != mult.size()) throw std::invalid_argument("multiplier arity mismatch");
    const int axes = mult.grid.axes(mult.particles);
    fft_multiply_inplace(mult.grid, axes, v, mult.samples);
}

template <int P>
Field<P> apply_multiplier(const Multiplier& mult, const Field<P>& f)
{
    if (mult.particles != P || mult.grid != f.grid) throw std::invalid_argument("multiplier arity mismatch");
    Field<P> out = f;
    if (f.rep == Representation::momentum)
        out.values.array() *= mult.samples.array();
    else
        apply_multiplier_inplace(mult, out.values);
    return out;
}

Propagator::Propagator(const Multiplier& mult, double t) : grid_(mult.grid), particles_(mult.particles), t_(t)
{
    if (!mult.is_real()) throw std::invalid_argument("free_propagator requires a real multiplier");
    phases_.resize(mult.samples.size());
    for (Eigen::Index i = 0; i < phases_.size(); ++i) {
        const double theta = -t * mult.samples[i].real();
        phases_[i] = cplx(std::cos(theta), std::sin(theta));
    }
}

void Propagator::apply_inplace(Eigen::VectorXcd& v) const
{
    if (v.size() != phases_.size()) throw std::invalid_argument("propagator arity mismatch");
    const int axes = grid_.axes(particles_);
    fft_multiply_inplace(grid_, axes, v, phases_);
}

template <int P>
Field<P> Propagator::operator()(const Field<P>& f) const
{
    if (particles_ != P || grid_ != f.grid) throw std::invalid_argument("propagator arity mismatch");
    Field<P> out = f;
    if (f.rep == Representation::momentum)
        apply_momentum_inplace(out.values);
    else
        apply_inplace(out.values);
    return out;
}

Propagator free_propagator(const Multiplier& mult, double t) { return Propagator(mult, t); }

PositionMap::PositionMap(const GridSpec& g, int particles, Eigen::VectorXd samples)
    : grid_(g), particles_(particles), samples_(std::move(samples))
{
    if (static_cast<std::size_t>(samples_.size()) != g.points(particles))
        throw std::invalid_argument("position map length does not match grid");
}

template <int P>
Field<P> PositionMap::operator()(const Field<P>& f) const
{
    if (particles_ != P || grid_ != f.grid) throw std::invalid_argument("position map arity mismatch");
    if (f.rep != Representation::position) throw std::invalid_argument("position map needs a position-space field");
    Field<P> out = f;
    apply_inplace(out.values);
    return out;
}

PositionMap position_function_scaled(const std::function<double(const double* y)>& fn, const GridSpec& g,
                                     int particles, double t)
{
    if (!(t > 0.0)) throw std::invalid_argument("scaled position function needs t > 0");
    const int axes = g.axes(particles);
    Eigen::VectorXd s(static_cast<Eigen::Index>(g.points(particles)));
    std::vector<double> y(static_cast<std::size_t>(axes));
    for_each_lattice_point(g, axes, false, [&](std::size_t i, const double* x) {
        for (int a = 0; a < axes; ++a) y[static_cast<std::size_t>(a)] = x[a] / t;
        s[static_cast<Eigen::Index>(i)] = fn(y.data());
    });
    return PositionMap(g, particles, std::move(s));
}

PositionMap position_cutoff_scaled(const Cutoff& h, const GridSpec& g, double t)
{
    if (h.dim() != g.d) throw std::invalid_argument("cutoff dimension does not match grid");
    return position_function_scaled([&](const double* y) { return h(y); }, g, 1, t);
}

Multiplier velocity_function(const std::function<double(const double* v)>& fn, const GridSpec& g, int particles,
                             double m)
{
    require_mass(m);
    const int axes = g.axes(particles);
    std::vector<double> v(static_cast<std::size_t>(axes));
    return make_multiplier(g, particles, [&](const double* p) {
        for (int part = 0; part < particles; ++part) {
            double p2 = 0.0;
            for (int j = 0; j < g.d; ++j) p2 += p[part * g.d + j] * p[part * g.d + j];
            const double w = omega(p2, m);
            for (int j = 0; j < g.d; ++j) v[static_cast<std::size_t>(part * g.d + j)] = p[part * g.d + j] / w;
        }
        return cplx(fn(v.data()), 0.0);
    });
}

Multiplier velocity_cutoff(const Cutoff& h, const GridSpec& g, double m)
{
    if (h.dim() != g.d) throw std::invalid_argument("cutoff dimension does not match grid");
    return velocity_function([&](const double* v) { return h(v); }, g, 1, m);
}

Multiplier velocity_cutoff(const Cutoff& h1, const Cutoff& h2, const GridSpec& g, double m)
{
    if (h1.dim() != g.d || h2.dim() != g.d) throw std::invalid_argument("cutoff dimension does not match grid");
    return velocity_function([&](const double* v) { return h1(v) * h2(v + g.d); }, g, 2, m);
}

template Field<1> apply_multiplier(const Multiplier&, const Field<1>&);
template Field<2> apply_multiplier(const Multiplier&, const Field<2>&);
template Field<1> Propagator::operator()(const Field<1>&) const;
template Field<2> Propagator::operator()(const Field<2>&) const;
template Field<1> PositionMap::operator()(const Field<1>&) const;
template Field<2> PositionMap::operator()(const Field<2>&) const;

}  // namespace kgscat
