#pragma once

#include "kgscat/grid.hpp"
#include "kgscat/kgwave.hpp"

#include <random>

namespace testutil {

template <int P>
kgscat::Field<P> random_field(const kgscat::GridSpec& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    kgscat::Field<P> f(g);
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = {nd(rng), nd(rng)};
    return f;
}

// Random field whose spectrum lives in |k| < n/6 on every axis.
template <int P>
kgscat::Field<P> random_bandlimited(const kgscat::GridSpec& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    kgscat::Field<P> f(g, kgscat::Representation::momentum);
    const int axes = f.axes();
    std::vector<int> c(static_cast<std::size_t>(axes));
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        kgscat::unflatten(g, axes, static_cast<std::size_t>(i), c.data());
        bool inside = true;
        for (int a = 0; a < axes; ++a) inside = inside && std::abs(g.wavenumber(c[static_cast<std::size_t>(a)])) < g.n / 6;
        if (inside) f.values[i] = {nd(rng), nd(rng)};
    }
    return kgscat::fourier_inverse(f);
}

// Normalized symmetrized product f(x1) h(x2) + h(x1) f(x2) of two d = 1 packets.
inline kgscat::ComplexField2P pair_state(const kgscat::GridSpec& g, double m, double p1, double w1, double x1, double p2,
                                         double w2, double x2)
{
    const auto f = kgscat::packet_field(kgscat::make_packet(g, m, p1, w1, x1));
    const auto h = kgscat::packet_field(kgscat::make_packet(g, m, p2, w2, x2));
    kgscat::ComplexField2P u(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) u.values[i * g.n + j] = f.values[i] * h.values[j] + h.values[i] * f.values[j];
    u.values /= kgscat::l2_norm(u);
    return u;
}

// Normalized symmetrization of the product of Gaussians exp(-(x - a)^2 / 2s^2 + i p x).
inline kgscat::ComplexField2P gaussian_pair(const kgscat::GridSpec& g, double a1, double p1, double a2, double p2,
                                            double s = 1.0)
{
    kgscat::ComplexField2P u(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double x1 = g.position(i), x2 = g.position(j);
            const double e = -((x1 - a1) * (x1 - a1) + (x2 - a2) * (x2 - a2)) / (2.0 * s * s);
            const double es = -((x2 - a1) * (x2 - a1) + (x1 - a2) * (x1 - a2)) / (2.0 * s * s);
            u.values[i * g.n + j] =
                std::exp(kgscat::cplx(e, p1 * x1 + p2 * x2)) + std::exp(kgscat::cplx(es, p1 * x2 + p2 * x1));
        }
    u.values /= kgscat::l2_norm(u);
    return u;
}

inline double rel_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace testutil
