#pragma once

#include "kgscat/grid.hpp"
#include "kgscat/profiles.hpp"

#include <functional>
#include <vector>

namespace kgscat {

// Function of the momentum lattice, applied as F^{-1} m F. Samples are stored in the
// same flat FFT-ordered layout as momentum-space fields.
struct Multiplier {
    GridSpec grid;
    int particles = 1;
    Eigen::VectorXcd samples;

    bool is_real(double tol = 0.0) const;
    std::size_t size() const { return static_cast<std::size_t>(samples.size()); }
};

double omega(double p2, double m);

// Builds a multiplier by evaluating fn on the momentum vector (length particles*d).
Multiplier make_multiplier(const GridSpec& g, int particles, const std::function<cplx(const double* p)>& fn);

Multiplier omega_multiplier(const GridSpec& g, double m);
std::vector<Multiplier> grad_omega_multiplier(const GridSpec& g, double m);
Multiplier omega_tilde_multiplier(const GridSpec& g, double m);
// Components d omega(p_i)/d p_{i,j}, ordered like the two-particle axes.
std::vector<Multiplier> grad_omega_tilde_multiplier(const GridSpec& g, double m);

template <int P>
Field<P> apply_multiplier(const Multiplier& mult, const Field<P>& f);
// Same map on raw position-space samples; avoids copying the grid around in steppers.
void apply_multiplier_inplace(const Multiplier& mult, Eigen::VectorXcd& v);

// Diagonal unitary e^{-i t m(D)}; phases precomputed once.
class Propagator {
public:
    Propagator(const Multiplier& mult, double t);
    template <int P>
    Field<P> operator()(const Field<P>& f) const;
    void apply_inplace(Eigen::VectorXcd& v) const;
    // Phase factors alone, in momentum space.
    void apply_momentum_inplace(Eigen::VectorXcd& vhat) const { vhat.array() *= phases_.array(); }

    const GridSpec& grid() const { return grid_; }
    int particles() const { return particles_; }
    double time() const { return t_; }

private:
    GridSpec grid_;
    int particles_ = 1;
    double t_ = 0.0;
    Eigen::VectorXcd phases_;
};

Propagator free_propagator(const Multiplier& mult, double t);

// Pointwise multiplication by h(x / t) sampled on the spatial grid.
class PositionMap {
public:
    PositionMap(const GridSpec& g, int particles, Eigen::VectorXd samples);
    template <int P>
    Field<P> operator()(const Field<P>& f) const;
    void apply_inplace(Eigen::VectorXcd& v) const { v.array() *= samples_.array(); }
    const Eigen::VectorXd& samples() const { return samples_; }

private:
    GridSpec grid_;
    int particles_;
    Eigen::VectorXd samples_;
};

PositionMap position_cutoff_scaled(const Cutoff& h, const GridSpec& g, double t);
// Scaled position function over the full configuration space (length particles*d).
PositionMap position_function_scaled(const std::function<double(const double* y)>& fn, const GridSpec& g,
                                     int particles, double t);

Multiplier velocity_cutoff(const Cutoff& h, const GridSpec& g, double m);
Multiplier velocity_cutoff(const Cutoff& h1, const Cutoff& h2, const GridSpec& g, double m);
// Any function of the group velocity (v_1, ..., v_{particles*d}).
Multiplier velocity_function(const std::function<double(const double* v)>& fn, const GridSpec& g, int particles,
                             double m);

}  // namespace kgscat
