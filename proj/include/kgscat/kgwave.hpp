#pragma once

#include "kgscat/grid.hpp"
#include "kgscat/profiles.hpp"
#include "kgscat/series.hpp"

#include <functional>
#include <stdexcept>

namespace kgscat {

struct GuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KGWavePacket {
    ComplexField fourier_data;  // momentum representation
    double m = 1.0;
    Eigen::VectorXd x0;
    Eigen::VectorXd p_center;
    double p_width = 0.0;  // support box is p_center +- p_width on each axis
};

struct VelocitySupport {
    Eigen::VectorXd lo, hi;
    bool contains(const Eigen::VectorXd& v) const;
};

using Envelope = std::function<double(double)>;

// fhat(p) = prod_j envelope((p_j - pc_j) / w) e^{-i p.x0}, normalized to unit L2 norm.
// Rejects support boxes reaching beyond the central 2/3 of the momentum lattice.
KGWavePacket make_packet(const GridSpec& g, double m, const Eigen::VectorXd& p_center, double p_width,
                         const Eigen::VectorXd& x0, const Envelope& envelope = bump);
KGWavePacket make_packet(const GridSpec& g, double m, double p_center, double p_width, double x0);

// Largest |p| allowed by the anti-aliasing rule.
double antialias_limit(const GridSpec& g);

// Position-space data at t = 0.
ComplexField packet_field(const KGWavePacket& packet);

// Radius around x0 outside of which the initial packet carries less than `tail` of its mass.
double packet_radius(const KGWavePacket& packet, double tail = 1e-12);

// g_t = e^{-it omega(D)} f. Throws GuardError naming the required box half-length when the
// packet could reach the box edge by time t.
ComplexField evolve(const KGWavePacket& packet, double t);
double required_half_length(const KGWavePacket& packet, double t);

VelocitySupport velocity_support(const KGWavePacket& packet);

// || e^{it omega} h(x/t) e^{-it omega} f - h(grad omega(D)) f || over t_list.
DiagnosticSeries check_prop_toto20_1(const KGWavePacket& packet, const Cutoff& h, const std::vector<double>& t_list);
// || chi1(x/t) e^{-it omega} chi2(grad omega(D)) f || over t_list; supports must be disjoint.
DiagnosticSeries check_prop_toto20_2(const KGWavePacket& packet, const Cutoff& chi1, const Cutoff& chi2,
                                     const std::vector<double>& t_list);

// Distance between the supports of two radial cutoffs (negative when they overlap).
double support_gap(const Cutoff& a, const Cutoff& b);

}  // namespace kgscat
