#include "kgscat/kgwave.hpp"

#include "kgscat/specops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kgscat {

bool VelocitySupport::contains(const Eigen::VectorXd& v) const
{
    return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
}

double antialias_limit(const GridSpec& g) { return (2.0 / 3.0) * std::numbers::pi / g.dx; }

KGWavePacket make_packet(const GridSpec& g, double m, const Eigen::VectorXd& p_center, double p_width,
                         const Eigen::VectorXd& x0, const Envelope& envelope)
{
    if (!(m > 0.0)) throw std::invalid_argument("mass m must be positive");
    if (!(p_width > 0.0)) throw std::invalid_argument("packet momentum width must be positive");
    if (p_center.size() != g.d || x0.size() != g.d) throw std::invalid_argument("packet vectors must have length d");
    const double limit = antialias_limit(g);
    for (int j = 0; j < g.d; ++j) {
        if (std::abs(p_center[j]) + p_width > limit) {
            std::ostringstream os;
            os << "packet momentum support reaches " << std::abs(p_center[j]) + p_width
               << " beyond the anti-aliasing limit " << limit << " (need n > "
               << (std::abs(p_center[j]) + p_width) * 1.5 * 2.0 * g.L / std::numbers::pi << ")";
            throw std::invalid_argument(os.str());
        }
    }
    KGWavePacket packet;
    packet.m = m;
    packet.x0 = x0;
    packet.p_center = p_center;
    packet.p_width = p_width;
    packet.fourier_data = ComplexField(g, Representation::momentum);
    std::vector<int> c(static_cast<std::size_t>(g.d));
    auto& v = packet.fourier_data.values;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        unflatten(g, g.d, static_cast<std::size_t>(i), c.data());
        double amp = 1.0, phase = 0.0;
        for (int j = 0; j < g.d; ++j) {
            const double p = g.momentum(c[static_cast<std::size_t>(j)]);
            amp *= envelope((p - p_center[j]) / p_width);
            phase -= p * x0[j];
        }
        v[i] = amp == 0.0 ? cplx(0.0, 0.0) : std::polar(amp, phase);
    }
    const double norm = l2_norm(packet.fourier_data);
    if (!(norm > 0.0)) throw std::invalid_argument("packet support contains no lattice momenta; refine the grid");
    v /= norm;
    return packet;
}

KGWavePacket make_packet(const GridSpec& g, double m, double p_center, double p_width, double x0)
{
    return make_packet(g, m, Eigen::VectorXd::Constant(1, p_center), p_width, Eigen::VectorXd::Constant(1, x0));
}

ComplexField packet_field(const KGWavePacket& packet) { return fourier_inverse(packet.fourier_data); }

double packet_radius(const KGWavePacket& packet, double tail)
{
    const auto f = packet_field(packet);
    const auto& g = f.grid;
    const std::size_t total = g.points(1);
    std::vector<std::pair<double, double>> rm(total);
    std::vector<int> c(static_cast<std::size_t>(g.d));
    for (std::size_t i = 0; i < total; ++i) {
        unflatten(g, g.d, i, c.data());
        double r2 = 0.0;
        for (int j = 0; j < g.d; ++j) {
            // minimal-image distance from x0 on the periodic box
            double dx = g.position(c[static_cast<std::size_t>(j)]) - packet.x0[j];
            dx -= 2.0 * g.L * std::round(dx / (2.0 * g.L));
            r2 += dx * dx;
        }
        rm[i] = {std::sqrt(r2), std::norm(f.values[static_cast<Eigen::Index>(i)])};
    }
    std::sort(rm.begin(), rm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double total_mass = 0.0;
    for (const auto& e : rm) total_mass += e.second;
    double acc = 0.0;
    for (const auto& e : rm) {
        acc += e.second;
        if (acc > tail * total_mass) return e.first;
    }
    return 0.0;
}

VelocitySupport velocity_support(const KGWavePacket& packet)
{
    const int d = static_cast<int>(packet.p_center.size());
    const double m = packet.m;
    auto vel = [m](const Eigen::VectorXd& p) -> Eigen::VectorXd { return p / omega(p.squaredNorm(), m); };
    VelocitySupport s;
    if (d == 1) {
        const double a = packet.p_center[0] - packet.p_width, b = packet.p_center[0] + packet.p_width;
        s.lo = Eigen::VectorXd::Constant(1, a / omega(a * a, m));
        s.hi = Eigen::VectorXd::Constant(1, b / omega(b * b, m));
        return s;
    }
    // Boundary of the support box, 64 points per edge.
    s.lo = Eigen::VectorXd::Constant(d, 2.0);
    s.hi = Eigen::VectorXd::Constant(d, -2.0);
    const double w = packet.p_width;
    for (int edge = 0; edge < 4; ++edge) {
        for (int k = 0; k < 64; ++k) {
            const double s01 = -1.0 + 2.0 * k / 64.0;
            Eigen::Vector2d off;
            switch (edge) {
                case 0: off = {s01, -1.0}; break;
                case 1: off = {1.0, s01}; break;
                case 2: off = {-s01, 1.0}; break;
                default: off = {-1.0, -s01}; break;
            }
            const Eigen::VectorXd v = vel(packet.p_center + w * Eigen::VectorXd(off));
            s.lo = s.lo.cwiseMin(v);
            s.hi = s.hi.cwiseMax(v);
        }
    }
    return s;
}

double required_half_length(const KGWavePacket& packet, double t)
{
    const auto vs = velocity_support(packet);
    const double vmax = std::max(vs.lo.cwiseAbs().maxCoeff(), vs.hi.cwiseAbs().maxCoeff());
    const double travel = packet.x0.cwiseAbs().maxCoeff() + std::abs(t) * vmax + packet_radius(packet);
    // the boundary layer used by the runtime check is the outer 5% of the box
    return travel / 0.95;
}

ComplexField evolve(const KGWavePacket& packet, double t)
{
    const auto& g = packet.fourier_data.grid;
    const double need = required_half_length(packet, t);
    if (need > g.L) {
        std::ostringstream os;
        os << "wraparound guard: evolving to t=" << t << " needs L >= " << need << " (box has L=" << g.L << ")";
        throw GuardError(os.str());
    }
    auto fh = free_propagator(omega_multiplier(g, packet.m), t)(packet.fourier_data);
    return fourier_inverse(fh);
}

double support_gap(const Cutoff& a, const Cutoff& b) { return (a.center - b.center).norm() - a.outer - b.outer; }

DiagnosticSeries check_prop_toto20_1(const KGWavePacket& packet, const Cutoff& h, const std::vector<double>& t_list)
{
    const auto& g = packet.fourier_data.grid;
    const auto w = omega_multiplier(g, packet.m);
    const auto target = fourier_inverse(apply_multiplier(velocity_cutoff(h, g, packet.m), packet.fourier_data));
    std::vector<double> res;
    for (double t : t_list) {
        auto gt = evolve(packet, t);
        gt = position_cutoff_scaled(h, g, t)(gt);
        gt = free_propagator(w, -t)(gt);
        res.push_back(l2_norm(ComplexField(g, gt.values - target.values)));
    }
    return make_series("velocity_cutoff_residual", t_list, res);
}

DiagnosticSeries check_prop_toto20_2(const KGWavePacket& packet, const Cutoff& chi1, const Cutoff& chi2,
                                     const std::vector<double>& t_list)
{
    const double gap = support_gap(chi1, chi2);
    if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "cutoff supports overlap (gap " << gap << ")";
        throw std::invalid_argument(os.str());
    }
    const auto& g = packet.fourier_data.grid;
    KGWavePacket filtered = packet;
    filtered.fourier_data = apply_multiplier(velocity_cutoff(chi2, g, packet.m), packet.fourier_data);
    std::vector<double> res;
    for (double t : t_list) {
        auto gt = evolve(filtered, t);
        res.push_back(l2_norm(position_cutoff_scaled(chi1, g, t)(gt)));
    }
    return make_series("separated_velocity_norm", t_list, res);
}

}  // namespace kgscat
