#include "kgscat/detectors.hpp"

#include "kgscat/dynamics.hpp"
#include "kgscat/parallel.hpp"
#include "kgscat/specops.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgscat {

Cutoff2P Cutoff2P::product(const Cutoff& h1, const Cutoff& h2)
{
    if (h1.dim() != h2.dim()) throw std::invalid_argument("product cutoff factors must have equal dimension");
    const double gap = (h1.center - h2.center).norm() - h1.outer - h2.outer;
    if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "detector cutoffs h1, h2 overlap: support margin " << gap << " must be positive";
        throw std::invalid_argument(os.str());
    }
    Cutoff2P c;
    c.kind_ = Kind::product;
    c.d_ = h1.dim();
    c.h1_ = h1;
    c.h2_ = h2;
    // |y1 - y2| is at least the support gap wherever h1(y1) h2(y2) != 0
    c.clearance_ = gap;
    return c;
}

Cutoff2P Cutoff2P::region(std::function<double(const double* y)> fn, int d, double clearance, double check_radius)
{
    if (!(clearance > 0.0)) throw std::invalid_argument("region cutoff needs a positive diagonal clearance");
    if (d != 1 && d != 2) throw std::invalid_argument("dimension d must be 1 or 2");
    // sample the tube |y1 - y2| < clearance along the diagonal direction
    const int along = 400, across = 24;
    std::vector<double> y(static_cast<std::size_t>(2 * d), 0.0);
    for (int i = 0; i <= along; ++i) {
        const double s = -check_radius + 2.0 * check_radius * i / along;
        for (int k = 0; k < across; ++k) {
            const double off = clearance * (-1.0 + 2.0 * (k + 0.5) / across) / 2.0;
            y[0] = s + off;
            y[static_cast<std::size_t>(d)] = s - off;
            if (fn(y.data()) != 0.0) {
                std::ostringstream os;
                os << "region cutoff is nonzero at |y1 - y2| = " << std::abs(2 * off)
                   << ", inside the declared clearance " << clearance;
                throw std::invalid_argument(os.str());
            }
        }
    }
    Cutoff2P c;
    c.kind_ = Kind::region;
    c.d_ = d;
    c.clearance_ = clearance;
    c.fn_ = std::move(fn);
    return c;
}

Cutoff2P Cutoff2P::smoothed_region(const RegionSpec& K, int d, double delta)
{
    const double clearance = K.diagonal_clearance(d) - delta;
    return region([K, d, delta](const double* y) { return K.smoothed(y, d, delta); }, d, clearance,
                  std::min(K.outer_radius() + delta, 50.0));
}

double Cutoff2P::operator()(const double* y) const
{
    if (kind_ == Kind::product) return h1_(y) * h2_(y + d_);
    return fn_(y);
}

Eigen::VectorXd sample_Ht(const Cutoff2P& cut, double t, const GridSpec& g)
{
    if (cut.dim() != g.d) throw std::invalid_argument("cutoff dimension does not match grid");
    return position_function_scaled([&](const double* y) { return cut(y); }, g, 2, t).samples();
}

ComplexField2P apply_Ht(const Cutoff2P& cut, double t, const ComplexField2P& field)
{
    if (!(t > 0.0)) throw std::invalid_argument("apply_Ht needs t > 0");
    ComplexField2P out = field;
    out.values.array() *= sample_Ht(cut, t, field.grid).array();
    return out;
}

double detector_expectation(const Cutoff2P& cut, double t, const ComplexField2P& field)
{
    if (!(t > 0.0)) throw std::invalid_argument("detector_expectation needs t > 0");
    const Eigen::VectorXd H = sample_Ht(cut, t, field.grid);
    if (H.minCoeff() < 0.0 || H.maxCoeff() > 1.0) throw std::invalid_argument("detector cutoff must take values in [0, 1]");
    return (field.values.array().abs2() * H.array()).sum() * cell_weight(field.grid, 2, Representation::position);
}

DiagnosticSeries two_detector_sweep(const Cutoff& h1, const Cutoff& h2, const Trajectory& traj, int jobs)
{
    const auto cut = Cutoff2P::product(h1, h2);
    const auto values = parallel_map(traj.times.size(), jobs, [&](std::size_t i) {
        return detector_expectation(cut, traj.times[i], traj.snapshots[i]);
    });
    return make_series("two_detector", traj.times, values);
}

}  // namespace kgscat
