#include "kgscat/profiles.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kgscat {

namespace {

constexpr std::array<double, 8> gl_nodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                         -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_weights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

double step_density(double s) { return bump(2.0 * s - 1.0); }

double gauss_legendre(double a, double b)
{
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl_nodes.size(); ++i) acc += gl_weights[i] * step_density(mid + half * gl_nodes[i]);
    return acc * half;
}

struct StepTable {
    static constexpr int cells = 2048;
    std::vector<double> cumulative;
    double total = 0.0;

    StepTable() : cumulative(cells + 1, 0.0)
    {
        for (int i = 0; i < cells; ++i)
            cumulative[i + 1] = cumulative[i] + gauss_legendre(double(i) / cells, double(i + 1) / cells);
        total = cumulative[cells];
    }
};

const StepTable& table()
{
    static const StepTable t;
    return t;
}

}  // namespace

double bump(double s)
{
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / q);
}

double smoothstep(double s)
{
    if (!(s > 0.0)) return 0.0;
    if (s >= 1.0) return 1.0;
    const auto& t = table();
    // Symmetry S(s) = 1 - S(1 - s) keeps the values near 1 as accurate as near 0.
    if (s > 0.5) return 1.0 - smoothstep(1.0 - s);
    const int i = static_cast<int>(s * StepTable::cells);
    const double lo = double(i) / StepTable::cells;
    return (t.cumulative[i] + gauss_legendre(lo, s)) / t.total;
}

Cutoff::Cutoff(Eigen::VectorXd c, double a, double b) : center(std::move(c)), inner(a), outer(b)
{
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("cutoff radii must satisfy 0 <= inner < outer");
}

Cutoff Cutoff::interval(double lo, double hi, double w)
{
    if (!(hi > lo) || !(w > 0.0)) throw std::invalid_argument("cutoff interval needs lo < hi and w > 0");
    Eigen::VectorXd c(1);
    c[0] = 0.5 * (lo + hi);
    return Cutoff(c, 0.5 * (hi - lo), 0.5 * (hi - lo) + w);
}

Cutoff Cutoff::everywhere(int dim, double R) { return Cutoff(Eigen::VectorXd::Zero(dim), R, 2.0 * R); }

double Cutoff::operator()(const double* y) const
{
    double r2 = 0.0;
    for (int i = 0; i < dim(); ++i) {
        const double dy = y[i] - center[i];
        r2 += dy * dy;
    }
    if (r2 <= inner * inner) return 1.0;
    if (r2 >= outer * outer) return 0.0;
    return fall_off(std::sqrt(r2) - inner, outer - inner);
}

}  // namespace kgscat
