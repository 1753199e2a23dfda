#include "kgscat/region.hpp"

#include "kgscat/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kgscat {

double diagonal_distance(const double* y, int d)
{
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += (y[j] - y[d + j]) * (y[j] - y[d + j]);
    return std::sqrt(s);
}

double radius(const double* y, int d)
{
    double s = 0.0;
    for (int j = 0; j < 2 * d; ++j) s += y[j] * y[j];
    return std::sqrt(s);
}

namespace {

bool piece_contains(const RegionSpec::Piece& p, const double* y, int d)
{
    if (!p.is_box) {
        const double r = radius(y, d);
        return r >= p.r_in && r <= p.r_out;
    }
    for (int j = 0; j < 2 * d; ++j)
        if (y[j] < p.lo[static_cast<std::size_t>(j)] || y[j] > p.hi[static_cast<std::size_t>(j)]) return false;
    return true;
}

double piece_smoothed(const RegionSpec::Piece& p, const double* y, int d, double delta)
{
    if (!p.is_box) {
        const double r = radius(y, d);
        return fall_off(p.r_in - r, delta) * fall_off(r - p.r_out, delta);
    }
    double v = 1.0;
    for (int j = 0; j < 2 * d && v > 0.0; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        v *= fall_off(p.lo[uj] - y[j], delta) * fall_off(y[j] - p.hi[uj], delta);
    }
    return v;
}

}  // namespace

RegionSpec::Piece RegionSpec::annulus_piece(double r1, double r2)
{
    if (!(r1 >= 0.0) || !(r2 > r1)) throw std::invalid_argument("annulus needs 0 <= r1 < r2");
    Piece p;
    p.r_in = r1;
    p.r_out = r2;
    return p;
}

RegionSpec::Piece RegionSpec::box_piece(std::vector<double> lo, std::vector<double> hi)
{
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("box corners must have equal length");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(hi[i] > lo[i])) throw std::invalid_argument("box needs lo < hi on every axis");
    Piece p;
    p.is_box = true;
    p.lo = std::move(lo);
    p.hi = std::move(hi);
    return p;
}

RegionSpec RegionSpec::annulus(double r1, double r2)
{
    RegionSpec s;
    s.kind = Kind::annulus;
    s.pieces = {annulus_piece(r1, r2)};
    s.r_in = r1;
    s.r_out = r2;
    return s;
}

RegionSpec RegionSpec::ball(double r)
{
    RegionSpec s = annulus(0.0, r);
    s.kind = Kind::ball;
    return s;
}

RegionSpec RegionSpec::diagonal_tube(double eps)
{
    if (!(eps > 0.0)) throw std::invalid_argument("tube width must be positive");
    RegionSpec s;
    s.kind = Kind::diagonal_tube;
    s.tube = eps;
    return s;
}

RegionSpec RegionSpec::compound(std::vector<Piece> pieces, double tube)
{
    if (pieces.empty()) throw std::invalid_argument("compound region needs at least one piece");
    if (tube < 0.0) throw std::invalid_argument("tube width must be nonnegative");
    RegionSpec s;
    s.kind = Kind::compound;
    s.pieces = std::move(pieces);
    s.tube = tube;
    return s;
}

bool RegionSpec::contains(const double* y, int d) const
{
    if (kind == Kind::diagonal_tube) return diagonal_distance(y, d) <= tube;
    if (kind == Kind::compound && diagonal_distance(y, d) < tube) return false;
    return std::any_of(pieces.begin(), pieces.end(), [&](const Piece& p) { return piece_contains(p, y, d); });
}

double RegionSpec::smoothed(const double* y, int d, double delta) const
{
    if (kind == Kind::diagonal_tube) return fall_off(diagonal_distance(y, d) - tube, delta);
    double outside = 1.0;
    for (const auto& p : pieces) outside *= 1.0 - piece_smoothed(p, y, d, delta);
    double v = 1.0 - outside;
    if (kind == Kind::compound && tube > 0.0) v *= fall_off(tube - diagonal_distance(y, d), delta);
    return v;
}

double RegionSpec::outer_radius() const
{
    if (kind == Kind::diagonal_tube) return std::numeric_limits<double>::infinity();
    double r = 0.0;
    for (const auto& p : pieces) {
        if (!p.is_box) {
            r = std::max(r, p.r_out);
            continue;
        }
        double s = 0.0;
        for (std::size_t j = 0; j < p.lo.size(); ++j) s += std::pow(std::max(std::abs(p.lo[j]), std::abs(p.hi[j])), 2);
        r = std::max(r, std::sqrt(s));
    }
    return r;
}

double RegionSpec::diagonal_clearance(int d) const
{
    if (kind == Kind::diagonal_tube) return 0.0;
    if (kind == Kind::annulus && d == 1) return 0.0;
    if (kind == Kind::ball) return 0.0;
    // Sample the sharp set on a lattice in the (u, v) plane; report the smallest |y1 - y2|
    // minus one lattice diagonal so that the value is a lower bound.
    if (d != 1) throw std::invalid_argument("diagonal clearance sampling implemented for d = 1");
    const double R = outer_radius();
    const int N = 801;
    const double h = 2.0 * R / (N - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const double y[2] = {-R + h * i, -R + h * j};
            if (contains(y, 1)) best = std::min(best, std::abs(y[0] - y[1]));
        }
    }
    if (!std::isfinite(best)) throw std::invalid_argument("region is empty");
    return std::max(tube, best - h * std::sqrt(2.0));
}

RegionSpec reference_region() { return RegionSpec::compound({RegionSpec::annulus_piece(1.0, 2.0)}, 0.5); }

RegionSpec annulus_minus_tube(double r, double rp, double eps)
{
    return RegionSpec::compound({RegionSpec::annulus_piece(r, rp)}, eps);
}

}  // namespace kgscat
