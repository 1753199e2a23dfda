#include "kgscat/graf.hpp"

#include "kgscat/parallel.hpp"
#include "kgscat/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kgscat {

namespace {

constexpr double sqrt2 = 1.4142135623730951;

std::vector<double> kernel(double half_width, double spacing)
{
    const int k = static_cast<int>(std::ceil(half_width / spacing));
    std::vector<double> w(static_cast<std::size_t>(2 * k + 1));
    double sum = 0.0;
    for (int s = -k; s <= k; ++s) sum += w[static_cast<std::size_t>(s + k)] = bump(s * spacing / half_width);
    for (double& x : w) x /= sum;
    return w;
}

void append(std::string& out, double x)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, res.ptr);
}

}  // namespace

void GrafParams::validate() const
{
    if (!(std::sqrt(2.0) < r && r < r1 && r1 < r1p && r1p < rp))
        throw std::invalid_argument("Graf radii must satisfy sqrt(2) < r < r1 < r1' < r'");
    if (c != rp * rp) throw std::invalid_argument("Graf offset c must equal r'^2");
    if (!(beta > 0.0)) throw std::invalid_argument("Graf weight beta must be positive");
    if (!(eps <= eps_beta) || !(eps_mollifier < eps / 4.0))
        throw std::invalid_argument("Graf widths must satisfy eps <= eps_beta and eps' < eps/4");
}

GrafParams choose_params(const RegionSpec& K, const RadiusDefaults& radii)
{
    if (K.kind == RegionSpec::Kind::diagonal_tube) throw std::invalid_argument("K must be compact");
    const double clearance = K.diagonal_clearance(1);
    if (!(clearance > 0.0)) throw std::invalid_argument("K touches the diagonal (v_min = 0)");
    GrafParams p;
    p.r = radii.r;
    p.r1 = radii.r1;
    p.r1p = radii.r1p;
    p.rp = radii.rp;
    const double RK = K.outer_radius();
    if (!std::isfinite(RK)) throw std::invalid_argument("K is not bounded");
    if (RK >= p.r) {
        // expand the radii keeping their gaps
        const double shift = RK + 0.1 - p.r;
        p.r += shift;
        p.r1 += shift;
        p.r1p += shift;
        p.rp += shift;
    }
    if (!(RK < p.r)) throw std::invalid_argument("K is not enclosed by C_r");
    p.c = p.rp * p.rp;
    p.v_min = clearance / sqrt2;
    p.beta = 2.0 * p.c / (p.v_min * p.v_min);
    p.eps_beta = std::sqrt(2.0 * (p.rp * p.rp - p.r1p * p.r1p) / p.beta);
    p.eps = p.eps_beta / 2.0;
    p.eps_mollifier = p.eps / 8.0;
    p.validate();
    return p;
}

double radial_transition(double rho, const GrafParams& p) { return 1.0 - smoothstep((rho - p.r1) / (p.r1p - p.r1)); }

double g_function(double u, double v, const GrafParams& p)
{
    return (u * u + p.beta * v * v - p.c) * radial_transition(std::hypot(u, v), p);
}

GrafFunction build(const GrafParams& params, const GrafBuildOptions& options)
{
    params.validate();
    GrafFunction gf;
    gf.params = params;
    gf.options = options;
    gf.W = params.rp + 1.0;
    gf.h = params.eps_mollifier / options.cells_per_mollifier;
    // separable kernel: product of bumps of half-width a, supported in the ball of radius eps'
    const double a = params.eps_mollifier / sqrt2;
    if (2.0 * a / gf.h < 4.0)
        throw std::invalid_argument("mollifier support spans fewer than 4 grid cells; refine the evaluation grid");
    if (options.v_refinement < 1) throw std::invalid_argument("v_refinement must be at least 1");
    const double axis = std::ceil(2.0 * gf.W / gf.h) + 1.0;
    if (axis > options.max_axis_samples) {
        std::ostringstream os;
        os << "Graf grid needs " << axis << " samples per axis (limit " << options.max_axis_samples
           << "); K is too close to the diagonal for the chosen radii";
        throw std::invalid_argument(os.str());
    }
    gf.N = static_cast<int>(axis);
    const int N = gf.N;
    const int q = options.v_refinement;
    const double hf = gf.h / q;
    const auto wf = kernel(a, hf);
    const auto wk = kernel(a, gf.h);
    const int kf = static_cast<int>(wf.size() / 2), kc = static_cast<int>(wk.size() / 2);

    // R0 vanishes outside C_{r1'}; only nodes within r1' + a can see it.
    const double reach = params.r1p + a + gf.h;
    const int lo = std::max(0, static_cast<int>(std::floor((gf.W - reach) / gf.h)));
    const int hi = std::min(N - 1, static_cast<int>(std::ceil((gf.W + reach) / gf.h)));
    const int band = hi - lo + 1;

    // Pass 1: along v on the refined lattice, rows lo - kc .. hi + kc.
    const int rlo = std::max(0, lo - kc), rhi = std::min(N - 1, hi + kc);
    auto rows = parallel_map(static_cast<std::size_t>(rhi - rlo + 1), options.jobs, [&](std::size_t r) {
        const int i = rlo + static_cast<int>(r);
        const double u = gf.u(i);
        std::vector<double> out(static_cast<std::size_t>(band), 0.0);
        if (std::abs(u) > params.r1p) return out;
        // fine nodes covering v in [v(lo) - a, v(hi) + a]
        const int fine = (band - 1) * q + 1 + 2 * kf;
        const double v0 = gf.v(lo) - kf * hf;
        std::vector<double> r0(static_cast<std::size_t>(fine));
        for (int k = 0; k < fine; ++k) {
            const double v = v0 + k * hf;
            r0[static_cast<std::size_t>(k)] = std::max(g_function(u, v, params), 0.0);
        }
        for (int j = 0; j < band; ++j) {
            double acc = 0.0;
            const int c = j * q + kf;
            for (int s = -kf; s <= kf; ++s) acc += wf[static_cast<std::size_t>(s + kf)] * r0[static_cast<std::size_t>(c + s)];
            out[static_cast<std::size_t>(j)] = acc;
        }
        return out;
    });

    // Pass 2: along u on the grid itself.
    gf.R.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(N), 0.0);
    for (int i = lo; i <= hi; ++i) {
        for (int s = -kc; s <= kc; ++s) {
            const int src = i - s;
            if (src < rlo || src > rhi) continue;
            const double w = wk[static_cast<std::size_t>(s + kc)];
            const auto& row = rows[static_cast<std::size_t>(src - rlo)];
            double* dst = &gf.R[static_cast<std::size_t>(i) * static_cast<std::size_t>(N) + static_cast<std::size_t>(lo)];
            for (int j = 0; j < band; ++j) dst[j] += w * row[static_cast<std::size_t>(j)];
        }
    }
    return gf;
}

Eigen::Vector2d GrafFunction::gradient_uv(int i, int j) const
{
    return {(at(i + 1, j) - at(i - 1, j)) / (2.0 * h), (at(i, j + 1) - at(i, j - 1)) / (2.0 * h)};
}

Eigen::Matrix2d GrafFunction::hessian_uv(int i, int j) const
{
    const double c = at(i, j);
    const double huu = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) / (h * h);
    const double hvv = (at(i, j + 1) - 2.0 * c + at(i, j - 1)) / (h * h);
    const double huv = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * h * h);
    Eigen::Matrix2d H;
    H << huu, huv, huv, hvv;
    return H;
}

namespace {

// Locates the cell containing (u, v); returns false outside the interior.
bool locate(const GrafFunction& gf, const double* y, int& i, int& j, double& fu, double& fv)
{
    const double u = (y[0] + y[1]) / sqrt2, v = (y[0] - y[1]) / sqrt2;
    const double su = (u + gf.W) / gf.h, sv = (v + gf.W) / gf.h;
    if (!(su >= 1.0 && sv >= 1.0 && su < gf.N - 2 && sv < gf.N - 2)) return false;
    i = static_cast<int>(su);
    j = static_cast<int>(sv);
    fu = su - i;
    fv = sv - j;
    return true;
}

template <typename F>
auto bilinear(int i, int j, double fu, double fv, F&& f)
{
    return (1 - fu) * (1 - fv) * f(i, j) + fu * (1 - fv) * f(i + 1, j) + (1 - fu) * fv * f(i, j + 1) +
           fu * fv * f(i + 1, j + 1);
}

}  // namespace

double GrafFunction::value(const double* y) const
{
    int i, j;
    double fu, fv;
    if (!locate(*this, y, i, j, fu, fv)) return 0.0;
    return bilinear(i, j, fu, fv, [&](int a, int b) { return at(a, b); });
}

Eigen::Vector2d GrafFunction::gradient(const double* y) const
{
    int i, j;
    double fu, fv;
    if (!locate(*this, y, i, j, fu, fv)) return Eigen::Vector2d::Zero();
    const Eigen::Vector2d guv = bilinear(i, j, fu, fv, [&](int a, int b) { return Eigen::Vector2d(gradient_uv(a, b)); });
    return {(guv[0] + guv[1]) / sqrt2, (guv[0] - guv[1]) / sqrt2};
}

GrafReport hessian_check(const GrafFunction& gf, const RegionSpec& K)
{
    const auto& p = gf.params;
    GrafReport rep;
    const int N = gf.N;
    const double tube_half = p.eps / 2.0;
    const double outer = p.rp + p.eps_mollifier;

    // first sweep: scale of the Hessian and zero-set checks
    double scale = 0.0;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const double R = gf.at(i, j);
            rep.peak = std::max(rep.peak, std::abs(R));
            const double u = gf.u(i), v = gf.v(j);
            if (std::abs(v) * sqrt2 <= tube_half) rep.max_on_tube = std::max(rep.max_on_tube, std::abs(R));
            if (std::hypot(u, v) > outer) rep.max_outside = std::max(rep.max_outside, std::abs(R));
            if (i > 0 && j > 0 && i < N - 1 && j < N - 1) {
                const auto H = gf.hessian_uv(i, j);
                scale = std::max({scale, std::abs(H(0, 0)), std::abs(H(1, 1)), std::abs(H(0, 1))});
            }
            if (i > 1 && i < N - 2) {
                const double d4 = gf.at(i - 2, j) - 4 * gf.at(i - 1, j) + 6 * R - 4 * gf.at(i + 1, j) + gf.at(i + 2, j);
                rep.max_fourth_difference = std::max(rep.max_fourth_difference, std::abs(d4) / std::pow(gf.h, 4));
            }
        }
    }
    rep.hessian_scale = scale;
    rep.tol = 1e-6 * scale;
    rep.c1 = std::numeric_limits<double>::infinity();
    rep.min_eig_Cr = std::numeric_limits<double>::infinity();

    struct Sample {
        double lmin;
        bool inK, inCr, inAnnulusOffTube;
    };
    std::vector<Sample> samples;
    const double reach = p.rp + 2.0 * gf.h;
    for (int i = 1; i < N - 1; ++i) {
        const double u = gf.u(i);
        if (std::abs(u) > reach) continue;
        for (int j = 1; j < N - 1; ++j) {
            const double v = gf.v(j);
            const double rho = std::hypot(u, v);
            if (rho > reach) continue;
            const double y[2] = {(u + v) / sqrt2, (u - v) / sqrt2};
            const bool inK = K.contains(y, 1);
            const bool inCr = rho <= p.r;
            const bool inAnn = rho >= p.r && rho <= p.rp;
            const bool offTube = std::abs(v) * sqrt2 > p.eps;
            const auto H = gf.hessian_uv(i, j);
            const double tr = 0.5 * (H(0, 0) + H(1, 1));
            const double disc = std::sqrt(0.25 * (H(0, 0) - H(1, 1)) * (H(0, 0) - H(1, 1)) + H(0, 1) * H(0, 1));
            const double lmin = tr - disc;
            samples.push_back({lmin, inK, inCr, inAnn && offTube});
            if (inK) {
                ++rep.samples_K;
                rep.c1 = std::min(rep.c1, lmin);
            }
            if (inAnn) {
                ++rep.samples_annulus;
                rep.c2 = std::max(rep.c2, -lmin);
            }
            if (inCr) {
                ++rep.samples_Cr;
                rep.min_eig_Cr = std::min(rep.min_eig_Cr, lmin);
                if (lmin < -rep.tol) {
                    ++rep.violations;
                    // distance to the edge of supp max(g, 0); F = 1 on C_r
                    const double g = u * u + p.beta * v * v - p.c;
                    const double dist = std::abs(g) / std::hypot(2.0 * u, 2.0 * p.beta * v);
                    rep.max_exception_distance = std::max(rep.max_exception_distance, dist);
                }
            }
        }
    }
    if (rep.samples_Cr > 0) rep.violation_fraction = double(rep.violations) / double(rep.samples_Cr);
    rep.exceptions_localized = rep.max_exception_distance <= 2.0 * p.eps_mollifier;
    std::size_t e51 = 0;
    for (const auto& s : samples) {
        const double lhs = s.lmin + (s.inAnnulusOffTube ? rep.c2 : 0.0);
        const double rhs = s.inK ? rep.c1 : 0.0;
        if (lhs < rhs - rep.tol) ++e51;
    }
    rep.e51_violation_fraction = samples.empty() ? 0.0 : double(e51) / double(samples.size());
    return rep;
}

void export_table(const GrafFunction& gf, std::ostream& os, int stride)
{
    if (stride < 1) throw std::invalid_argument("table stride must be positive");
    os << "y1,y2,R,dR_dy1,dR_dy2,H11,H12,H22\n";
    std::string line;
    for (int i = 1; i < gf.N - 1; i += stride) {
        for (int j = 1; j < gf.N - 1; j += stride) {
            const double u = gf.u(i), v = gf.v(j);
            const auto guv = gf.gradient_uv(i, j);
            const auto Huv = gf.hessian_uv(i, j);
            // rotate to y coordinates: y1 = (u + v)/sqrt2, y2 = (u - v)/sqrt2
            Eigen::Matrix2d Rot;
            Rot << 1.0 / sqrt2, 1.0 / sqrt2, 1.0 / sqrt2, -1.0 / sqrt2;
            const Eigen::Vector2d gy = Rot * guv;
            const Eigen::Matrix2d Hy = Rot * Huv * Rot.transpose();
            line.clear();
            for (double x : {(u + v) / sqrt2, (u - v) / sqrt2, gf.at(i, j), gy[0], gy[1], Hy(0, 0), Hy(0, 1), Hy(1, 1)}) {
                if (!line.empty()) line += ',';
                append(line, x);
            }
            line += '\n';
            os << line;
        }
    }
}

}  // namespace kgscat
