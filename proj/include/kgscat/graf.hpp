#pragma once

#include "kgscat/region.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace kgscat {

// Convex function R = eta * max(g, 0), g = (u^2 + beta v^2 - c) F on scaled two-particle
// space (d = 1), with u = (y1 + y2)/sqrt2, v = (y1 - y2)/sqrt2.
struct GrafParams {
    double r = 0.0, r1 = 0.0, r1p = 0.0, rp = 0.0;
    double c = 0.0;          // rp^2
    double beta = 0.0;       // 2c / v_min^2
    double v_min = 0.0;      // min over K of |y1 - y2| / sqrt2
    double eps_beta = 0.0;   // sqrt(2 (rp^2 - r1p^2) / beta)
    double eps = 0.0;        // eps_beta / 2
    double eps_mollifier = 0.0;  // eps / 8

    void validate() const;
};

struct RadiusDefaults {
    double r = 2.1, r1 = 2.2, r1p = 2.4, rp = 8.0;
};

GrafParams choose_params(const RegionSpec& K, const RadiusDefaults& radii = {});

struct GrafBuildOptions {
    double cells_per_mollifier = 4.0;  // grid spacing h = eps' / cells
    int v_refinement = 8;              // quadrature nodes per grid cell along v
    int jobs = 1;
    int max_axis_samples = 8192;       // memory guard: N^2 doubles
};

struct GrafFunction {
    GrafParams params;
    GrafBuildOptions options;
    int N = 0;       // samples per axis of the (u, v) grid
    double h = 0.0;  // grid spacing
    double W = 0.0;  // grid covers [-W, W]^2, W = r' + 1
    std::vector<double> R;  // row-major, R[i * N + j] at (u_i, v_j)

    double u(int i) const { return -W + h * i; }
    double v(int j) const { return -W + h * j; }
    double at(int i, int j) const { return R[static_cast<std::size_t>(i) * static_cast<std::size_t>(N) + static_cast<std::size_t>(j)]; }

    // Central differences in (u, v) at an interior node.
    Eigen::Vector2d gradient_uv(int i, int j) const;
    Eigen::Matrix2d hessian_uv(int i, int j) const;

    // Bilinear interpolation in scaled Cartesian coordinates y = (y1, y2).
    double value(const double* y) const;
    Eigen::Vector2d gradient(const double* y) const;
};

double radial_transition(double rho, const GrafParams& p);
double g_function(double u, double v, const GrafParams& p);

GrafFunction build(const GrafParams& params, const GrafBuildOptions& options = {});

struct GrafReport {
    double c1 = 0.0;                  // min Hessian eigenvalue over K
    double c2 = 0.0;                  // max negative part over C_{r,r'}
    double violation_fraction = 0.0;  // share of C_r samples with min eigenvalue < -tol
    double tol = 0.0;                 // 1e-6 * max |Hessian entry|
    double hessian_scale = 0.0;
    double min_eig_Cr = 0.0;
    std::size_t samples_K = 0, samples_Cr = 0, samples_annulus = 0, violations = 0;
    // Largest distance from a convexity exception to the edge of supp max(g, 0).
    double max_exception_distance = 0.0;
    bool exceptions_localized = true;  // all exceptions within 2 eps'
    double e51_violation_fraction = 0.0;
    double peak = 0.0;
    double max_on_tube = 0.0;     // max |R| on D_{eps/2}
    double max_outside = 0.0;     // max |R| outside C_{r' + eps'}
    double max_fourth_difference = 0.0;
};

GrafReport hessian_check(const GrafFunction& gf, const RegionSpec& K);

// Table rows (y1, y2, R, dR/dy1, dR/dy2, H11, H12, H22) on every `stride`-th node.
void export_table(const GrafFunction& gf, std::ostream& os, int stride = 8);

}  // namespace kgscat
