#pragma once

#include <Eigen/Core>

namespace kgscat {

// e^{1 - 1/(1 - s^2)} on |s| < 1, zero elsewhere; peak value 1 at s = 0.
double bump(double s);

// Monotone C-infinity step: 0 for s <= 0, 1 for s >= 1, normalized integral of the
// bump rescaled to [0, 1] in between.
double smoothstep(double s);

// 1 for dist <= 0, 0 for dist >= width, smooth in between.
inline double fall_off(double dist, double width) { return 1.0 - smoothstep(dist / width); }

// Radial profile around a point of velocity space: 1 within `inner`, 0 beyond `outer`.
struct Cutoff {
    Eigen::VectorXd center;
    double inner = 0.0;
    double outer = 0.0;

    Cutoff() = default;
    Cutoff(Eigen::VectorXd c, double a, double b);
    // One-dimensional convenience: plateau [lo, hi] with transition width w on each side.
    static Cutoff interval(double lo, double hi, double w);
    // Constant 1 on the ball of radius R around the origin (used as "h = 1 everywhere").
    static Cutoff everywhere(int dim, double R = 1e6);

    int dim() const { return static_cast<int>(center.size()); }
    double operator()(const double* y) const;
    double operator()(double y) const { return (*this)(&y); }
    double transition() const { return outer - inner; }
};

}  // namespace kgscat
