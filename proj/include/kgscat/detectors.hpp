#pragma once

#include "kgscat/grid.hpp"
#include "kgscat/profiles.hpp"
#include "kgscat/region.hpp"
#include "kgscat/series.hpp"

#include <functional>

namespace kgscat {

struct Trajectory;

// Smooth function of scaled two-particle position y = x / t, either a product
// h1(y1) h2(y2) with disjoint supports or a general region indicator that vanishes on a
// declared tube around the diagonal.
class Cutoff2P {
public:
    enum class Kind { product, region };

    static Cutoff2P product(const Cutoff& h1, const Cutoff& h2);
    // fn is sampled on a lattice inside radius `check_radius` to confirm the clearance.
    static Cutoff2P region(std::function<double(const double* y)> fn, int d, double clearance,
                           double check_radius = 4.0);
    static Cutoff2P smoothed_region(const RegionSpec& K, int d, double delta = 0.05);

    Kind kind() const { return kind_; }
    int dim() const { return d_; }
    double clearance() const { return clearance_; }
    const Cutoff& h1() const { return h1_; }
    const Cutoff& h2() const { return h2_; }
    double operator()(const double* y) const;

private:
    Kind kind_ = Kind::product;
    int d_ = 1;
    double clearance_ = 0.0;
    Cutoff h1_, h2_;
    std::function<double(const double*)> fn_;
};

ComplexField2P apply_Ht(const Cutoff2P& cut, double t, const ComplexField2P& field);
Eigen::VectorXd sample_Ht(const Cutoff2P& cut, double t, const GridSpec& g);
// <F, H(x/t) F>; throws if sampled H leaves [0, 1].
double detector_expectation(const Cutoff2P& cut, double t, const ComplexField2P& field);
DiagnosticSeries two_detector_sweep(const Cutoff& h1, const Cutoff& h2, const Trajectory& traj, int jobs = 1);

}  // namespace kgscat
