#pragma once

#include <vector>

namespace kgscat {

// Subsets of scaled two-particle space y = (y1, y2) in R^{2d}. Sharp membership and a
// smoothed indicator that is 1 on the set and falls to 0 within `delta` outside it.
struct RegionSpec {
    enum class Kind { annulus, ball, diagonal_tube, compound };

    struct Piece {
        bool is_box = false;
        double r_in = 0.0, r_out = 0.0;
        std::vector<double> lo, hi;  // per coordinate, boxes only
    };

    Kind kind = Kind::annulus;
    double r_in = 0.0, r_out = 0.0;  // annulus / ball
    double tube = 0.0;               // diagonal tube width, or width removed from a compound set
    std::vector<Piece> pieces;

    static RegionSpec annulus(double r1, double r2);
    static RegionSpec ball(double r);
    static RegionSpec diagonal_tube(double eps);
    // Union of pieces minus the tube {|y1 - y2| <= tube}.
    static RegionSpec compound(std::vector<Piece> pieces, double tube);
    static Piece annulus_piece(double r1, double r2);
    static Piece box_piece(std::vector<double> lo, std::vector<double> hi);

    bool contains(const double* y, int d) const;
    double smoothed(const double* y, int d, double delta) const;
    // Radius of a ball centred at 0 containing the set (infinite for a tube).
    double outer_radius() const;
    // Lower bound on |y1 - y2| over the sharp set, found by sampling where needed.
    double diagonal_clearance(int d) const;
};

// Reference compact set {1 <= |y| <= 2, |y1 - y2| >= 0.5}.
RegionSpec reference_region();
// C_{r,r'} minus D_eps.
RegionSpec annulus_minus_tube(double r, double rp, double eps);

double diagonal_distance(const double* y, int d);
double radius(const double* y, int d);

}  // namespace kgscat
