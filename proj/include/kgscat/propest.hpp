#pragma once

#include "kgscat/dynamics.hpp"
#include "kgscat/graf.hpp"
#include "kgscat/region.hpp"
#include "kgscat/series.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kgscat {

// Primitive factor of a propagation observable. Position factors act as G(x/t), momentum
// factors as g(D), scalar factors as w(t); a sum factor adds its children.
struct Factor {
    enum class Kind { position, momentum, scalar, sum };
    Kind kind = Kind::scalar;
    std::function<double(const double* y)> position_fn;
    std::function<double(const double* p)> momentum_fn;
    std::function<double(double t)> scalar_fn;
    std::vector<Factor> children;
    bool bounded = true;
    bool compact = false;    // position factor with compact support
    double clearance = 0.0;  // declared distance of the support from the diagonal (position factors)
    std::string label;

    static Factor position(std::function<double(const double* y)> fn, std::string label, bool compact = true,
                           double clearance = 0.0, bool bounded = true);
    static Factor momentum(std::function<double(const double* p)> fn, std::string label);
    static Factor scalar(std::function<double(double t)> fn, std::string label);
    static Factor sum(std::vector<Factor> parts, std::string label);
    // y_j - d omega~/d p_j (D), component j of x/t - grad omega~.
    static Factor phase_difference(int j, double m);
};

// Operators applied right to left: the last factor of a term acts first.
struct Term {
    double coeff = 1.0;
    std::vector<Factor> factors;
};

struct PropagationObservable {
    std::string name;
    std::vector<Term> terms;
    bool symmetrize = false;  // use (M + M*)/2

    // Every term either has only bounded factors or contains a compactly supported position factor.
    bool bounded() const;
    // Every term contains a position factor with positive diagonal clearance.
    bool localized_off_diagonal() const;
};

Eigen::VectorXcd apply_observable(const PropagationObservable& M, double t, const ComplexField2P& u);
double expectation(const PropagationObservable& M, double t, const ComplexField2P& u);

// Library of observables.
PropagationObservable identity_observable();
PropagationObservable momentum_observable(std::function<double(const double* p)> g, std::string name);
PropagationObservable detector_observable(const Cutoff2P& H);
// R(x/t) - 1/2 (grad R(x/t) . (x/t - grad omega~) + h.c.)
PropagationObservable graf_observable(const GrafFunction& gf, double m);
// sum_j (y_j - d_j omega~) G(y) (y_j - d_j omega~)
PropagationObservable free_phase_observable(const Cutoff2P& G, double m);
// sqrt(weight(t)) * chi_K(x/t) (x/t - grad omega~)_j, one term per component (for ||B u||^2 sums)
std::vector<PropagationObservable> phase_space_components(const RegionSpec& K, double m, double delta,
                                                          std::function<double(double)> weight);
PropagationObservable region_observable(const RegionSpec& K, double delta, std::function<double(double)> weight);

DiagnosticSeries large_velocity_series(const Trajectory& traj, double r, double rp, double eps, double delta = 0.05,
                                       int jobs = 1);

struct PhaseSpaceResult {
    DiagnosticSeries series;
    DiagnosticSeries discrepancy;  // || A - B || between the two orderings
};
PhaseSpaceResult phase_space_series(const Trajectory& traj, const RegionSpec& K, double delta = 0.05, int jobs = 1);

struct FreeBoundReport {
    double integral = 0.0;
    double norm_squared = 0.0;
    double C_measured = 0.0;
    DiagnosticSeries series;
};
FreeBoundReport free_phase_space_bound(const ComplexField2P& u0, const RegionSpec& K, double m, double T,
                                       int per_decade = 24, double delta = 0.05);

struct EnsembleReport {
    std::vector<double> C;
    double min = 0.0, max = 0.0;
};
// Seeded draws of localized band-limited two-particle data.
EnsembleReport free_phase_space_ensemble(const GridSpec& g, const RegionSpec& K, double m, double T, int draws,
                                         unsigned long long seed);

double heisenberg_increment(const PropagationObservable& M, const Trajectory& traj, double t, double dt);

struct A1Report {
    double q_start = 0.0, q_end = 0.0;
    double integral_D = 0.0;        // int <u, DM u> dt
    double integral_source = 0.0;   // int 2 Re <M u, r> dt
    double closure_error = 0.0;
    double local_error_estimate = 0.0;
    bool closes = false;
    double integral_B = 0.0;   // int ||B u||^2 dt
    double integral_C = 0.0;   // sum_j int ||C_j u||^2 dt
    double source_abs_integral = 0.0;
    double source_tail_fraction = 0.0;
    double bound = 0.0;
    double ratio = 0.0;        // integral_B / bound
    bool bound_holds = false;
    std::vector<double> t, q, dq, source;
};
A1Report monitor_A1(const PropagationObservable& M, const Trajectory& traj, const PropagationObservable& B_target,
                    const std::vector<PropagationObservable>& C_list, int jobs = 1);

struct A3Report {
    DiagnosticSeries series;  // raw values (may be signed) in `integrand`
    std::vector<double> values;
    double limit_estimate = 0.0;
    double cauchy_tail = 0.0;
    bool converged = false;
};
A3Report monitor_A3(const PropagationObservable& M, const Trajectory& traj, double tol = 1e-3, int jobs = 1);

struct A2Report {
    ComplexField2P vector_limit;
    std::vector<double> t;
    std::vector<double> step_differences;
    double cauchy_tail = 0.0;
};
A2Report monitor_A2(const PropagationObservable& M, const Trajectory& traj, int jobs = 1);

}  // namespace kgscat
