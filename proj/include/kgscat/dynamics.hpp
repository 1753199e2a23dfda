#pragma once

#include "kgscat/detectors.hpp"
#include "kgscat/grid.hpp"
#include "kgscat/specops.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kgscat {

// Pair potential V(x1 - x2). The relative coordinate uses the minimal periodic image.
struct PotentialSpec {
    enum class Kind { gaussian, sampled };
    Kind kind = Kind::gaussian;
    double lambda = 0.0;
    double sigma = 1.0;
    std::function<double(const double* rel)> fn;  // sampled kind

    static PotentialSpec gaussian(double lambda, double sigma);
    static PotentialSpec sampled(std::function<double(const double* rel)> fn);
    double operator()(const double* rel, int d) const;
};

struct SourceModel {
    enum class Kind { none, pair_potential, tabulated };
    Kind kind = Kind::none;
    PotentialSpec potential;
    // r(t) as position-space samples on the two-particle grid.
    std::function<Eigen::VectorXcd(double t)> sampler;

    static SourceModel none();
    static SourceModel pair(const PotentialSpec& v);
    static SourceModel tabulated(std::function<Eigen::VectorXcd(double t)> r);
};

enum class Scheme { strang, duhamel_midpoint };

struct SnapshotSchedule {
    int log_per_decade = 0;     // log-spaced times from t0 to T
    int linear_count = 0;       // equally spaced times from t0 to T
    bool dyadic = false;        // t0 * 2^k
    std::vector<double> extra;  // explicit times
};

struct EvolutionConfig {
    double t0 = 1.0;
    double T = 400.0;
    double dt = 0.25;
    Scheme scheme = Scheme::strang;
    SnapshotSchedule snapshots;
    double wrap_tol = 1e-10;    // boundary mass fraction allowed in the outer 5% of the box
    bool cook_integral = false; // accumulate int e^{is omega~} r(s) ds along the run
    // Source-free runs are exact between event times; stepping only adds log entries.
    bool step_free_runs = false;
};

std::vector<double> snapshot_times(const EvolutionConfig& cfg);
void validate(const EvolutionConfig& cfg);

struct StepRecord {
    double t = 0.0;
    double norm = 0.0;
    double boundary_mass = 0.0;
    double source_norm = 0.0;  // ||r(t)||, zero for source-free runs
};

struct Trajectory {
    GridSpec grid;
    double m = 1.0;
    EvolutionConfig config;
    SourceModel source;
    std::vector<double> times;
    std::vector<ComplexField2P> snapshots;
    std::vector<StepRecord> steps;
    bool valid = true;
    std::string diagnosis;
    std::size_t step_count = 0;
    // Cook quadrature: int_{t0}^{t} e^{is omega~} r(s) ds, momentum representation, at each snapshot.
    std::vector<Eigen::VectorXcd> cook;

    std::size_t index_of(double t) const;  // throws if t is not a snapshot time
    bool has(double t) const;
    const ComplexField2P& at(double t) const { return snapshots[index_of(t)]; }
    double final_time() const { return times.empty() ? 0.0 : times.back(); }
};

// Boundary layer: points with some |x_i| > 0.95 L.
double boundary_mass_fraction(const Eigen::VectorXcd& v, const GridSpec& g);
Eigen::VectorXd sample_potential(const PotentialSpec& V, const GridSpec& g);

ComplexField2P step_free(const ComplexField2P& field, double dt, double m);
ComplexField2P step_strang(const ComplexField2P& field, double dt, const PotentialSpec& V, double m);
ComplexField2P step_duhamel(const ComplexField2P& field, double t, double dt, const SourceModel& source, double m);

// Source r(t) for the given state: -i V u for pair potentials, the sampler for tables.
Eigen::VectorXcd source_term(const SourceModel& source, const Eigen::VectorXd& vgrid, double t,
                             const Eigen::VectorXcd& u);

Trajectory run(const ComplexField2P& initial, const SourceModel& source, const EvolutionConfig& config, double m);

double source_offdiag_norm(const Trajectory& traj, const Cutoff2P& Htilde, double t);

}  // namespace kgscat
