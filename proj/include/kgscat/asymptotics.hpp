#pragma once

#include "kgscat/detectors.hpp"
#include "kgscat/dynamics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kgscat {

// G(t) = e^{it omega~(D)} H(x/t) u(t) sampled at dyadic checkpoints t0 2^k plus T.
struct LimitResult {
    ComplexField2P final_vector;
    std::vector<double> checkpoints;
    std::vector<double> norms;         // ||G(t_k)||
    std::vector<double> cauchy_tail;   // ||G(t_k) - G(t_{k-1})||, first entry 0
    double tol = 1e-2;
    bool converged = false;
    std::optional<double> oracle_residual;
};

ComplexField2P G_at(const Trajectory& traj, const Cutoff2P& H, double t);
LimitResult intermediate_limit(const Trajectory& traj, const Cutoff2P& H, double tol = 1e-2, int jobs = 1);

// h1(grad omega(D_1)) h2(grad omega(D_2)) u0 by momentum multiplication.
ComplexField2P fourier_oracle_sourcefree(const ComplexField2P& u0, const Cutoff& h1, const Cutoff& h2, double m);
// e^{i t0 omega~} u(t0): the free data reached at t0.
ComplexField2P free_data_at_start(const Trajectory& traj);
// ||G(T) - oracle|| / ||oracle|| with the oracle applied to the free data at t0.
double oracle_residual(const LimitResult& limit, const Trajectory& traj, const Cutoff& h1, const Cutoff& h2);

struct WaveOperatorResult {
    ComplexField2P mapped;  // e^{it0 omega~} u(t0) + int_{t0}^{T} e^{is omega~} r(s) ds
    ComplexField2P direct;  // e^{iT omega~} u(T)
    double route_difference = 0.0;    // ||mapped - direct|| / ||u(t0)||
    double isometry_defect = 0.0;     // | ||mapped|| - ||u(t0)|| |
    double half_horizon_change = 0.0; // ||mapped(T) - mapped(T')|| / ||mapped(T)||, T' the last snapshot <= T/2
    std::vector<double> tail_t, tail_norms;  // ||r(t)|| over the tail window
    double tail_lo = 0.0, tail_hi = 0.0;
    double tail_estimate = 0.0;              // int ||r|| dt over [tail_lo, tail_hi]
    double tail_threshold = 3e-2;
    bool converged = false;
};

// Needs a pair-potential run with the Cook integral enabled. The run stops at T, so the
// tail integral is taken over [T/2, T].
WaveOperatorResult cook_wave_adjoint(const Trajectory& traj, double tail_threshold = 3e-2);

struct CompletenessReport {
    double residual = 0.0;  // ||F+ - h1(grad omega) h2(grad omega) W*Psi|| / ||Psi||
    double limit_norm = 0.0;
    double psi_norm = 0.0;
    bool limit_converged = false;
    bool wave_converged = false;
    bool attractive = false;
    std::string caveat;
};

CompletenessReport completeness_report(const Trajectory& traj, const Cutoff& h1, const Cutoff& h2, double tol = 1e-2,
                                       int jobs = 1);

}  // namespace kgscat
