#include "kgscat/asymptotics.hpp"

#include "kgscat/parallel.hpp"
#include "kgscat/specops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kgscat {

namespace {

double norm_of(const Eigen::VectorXcd& v, const GridSpec& g)
{
    return std::sqrt(v.squaredNorm() * cell_weight(g, 2, Representation::position));
}

std::vector<double> dyadic_checkpoints(const Trajectory& traj)
{
    const double t0 = traj.times.front(), T = traj.final_time();
    std::vector<double> out;
    for (double t = t0; t <= T * (1.0 + 1e-12); t *= 2.0)
        if (traj.has(t)) out.push_back(t);
    if (out.empty() || std::abs(out.back() - T) > 1e-9 * T) out.push_back(T);
    return out;
}

}  // namespace

ComplexField2P G_at(const Trajectory& traj, const Cutoff2P& H, double t)
{
    const auto Hu = apply_Ht(H, t, traj.at(t));
    return free_propagator(omega_tilde_multiplier(traj.grid, traj.m), -t)(Hu);
}

LimitResult intermediate_limit(const Trajectory& traj, const Cutoff2P& H, double tol, int jobs)
{
    if (!traj.valid) throw std::invalid_argument("intermediate_limit needs a valid trajectory: " + traj.diagnosis);
    if (traj.times.empty()) throw std::invalid_argument("intermediate_limit needs snapshots");
    if (H.kind() != Cutoff2P::Kind::product && !(H.clearance() > 0.0))
        throw std::invalid_argument("detector cutoff is neither a product nor clear of the diagonal");
    LimitResult res;
    res.tol = tol;
    res.checkpoints = dyadic_checkpoints(traj);
    const auto wt = omega_tilde_multiplier(traj.grid, traj.m);
    const auto G = parallel_map(res.checkpoints.size(), jobs, [&](std::size_t k) {
        const double t = res.checkpoints[k];
        return free_propagator(wt, -t)(apply_Ht(H, t, traj.at(t)));
    });
    for (std::size_t k = 0; k < G.size(); ++k) {
        res.norms.push_back(l2_norm(G[k]));
        res.cauchy_tail.push_back(k == 0 ? 0.0 : norm_of(G[k].values - G[k - 1].values, traj.grid));
    }
    res.final_vector = G.back();
    res.converged = G.size() > 1 && res.cauchy_tail.back() <= tol * res.norms.back();
    return res;
}

ComplexField2P fourier_oracle_sourcefree(const ComplexField2P& u0, const Cutoff& h1, const Cutoff& h2, double m)
{
    return apply_multiplier(velocity_cutoff(h1, h2, u0.grid, m), u0);
}

ComplexField2P free_data_at_start(const Trajectory& traj)
{
    const double t0 = traj.times.front();
    return free_propagator(omega_tilde_multiplier(traj.grid, traj.m), -t0)(traj.snapshots.front());
}

double oracle_residual(const LimitResult& limit, const Trajectory& traj, const Cutoff& h1, const Cutoff& h2)
{
    const auto oracle = fourier_oracle_sourcefree(free_data_at_start(traj), h1, h2, traj.m);
    const double on = l2_norm(oracle);
    const double diff = norm_of(limit.final_vector.values - oracle.values, traj.grid);
    return on > 0.0 ? diff / on : diff;
}

WaveOperatorResult cook_wave_adjoint(const Trajectory& traj, double tail_threshold)
{
    if (!traj.valid) throw std::invalid_argument("cook_wave_adjoint needs a valid trajectory: " + traj.diagnosis);
    const bool sourced = traj.source.kind != SourceModel::Kind::none;
    if (traj.source.kind == SourceModel::Kind::tabulated)
        throw std::invalid_argument("cook_wave_adjoint needs a pair-potential run");
    if (sourced && traj.cook.size() != traj.times.size())
        throw std::invalid_argument("cook_wave_adjoint needs a run with cook_integral enabled");
    const auto& g = traj.grid;
    const double T = traj.final_time();
    WaveOperatorResult res;
    res.tail_threshold = tail_threshold;

    const auto start = free_data_at_start(traj);
    auto mapped_at = [&](std::size_t k) {
        ComplexField2P out = start;
        if (sourced) {
            Eigen::VectorXcd c = traj.cook[k];
            fft_inverse_inplace(g, 2 * g.d, c);
            out.values += c;
        }
        return out;
    };
    res.mapped = mapped_at(traj.times.size() - 1);
    res.direct = free_propagator(omega_tilde_multiplier(g, traj.m), -T)(traj.snapshots.back());
    const double psi = l2_norm(traj.snapshots.front());
    res.route_difference = psi > 0.0 ? norm_of(res.mapped.values - res.direct.values, g) / psi : 0.0;
    res.isometry_defect = std::abs(l2_norm(res.mapped) - psi);

    std::size_t half = 0;
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        if (traj.times[k] <= 0.5 * T * (1.0 + 1e-12)) half = k;
    const double mn = l2_norm(res.mapped);
    const double change = norm_of(res.mapped.values - mapped_at(half).values, g);
    res.half_horizon_change = mn > 0.0 ? change / mn : change;

    res.tail_lo = 0.5 * T;
    res.tail_hi = T;
    for (const auto& s : traj.steps)
        if (s.t >= res.tail_lo - 1e-12) {
            res.tail_t.push_back(s.t);
            res.tail_norms.push_back(s.source_norm);
        }
    for (std::size_t k = 1; k < res.tail_t.size(); ++k)
        res.tail_estimate += 0.5 * (res.tail_t[k] - res.tail_t[k - 1]) * (res.tail_norms[k] + res.tail_norms[k - 1]);
    res.converged = res.tail_estimate <= tail_threshold;
    return res;
}

CompletenessReport completeness_report(const Trajectory& traj, const Cutoff& h1, const Cutoff& h2, double tol, int jobs)
{
    const auto wave = cook_wave_adjoint(traj);
    const auto limit = intermediate_limit(traj, Cutoff2P::product(h1, h2), tol, jobs);
    CompletenessReport rep;
    rep.wave_converged = wave.converged;
    rep.limit_converged = limit.converged;
    rep.limit_norm = l2_norm(limit.final_vector);
    rep.psi_norm = l2_norm(traj.snapshots.front());
    const auto restricted = fourier_oracle_sourcefree(wave.mapped, h1, h2, traj.m);
    const double diff = norm_of(limit.final_vector.values - restricted.values, traj.grid);
    rep.residual = rep.psi_norm > 0.0 ? diff / rep.psi_norm : diff;
    if (traj.source.kind == SourceModel::Kind::pair_potential) {
        const auto v = sample_potential(traj.source.potential, traj.grid);
        rep.attractive = v.size() > 0 && v.minCoeff() < 0.0;
    }
    if (rep.attractive)
        rep.caveat = "attractive potential: bound states may carry mass that no free data captures";
    return rep;
}

}  // namespace kgscat
