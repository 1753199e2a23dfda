#include "helpers.hpp"
#include "kgscat/asymptotics.hpp"
#include "kgscat/specops.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgscat;

namespace {

Trajectory dyadic_run(const ComplexField2P& u0, const SourceModel& src, double T)
{
    EvolutionConfig cfg;
    cfg.t0 = 1.0;
    cfg.T = T;
    cfg.dt = 0.25;
    cfg.snapshots.dyadic = true;
    cfg.cook_integral = true;
    return run(u0, src, cfg, 1.0);
}

}  // namespace

TEST_CASE("velocity oracle")
{
    auto g = make_grid(1, 64, 30.0);
    std::mt19937_64 rng(21);
    auto u = testutil::random_bandlimited<2>(g, rng);
    auto all = Cutoff::everywhere(1);
    CHECK(testutil::rel_diff(fourier_oracle_sourcefree(u, all, all, 1.0).values, u.values) < 1e-15);
    auto v = testutil::pair_state(g, 1.0, 0.8, 0.3, -2.0, -0.8, 0.3, 2.0);
    auto none = Cutoff::interval(2.0, 3.0, 0.1);  // no group velocity reaches |v| >= 1
    CHECK(l2_norm(fourier_oracle_sourcefree(v, none, none, 1.0)) == 0.0);
    auto h1 = Cutoff::interval(0.2, 0.6, 0.1), h2 = Cutoff::interval(-0.8, -0.1, 0.1);
    auto o = fourier_oracle_sourcefree(u, h1, h2, 1.0);
    CHECK(l2_norm(o) <= l2_norm(u));
    // commutes with the free evolution
    auto P = free_propagator(omega_tilde_multiplier(g, 1.0), 3.3);
    CHECK(testutil::rel_diff(P(o).values, fourier_oracle_sourcefree(P(u), h1, h2, 1.0).values) < 1e-12);
}

TEST_CASE("intermediate limit")
{
    auto g = make_grid(1, 256, 60.0);
    auto h1 = Cutoff::interval(0.3, 1.0, 0.1), h2 = Cutoff::interval(-1.0, -0.3, 0.1);
    auto H = Cutoff2P::product(h1, h2);

    auto zero = dyadic_run(ComplexField2P(g), SourceModel::none(), 16.0);
    auto lz = intermediate_limit(zero, H);
    CHECK(l2_norm(lz.final_vector) == 0.0);
    CHECK(lz.converged);

    auto u0 = testutil::gaussian_pair(g, -3.0, 0.9, 3.0, -0.9, 2.0);
    auto traj = dyadic_run(u0, SourceModel::none(), 32.0);
    auto lim = intermediate_limit(traj, H);
    CHECK(lim.checkpoints == std::vector<double>{1, 2, 4, 8, 16, 32});
    CHECK(l2_norm(lim.final_vector) <= l2_norm(u0) + 1e-12);
    CHECK(lim.cauchy_tail.size() == 6);
    CHECK(lim.cauchy_tail.front() == 0.0);
    // residual against the oracle shrinks with the horizon
    LimitResult early = lim;
    early.final_vector = G_at(traj, H, 8.0);
    CHECK(oracle_residual(lim, traj, h1, h2) < oracle_residual(early, traj, h1, h2));
    auto G = G_at(traj, H, 32.0);
    CHECK(testutil::rel_diff(G.values, lim.final_vector.values) < 1e-15);

    auto region = Cutoff2P::region([](const double* y) { return std::abs(y[0] - y[1]) > 0.5 ? 1.0 : 0.0; }, 1, 0.4);
    CHECK_NOTHROW(intermediate_limit(traj, region));
}

TEST_CASE("Cook wave operator")
{
    auto g = make_grid(1, 256, 60.0);
    auto u0 = testutil::gaussian_pair(g, -3.0, 0.9, 3.0, -0.9, 2.0);
    // V = 0: the map is e^{i t0 w} u(t0)
    auto free = dyadic_run(u0, SourceModel::pair(PotentialSpec::gaussian(0.0, 0.5)), 8.0);
    auto w0 = cook_wave_adjoint(free);
    CHECK(w0.isometry_defect < 1e-12);
    CHECK(testutil::rel_diff(w0.mapped.values, free_data_at_start(free).values) < 1e-12);
    CHECK(w0.tail_estimate == 0.0);
    CHECK(w0.converged);

    auto traj = dyadic_run(u0, SourceModel::pair(PotentialSpec::gaussian(0.2, 0.5)), 32.0);
    auto w = cook_wave_adjoint(traj);
    CHECK(w.route_difference < 1e-2);
    CHECK(w.isometry_defect < 1e-2);
    CHECK(w.tail_lo == 16.0);
    CHECK(w.tail_estimate > 0.0);
    auto strict = cook_wave_adjoint(traj, 0.0);
    CHECK_FALSE(strict.converged);

    EvolutionConfig cfg;
    cfg.T = 4.0;
    auto no_cook = run(u0, SourceModel::pair(PotentialSpec::gaussian(0.2, 0.5)), cfg, 1.0);
    CHECK_THROWS(cook_wave_adjoint(no_cook));
}

TEST_CASE("completeness report")
{
    auto g = make_grid(1, 256, 60.0);
    auto h1 = Cutoff::interval(0.3, 1.0, 0.1), h2 = Cutoff::interval(-1.0, -0.3, 0.1);
    auto u0 = testutil::gaussian_pair(g, -3.0, 0.9, 3.0, -0.9, 2.0);
    auto traj = dyadic_run(u0, SourceModel::pair(PotentialSpec::gaussian(0.2, 0.5)), 32.0);
    auto rep = completeness_report(traj, h1, h2);
    CHECK_FALSE(rep.attractive);
    CHECK(rep.caveat.empty());
    CHECK(rep.psi_norm == doctest::Approx(1.0));
    // swapping detectors is the same geometry for a symmetric state
    auto swapped = completeness_report(traj, h2, h1);
    CHECK(swapped.residual == doctest::Approx(rep.residual).epsilon(1e-10));

    auto attr = dyadic_run(u0, SourceModel::pair(PotentialSpec::gaussian(-0.2, 0.5)), 8.0);
    auto ra = completeness_report(attr, h1, h2);
    CHECK(ra.attractive);
    CHECK_FALSE(ra.caveat.empty());
}
