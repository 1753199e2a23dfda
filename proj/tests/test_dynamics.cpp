#include "helpers.hpp"
#include "kgscat/dynamics.hpp"
#include "kgscat/specops.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgscat;

namespace {

GridSpec small_grid() { return make_grid(1, 64, 20.0); }

double dist(const ComplexField2P& a, const ComplexField2P& b) { return l2_norm(ComplexField2P(a.grid, a.values - b.values)); }

ComplexField2P final_state(const ComplexField2P& u0, const SourceModel& src, Scheme scheme, double dt, double T)
{
    EvolutionConfig cfg;
    cfg.t0 = 1.0;
    cfg.T = T;
    cfg.dt = dt;
    cfg.scheme = scheme;
    return run(u0, src, cfg, 1.0).snapshots.back();
}

// Exact solution of i u' = omega~(D) u + i r for constant r, in momentum space.
ComplexField2P constant_source_solution(const ComplexField2P& u0, const ComplexField2P& r, double tau)
{
    auto uh = fourier_forward(u0), rh = fourier_forward(r);
    const auto w = omega_tilde_multiplier(u0.grid, 1.0);
    for (Eigen::Index k = 0; k < uh.values.size(); ++k) {
        const double h = w.samples[k].real();
        const cplx e = std::exp(cplx(0.0, -tau * h));
        uh.values[k] = e * uh.values[k] + (1.0 - e) / cplx(0.0, h) * rh.values[k];
    }
    return fourier_inverse(uh);
}

}  // namespace

TEST_CASE("snapshot schedule")
{
    EvolutionConfig cfg;
    cfg.t0 = 1.0;
    cfg.T = 100.0;
    cfg.snapshots.log_per_decade = 2;
    cfg.snapshots.extra = {10.0 + 1e-11, 50.0};
    auto t = snapshot_times(cfg);
    REQUIRE(t.size() == 6);
    CHECK(t.front() == 1.0);
    CHECK(t.back() == 100.0);
    CHECK(t[1] == doctest::Approx(std::sqrt(10.0)));
    CHECK(t[2] == doctest::Approx(10.0));
    CHECK(t[4] == 50.0);
    cfg.snapshots = {};
    cfg.snapshots.dyadic = true;
    cfg.T = 20.0;
    CHECK(snapshot_times(cfg) == std::vector<double>{1, 2, 4, 8, 16, 20});
    cfg.dt = -1.0;
    CHECK_THROWS(validate(cfg));
}

TEST_CASE("free run matches the exact propagator")
{
    auto g = small_grid();
    auto u0 = testutil::gaussian_pair(g, -3.0, 0.5, 3.0, -0.5);
    EvolutionConfig cfg;
    cfg.t0 = 1.0;
    cfg.T = 6.0;
    cfg.snapshots.linear_count = 6;
    auto traj = run(u0, SourceModel::none(), cfg, 1.0);
    REQUIRE(traj.valid);
    const auto w = omega_tilde_multiplier(g, 1.0);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        auto exact = free_propagator(w, traj.times[k] - 1.0)(u0);
        CHECK(testutil::rel_diff(traj.snapshots[k].values, exact.values) < 1e-12);
    }
    // stepping instead of jumping gives the same states
    cfg.step_free_runs = true;
    cfg.dt = 0.1;
    auto stepped = run(u0, SourceModel::none(), cfg, 1.0);
    CHECK(stepped.step_count > traj.step_count);
    CHECK(testutil::rel_diff(stepped.snapshots.back().values, traj.snapshots.back().values) < 1e-11);
}

TEST_CASE("Strang splitting")
{
    auto g = small_grid();
    auto u0 = testutil::gaussian_pair(g, -3.0, 0.5, 3.0, -0.5);
    // V = 0 reduces to free evolution
    auto zero = final_state(u0, SourceModel::pair(PotentialSpec::gaussian(0.0, 1.0)), Scheme::strang, 0.25, 4.0);
    auto exact = free_propagator(omega_tilde_multiplier(g, 1.0), 3.0)(u0);
    CHECK(testutil::rel_diff(zero.values, exact.values) < 1e-12);

    auto src = SourceModel::pair(PotentialSpec::gaussian(1.0, 1.0));
    auto a = final_state(u0, src, Scheme::strang, 0.2, 4.0);
    auto b = final_state(u0, src, Scheme::strang, 0.1, 4.0);
    auto c = final_state(u0, src, Scheme::strang, 0.05, 4.0);
    CHECK(l2_norm(c) == doctest::Approx(1.0).epsilon(1e-12));
    const double ratio = dist(a, b) / dist(b, c);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("midpoint Duhamel against the constant-source solution")
{
    auto g = small_grid();
    auto u0 = testutil::gaussian_pair(g, -2.0, 0.3, 2.0, -0.3);
    auto r = testutil::gaussian_pair(g, 0.0, 1.0, 1.0, 0.0);
    auto src = SourceModel::tabulated([v = r.values](double) { return v; });
    auto exact = constant_source_solution(u0, r, 3.0);
    const double e1 = dist(final_state(u0, src, Scheme::duhamel_midpoint, 0.1, 4.0), exact);
    const double e2 = dist(final_state(u0, src, Scheme::duhamel_midpoint, 0.05, 4.0), exact);
    CHECK(e2 < 1e-2);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("scheme and source compatibility")
{
    auto g = small_grid();
    auto u0 = testutil::gaussian_pair(g, -2.0, 0.3, 2.0, -0.3);
    EvolutionConfig cfg;
    cfg.T = 2.0;
    auto tab = SourceModel::tabulated([n = u0.values.size()](double) { return Eigen::VectorXcd::Zero(n).eval(); });
    CHECK_THROWS(run(u0, tab, cfg, 1.0));
    cfg.scheme = Scheme::duhamel_midpoint;
    CHECK_THROWS(run(u0, SourceModel::pair(PotentialSpec::gaussian(0.2, 0.5)), cfg, 1.0));
    CHECK_NOTHROW(run(u0, tab, cfg, 1.0));
    // potential too wide for the box
    CHECK_THROWS(sample_potential(PotentialSpec::gaussian(0.2, 5.0), g));
}

TEST_CASE("wraparound guard stops the run")
{
    auto g = small_grid();
    auto u0 = testutil::gaussian_pair(g, 8.0, 3.0, -8.0, -3.0);
    EvolutionConfig cfg;
    cfg.T = 30.0;
    cfg.snapshots.linear_count = 30;
    auto traj = run(u0, SourceModel::pair(PotentialSpec::gaussian(0.2, 1.0)), cfg, 1.0);
    CHECK_FALSE(traj.valid);
    CHECK(traj.diagnosis.find("wraparound") != std::string::npos);
    CHECK(traj.final_time() < 30.0);
    // data already at the edge is rejected up front
    CHECK_THROWS(run(testutil::gaussian_pair(g, 19.0, 0.0, 0.0, 0.0), SourceModel::none(), cfg, 1.0));
}

TEST_CASE("step log and Cook accumulation")
{
    auto g = small_grid();
    auto u0 = testutil::gaussian_pair(g, -3.0, 0.5, 3.0, -0.5);
    EvolutionConfig cfg;
    cfg.T = 5.0;
    cfg.dt = 0.25;
    cfg.cook_integral = true;
    cfg.snapshots.linear_count = 4;
    auto traj = run(u0, SourceModel::pair(PotentialSpec::gaussian(0.5, 1.0)), cfg, 1.0);
    REQUIRE(traj.valid);
    CHECK(traj.step_count == 16);
    CHECK(traj.steps.size() == 17);
    CHECK(traj.cook.size() == traj.times.size());
    for (const auto& s : traj.steps) {
        CHECK(s.norm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.source_norm > 0.0);
    }
    // e^{iT w} u(T) = e^{i t0 w} u(t0) + int e^{is w} r(s) ds, up to quadrature error
    const auto w = omega_tilde_multiplier(g, 1.0);
    auto lhs = free_propagator(w, -5.0)(traj.snapshots.back());
    auto rhs = free_propagator(w, -1.0)(traj.snapshots.front());
    Eigen::VectorXcd c = traj.cook.back();
    fft_inverse_inplace(g, 2, c);
    rhs.values += c;
    CHECK(dist(lhs, rhs) < 1e-2);
    CHECK(traj.index_of(traj.times[2]) == 2);
    CHECK_THROWS(traj.index_of(1.2345));
}
