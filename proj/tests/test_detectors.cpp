#include "helpers.hpp"
#include "kgscat/detectors.hpp"
#include "kgscat/dynamics.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgscat;

TEST_CASE("product cutoff")
{
    auto h1 = Cutoff::interval(0.2, 1.0, 0.1);
    auto h2 = Cutoff::interval(-1.0, -0.2, 0.1);
    auto H = Cutoff2P::product(h1, h2);
    CHECK(H.clearance() > 0.0);
    for (double a : {-1.2, -0.5, 0.0, 0.25, 0.7})
        for (double b : {-0.9, -0.15, 0.3}) {
            const double y[2] = {a, b};
            CHECK(H(y) == doctest::Approx(h1(a) * h2(b)));
        }
    // overlapping supports are rejected with the margin in the message
    try {
        Cutoff2P::product(Cutoff::interval(-0.5, 0.5, 0.1), Cutoff::interval(0.4, 1.0, 0.1));
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("margin") != std::string::npos);
    }
}

TEST_CASE("region cutoff must clear the diagonal")
{
    auto ok = [](const double* y) { return std::abs(y[0] - y[1]) > 1.0 ? 1.0 : 0.0; };
    CHECK_NOTHROW(Cutoff2P::region(ok, 1, 0.9));
    CHECK_THROWS(Cutoff2P::region(ok, 1, 1.2));
    CHECK_THROWS(Cutoff2P::region(ok, 1, 0.0));
    auto K = Cutoff2P::smoothed_region(reference_region(), 1, 0.05);
    CHECK(K.clearance() == doctest::Approx(reference_region().diagonal_clearance(1) - 0.05));
}

TEST_CASE("sampled H_t and expectations")
{
    auto g = make_grid(1, 64, 20.0);
    auto H = Cutoff2P::product(Cutoff::interval(0.2, 1.0, 0.1), Cutoff::interval(-1.0, -0.2, 0.1));
    const double t = 7.0;
    auto s = sample_Ht(H, t, g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double y[2] = {g.position(i) / t, g.position(j) / t};
            CHECK(s[i * g.n + j] == doctest::Approx(H(y)));
        }
    std::mt19937_64 rng(3);
    auto u = testutil::random_field<2>(g, rng);
    const double e = detector_expectation(H, t, u);
    CHECK(e >= 0.0);
    CHECK(e <= l2_norm_squared(u));
    CHECK(detector_expectation(H, t, ComplexField2P(g)) == 0.0);
    auto Hu = apply_Ht(H, t, u);
    CHECK(testutil::rel_diff(Hu.values, (u.values.array() * s.array()).matrix()) < 1e-15);
    CHECK_THROWS(apply_Ht(H, 0.0, u));
}

TEST_CASE("two-detector sweep on a free run")
{
    auto g = make_grid(1, 128, 60.0);
    auto u = testutil::gaussian_pair(g, -5.0, 0.8, 5.0, -0.8, 2.0);
    EvolutionConfig cfg;
    cfg.t0 = 1.0;
    cfg.T = 16.0;
    cfg.snapshots.dyadic = true;
    auto traj = run(u, SourceModel::none(), cfg, 1.0);
    REQUIRE(traj.valid);
    auto h1 = Cutoff::interval(0.3, 1.0, 0.1), h2 = Cutoff::interval(-1.0, -0.3, 0.1);
    auto s = two_detector_sweep(h1, h2, traj, 2);
    REQUIRE(s.size() == traj.times.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(s.integrand[k] >= 0.0);
        CHECK(s.integrand[k] <= 1.0 + 1e-12);
        CHECK(s.integrand[k] == doctest::Approx(detector_expectation(Cutoff2P::product(h1, h2), traj.times[k],
                                                                     traj.snapshots[k])));
    }
}
