#include "helpers.hpp"
#include "kgscat/kgwave.hpp"
#include "kgscat/specops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kgscat;

namespace {

// f(x) = (2 pi)^{-1/2} sum_p fhat(p) e^{ipx} dp, summed directly.
Eigen::VectorXcd direct_synthesis(const GridSpec& g, const Eigen::VectorXcd& fhat)
{
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(g.n);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            f[j] += fhat[i] * std::exp(cplx(0.0, g.momentum(i) * g.position(j)));
    return f * g.dp() / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("packet normalization and momentum support")
{
    auto g = make_grid(1, 256, 40.0);
    auto pk = make_packet(g, 1.0, 0.7, 0.3, 2.0);
    CHECK(l2_norm(packet_field(pk)) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.momentum(i) - 0.7) >= 0.3) CHECK(std::abs(pk.fourier_data.values[i]) == 0.0);
    // |fhat| follows the bump envelope
    const double peak = pk.fourier_data.values.cwiseAbs().maxCoeff();
    for (int i = 0; i < g.n; ++i) {
        const double s = (g.momentum(i) - 0.7) / 0.3;
        CHECK(std::abs(pk.fourier_data.values[i]) == doctest::Approx(peak * bump(s) / bump(0.0)).epsilon(2e-2));
    }
}

TEST_CASE("packet field agrees with direct synthesis")
{
    auto g = make_grid(1, 64, 12.0);
    auto pk = make_packet(g, 2.0, -0.5, 0.8, 1.5);
    const auto f = packet_field(pk);
    CHECK(testutil::rel_diff(f.values, direct_synthesis(g, pk.fourier_data.values)) < 1e-12);
}

TEST_CASE("evolve applies the dispersion phase")
{
    auto g = make_grid(1, 512, 256.0);
    auto pk = make_packet(g, 1.0, 0.3, 1.0, 0.0);
    const double t = 3.7;
    Eigen::VectorXcd ph = pk.fourier_data.values;
    for (int i = 0; i < g.n; ++i) ph[i] *= std::exp(cplx(0.0, -t * std::sqrt(g.momentum(i) * g.momentum(i) + 1.0)));
    CHECK(testutil::rel_diff(evolve(pk, t).values, direct_synthesis(g, ph)) < 1e-12);
}

TEST_CASE("anti-aliasing and wraparound guards")
{
    auto g = make_grid(1, 64, 10.0);
    CHECK(antialias_limit(g) == doctest::Approx(2.0 / 3.0 * std::numbers::pi / g.dx));
    CHECK_THROWS_AS(make_packet(g, 1.0, antialias_limit(g), 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS(make_packet(g, 0.0, 0.0, 0.5, 0.0));
    auto pk = make_packet(make_grid(1, 512, 256.0), 1.0, 0.5, 1.0, 0.0);
    CHECK_NOTHROW(evolve(pk, 1.0));
    const double need = required_half_length(pk, 500.0);
    CHECK(need > 256.0);
    try {
        evolve(pk, 500.0);
        CHECK(false);
    } catch (const GuardError& e) {
        CHECK(std::string(e.what()).find("needs L >=") != std::string::npos);
    }
}

TEST_CASE("packet radius holds the requested mass")
{
    auto g = make_grid(1, 512, 100.0);
    auto pk = make_packet(g, 1.0, 0.0, 1.0, 5.0);
    const double r = packet_radius(pk, 1e-8);
    const auto f = packet_field(pk);
    double outside = 0.0;
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.position(i) - 5.0) > r) outside += std::norm(f.values[i]) * g.dx;
    CHECK(outside <= 1e-8);
    CHECK(packet_radius(pk, 1e-12) >= r);
}

TEST_CASE("velocity support")
{
    auto g = make_grid(1, 128, 30.0);
    auto pk = make_packet(g, 1.0, 1.0, 0.2, 0.0);
    auto vs = velocity_support(pk);
    CHECK(vs.lo[0] == doctest::Approx(0.8 / std::sqrt(1.64)));
    CHECK(vs.hi[0] == doctest::Approx(1.2 / std::sqrt(2.44)));
    CHECK(vs.contains(Eigen::VectorXd::Constant(1, 0.7)));
    CHECK_FALSE(vs.contains(Eigen::VectorXd::Constant(1, 0.9)));

    auto g2 = make_grid(2, 32, 10.0);
    auto pk2 = make_packet(g2, 1.0, Eigen::Vector2d(0.5, 0.0), 0.3, Eigen::Vector2d::Zero());
    auto vs2 = velocity_support(pk2);
    CHECK(vs2.hi[0] == doctest::Approx(0.8 / std::sqrt(1.64)).epsilon(1e-3));
    CHECK(vs2.hi.maxCoeff() < 1.0);
}

TEST_CASE("velocity cutoff limit is approached")
{
    auto g = make_grid(1, 1024, 256.0);
    auto pk = make_packet(g, 1.0, 0.0, 1.0, 0.0);
    auto vs = velocity_support(pk);
    auto h = Cutoff::interval(vs.lo[0] + 0.2, vs.hi[0] + 0.1, 0.1);
    auto s = check_prop_toto20_1(pk, h, {10.0, 20.0, 40.0});
    CHECK(s.integrand[1] < s.integrand[0]);
    CHECK(s.integrand[2] < s.integrand[1]);
    // h = 1 on every group velocity: the identity for all t
    auto all = check_prop_toto20_1(pk, Cutoff::everywhere(1), {5.0});
    CHECK(all.integrand[0] < 1e-12);
}

TEST_CASE("disjoint support check")
{
    auto g = make_grid(1, 2048, 512.0);
    auto pk = make_packet(g, 1.0, 0.0, 1.0, 0.0);
    auto chi2 = Cutoff::interval(-0.3, 0.3, 0.2);
    CHECK(support_gap(Cutoff::interval(0.75, 0.9, 0.05), chi2) == doctest::Approx(0.2));
    CHECK_THROWS(check_prop_toto20_2(pk, Cutoff::interval(0.3, 0.9, 0.05), chi2, {10.0}));
    auto s = check_prop_toto20_2(pk, Cutoff::interval(0.75, 0.9, 0.05), chi2, {10.0, 20.0, 40.0});
    CHECK(s.integrand[2] < s.integrand[0]);
    CHECK(s.integrand[0] <= 1.0);
}
