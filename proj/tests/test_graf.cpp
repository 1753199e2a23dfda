#include "kgscat/graf.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace kgscat;

TEST_CASE("parameter choice follows the stated rules")
{
    const auto K = reference_region();
    auto p = choose_params(K, {2.1, 2.2, 2.4, 4.0});
    CHECK(p.c == 16.0);
    CHECK(p.v_min == doctest::Approx(0.5 / std::sqrt(2.0)));
    CHECK(p.beta == doctest::Approx(256.0));
    CHECK(p.eps_beta == doctest::Approx(std::sqrt(2.0 * (16.0 - 2.4 * 2.4) / 256.0)));
    CHECK(p.eps == doctest::Approx(p.eps_beta / 2.0));
    CHECK(p.eps_mollifier == doctest::Approx(p.eps / 8.0));
    CHECK_NOTHROW(p.validate());

    auto q = choose_params(K);
    CHECK(q.rp == 8.0);
    CHECK(q.beta == doctest::Approx(1024.0));

    CHECK_THROWS(choose_params(RegionSpec::annulus(1.0, 2.0)));
    CHECK_THROWS(choose_params(RegionSpec::diagonal_tube(0.5)));
    GrafParams bad = p;
    bad.r1 = 3.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("g function and radial transition")
{
    auto p = choose_params(reference_region(), {2.1, 2.2, 2.4, 4.0});
    CHECK(radial_transition(0.0, p) == 1.0);
    CHECK(radial_transition(p.r1, p) == doctest::Approx(1.0));
    CHECK(radial_transition(p.r1p, p) == doctest::Approx(0.0));
    CHECK(radial_transition(5.0, p) == 0.0);
    CHECK(g_function(0.0, 0.0, p) == doctest::Approx(-p.c));
    // on K the quadratic is positive: u^2 + beta v^2 >= beta v_min^2 = 2c
    CHECK(g_function(0.0, p.v_min, p) == doctest::Approx(p.c));
    CHECK(g_function(5.0, 0.0, p) == 0.0);
}

TEST_CASE("built Graf function")
{
    const auto K = reference_region();
    auto p = choose_params(K);
    auto gf = build(p);
    CHECK(gf.h == doctest::Approx(p.eps_mollifier / 4.0));
    auto rep = hessian_check(gf, K);
    CHECK(rep.c1 > 0.0);
    CHECK(rep.max_on_tube == 0.0);
    CHECK(rep.max_outside == 0.0);
    CHECK(rep.violation_fraction < 1e-3);
    CHECK(rep.exceptions_localized);

    // symmetric under y1 <-> y2 and y -> -y
    for (double a : {0.3, 1.1, 1.7})
        for (double b : {-1.4, -0.2, 0.9}) {
            const double y[2] = {a, b}, ys[2] = {b, a}, yn[2] = {-a, -b};
            CHECK(gf.value(ys) == doctest::Approx(gf.value(y)).epsilon(1e-4));
            CHECK(gf.value(yn) == doctest::Approx(gf.value(y)).epsilon(1e-4));
        }
    // interpolation reproduces nodes
    const int i = gf.N / 2 + 101, j = gf.N / 2 + 37;
    const double y[2] = {(gf.u(i) + gf.v(j)) / std::sqrt(2.0), (gf.u(i) - gf.v(j)) / std::sqrt(2.0)};
    CHECK(gf.value(y) == doctest::Approx(gf.at(i, j)).epsilon(1e-9));

    std::ostringstream os;
    export_table(gf, os, 64);
    const auto text = os.str();
    CHECK(text.rfind("y1,y2,R,dR_dy1,dR_dy2,H11,H12,H22\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') > 100);
    CHECK_THROWS(export_table(gf, os, 0));
}

TEST_CASE("mollifier resolution guard")
{
    auto p = choose_params(reference_region());
    GrafBuildOptions o;
    o.cells_per_mollifier = 2.0;
    CHECK_THROWS(build(p, o));
    o.cells_per_mollifier = 4.0;
    o.max_axis_samples = 1000;
    CHECK_THROWS_AS(build(p, o), std::invalid_argument);
}
