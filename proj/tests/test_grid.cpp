#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kgscat;

TEST_CASE("make_grid derives spacing and momentum lattice")
{
    auto g = make_grid(1, 16, 8.0);
    CHECK(g.dx == 1.0);
    CHECK(g.dx * g.n == 2.0 * g.L);
    CHECK(g.momentum(1) == doctest::Approx(std::numbers::pi / 8));
    CHECK(g.momentum(8) == doctest::Approx(-std::numbers::pi));

    auto h = make_grid(1, 16, std::numbers::pi);
    for (int i = 0; i < 16; ++i) CHECK(h.momentum(i) == doctest::Approx(double(h.wavenumber(i))));
    CHECK(h.wavenumber(8) == -8);
    CHECK(h.wavenumber(7) == 7);

    CHECK_THROWS_AS(make_grid(1, 10, 8.0), GridError);
    CHECK_THROWS_AS(make_grid(1, 8, 8.0), GridError);
    CHECK_THROWS_AS(make_grid(1, 16, 0.0), GridError);
    CHECK_THROWS_AS(make_grid(3, 16, 1.0), GridError);
}

TEST_CASE("momentum lattice is symmetric up to the Nyquist point")
{
    auto g = make_grid(1, 32, 3.0);
    for (int i = 1; i < g.n / 2; ++i) CHECK(g.momentum(i) == -g.momentum(g.n - i));
}

TEST_CASE("norms and inner products use continuum weights")
{
    auto g = make_grid(1, 16, 8.0);
    ComplexField one(g);
    one.values.setOnes();
    CHECK(l2_norm_squared(one) == doctest::Approx(16.0));
    CHECK(std::abs(inner_product(one, one).imag()) == 0.0);

    ComplexField a(g), b(g);
    for (int j = 0; j < g.n; ++j) {
        a.values[j] = std::polar(1.0, g.momentum(3) * g.position(j));
        b.values[j] = std::polar(1.0, g.momentum(5) * g.position(j));
    }
    CHECK(std::abs(inner_product(a, b)) < 1e-12);
    CHECK(inner_product(a, a).real() == doctest::Approx(2 * g.L));

    ComplexField c(make_grid(1, 32, 8.0));
    CHECK_THROWS_AS(inner_product(a, c), GridError);
}

TEST_CASE("forward transform matches the direct continuum sum")
{
    auto g = make_grid(1, 32, 5.0);
    std::mt19937_64 rng(11);
    auto f = testutil::random_field<1>(g, rng);
    auto fh = fourier_forward(f);
    for (int i = 0; i < g.n; ++i) {
        cplx acc = 0.0;
        for (int j = 0; j < g.n; ++j) acc += std::polar(1.0, -g.momentum(i) * g.position(j)) * f.values[j];
        acc *= g.dx / std::sqrt(2 * std::numbers::pi);
        CHECK(std::abs(acc - fh.values[i]) < 1e-12 * fh.values.norm());
    }
}

TEST_CASE("two-dimensional two-particle transform matches separable direct sum")
{
    auto g = make_grid(1, 16, 4.0);
    std::mt19937_64 rng(5);
    auto f = testutil::random_field<2>(g, rng);
    auto fh = fourier_forward(f);
    const double c = g.dx * g.dx / (2 * std::numbers::pi);
    for (int k1 : {0, 3, 9}) {
        for (int k2 : {1, 8, 15}) {
            cplx acc = 0.0;
            for (int j1 = 0; j1 < g.n; ++j1)
                for (int j2 = 0; j2 < g.n; ++j2)
                    acc += std::polar(1.0, -g.momentum(k1) * g.position(j1) - g.momentum(k2) * g.position(j2)) *
                           f.values[j1 * g.n + j2];
            CHECK(std::abs(c * acc - fh.values[k1 * g.n + k2]) < 1e-12 * fh.values.norm());
        }
    }
}

TEST_CASE("Gaussian transforms to Gaussian")
{
    auto g = make_grid(1, 256, 20.0);
    ComplexField f(g);
    for (int j = 0; j < g.n; ++j) f.values[j] = std::exp(-0.5 * g.position(j) * g.position(j));
    auto fh = fourier_forward(f);
    double err = 0.0;
    for (int i = 0; i < g.n; ++i) err = std::max(err, std::abs(fh.values[i] - std::exp(-0.5 * g.momentum(i) * g.momentum(i))));
    CHECK(err < 1e-12);
}

TEST_CASE("Parseval and round trip on random fields")
{
    std::mt19937_64 rng(1234);
    for (int d : {1, 2}) {
        auto g = make_grid(d, 32, 3.7);
        for (int trial = 0; trial < 5; ++trial) {
            auto f = testutil::random_field<1>(g, rng);
            auto fh = fourier_forward(f);
            CHECK(std::abs(l2_norm(fh) - l2_norm(f)) < 1e-12 * l2_norm(f));
            CHECK(testutil::rel_diff(fourier_inverse(fh).values, f.values) < 1e-12);
            auto f2 = testutil::random_field<2>(g, rng);
            auto f2h = fourier_forward(f2);
            CHECK(std::abs(l2_norm(f2h) - l2_norm(f2)) < 1e-12 * l2_norm(f2));
            CHECK(testutil::rel_diff(fourier_inverse(f2h).values, f2.values) < 1e-12);
        }
    }
}

TEST_CASE("norm of a band-limited function is refinement stable")
{
    auto norm_at = [](int n) {
        auto g = make_grid(1, n, 10.0);
        ComplexField f(g);
        for (int j = 0; j < n; ++j) {
            const double x = g.position(j);
            f.values[j] = std::exp(-x * x / 2.0) * std::polar(1.0, 0.7 * x);
        }
        return l2_norm(f);
    };
    CHECK(std::abs(norm_at(128) - norm_at(256)) < 1e-10);
}

TEST_CASE("representation guards")
{
    auto g = make_grid(1, 16, 1.0);
    ComplexField f(g);
    CHECK_THROWS(fourier_inverse(f));
    CHECK_THROWS(fourier_forward(fourier_forward(f)));
    CHECK_THROWS(ComplexField(g, Eigen::VectorXcd::Zero(5)));
}
