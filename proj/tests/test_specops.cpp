#include "helpers.hpp"
#include "kgscat/specops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kgscat;

namespace {

// Lattice with L = pi so that p_k = k is an integer.
GridSpec integer_grid() { return make_grid(1, 16, std::numbers::pi); }

int index_of_momentum(const GridSpec& g, double p)
{
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.momentum(i) - p) < 1e-12) return i;
    return -1;
}

}  // namespace

TEST_CASE("omega samples")
{
    auto g = integer_grid();
    auto w = omega_multiplier(g, 1.0);
    CHECK(w.samples[index_of_momentum(g, 0.0)].real() == 1.0);
    auto w4 = omega_multiplier(g, 4.0);
    CHECK(w4.samples[index_of_momentum(g, 3.0)].real() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(w4.samples.real().minCoeff() >= 4.0);
    CHECK(w4.is_real());
    CHECK_THROWS(omega_multiplier(g, 0.0));
    CHECK_THROWS(omega_multiplier(g, -1.0));
}

TEST_CASE("group velocity is subluminal")
{
    auto g = integer_grid();
    auto v = grad_omega_multiplier(g, 4.0);
    REQUIRE(v.size() == 1);
    CHECK(v[0].samples[index_of_momentum(g, 0.0)].real() == 0.0);
    CHECK(v[0].samples[index_of_momentum(g, 3.0)].real() == doctest::Approx(0.6));
    for (double m : {1e-3, 0.1, 1.0, 10.0}) {
        auto g2 = make_grid(2, 64, 0.5);
        for (const auto& comp : grad_omega_multiplier(g2, m)) CHECK(comp.samples.cwiseAbs().maxCoeff() < 1.0);
    }
}

TEST_CASE("omega tilde on the product lattice")
{
    auto g = integer_grid();
    auto w = omega_tilde_multiplier(g, 1.0);
    const int i0 = index_of_momentum(g, 0.0);
    CHECK(w.samples[i0 * g.n + i0].real() == 2.0);
    auto w4 = omega_tilde_multiplier(g, 4.0);
    const int i3 = index_of_momentum(g, 3.0);
    CHECK(w4.samples[i3 * g.n + i0].real() == doctest::Approx(9.0));
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b) CHECK(w4.samples[a * g.n + b] == w4.samples[b * g.n + a]);
    auto grads = grad_omega_tilde_multiplier(g, 4.0);
    REQUIRE(grads.size() == 2);
    CHECK(grads[0].samples[i3 * g.n + i0].real() == doctest::Approx(0.6));
    CHECK(grads[1].samples[i3 * g.n + i0].real() == 0.0);
}

TEST_CASE("multiplier application")
{
    auto g = make_grid(1, 64, 7.0);
    std::mt19937_64 rng(3);
    auto f = testutil::random_field<1>(g, rng);
    auto id = make_multiplier(g, 1, [](const double*) { return cplx(1.0, 0.0); });
    CHECK(testutil::rel_diff(apply_multiplier(id, f).values, f.values) < 1e-14);

    auto w = omega_multiplier(g, 1.3);
    const int k = 5;
    ComplexField wave(g);
    for (int j = 0; j < g.n; ++j) wave.values[j] = std::polar(1.0, g.momentum(k) * g.position(j));
    auto out = apply_multiplier(w, wave);
    CHECK(testutil::rel_diff(out.values, w.samples[k].real() * wave.values) < 1e-12);

    auto vel = grad_omega_multiplier(g, 1.3)[0];
    auto ab = apply_multiplier(w, apply_multiplier(vel, f));
    auto ba = apply_multiplier(vel, apply_multiplier(w, f));
    CHECK(testutil::rel_diff(ab.values, ba.values) < 1e-12);

    auto f2 = testutil::random_field<1>(g, rng);
    const cplx a(0.3, -1.1), b(2.0, 0.5);
    ComplexField combo(g, a * f.values + b * f2.values);
    auto lhs = apply_multiplier(w, combo);
    Eigen::VectorXcd rhs = a * apply_multiplier(w, f).values + b * apply_multiplier(w, f2).values;
    CHECK(testutil::rel_diff(lhs.values, rhs) < 1e-12);

    ComplexField2P two(g);
    CHECK_THROWS(apply_multiplier(w, two));
}

TEST_CASE("free propagator is unitary and a group")
{
    auto g = make_grid(1, 64, 9.0);
    std::mt19937_64 rng(8);
    auto f = testutil::random_field<1>(g, rng);
    auto w = omega_multiplier(g, 1.0);
    CHECK(testutil::rel_diff(free_propagator(w, 0.0)(f).values, f.values) < 1e-14);
    auto f100 = free_propagator(w, 100.0)(f);
    CHECK(std::abs(l2_norm(f100) - l2_norm(f)) < 1e-12 * l2_norm(f));
    auto ts = free_propagator(w, 2.5)(free_propagator(w, 4.0)(f));
    CHECK(testutil::rel_diff(ts.values, free_propagator(w, 6.5)(f).values) < 1e-12);

    auto g2 = make_grid(1, 32, 5.0);
    auto wt = omega_tilde_multiplier(g2, 0.7);
    auto u = testutil::random_field<2>(g2, rng);
    auto back = free_propagator(wt, -37.0)(free_propagator(wt, 37.0)(u));
    CHECK(testutil::rel_diff(back.values, u.values) < 1e-12);

    Multiplier cm = w;
    cm.samples[3] += cplx(0.0, 1e-3);
    CHECK_THROWS(free_propagator(cm, 1.0));
}

TEST_CASE("scaled position cutoffs")
{
    auto g = make_grid(1, 64, 10.0);
    std::mt19937_64 rng(21);
    auto f = testutil::random_field<1>(g, rng);
    auto gfield = testutil::random_field<1>(g, rng);

    auto all = Cutoff::everywhere(1);
    CHECK(testutil::rel_diff(position_cutoff_scaled(all, g, 3.0)(f).values, f.values) == 0.0);

    // |x/t| <= 10/100 on the box, cutoff supported in |y| >= 0.5.
    Cutoff far = Cutoff::interval(0.6, 0.9, 0.05);
    CHECK(position_cutoff_scaled(far, g, 100.0)(f).values.norm() == 0.0);

    Cutoff h = Cutoff::interval(-0.2, 0.4, 0.3);
    auto hm = position_cutoff_scaled(h, g, 2.0);
    CHECK(std::abs(inner_product(f, hm(gfield)) - inner_product(hm(f), gfield)) < 1e-12 * l2_norm(f) * l2_norm(gfield));
    CHECK_THROWS(position_cutoff_scaled(h, g, 0.0));
}

TEST_CASE("velocity cutoffs")
{
    auto g = integer_grid();
    std::mt19937_64 rng(2);
    auto f = testutil::random_field<1>(g, rng);
    auto ones = velocity_cutoff(Cutoff::interval(-1.0, 1.0, 0.1), g, 4.0);
    CHECK(testutil::rel_diff(apply_multiplier(ones, f).values, f.values) < 1e-13);
    auto none = velocity_cutoff(Cutoff::interval(1.05, 2.0, 0.02), g, 4.0);
    CHECK(none.samples.norm() == 0.0);
    auto ident = velocity_function([](const double* v) { return v[0]; }, g, 1, 4.0);
    CHECK(ident.samples[index_of_momentum(g, 3.0)].real() == doctest::Approx(0.6));

    auto pair = velocity_cutoff(Cutoff::interval(0.2, 0.9, 0.05), Cutoff::interval(-0.9, -0.2, 0.05), g, 4.0);
    const int i3 = index_of_momentum(g, 3.0), im3 = index_of_momentum(g, -3.0);
    CHECK(pair.samples[i3 * g.n + im3].real() == 1.0);
    CHECK(pair.samples[im3 * g.n + i3].real() == 0.0);
}
