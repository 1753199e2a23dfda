#include "kgscat/propest.hpp"

#include "kgscat/kgwave.hpp"
#include "kgscat/parallel.hpp"
#include "kgscat/specops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace kgscat {

Factor Factor::position(std::function<double(const double* y)> fn, std::string label, bool compact, double clearance,
                        bool bounded)
{
    Factor f;
    f.kind = Kind::position;
    f.position_fn = std::move(fn);
    f.label = std::move(label);
    f.compact = compact;
    f.clearance = clearance;
    f.bounded = bounded || compact;
    return f;
}

Factor Factor::momentum(std::function<double(const double* p)> fn, std::string label)
{
    Factor f;
    f.kind = Kind::momentum;
    f.momentum_fn = std::move(fn);
    f.label = std::move(label);
    return f;
}

Factor Factor::scalar(std::function<double(double t)> fn, std::string label)
{
    Factor f;
    f.kind = Kind::scalar;
    f.scalar_fn = std::move(fn);
    f.label = std::move(label);
    return f;
}

Factor Factor::sum(std::vector<Factor> parts, std::string label)
{
    Factor f;
    f.kind = Kind::sum;
    f.children = std::move(parts);
    f.label = std::move(label);
    f.bounded = std::all_of(f.children.begin(), f.children.end(), [](const Factor& c) { return c.bounded; });
    return f;
}

Factor Factor::phase_difference(int j, double m)
{
    auto y = position([j](const double* y) { return y[j]; }, "y" + std::to_string(j), false, 0.0, false);
    // the two-particle axes are (x1, x2) for d = 1; component j belongs to particle j
    auto v = momentum([j, m](const double* p) { return -p[j] / omega(p[j] * p[j], m); },
                      "-dw/dp" + std::to_string(j));
    return sum({y, v}, "y" + std::to_string(j) + "-grad_omega");
}

bool PropagationObservable::bounded() const
{
    for (const auto& term : terms) {
        const bool all = std::all_of(term.factors.begin(), term.factors.end(), [](const Factor& f) { return f.bounded; });
        const bool compact = std::any_of(term.factors.begin(), term.factors.end(), [](const Factor& f) {
            return f.kind == Factor::Kind::position && f.compact;
        });
        if (!all && !compact) return false;
    }
    return true;
}

bool PropagationObservable::localized_off_diagonal() const
{
    for (const auto& term : terms) {
        const bool ok = std::any_of(term.factors.begin(), term.factors.end(), [](const Factor& f) {
            return f.kind == Factor::Kind::position && f.clearance > 0.0;
        });
        if (!ok) return false;
    }
    return true;
}

namespace {

void apply_factor(const Factor& f, double t, const GridSpec& g, Eigen::VectorXcd& v)
{
    switch (f.kind) {
        case Factor::Kind::position:
            v.array() *= position_function_scaled(f.position_fn, g, 2, t).samples().array();
            return;
        case Factor::Kind::momentum: {
            const auto mult = make_multiplier(g, 2, [&](const double* p) { return cplx(f.momentum_fn(p), 0.0); });
            apply_multiplier_inplace(mult, v);
            return;
        }
        case Factor::Kind::scalar: v *= f.scalar_fn(t); return;
        case Factor::Kind::sum: {
            Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(v.size());
            for (const auto& c : f.children) {
                Eigen::VectorXcd w = v;
                apply_factor(c, t, g, w);
                acc += w;
            }
            v = std::move(acc);
            return;
        }
    }
}

Eigen::VectorXcd apply_terms(const PropagationObservable& M, double t, const ComplexField2P& u, bool adjoint)
{
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(u.values.size());
    for (const auto& term : M.terms) {
        Eigen::VectorXcd v = u.values;
        if (adjoint)
            for (const auto& f : term.factors) apply_factor(f, t, u.grid, v);
        else
            for (auto it = term.factors.rbegin(); it != term.factors.rend(); ++it) apply_factor(*it, t, u.grid, v);
        out += term.coeff * v;
    }
    return out;
}

double weight2(const GridSpec& g) { return cell_weight(g, 2, Representation::position); }

void require_usable(const PropagationObservable& M, const Trajectory& traj)
{
    if (!M.bounded()) throw std::invalid_argument("observable '" + M.name + "' has unbounded factors");
    if (traj.source.kind != SourceModel::Kind::none && !M.localized_off_diagonal())
        throw std::invalid_argument("observable '" + M.name +
                                    "' must vanish near the diagonal when used with a sourced run");
}

std::vector<double> trapezoid_weights(const std::vector<double>& t)
{
    std::vector<double> w(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double h = t[k] - t[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    return w;
}

double integrate(const std::vector<double>& t, const std::vector<double>& f)
{
    const auto w = trapezoid_weights(t);
    double acc = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) acc += w[k] * f[k];
    return acc;
}

// Derivative at node k of the quadratic through three neighbouring nodes.
std::vector<double> node_derivative(const std::vector<double>& t, const std::vector<double>& q)
{
    const std::size_t n = t.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) {
        if (n == 2) d[0] = d[1] = (q[1] - q[0]) / (t[1] - t[0]);
        return d;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = k == 0 ? 0 : (k == n - 1 ? n - 3 : k - 1);
        const double x0 = t[a], x1 = t[a + 1], x2 = t[a + 2], x = t[k];
        const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        d[k] = l0 * q[a] + l1 * q[a + 1] + l2 * q[a + 2];
    }
    return d;
}

}  // namespace

Eigen::VectorXcd apply_observable(const PropagationObservable& M, double t, const ComplexField2P& u)
{
    if (u.rep != Representation::position) throw std::invalid_argument("observables act on position-space fields");
    Eigen::VectorXcd out = apply_terms(M, t, u, false);
    if (M.symmetrize) out = 0.5 * (out + apply_terms(M, t, u, true));
    return out;
}

double expectation(const PropagationObservable& M, double t, const ComplexField2P& u)
{
    return (u.values.dot(apply_observable(M, t, u)) * weight2(u.grid)).real();
}

PropagationObservable identity_observable()
{
    PropagationObservable M;
    M.name = "identity";
    M.terms.push_back({1.0, {Factor::scalar([](double) { return 1.0; }, "1")}});
    return M;
}

PropagationObservable momentum_observable(std::function<double(const double* p)> g, std::string name)
{
    PropagationObservable M;
    M.name = name;
    M.terms.push_back({1.0, {Factor::momentum(std::move(g), std::move(name))}});
    return M;
}

PropagationObservable detector_observable(const Cutoff2P& H)
{
    PropagationObservable M;
    M.name = "detector";
    M.terms.push_back({1.0, {Factor::position([H](const double* y) { return H(y); }, "H", true, H.clearance())}});
    return M;
}

PropagationObservable graf_observable(const GrafFunction& gf, double m)
{
    const double clearance = gf.params.eps / 2.0;
    const GrafFunction* G = &gf;
    PropagationObservable M;
    M.name = "graf";
    M.symmetrize = true;
    M.terms.push_back({1.0, {Factor::position([G](const double* y) { return G->value(y); }, "R", true, clearance)}});
    for (int j = 0; j < 2; ++j) {
        auto dR = Factor::position([G, j](const double* y) { return G->gradient(y)[j]; }, "dR" + std::to_string(j), true,
                                   clearance);
        M.terms.push_back({-1.0, {dR, Factor::phase_difference(j, m)}});
    }
    return M;
}

PropagationObservable free_phase_observable(const Cutoff2P& G, double m)
{
    PropagationObservable M;
    M.name = "free_phase";
    M.symmetrize = true;
    for (int j = 0; j < 2; ++j) {
        auto Gf = Factor::position([G](const double* y) { return G(y); }, "G", true, G.clearance());
        M.terms.push_back({1.0, {Factor::phase_difference(j, m), Gf, Factor::phase_difference(j, m)}});
    }
    return M;
}

PropagationObservable region_observable(const RegionSpec& K, double delta, std::function<double(double)> weight)
{
    PropagationObservable M;
    M.name = "region";
    const double clearance = std::max(0.0, K.diagonal_clearance(1) - delta);
    auto chi = Factor::position([K, delta](const double* y) { return K.smoothed(y, 1, delta); }, "chi", true, clearance);
    M.terms.push_back({1.0, {Factor::scalar(std::move(weight), "w"), chi}});
    return M;
}

std::vector<PropagationObservable> phase_space_components(const RegionSpec& K, double m, double delta,
                                                          std::function<double(double)> weight)
{
    std::vector<PropagationObservable> out;
    const double clearance = std::max(0.0, K.diagonal_clearance(1) - delta);
    for (int j = 0; j < 2; ++j) {
        PropagationObservable B;
        B.name = "phase_space_" + std::to_string(j);
        auto chi = Factor::position([K, delta](const double* y) { return K.smoothed(y, 1, delta); }, "chi", true,
                                    clearance);
        B.terms.push_back({1.0,
                           {Factor::scalar([weight](double t) { return std::sqrt(weight(t)); }, "sqrt_w"), chi,
                            Factor::phase_difference(j, m)}});
        B.symmetrize = false;
        out.push_back(std::move(B));
    }
    return out;
}

DiagnosticSeries large_velocity_series(const Trajectory& traj, double r, double rp, double eps, double delta, int jobs)
{
    if (!(r > std::sqrt(2.0))) throw std::invalid_argument("large-velocity estimate needs r > sqrt(2)");
    if (!(rp > r)) throw std::invalid_argument("large-velocity estimate needs r' > r");
    if (!(eps > 0.0)) throw std::invalid_argument("large-velocity estimate needs eps > 0");
    const auto region = annulus_minus_tube(r, rp, eps);
    const double w = weight2(traj.grid);
    const auto values = parallel_map(traj.times.size(), jobs, [&](std::size_t k) {
        const auto chi = position_function_scaled([&](const double* y) { return region.smoothed(y, 1, delta); },
                                                  traj.grid, 2, traj.times[k]);
        return (traj.snapshots[k].values.array().abs2() * chi.samples().array().square()).sum() * w;
    });
    return make_series("large_velocity", traj.times, values);
}

namespace {

struct PhaseSample {
    double integrand = 0.0, discrepancy = 0.0;
};

PhaseSample phase_sample(const RegionSpec& K, double delta, const std::vector<Multiplier>& grads, double t,
                         const ComplexField2P& u)
{
    const auto& g = u.grid;
    const Eigen::ArrayXd chi = position_function_scaled([&](const double* y) { return K.smoothed(y, 1, delta); }, g, 2, t)
                                   .samples()
                                   .array();
    Eigen::VectorXcd chiu = (u.values.array() * chi).matrix();
    PhaseSample s;
    for (int j = 0; j < 2; ++j) {
        const Eigen::ArrayXd yj =
            position_function_scaled([j](const double* y) { return y[j]; }, g, 2, t).samples().array();
        // A = chi (y_j - d_j w) u
        Eigen::VectorXcd gu = u.values;
        apply_multiplier_inplace(grads[static_cast<std::size_t>(j)], gu);
        Eigen::VectorXcd A = (chi * (yj * u.values.array() - gu.array())).matrix();
        // B = (y_j - d_j w) chi u
        Eigen::VectorXcd gchi = chiu;
        apply_multiplier_inplace(grads[static_cast<std::size_t>(j)], gchi);
        Eigen::VectorXcd B = (yj * chiu.array() - gchi.array()).matrix();
        s.integrand += (0.5 * (A + B)).squaredNorm();
        s.discrepancy += (A - B).squaredNorm();
    }
    const double w = weight2(g);
    s.integrand *= w;
    s.discrepancy = std::sqrt(s.discrepancy * w);
    return s;
}

}  // namespace

PhaseSpaceResult phase_space_series(const Trajectory& traj, const RegionSpec& K, double delta, int jobs)
{
    if (!(K.diagonal_clearance(1) > 0.0)) throw std::invalid_argument("phase-space region K touches the diagonal");
    const auto grads = grad_omega_tilde_multiplier(traj.grid, traj.m);
    const auto samples = parallel_map(traj.times.size(), jobs, [&](std::size_t k) {
        return phase_sample(K, delta, grads, traj.times[k], traj.snapshots[k]);
    });
    std::vector<double> a, b;
    for (const auto& s : samples) {
        a.push_back(s.integrand);
        b.push_back(s.discrepancy);
    }
    return {make_series("phase_space", traj.times, a), make_series("ordering_discrepancy", traj.times, b)};
}

FreeBoundReport free_phase_space_bound(const ComplexField2P& u0, const RegionSpec& K, double m, double T,
                                       int per_decade, double delta)
{
    if (!(T > 1.0)) throw std::invalid_argument("free phase-space bound needs T > 1");
    const auto grads = grad_omega_tilde_multiplier(u0.grid, m);
    const auto wt = omega_tilde_multiplier(u0.grid, m);
    const int count = std::max(2, static_cast<int>(std::ceil(std::log10(T) * per_decade)));
    FreeBoundReport rep;
    rep.series.name = "free_phase_space";
    for (int k = 0; k <= count; ++k) {
        const double t = std::pow(T, double(k) / count);
        const ComplexField2P ut = free_propagator(wt, t)(u0);
        rep.series.push(t, phase_sample(K, delta, grads, t, ut).integrand);
    }
    rep.integral = rep.series.total();
    rep.norm_squared = l2_norm_squared(u0);
    rep.C_measured = rep.norm_squared > 0.0 ? rep.integral / rep.norm_squared : 0.0;
    return rep;
}

EnsembleReport free_phase_space_ensemble(const GridSpec& g, const RegionSpec& K, double m, double T, int draws,
                                         unsigned long long seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mom(-1.0, 1.0), width(0.4, 0.8), pos(-10.0, 10.0), phase(0.0, 6.283185307179586);
    EnsembleReport rep;
    for (int n = 0; n < draws; ++n) {
        ComplexField2P u(g);
        for (int c = 0; c < 3; ++c) {
            const auto f = packet_field(make_packet(g, m, mom(rng), width(rng), pos(rng)));
            const auto h = packet_field(make_packet(g, m, mom(rng), width(rng), pos(rng)));
            const cplx coeff = std::polar(1.0, phase(rng));
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    u.values[i * g.n + j] += coeff * (f.values[i] * h.values[j] + h.values[i] * f.values[j]);
        }
        rep.C.push_back(free_phase_space_bound(u, K, m, T).C_measured);
    }
    rep.min = *std::min_element(rep.C.begin(), rep.C.end());
    rep.max = *std::max_element(rep.C.begin(), rep.C.end());
    return rep;
}

double heisenberg_increment(const PropagationObservable& M, const Trajectory& traj, double t, double dt)
{
    if (!traj.has(t) || !traj.has(t + dt)) throw std::invalid_argument("heisenberg_increment needs snapshots at t and t+dt");
    return (expectation(M, t + dt, traj.at(t + dt)) - expectation(M, t, traj.at(t))) / dt;
}

A1Report monitor_A1(const PropagationObservable& M, const Trajectory& traj, const PropagationObservable& B_target,
                    const std::vector<PropagationObservable>& C_list, int jobs)
{
    require_usable(M, traj);
    A1Report rep;
    rep.t = traj.times;
    const std::size_t n = traj.times.size();
    if (n < 3) throw std::invalid_argument("monitor_A1 needs at least three snapshots");
    Eigen::VectorXd vgrid;
    if (traj.source.kind == SourceModel::Kind::pair_potential) vgrid = sample_potential(traj.source.potential, traj.grid);
    const double w = weight2(traj.grid);

    struct Node {
        double q = 0.0, s = 0.0, b = 0.0, c = 0.0;
    };
    const auto nodes = parallel_map(n, jobs, [&](std::size_t k) {
        const double t = traj.times[k];
        const auto& u = traj.snapshots[k];
        Node node;
        const Eigen::VectorXcd Mu = apply_observable(M, t, u);
        node.q = (u.values.dot(Mu) * w).real();
        if (traj.source.kind != SourceModel::Kind::none) {
            const Eigen::VectorXcd r = source_term(traj.source, vgrid, t, u.values);
            node.s = 2.0 * (Mu.dot(r) * w).real();
        }
        if (!B_target.terms.empty()) node.b = apply_observable(B_target, t, u).squaredNorm() * w;
        for (const auto& C : C_list) node.c += apply_observable(C, t, u).squaredNorm() * w;
        return node;
    });
    std::vector<double> b, c, sabs;
    for (const auto& node : nodes) {
        rep.q.push_back(node.q);
        rep.source.push_back(node.s);
        b.push_back(node.b);
        c.push_back(node.c);
        sabs.push_back(std::abs(node.s));
    }
    rep.dq = node_derivative(rep.t, rep.q);
    std::vector<double> D(n);
    for (std::size_t k = 0; k < n; ++k) D[k] = rep.dq[k] - rep.source[k];
    rep.q_start = rep.q.front();
    rep.q_end = rep.q.back();
    rep.integral_D = integrate(rep.t, D);
    rep.integral_source = integrate(rep.t, rep.source);
    const double I_h = rep.integral_D + rep.integral_source;
    rep.closure_error = std::abs(rep.q_end - rep.q_start - I_h);

    // same quadrature on every second node (last node always kept)
    std::vector<double> tc, qc;
    for (std::size_t k = 0; k < n; k += 2) {
        tc.push_back(rep.t[k]);
        qc.push_back(rep.q[k]);
    }
    if (tc.back() != rep.t.back()) {
        tc.push_back(rep.t.back());
        qc.push_back(rep.q.back());
    }
    const double I_2h = integrate(tc, node_derivative(tc, qc));
    const auto wts = trapezoid_weights(rep.t);
    double magnitude = std::abs(rep.q_start) + std::abs(rep.q_end);
    for (std::size_t k = 0; k < n; ++k) magnitude += std::abs(rep.dq[k]) * wts[k];
    const double rounding = 1e-13 * magnitude;
    rep.local_error_estimate = std::abs(I_h - I_2h) / 3.0 + rounding;
    rep.closes = rep.closure_error <= 10.0 * rep.local_error_estimate;

    rep.integral_B = integrate(rep.t, b);
    rep.integral_C = integrate(rep.t, c);
    rep.source_abs_integral = integrate(rep.t, sabs);
    {
        std::vector<double> tt, ss;
        for (std::size_t k = 0; k < n; ++k)
            if (rep.t[k] >= rep.t.back() / 10.0) {
                tt.push_back(rep.t[k]);
                ss.push_back(sabs[k]);
            }
        const double tail = tt.size() > 1 ? integrate(tt, ss) : 0.0;
        rep.source_tail_fraction = rep.source_abs_integral > 0.0 ? tail / rep.source_abs_integral : 0.0;
    }
    rep.bound = std::abs(rep.q_start) + std::abs(rep.q_end) + rep.integral_C + rep.source_abs_integral;
    rep.ratio = rep.bound > 0.0 ? rep.integral_B / rep.bound : 0.0;
    rep.bound_holds = rep.integral_B <= rep.bound;
    return rep;
}

A3Report monitor_A3(const PropagationObservable& M, const Trajectory& traj, double tol, int jobs)
{
    require_usable(M, traj);
    A3Report rep;
    rep.values = parallel_map(traj.times.size(), jobs,
                              [&](std::size_t k) { return expectation(M, traj.times[k], traj.snapshots[k]); });
    rep.series.name = M.name;
    for (std::size_t k = 0; k < traj.times.size(); ++k) rep.series.push(traj.times[k], rep.values[k]);
    rep.limit_estimate = rep.values.back();
    const double half = traj.final_time() / 2.0;
    double lo = rep.values.back(), hi = rep.values.back();
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        if (traj.times[k] >= half) {
            lo = std::min(lo, rep.values[k]);
            hi = std::max(hi, rep.values[k]);
        }
    rep.cauchy_tail = hi - lo;
    rep.converged = rep.cauchy_tail < tol;
    return rep;
}

A2Report monitor_A2(const PropagationObservable& M, const Trajectory& traj, int jobs)
{
    require_usable(M, traj);
    const auto wt = omega_tilde_multiplier(traj.grid, traj.m);
    const auto G = parallel_map(traj.times.size(), jobs, [&](std::size_t k) {
        ComplexField2P v(traj.grid, apply_observable(M, traj.times[k], traj.snapshots[k]));
        return free_propagator(wt, -traj.times[k])(v);
    });
    A2Report rep;
    rep.t = traj.times;
    const double w = weight2(traj.grid);
    rep.step_differences.push_back(0.0);
    for (std::size_t k = 1; k < G.size(); ++k)
        rep.step_differences.push_back(std::sqrt((G[k].values - G[k - 1].values).squaredNorm() * w));
    const double half = traj.final_time() / 2.0;
    for (std::size_t a = 0; a < G.size(); ++a) {
        if (traj.times[a] < half) continue;
        for (std::size_t b = a + 1; b < G.size(); ++b)
            rep.cauchy_tail = std::max(rep.cauchy_tail, std::sqrt((G[a].values - G[b].values).squaredNorm() * w));
    }
    rep.vector_limit = G.back();
    return rep;
}

}  // namespace kgscat
