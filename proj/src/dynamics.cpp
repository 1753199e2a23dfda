#include "kgscat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgscat {

PotentialSpec PotentialSpec::gaussian(double lambda, double sigma)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("potential width sigma must be positive");
    PotentialSpec v;
    v.kind = Kind::gaussian;
    v.lambda = lambda;
    v.sigma = sigma;
    return v;
}

PotentialSpec PotentialSpec::sampled(std::function<double(const double* rel)> fn)
{
    PotentialSpec v;
    v.kind = Kind::sampled;
    v.fn = std::move(fn);
    return v;
}

double PotentialSpec::operator()(const double* rel, int d) const
{
    if (kind == Kind::sampled) return fn(rel);
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) r2 += rel[j] * rel[j];
    return lambda * std::exp(-r2 / (2.0 * sigma * sigma));
}

SourceModel SourceModel::none() { return {}; }

SourceModel SourceModel::pair(const PotentialSpec& v)
{
    SourceModel s;
    s.kind = Kind::pair_potential;
    s.potential = v;
    return s;
}

SourceModel SourceModel::tabulated(std::function<Eigen::VectorXcd(double t)> r)
{
    SourceModel s;
    s.kind = Kind::tabulated;
    s.sampler = std::move(r);
    return s;
}

void validate(const EvolutionConfig& cfg)
{
    if (!(cfg.t0 > 0.0)) throw std::invalid_argument("evolution.t0 must be positive");
    if (!(cfg.T > cfg.t0)) throw std::invalid_argument("evolution.T must exceed t0");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("evolution.dt must be positive");
    if (!(cfg.wrap_tol > 0.0)) throw std::invalid_argument("evolution.wrap_tol must be positive");
    for (double t : cfg.snapshots.extra)
        if (t < cfg.t0 || t > cfg.T) throw std::invalid_argument("snapshot times must lie in [t0, T]");
}

std::vector<double> snapshot_times(const EvolutionConfig& cfg)
{
    std::vector<double> ts{cfg.t0, cfg.T};
    const auto& s = cfg.snapshots;
    if (s.log_per_decade > 0) {
        const double span = std::log10(cfg.T / cfg.t0);
        const int count = static_cast<int>(std::ceil(span * s.log_per_decade));
        for (int k = 1; k < count; ++k) ts.push_back(cfg.t0 * std::pow(10.0, span * k / count));
    }
    if (s.linear_count > 1)
        for (int k = 1; k < s.linear_count; ++k) ts.push_back(cfg.t0 + (cfg.T - cfg.t0) * k / s.linear_count);
    if (s.dyadic)
        for (double t = 2.0 * cfg.t0; t < cfg.T; t *= 2.0) ts.push_back(t);
    for (double t : s.extra) ts.push_back(t);
    std::sort(ts.begin(), ts.end());
    // merge times closer than a part in 1e9 of T
    std::vector<double> out;
    for (double t : ts)
        if (out.empty() || t - out.back() > 1e-9 * cfg.T) out.push_back(t);
    out.back() = cfg.T;
    return out;
}

std::size_t Trajectory::index_of(double t) const
{
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
    std::ostringstream os;
    os << "no snapshot at t=" << t;
    throw std::out_of_range(os.str());
}

bool Trajectory::has(double t) const
{
    return std::any_of(times.begin(), times.end(),
                       [&](double s) { return std::abs(s - t) <= 1e-9 * std::max(1.0, std::abs(t)); });
}

namespace {

Eigen::ArrayXd boundary_mask(const GridSpec& g, int axes)
{
    std::vector<char> edge(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) edge[static_cast<std::size_t>(i)] = std::abs(g.position(i)) > 0.95 * g.L;
    const auto total = static_cast<Eigen::Index>(g.points(axes / g.d));
    Eigen::ArrayXd mask(total);
    std::vector<int> c(static_cast<std::size_t>(axes));
    for (Eigen::Index i = 0; i < total; ++i) {
        unflatten(g, axes, static_cast<std::size_t>(i), c.data());
        bool on_edge = false;
        for (int a = 0; a < axes; ++a) on_edge = on_edge || edge[static_cast<std::size_t>(c[static_cast<std::size_t>(a)])];
        mask[i] = on_edge ? 1.0 : 0.0;
    }
    return mask;
}

double masked_fraction(const Eigen::VectorXcd& v, const Eigen::ArrayXd& mask)
{
    const double total = v.squaredNorm();
    return total > 0.0 ? (v.array().abs2() * mask).sum() / total : 0.0;
}

}  // namespace

double boundary_mass_fraction(const Eigen::VectorXcd& v, const GridSpec& g)
{
    const int axes = v.size() == static_cast<Eigen::Index>(g.points(1)) ? g.axes(1) : g.axes(2);
    return masked_fraction(v, boundary_mask(g, axes));
}

Eigen::VectorXd sample_potential(const PotentialSpec& V, const GridSpec& g)
{
    const int axes = g.axes(2);
    Eigen::VectorXd out(static_cast<Eigen::Index>(g.points(2)));
    std::vector<int> c(static_cast<std::size_t>(axes));
    std::vector<double> rel(static_cast<std::size_t>(g.d));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        unflatten(g, axes, static_cast<std::size_t>(i), c.data());
        for (int j = 0; j < g.d; ++j) {
            double r = (c[static_cast<std::size_t>(j)] - c[static_cast<std::size_t>(g.d + j)]) * g.dx;
            r -= 2.0 * g.L * std::round(r / (2.0 * g.L));
            rel[static_cast<std::size_t>(j)] = r;
        }
        out[i] = V(rel.data(), g.d);
    }
    if (V.kind == PotentialSpec::Kind::gaussian) {
        const double edge = std::exp(-g.L * g.L / (2.0 * V.sigma * V.sigma));
        if (edge > 1e-14) {
            std::ostringstream os;
            os << "potential does not decay below 1e-14 of its peak within half the box (need L >= "
               << V.sigma * std::sqrt(2.0 * std::log(1e14)) << ")";
            throw std::invalid_argument(os.str());
        }
    }
    return out;
}

namespace {

Eigen::VectorXcd phase_vector(const Eigen::VectorXd& values, double tau)
{
    Eigen::VectorXcd out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) out[i] = std::polar(1.0, -tau * values[i]);
    return out;
}

// Caches the phase vectors of a run; event-truncated steps get their own entries.
class Stepper {
public:
    Stepper(const GridSpec& g, double m, const SourceModel& source)
        : grid_(g), axes_(g.axes(2)), source_(source)
    {
        omega_ = omega_tilde_multiplier(g, m).samples.real();
        if (source.kind == SourceModel::Kind::pair_potential) vgrid_ = sample_potential(source.potential, g);
    }

    const Eigen::VectorXd& vgrid() const { return vgrid_; }

    const Eigen::VectorXcd& kinetic(double tau)
    {
        auto it = kinetic_.find(tau);
        if (it == kinetic_.end()) it = kinetic_.emplace(tau, phase_vector(omega_, tau)).first;
        return it->second;
    }

    const Eigen::VectorXcd& potential(double tau)
    {
        auto it = potential_.find(tau);
        if (it == potential_.end()) it = potential_.emplace(tau, phase_vector(vgrid_, tau)).first;
        return it->second;
    }

    void free(Eigen::VectorXcd& u, double dt)
    {
        fft_multiply_inplace(grid_, axes_, u, kinetic(dt));
    }

    void strang(Eigen::VectorXcd& u, double dt)
    {
        const auto& half = potential(0.5 * dt);
        u.array() *= half.array();
        free(u, dt);
        u.array() *= half.array();
    }

    void duhamel(Eigen::VectorXcd& u, double t, double dt)
    {
        Eigen::VectorXcd r = source_.sampler(t + 0.5 * dt);
        if (r.size() != u.size()) throw std::runtime_error("source sampler returned a field of the wrong size");
        fft_combine_inplace(grid_, axes_, u, kinetic(dt), r, (dt * kinetic(0.5 * dt).array()).matrix());
    }

    // e^{is omega~} r(s) in momentum space. The phase e^{is omega~} is carried along
    // the run by multiplying with conjugated step phases.
    void start_cook(double s) { cook_phase_ = phase_vector(omega_, -s); }
    void advance_cook(double h) { cook_phase_.array() *= kinetic(h).array().conjugate(); }
    Eigen::VectorXcd cook_integrand(double s, const Eigen::VectorXcd& u)
    {
        Eigen::VectorXcd r = source_term(source_, vgrid_, s, u);
        fft_forward_inplace(grid_, axes_, r);
        r.array() *= cook_phase_.array();
        return r;
    }

private:
    GridSpec grid_;
    int axes_;
    SourceModel source_;
    Eigen::VectorXd omega_, vgrid_;
    Eigen::VectorXcd cook_phase_;
    std::map<double, Eigen::VectorXcd> kinetic_, potential_;
};

}  // namespace

Eigen::VectorXcd source_term(const SourceModel& source, const Eigen::VectorXd& vgrid, double t,
                             const Eigen::VectorXcd& u)
{
    switch (source.kind) {
        case SourceModel::Kind::none: return Eigen::VectorXcd::Zero(u.size());
        case SourceModel::Kind::pair_potential: return cplx(0.0, -1.0) * (vgrid.array() * u.array()).matrix();
        case SourceModel::Kind::tabulated: return source.sampler(t);
    }
    return {};
}

ComplexField2P step_free(const ComplexField2P& field, double dt, double m)
{
    ComplexField2P out = field;
    Stepper(field.grid, m, SourceModel::none()).free(out.values, dt);
    return out;
}

ComplexField2P step_strang(const ComplexField2P& field, double dt, const PotentialSpec& V, double m)
{
    ComplexField2P out = field;
    Stepper(field.grid, m, SourceModel::pair(V)).strang(out.values, dt);
    return out;
}

ComplexField2P step_duhamel(const ComplexField2P& field, double t, double dt, const SourceModel& source, double m)
{
    ComplexField2P out = field;
    if (source.kind == SourceModel::Kind::none) {
        Stepper(field.grid, m, source).free(out.values, dt);
        return out;
    }
    if (source.kind != SourceModel::Kind::tabulated)
        throw std::invalid_argument("midpoint Duhamel stepping needs a tabulated source");
    Stepper(field.grid, m, source).duhamel(out.values, t, dt);
    return out;
}

Trajectory run(const ComplexField2P& initial, const SourceModel& source, const EvolutionConfig& config, double m)
{
    validate(config);
    if (initial.rep != Representation::position) throw std::invalid_argument("initial data must be in position space");
    if (config.scheme == Scheme::strang && source.kind == SourceModel::Kind::tabulated)
        throw std::invalid_argument("Strang splitting needs a pair potential; use duhamel_midpoint for tables");
    if (config.scheme == Scheme::duhamel_midpoint && source.kind == SourceModel::Kind::pair_potential)
        throw std::invalid_argument("midpoint Duhamel stepping needs a tabulated source");

    const auto& g = initial.grid;
    Trajectory traj;
    traj.grid = g;
    traj.m = m;
    traj.config = config;
    traj.source = source;
    Stepper stepper(g, m, source);

    const double initial_boundary = boundary_mass_fraction(initial.values, g);
    if (initial_boundary > config.wrap_tol) {
        std::ostringstream os;
        os << "initial data has boundary mass fraction " << initial_boundary << " above wrap_tol "
           << config.wrap_tol;
        throw std::invalid_argument(os.str());
    }

    const auto events = snapshot_times(config);
    const bool sourced = source.kind != SourceModel::Kind::none;
    const bool jump = !sourced && !config.step_free_runs;
    const bool cook = config.cook_integral && sourced;
    const double w = cell_weight(g, 2, Representation::position);
    const Eigen::ArrayXd edge = boundary_mask(g, g.axes(2));

    Eigen::VectorXcd u = initial.values;
    double t = config.t0;
    Eigen::VectorXcd cook_acc, cook_prev;
    if (cook) {
        cook_acc = Eigen::VectorXcd::Zero(u.size());
        stepper.start_cook(t);
        cook_prev = stepper.cook_integrand(t, u);
    }

    auto log_step = [&](double time) {
        StepRecord rec;
        rec.t = time;
        rec.norm = std::sqrt(u.squaredNorm() * w);
        rec.boundary_mass = masked_fraction(u, edge);
        if (sourced) rec.source_norm = std::sqrt(source_term(source, stepper.vgrid(), time, u).squaredNorm() * w);
        traj.steps.push_back(rec);
        return rec;
    };

    log_step(t);
    traj.times.push_back(t);
    traj.snapshots.emplace_back(g, u);
    if (cook) traj.cook.push_back(cook_acc);

    for (std::size_t e = 1; e < events.size(); ++e) {
        const double target = events[e];
        while (t < target) {
            double h = jump ? target - t : std::min(config.dt, target - t);
            // absorb a sliver left by rounding into the current step
            if (!jump && target - (t + h) < 1e-9 * config.dt) h = target - t;
            if (!sourced)
                stepper.free(u, h);
            else if (config.scheme == Scheme::strang)
                stepper.strang(u, h);
            else
                stepper.duhamel(u, t, h);
            t = (t + h >= target - 1e-9 * config.dt) ? target : t + h;
            ++traj.step_count;
            if (cook) {
                stepper.advance_cook(h);
                Eigen::VectorXcd next = stepper.cook_integrand(t, u);
                cook_acc += (0.5 * h) * (cook_prev + next);
                cook_prev = std::move(next);
            }
            const auto rec = log_step(t);
            if (rec.boundary_mass > config.wrap_tol) {
                std::ostringstream os;
                os << "wraparound guard: boundary mass fraction " << rec.boundary_mass << " exceeds wrap_tol "
                   << config.wrap_tol << " at t=" << t << "; enlarge L";
                traj.valid = false;
                traj.diagnosis = os.str();
                return traj;
            }
        }
        traj.times.push_back(t);
        traj.snapshots.emplace_back(g, u);
        if (cook) traj.cook.push_back(cook_acc);
    }
    return traj;
}

double source_offdiag_norm(const Trajectory& traj, const Cutoff2P& Htilde, double t)
{
    if (Htilde.kind() == Cutoff2P::Kind::product) {
        // products with disjoint supports vanish near the diagonal automatically
    } else if (!(Htilde.clearance() > 0.0)) {
        throw std::invalid_argument("off-diagonal cutoff must vanish on a tube around the diagonal");
    }
    if (traj.source.kind == SourceModel::Kind::none) return 0.0;
    const auto& u = traj.at(t);
    Eigen::VectorXd vgrid;
    if (traj.source.kind == SourceModel::Kind::pair_potential) vgrid = sample_potential(traj.source.potential, traj.grid);
    ComplexField2P r(traj.grid, source_term(traj.source, vgrid, t, u.values));
    return l2_norm(apply_Ht(Htilde, t, r));
}

}  // namespace kgscat
