#include "kgscat/cli.hpp"

#include "kgscat/asymptotics.hpp"
#include "kgscat/detectors.hpp"
#include "kgscat/io.hpp"
#include "kgscat/kgwave.hpp"
#include "kgscat/propest.hpp"
#include "kgscat/specops.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#ifndef KGSCAT_VERSION
#define KGSCAT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace kgscat {

std::string code_version() { return std::string("kgscat ") + KGSCAT_VERSION; }

// ---------------------------------------------------------------------------------------
// Scenario parsing

namespace {

template <typename T>
const char* type_name()
{
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
}

// Mapping reader that remembers which keys were consumed, so leftovers can be reported.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (present() && !node_.IsMap()) throw ValidationError(path_ + ": expected a mapping");
    }

    bool present() const { return node_.IsDefined() && !node_.IsNull(); }
    bool has(const std::string& key) const { return present() && node_[key].IsDefined() && !node_[key].IsNull(); }
    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    T get(const std::string& key, T fallback)
    {
        used_.insert(key);
        if (!has(key)) return fallback;
        const YAML::Node v = node_[key];
        if (!v.IsScalar()) throw ValidationError(key_path(key) + ": expected " + type_name<T>());
        try {
            return v.as<T>();
        } catch (const YAML::Exception&) {
            throw ValidationError(key_path(key) + ": expected " + type_name<T>() + ", got '" + v.Scalar() + "'");
        }
    }

    Section child(const std::string& key)
    {
        used_.insert(key);
        return Section(present() ? node_[key] : YAML::Node(), key_path(key));
    }

    YAML::Node raw(const std::string& key)
    {
        used_.insert(key);
        return present() ? node_[key] : YAML::Node();
    }

    void finish() const
    {
        if (!present()) return;
        for (const auto& kv : node_) {
            const auto k = kv.first.as<std::string>();
            if (!used_.count(k)) throw ValidationError(key_path(k) + ": unknown key");
        }
    }

private:
    const YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

IntervalSpec read_interval(Section sec, IntervalSpec def)
{
    IntervalSpec out{sec.get("lo", def.lo), sec.get("hi", def.hi), sec.get("transition", def.transition)};
    sec.finish();
    if (!(out.lo < out.hi)) throw ValidationError(sec.key_path("lo") + ": needs lo < hi");
    if (!(out.transition > 0.0)) throw ValidationError(sec.key_path("transition") + ": must be positive");
    return out;
}

void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

const std::set<std::string> known_diagnostics = {"two_detector", "large_velocity", "phase_space", "ensemble",
                                                 "monitor_A1",   "monitor_A2",     "monitor_A3"};

void cross_check(Scenario& s)
{
    const auto g = make_grid(s.d, s.n, s.L);
    const auto H = [&] {
        try {
            return Cutoff2P::product(s.h1.cutoff(), s.h2.cutoff());
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("detectors: ") + e.what());
        }
    }();
    (void)H;
    // Free flight of each factor is exact in 1D; the boundary layer of the product state holds
    // at most the sum of the factors' boundary fractions.
    std::vector<KGWavePacket> pks;
    for (std::size_t k = 0; k < s.packets.size(); ++k) {
        const auto& p = s.packets[k];
        const std::string key = "initial.packets." + std::to_string(k);
        try {
            pks.push_back(make_packet(g, s.m, p.p_center, p.p_width, p.x0));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(key + ": " + e.what());
        }
        const auto vs = velocity_support(pks.back());
        auto inside = [&](const IntervalSpec& h) { return vs.lo[0] >= h.lo && vs.hi[0] <= h.hi; };
        if (!inside(s.h1) && !inside(s.h2)) {
            std::ostringstream os;
            os << key << ": group velocities [" << vs.lo[0] << ", " << vs.hi[0]
               << "] are not inside the plateau of h1 or h2";
            s.warnings.push_back(os.str());
        }
    }
    const auto w1 = omega_multiplier(g, s.m);
    Eigen::ArrayXd edge(g.n);
    for (int i = 0; i < g.n; ++i) edge[i] = std::abs(g.position(i)) > 0.95 * g.L ? 1.0 : 0.0;
    const int probes = 64;
    for (int k = 0; k <= probes; ++k) {
        const double t = s.evolution.T * k / probes;
        double frac = 0.0;
        for (const auto& pk : pks) {
            const auto f = fourier_inverse(free_propagator(w1, t)(pk.fourier_data));
            frac += (f.values.array().abs2() * edge).sum() / f.values.squaredNorm();
        }
        if (pks.size() == 1) frac *= 2.0;
        if (frac > s.evolution.wrap_tol) {
            std::ostringstream os;
            os << "grid.L: free flight puts mass fraction " << frac << " into the boundary layer by t=" << t
               << " (wrap_tol " << s.evolution.wrap_tol << "); enlarge L (now " << s.L << ")";
            throw ValidationError(os.str());
        }
    }
    if (s.source == "gaussian") {
        try {
            sample_potential(PotentialSpec::gaussian(s.lambda, s.sigma), g);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("source.sigma: ") + e.what());
        }
    }
}

}  // namespace

RegionSpec Scenario::region() const
{
    return RegionSpec::compound({RegionSpec::annulus_piece(region_r_in, region_r_out)}, region_tube);
}

SourceModel Scenario::source_model() const
{
    if (source == "gaussian") return SourceModel::pair(PotentialSpec::gaussian(lambda, sigma));
    return SourceModel::none();
}

void apply_override(YAML::Node root, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--override: expected KEY=VALUE, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(assignment.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ValidationError(key + ": cannot parse override value: " + e.what());
    }
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ValidationError("--override: empty path segment in '" + key + "'");
        parts.push_back(part);
    }
    // recursion keeps every YAML::Node handle bound to a single element
    auto set = [&](auto&& self, YAML::Node node, std::size_t i) -> void {
        const auto& k = parts[i];
        if (node.IsSequence()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(k);
            } catch (const std::exception&) {
                throw ValidationError(key + ": '" + k + "' is not a list index");
            }
            if (idx >= node.size()) throw ValidationError(key + ": list index " + k + " out of range");
            if (i + 1 == parts.size()) {
                node[idx] = value;
                return;
            }
            self(self, node[idx], i + 1);
            return;
        }
        if (i + 1 == parts.size()) {
            node[k] = value;
            return;
        }
        if (!node[k] || !(node[k].IsMap() || node[k].IsSequence())) node[k] = YAML::Node(YAML::NodeType::Map);
        self(self, node[k], i + 1);
    };
    set(set, root, 0);
}

Scenario scenario_from_yaml(const YAML::Node& root)
{
    Scenario s;
    Section top(root, "");

    auto grid = top.child("grid");
    s.d = grid.get("d", s.d);
    s.n = grid.get("n", s.n);
    s.L = grid.get("L", s.L);
    grid.finish();
    require(s.d == 1, "grid.d: two-particle runs support d = 1 only");
    try {
        make_grid(s.d, s.n, s.L);
    } catch (const GridError& e) {
        throw ValidationError(std::string("grid: ") + e.what());
    }
    s.m = top.get("mass", s.m);
    require(s.m > 0.0, "mass: must be positive");

    auto init = top.child("initial");
    const auto packets = init.raw("packets");
    init.finish();
    require(packets.IsDefined() && packets.IsSequence() && (packets.size() == 1 || packets.size() == 2),
            "initial.packets: expected a list of one or two packets");
    for (std::size_t k = 0; k < packets.size(); ++k) {
        Section p(packets[k], "initial.packets." + std::to_string(k));
        PacketSpec ps{p.get("p_center", 0.0), p.get("p_width", 0.3), p.get("x0", 0.0)};
        p.finish();
        require(ps.p_width > 0.0, p.key_path("p_width") + ": must be positive");
        s.packets.push_back(ps);
    }

    auto src = top.child("source");
    s.source = src.get("kind", s.source);
    s.lambda = src.get("lambda", s.lambda);
    s.sigma = src.get("sigma", s.sigma);
    src.finish();
    require(s.source == "none" || s.source == "gaussian", "source.kind: expected none or gaussian, got '" + s.source + "'");
    require(s.sigma > 0.0, "source.sigma: must be positive");

    auto det = top.child("detectors");
    s.h1 = read_interval(det.child("h1"), s.h1);
    s.h2 = read_interval(det.child("h2"), s.h2);
    det.finish();

    auto reg = top.child("region");
    s.region_r_in = reg.get("r_in", s.region_r_in);
    s.region_r_out = reg.get("r_out", s.region_r_out);
    s.region_tube = reg.get("tube", s.region_tube);
    s.region_delta = reg.get("delta", s.region_delta);
    reg.finish();
    require(0.0 <= s.region_r_in && s.region_r_in < s.region_r_out, "region.r_in: needs 0 <= r_in < r_out");
    require(s.region_tube > 0.0, "region.tube: K must keep a positive distance from the diagonal");
    require(s.region_delta > 0.0, "region.delta: must be positive");

    auto gr = top.child("graf");
    s.graf_radii.r = gr.get("r", s.graf_radii.r);
    s.graf_radii.r1 = gr.get("r1", s.graf_radii.r1);
    s.graf_radii.r1p = gr.get("r1p", s.graf_radii.r1p);
    s.graf_radii.rp = gr.get("rp", s.graf_radii.rp);
    s.graf_cells = gr.get("cells_per_mollifier", s.graf_cells);
    s.graf_v_refinement = gr.get("v_refinement", s.graf_v_refinement);
    s.graf_table_stride = gr.get("table_stride", s.graf_table_stride);
    gr.finish();
    require(std::sqrt(2.0) < s.graf_radii.r && s.graf_radii.r < s.graf_radii.r1 && s.graf_radii.r1 < s.graf_radii.r1p &&
                s.graf_radii.r1p < s.graf_radii.rp,
            "graf: radii must satisfy sqrt(2) < r < r1 < r1p < rp");
    require(s.graf_table_stride >= 1, "graf.table_stride: must be positive");

    auto ev = top.child("evolution");
    auto& e = s.evolution;
    e.t0 = ev.get("t0", e.t0);
    e.T = ev.get("T", e.T);
    e.dt = ev.get("dt", e.dt);
    const auto scheme = ev.get<std::string>("scheme", "strang");
    e.wrap_tol = ev.get("wrap_tol", e.wrap_tol);
    e.cook_integral = ev.get("cook_integral", e.cook_integral);
    e.step_free_runs = ev.get("step_free_runs", e.step_free_runs);
    auto snap = ev.child("snapshots");
    e.snapshots.log_per_decade = snap.get("log_per_decade", 20);
    e.snapshots.linear_count = snap.get("linear_count", 0);
    e.snapshots.dyadic = snap.get("dyadic", true);
    const auto extra = snap.raw("extra");
    snap.finish();
    ev.finish();
    if (extra.IsDefined() && !extra.IsNull()) {
        require(extra.IsSequence(), "evolution.snapshots.extra: expected a list of times");
        for (const auto& v : extra) e.snapshots.extra.push_back(v.as<double>());
    }
    if (scheme == "duhamel_midpoint")
        throw ValidationError("evolution.scheme: duhamel_midpoint needs a tabulated source, which scenarios cannot express");
    require(scheme == "strang", "evolution.scheme: expected strang, got '" + scheme + "'");
    e.scheme = Scheme::strang;
    try {
        validate(e);
    } catch (const std::invalid_argument& ex) {
        throw ValidationError(std::string("evolution: ") + ex.what());
    }

    const auto diags = top.raw("diagnostics");
    if (diags.IsDefined() && !diags.IsNull()) {
        require(diags.IsSequence(), "diagnostics: expected a list of names");
        for (const auto& v : diags) {
            const auto name = v.as<std::string>();
            require(known_diagnostics.count(name) > 0, "diagnostics: unknown diagnostic '" + name + "'");
            s.diagnostics.push_back(name);
        }
    }

    auto est = top.child("estimates");
    s.lv_r = est.get("r", s.lv_r);
    s.lv_rp = est.get("rp", s.lv_rp);
    s.lv_eps = est.get("eps", s.lv_eps);
    s.tail_tol = est.get("tail_tol", s.tail_tol);
    s.a3_tol = est.get("a3_tol", s.a3_tol);
    s.ensemble_draws = est.get("ensemble_draws", s.ensemble_draws);
    s.ensemble_T = est.get("ensemble_T", s.ensemble_T);
    est.finish();
    require(s.lv_r > std::sqrt(2.0), "estimates.r: must exceed sqrt(2)");
    require(s.lv_rp > s.lv_r, "estimates.rp: must exceed estimates.r");
    require(s.lv_eps > 0.0, "estimates.eps: must be positive");
    require(s.ensemble_draws > 0, "estimates.ensemble_draws: must be positive");
    require(s.ensemble_T > 1.0, "estimates.ensemble_T: must exceed 1");

    auto lim = top.child("limits");
    s.limits_tol = lim.get("tol", s.limits_tol);
    s.cook_tail_threshold = lim.get("cook_tail_threshold", s.cook_tail_threshold);
    lim.finish();
    require(s.limits_tol > 0.0, "limits.tol: must be positive");

    auto out = top.child("output");
    s.output_dir = out.get("dir", s.output_dir);
    out.finish();
    s.seed = top.get<std::uint64_t>("seed", s.seed);
    top.finish();

    cross_check(s);
    return s;
}

Scenario load_scenario(const fs::path& path, const std::vector<std::string>& overrides)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ValidationError("scenario: cannot read " + path.string() + ": " + e.what());
    }
    // a run manifest carries the scenario under "scenario"
    if (root.IsMap() && root["scenario"] && root["code_version"]) root = YAML::Clone(root["scenario"]);
    for (const auto& o : overrides) apply_override(root, o);
    return scenario_from_yaml(root);
}

json scenario_to_json(const Scenario& s)
{
    json j;
    j["grid"] = {{"d", s.d}, {"n", s.n}, {"L", s.L}};
    j["mass"] = s.m;
    json packets = json::array();
    for (const auto& p : s.packets) packets.push_back({{"p_center", p.p_center}, {"p_width", p.p_width}, {"x0", p.x0}});
    j["initial"] = {{"packets", packets}};
    j["source"] = {{"kind", s.source}, {"lambda", s.lambda}, {"sigma", s.sigma}};
    auto iv = [](const IntervalSpec& h) { return json{{"lo", h.lo}, {"hi", h.hi}, {"transition", h.transition}}; };
    j["detectors"] = {{"h1", iv(s.h1)}, {"h2", iv(s.h2)}};
    j["region"] = {{"r_in", s.region_r_in}, {"r_out", s.region_r_out}, {"tube", s.region_tube}, {"delta", s.region_delta}};
    j["graf"] = {{"r", s.graf_radii.r},
                 {"r1", s.graf_radii.r1},
                 {"r1p", s.graf_radii.r1p},
                 {"rp", s.graf_radii.rp},
                 {"cells_per_mollifier", s.graf_cells},
                 {"v_refinement", s.graf_v_refinement},
                 {"table_stride", s.graf_table_stride}};
    const auto& e = s.evolution;
    j["evolution"] = {{"t0", e.t0},
                      {"T", e.T},
                      {"dt", e.dt},
                      {"scheme", "strang"},
                      {"wrap_tol", e.wrap_tol},
                      {"cook_integral", e.cook_integral},
                      {"step_free_runs", e.step_free_runs},
                      {"snapshots",
                       {{"log_per_decade", e.snapshots.log_per_decade},
                        {"linear_count", e.snapshots.linear_count},
                        {"dyadic", e.snapshots.dyadic},
                        {"extra", e.snapshots.extra}}}};
    j["diagnostics"] = s.diagnostics;
    j["estimates"] = {{"r", s.lv_r},           {"rp", s.lv_rp},         {"eps", s.lv_eps},
                      {"tail_tol", s.tail_tol}, {"a3_tol", s.a3_tol},    {"ensemble_draws", s.ensemble_draws},
                      {"ensemble_T", s.ensemble_T}};
    j["limits"] = {{"tol", s.limits_tol}, {"cook_tail_threshold", s.cook_tail_threshold}};
    j["output"] = {{"dir", s.output_dir}};
    j["seed"] = s.seed;
    return j;
}

ComplexField2P initial_state(const Scenario& s)
{
    const auto g = make_grid(s.d, s.n, s.L);
    const auto f = packet_field(make_packet(g, s.m, s.packets[0].p_center, s.packets[0].p_width, s.packets[0].x0));
    const auto& p = s.packets.back();
    const auto h = packet_field(make_packet(g, s.m, p.p_center, p.p_width, p.x0));
    ComplexField2P u(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) u.values[i * g.n + j] = f.values[i] * h.values[j] + h.values[i] * f.values[j];
    u.values /= l2_norm(u);
    return u;
}

// ---------------------------------------------------------------------------------------
// Commands

namespace {

struct Outputs {
    fs::path dir;
    std::vector<std::pair<std::string, std::string>> files;  // name, kind

    fs::path add(const std::string& name, const std::string& kind)
    {
        files.emplace_back(name, kind);
        return dir / name;
    }
};

struct Session {
    const Scenario& s;
    const RunContext& ctx;
    std::string command;
    Outputs out;
    json report;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    const Trajectory* traj = nullptr;

    Session(const Scenario& sc, const RunContext& c, std::string cmd) : s(sc), ctx(c), command(std::move(cmd))
    {
        out.dir = ctx.out.empty() ? fs::path(s.output_dir) : ctx.out;
        fs::create_directories(out.dir);
    }

    void note(const std::string& msg) const
    {
        if (ctx.log) *ctx.log << "[" << command << "] " << msg << '\n';
    }

    int finish(int code, const std::string& status)
    {
        json j;
        j["code_version"] = code_version();
        j["command"] = command;
        j["scenario"] = scenario_to_json(s);
        j["warnings"] = s.warnings;
        j["status"] = status;
        j["exit_code"] = code;
        const auto g = make_grid(s.d, s.n, s.L);
        const auto axis = axis_positions(g);
        j["grid_checksum"] = hex64(fnv1a(axis.data(), axis.size() * sizeof(double)));
        if (traj) {
            j["time_checksum"] = hex64(fnv1a(traj->times.data(), traj->times.size() * sizeof(double)));
            j["step_count"] = traj->step_count;
        }
        json files = json::array();
        for (const auto& [name, kind] : out.files)
            files.push_back({{"file", name}, {"kind", kind}, {"fnv1a", hex64(file_checksum(out.dir / name))}});
        j["outputs"] = files;
        j["report"] = report;
        j["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream os(out.dir / "manifest.json");
        os << j.dump(2) << '\n';
        note(status + " (exit " + std::to_string(code) + ")");
        return code;
    }
};

void write_steps(Session& ses, const Trajectory& traj)
{
    std::vector<std::vector<double>> rows;
    for (const auto& r : traj.steps) rows.push_back({r.t, r.norm, r.boundary_mass, r.source_norm});
    write_csv(ses.out.add("steps.csv", "series"), {"t", "norm", "boundary_mass", "source_norm"}, rows);
}

// Runs the evolution and writes the step log and end-point fields. Returns an exit code
// when the run was aborted by the guard.
std::optional<int> evolve_scenario(Session& ses, Trajectory& traj, EvolutionConfig cfg)
{
    const auto u0 = initial_state(ses.s);
    ses.note("evolving n=" + std::to_string(ses.s.n) + " to T=" + format_double(cfg.T));
    traj = run(u0, ses.s.source_model(), cfg, ses.s.m);
    ses.traj = &traj;
    write_steps(ses, traj);
    write_field_blob(ses.out.add("field_initial.bin", "field"), traj.snapshots.front(), traj.times.front());
    write_field_blob(ses.out.add("field_final.bin", "field"), traj.snapshots.back(), traj.final_time());
    if (!traj.valid) {
        ses.report["diagnosis"] = traj.diagnosis;
        ses.report["aborted_at"] = traj.final_time();
        return ses.finish(exit_guard, "guard_abort: " + traj.diagnosis);
    }
    return std::nullopt;
}

void write_a1(Session& ses, const std::string& name, const A1Report& r)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.t.size(); ++k) rows.push_back({r.t[k], r.q[k], r.dq[k], r.source[k]});
    write_csv(ses.out.add(name, "series"), {"t", "q", "dq_dt", "source"}, rows);
}

}  // namespace

int cmd_simulate(const Scenario& s, const RunContext& ctx)
{
    Session ses(s, ctx, "simulate");
    Trajectory traj;
    if (auto code = evolve_scenario(ses, traj, s.evolution)) return *code;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < traj.times.size(); ++k) rows.push_back({traj.times[k], l2_norm(traj.snapshots[k])});
    write_csv(ses.out.add("snapshots.csv", "series"), {"t", "norm"}, rows);
    for (const auto& d : s.diagnostics)
        if (d == "two_detector")
            write_series_csv(ses.out.add("two_detector.csv", "series"),
                             two_detector_sweep(s.h1.cutoff(), s.h2.cutoff(), traj, ctx.jobs));
    ses.report["step_count"] = traj.step_count;
    ses.report["final_norm"] = traj.steps.back().norm;
    ses.report["max_boundary_mass"] = [&] {
        double m = 0.0;
        for (const auto& r : traj.steps) m = std::max(m, r.boundary_mass);
        return m;
    }();
    return ses.finish(exit_ok, "ok");
}

int cmd_graf_check(const Scenario& s, const RunContext& ctx)
{
    Session ses(s, ctx, "graf-check");
    const auto K = s.region();
    GrafParams p;
    try {
        p = choose_params(K, s.graf_radii);
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("region: ") + e.what());
    }
    GrafBuildOptions o;
    o.cells_per_mollifier = s.graf_cells;
    o.v_refinement = s.graf_v_refinement;
    o.jobs = ctx.jobs;
    ses.note("building Graf function");
    const auto gf = build(p, o);
    const auto rep = hessian_check(gf, K);
    {
        std::ofstream os(ses.out.add("graf_table.csv", "table"));
        export_table(gf, os, s.graf_table_stride);
    }
    ses.report = {{"r", p.r},
                  {"r1", p.r1},
                  {"r1p", p.r1p},
                  {"rp", p.rp},
                  {"c", p.c},
                  {"beta", p.beta},
                  {"v_min", p.v_min},
                  {"eps", p.eps},
                  {"eps_mollifier", p.eps_mollifier},
                  {"N", gf.N},
                  {"h", gf.h},
                  {"c1", rep.c1},
                  {"c2", rep.c2},
                  {"violation_fraction", rep.violation_fraction},
                  {"tol", rep.tol},
                  {"min_eig_Cr", rep.min_eig_Cr},
                  {"exceptions_localized", rep.exceptions_localized},
                  {"max_exception_distance", rep.max_exception_distance},
                  {"max_on_tube", rep.max_on_tube},
                  {"max_outside", rep.max_outside},
                  {"peak", rep.peak}};
    const bool ok = rep.c1 > 0.0 && rep.violation_fraction <= 1e-3 && rep.max_on_tube == 0.0 && rep.max_outside == 0.0;
    ses.report["passed"] = ok;
    return ses.finish(ok ? exit_ok : exit_nonconvergence, ok ? "ok" : "convexity check failed");
}

int cmd_limits(const Scenario& s, const RunContext& ctx)
{
    Session ses(s, ctx, "limits");
    auto cfg = s.evolution;
    cfg.snapshots.dyadic = true;
    const bool sourced = s.source != "none";
    if (sourced) cfg.cook_integral = true;
    Trajectory traj;
    if (auto code = evolve_scenario(ses, traj, cfg)) return *code;

    const auto h1 = s.h1.cutoff(), h2 = s.h2.cutoff();
    const auto lim = intermediate_limit(traj, Cutoff2P::product(h1, h2), s.limits_tol, ctx.jobs);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < lim.checkpoints.size(); ++k)
        rows.push_back({lim.checkpoints[k], lim.norms[k], lim.cauchy_tail[k]});
    write_csv(ses.out.add("limit_checkpoints.csv", "series"), {"t", "norm", "cauchy_step"}, rows);
    write_field_blob(ses.out.add("limit_field.bin", "field"), lim.final_vector, traj.final_time());
    ses.report["limit_norm"] = lim.norms.back();
    ses.report["cauchy_step"] = lim.cauchy_tail.back();
    ses.report["converged"] = lim.converged;
    ses.report["tol"] = lim.tol;
    bool ok = lim.converged;
    if (!sourced) {
        const double res = oracle_residual(lim, traj, h1, h2);
        ses.report["oracle_residual"] = res;
    } else {
        const auto wave = cook_wave_adjoint(traj, s.cook_tail_threshold);
        const auto comp = completeness_report(traj, h1, h2, s.limits_tol, ctx.jobs);
        write_field_blob(ses.out.add("wave_adjoint_field.bin", "field"), wave.mapped, traj.final_time());
        std::vector<std::vector<double>> tail;
        for (std::size_t k = 0; k < wave.tail_t.size(); ++k) tail.push_back({wave.tail_t[k], wave.tail_norms[k]});
        write_csv(ses.out.add("cook_tail.csv", "series"), {"t", "source_norm"}, tail);
        ses.report["wave_operator"] = {{"isometry_defect", wave.isometry_defect},
                                       {"route_difference", wave.route_difference},
                                       {"half_horizon_change", wave.half_horizon_change},
                                       {"tail_window", {wave.tail_lo, wave.tail_hi}},
                                       {"tail_estimate", wave.tail_estimate},
                                       {"tail_threshold", wave.tail_threshold},
                                       {"converged", wave.converged}};
        ses.report["completeness"] = {{"residual", comp.residual},
                                      {"limit_norm", comp.limit_norm},
                                      {"psi_norm", comp.psi_norm},
                                      {"attractive", comp.attractive},
                                      {"caveat", comp.caveat}};
        ok = ok && wave.converged;
    }
    return ses.finish(ok ? exit_ok : exit_nonconvergence, ok ? "ok" : "not converged");
}

int cmd_estimates(const Scenario& s, const RunContext& ctx)
{
    Session ses(s, ctx, "estimates");
    std::set<std::string> want(s.diagnostics.begin(), s.diagnostics.end());
    if (want.empty()) want = {"large_velocity", "phase_space"};
    Trajectory traj;
    if (auto code = evolve_scenario(ses, traj, s.evolution)) return *code;
    if (traj.times.size() < 3)
        throw ValidationError("evolution.snapshots: estimates need at least three snapshot times");
    bool ok = true;
    const auto K = s.region();
    const auto H = Cutoff2P::product(s.h1.cutoff(), s.h2.cutoff());
    json flags;

    if (want.count("two_detector"))
        write_series_csv(ses.out.add("two_detector.csv", "series"),
                         two_detector_sweep(s.h1.cutoff(), s.h2.cutoff(), traj, ctx.jobs));
    if (want.count("large_velocity")) {
        ses.note("large-velocity series");
        const auto lv = large_velocity_series(traj, s.lv_r, s.lv_rp, s.lv_eps, s.region_delta, ctx.jobs);
        write_series_csv(ses.out.add("large_velocity.csv", "series"), lv);
        const double tf = lv.tail_fraction();
        ses.report["large_velocity"] = {{"total", lv.total()}, {"tail_fraction", tf}};
        flags["large_velocity"] = tf < s.tail_tol;
    }
    if (want.count("phase_space")) {
        ses.note("phase-space series");
        const auto ps = phase_space_series(traj, K, s.region_delta, ctx.jobs);
        write_series_csv(ses.out.add("phase_space.csv", "series"), ps.series);
        write_series_csv(ses.out.add("phase_space_ordering.csv", "series"), ps.discrepancy);
        const double tf = ps.series.tail_fraction();
        ses.report["phase_space"] = {{"total", ps.series.total()},
                                     {"tail_fraction", tf},
                                     {"last_decade_slope", ps.series.last_decade_slope(1e-300)}};
        flags["phase_space"] = tf < s.tail_tol;
    }
    if (want.count("ensemble")) {
        ses.note("free phase-space ensemble");
        const auto ens = free_phase_space_ensemble(traj.grid, K, s.m, s.ensemble_T, s.ensemble_draws, s.seed);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < ens.C.size(); ++k) rows.push_back({double(k), ens.C[k]});
        write_csv(ses.out.add("ensemble.csv", "series"), {"draw", "C"}, rows);
        ses.report["ensemble"] = {{"min", ens.min}, {"max", ens.max}, {"draws", ens.C.size()}};
    }
    if (want.count("monitor_A1")) {
        ses.note("monitor A1 on the Graf observable");
        const auto p = choose_params(K, s.graf_radii);
        GrafBuildOptions o;
        o.cells_per_mollifier = s.graf_cells;
        o.v_refinement = s.graf_v_refinement;
        o.jobs = ctx.jobs;
        const auto gf = build(p, o);
        const auto rep = hessian_check(gf, K);
        const double c1 = rep.c1, c2 = rep.c2;
        const auto B = phase_space_components(K, s.m, s.region_delta, [c1](double t) { return c1 / t; });
        PropagationObservable Bsum;
        Bsum.name = "B";
        for (const auto& b : B) Bsum.terms.insert(Bsum.terms.end(), b.terms.begin(), b.terms.end());
        const auto C = phase_space_components(annulus_minus_tube(p.r, p.rp, p.eps), s.m, s.region_delta,
                                              [c2](double t) { return c2 / t; });
        const auto a1 = monitor_A1(graf_observable(gf, s.m), traj, PropagationObservable{}, C, ctx.jobs);
        // ||B u||^2 summed over components
        double intB = 0.0;
        {
            std::vector<double> vals;
            for (std::size_t k = 0; k < traj.times.size(); ++k) {
                double acc = 0.0;
                for (const auto& b : B)
                    acc += apply_observable(b, traj.times[k], traj.snapshots[k]).squaredNorm() *
                           cell_weight(traj.grid, 2, Representation::position);
                vals.push_back(acc);
            }
            for (std::size_t k = 1; k < vals.size(); ++k)
                intB += 0.5 * (traj.times[k] - traj.times[k - 1]) * (vals[k] + vals[k - 1]);
        }
        write_a1(ses, "monitor_A1.csv", a1);
        ses.report["monitor_A1"] = {{"q_start", a1.q_start},
                                    {"q_end", a1.q_end},
                                    {"integral_D", a1.integral_D},
                                    {"integral_source", a1.integral_source},
                                    {"closure_error", a1.closure_error},
                                    {"local_error_estimate", a1.local_error_estimate},
                                    {"closes", a1.closes},
                                    {"integral_B", intB},
                                    {"integral_C", a1.integral_C},
                                    {"source_abs_integral", a1.source_abs_integral},
                                    {"source_tail_fraction", a1.source_tail_fraction},
                                    {"bound", a1.bound},
                                    {"c1", c1},
                                    {"c2", c2}};
        flags["monitor_A1"] = a1.closes;
    }
    if (want.count("monitor_A3")) {
        ses.note("monitor A3 on the free phase observable");
        const auto a3 = monitor_A3(free_phase_observable(H, s.m), traj, s.a3_tol, ctx.jobs);
        write_series_csv(ses.out.add("monitor_A3.csv", "series"), a3.series);
        const double norm2 = l2_norm_squared(traj.snapshots.front());
        const bool small = std::abs(a3.limit_estimate) < s.a3_tol * norm2;
        ses.report["monitor_A3"] = {{"limit_estimate", a3.limit_estimate},
                                    {"cauchy_tail", a3.cauchy_tail},
                                    {"converged", a3.converged},
                                    {"limit_below_tol", small}};
        flags["monitor_A3"] = a3.converged && small;
    }
    if (want.count("monitor_A2")) {
        ses.note("monitor A2 on the detector observable");
        const auto a2 = monitor_A2(detector_observable(H), traj, ctx.jobs);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < a2.t.size(); ++k) rows.push_back({a2.t[k], a2.step_differences[k]});
        write_csv(ses.out.add("monitor_A2.csv", "series"), {"t", "step_difference"}, rows);
        write_field_blob(ses.out.add("monitor_A2_limit.bin", "field"), a2.vector_limit, traj.final_time());
        ses.report["monitor_A2"] = {{"cauchy_tail", a2.cauchy_tail}};
    }
    for (const auto& [k, v] : flags.items()) ok = ok && v.get<bool>();
    ses.report["flags"] = flags;
    return ses.finish(ok ? exit_ok : exit_nonconvergence, ok ? "ok" : "diagnostic flag false");
}

}  // namespace kgscat
