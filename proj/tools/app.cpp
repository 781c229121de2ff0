#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "ltlab/calibration.hpp"
#include "ltlab/certifier.hpp"
#include "ltlab/constants.hpp"
#include "ltlab/covering.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/exclusion.hpp"
#include "ltlab/gn_solver.hpp"
#include "ltlab/grid_io.hpp"
#include "ltlab/local_constants.hpp"
#include "ltlab/nbody.hpp"

namespace ltlab::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands = {"gn",          "hgn",          "constants",   "cover",
                                            "exclusion",   "quotient",     "sweep-lambda", "sweep-delta",
                                            "certify",     "local-constant", "lup1-constant", "calibrate"};

json defaults() {
    return {{"s", 1.0},
            {"d", 1},
            {"delta", 0.1},
            {"eps_inv", nullptr},
            {"lambda", nullptr},
            {"points", 0},
            {"box", 0.0},
            {"seed", 1},
            {"threads", 1},
            {"input", nullptr},
            {"calibration", nullptr},
            {"max_level", 0},
            {"hardy", false},
            {"restarts", 4},
            {"max_iters", 4000},
            {"tol", 1e-10},
            {"out_dir", "."},
            {"name", nullptr},
            {"csv", false},
            {"deltas", {0.3, 0.2, 0.1, 0.05}},
            {"lambdas", {0.0, 1.0, 2.0, 5.0, 10.0}},
            {"particles", 2},
            {"trial", "separated"},
            {"separation", 8.0},
            {"width", 1.0},
            {"ell", 0.5},
            {"side", 1.0},
            {"holdout", 500},
            {"omega", nullptr},
            {"omega_tilde", nullptr},
            {"cubes", 1},
            {"scale", 1.0},
            {"write_minimizer", nullptr},
            {"calibration_out", nullptr}};
}

struct Flag {
    std::string key;
    CLI::Option* option = nullptr;
    std::function<json()> value;
};

template <class T>
void add_flag(CLI::App& app, std::vector<Flag>& flags, const std::string& name, const std::string& key,
              const std::string& help) {
    auto store = std::make_shared<T>();
    CLI::Option* o = app.add_option(name, *store, help);
    if constexpr (std::is_same_v<T, std::vector<double>>) o->delimiter(',');
    flags.push_back({key, o, [store] { return json(*store); }});
}

void add_switch(CLI::App& app, std::vector<Flag>& flags, const std::string& name, const std::string& key,
                const std::string& help) {
    auto store = std::make_shared<bool>(false);
    CLI::Option* o = app.add_flag(name, *store, help);
    flags.push_back({key, o, [store] { return json(*store); }});
}

void merge_config_file(json& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("malformed config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "command") continue;
        if (!cfg.contains(it.key())) throw ConfigError("unknown config key: " + it.key());
        cfg[it.key()] = it.value();
    }
}

struct Ctx {
    std::string command;
    json cfg;

    template <class T>
    T get(const std::string& key) const {
        try {
            return cfg.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config value '" + key + "' has the wrong type");
        }
    }
    bool has(const std::string& key) const { return cfg.contains(key) && !cfg.at(key).is_null(); }
    double s() const { return get<double>("s"); }
    int d() const { return get<int>("d"); }
    bool hardy() const { return get<bool>("hardy"); }
    std::uint64_t seed() const { return get<std::uint64_t>("seed"); }

    OptimizerParams optimizer() const {
        OptimizerParams p;
        p.max_iters = get<int>("max_iters");
        p.restarts = get<int>("restarts");
        p.tol_rel = get<double>("tol");
        p.seed = seed();
        p.validate();
        return p;
    }
    CoveringParams covering() const {
        CoveringParams p;
        p.epsilon_inv = get<int>("eps_inv");
        p.delta = get<double>("delta");
        p.max_level = get<int>("max_level");
        p.hardy_mode = hardy();
        p.validate();
        return p;
    }
    std::optional<double> lambda() const {
        if (!has("lambda")) return std::nullopt;
        return get<double>("lambda");
    }
};

void validate_common(const Ctx& c) {
    const double s = c.s();
    const int d = c.d();
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("s must be positive");
    if (d < 1 || d > 3) throw ConfigError("d must be 1, 2 or 3");
    const double delta = c.get<double>("delta");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (c.get<int>("eps_inv") < 2) throw ConfigError("eps_inv must be at least 2");
    if (c.get<int>("threads") < 1) throw ConfigError("threads must be at least 1");
    if (c.get<int>("points") < 0) throw ConfigError("points must be nonnegative");
    if (c.get<double>("box") < 0.0) throw ConfigError("box must be nonnegative");
    if (c.lambda() && !(*c.lambda() >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (c.hardy() && !(2.0 * s < d)) throw ConfigError("hardy mode needs 2s < d");
}

struct Input {
    std::optional<GridFunction> rho;
    std::optional<NBodyState> state;
};

Input read_input(const Ctx& c) {
    if (!c.has("input")) throw ConfigError(c.command + " needs --input");
    const fs::path path = c.get<std::string>("input");
    const auto header = read_header(path);
    Input in;
    if (header.N > 0) {
        GridHeader h;
        auto values = read_state_raw(path, h);
        NBodyState st(h.N, h.box, std::move(values));
        st.validate();
        in.rho = density(st);
        in.state = std::move(st);
    } else {
        in.rho = read_grid(path);
    }
    if (in.rho->box.d != c.d()) throw ConfigError("input dimension does not match d");
    return in;
}

Calibration require_calibration(const Ctx& c) {
    if (!c.has("calibration")) throw ConfigError("missing calibration: pass --calibration");
    return load_calibration(c.get<std::string>("calibration"));
}

BoxSpec trial_box(const Ctx& c) {
    static const int kPoints[] = {512, 128, 32};
    const int d = c.d();
    const int pts = c.get<int>("points") > 0 ? c.get<int>("points") : kPoints[d - 1];
    const double len = c.get<double>("box") > 0.0 ? c.get<double>("box") : 32.0;
    return BoxSpec::centered(d, len, pts);
}

GridFunction gaussian(const BoxSpec& box, double width) {
    auto g = GridFunction::sample(box, [&](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < box.d; ++a) r2 += x[a] * x[a];
        return cplx(std::exp(-r2 / (2.0 * width * width)), 0.0);
    });
    g.normalize();
    return g;
}

// A state file, or one of the built-in Gaussian trial states.
struct StateSource {
    std::optional<NBodyState> full;
    std::optional<ProductState> product;
    json description;
};

StateSource state_source(const Ctx& c) {
    StateSource src;
    if (c.has("input")) {
        auto in = read_input(c);
        if (!in.state) throw ConfigError(c.command + " needs a state file, not a density");
        src.full = std::move(in.state);
        src.description = {{"kind", "file"}, {"path", c.get<std::string>("input")}};
        return src;
    }
    const BoxSpec box = trial_box(c);
    const double width = c.get<double>("width");
    const double sep = c.get<double>("separation");
    if (!(width > 0.0) || !(sep >= 0.0)) throw ConfigError("trial width and separation must be positive");
    const std::string trial = c.get<std::string>("trial");
    const GridFunction g = gaussian(box, width);
    if (trial == "separated") {
        const int n = c.get<int>("particles");
        if (n < 2 || n > 3) throw ConfigError("particles must be 2 or 3");
        std::vector<GridFunction> us(static_cast<std::size_t>(n), g);
        std::vector<Point> centers;
        for (int k = 0; k < n; ++k) centers.push_back({(k - 0.5 * (n - 1)) * sep, 0.0, 0.0});
        src.product = trial_separated(us, centers, box);
    } else if (trial == "hardy-pair") {
        src.product = trial_hardy_pair(g, g, Point{sep, 0.0, 0.0}, c.get<double>("ell"));
    } else {
        throw ConfigError("unknown trial: " + trial);
    }
    src.description = {{"kind", trial},
                       {"width", width},
                       {"separation", sep},
                       {"overlap", src.product->overlap},
                       {"overlap_warning", src.product->overlap_warning}};
    return src;
}

json quotient_json(const LtQuotient& q) {
    return {{"quotient", q.value},
            {"kinetic", q.kinetic},
            {"hardy", q.hardy},
            {"interaction", q.interaction},
            {"denominator", q.denominator}};
}

json cube_index(const Cube& q, int d) {
    json a = json::array();
    for (int k = 0; k < d; ++k) a.push_back(q.index[k]);
    return a;
}

std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Result {
    json body;
    json calibration;
    std::vector<std::string> csv;
};

Result cmd_gn(const Ctx& c, bool hardy) {
    const BoxSpec box = default_gn_box(c.d(), c.get<int>("points"), c.get<double>("box"));
    const auto opt = c.optimizer();
    const auto r = hardy ? minimize_hgn(c.s(), c.d(), box, opt) : minimize_gn(c.s(), c.d(), box, opt);
    if (!std::isfinite(r.value)) throw NumericError("quotient minimisation produced a non-finite value");
    Result out;
    out.body = {{"value", r.value},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"decay_ok", r.decay_ok},
                {"restart_values", r.restart_values},
                {"restart_iterations", r.restart_iterations},
                {"trace", r.trace},
                {"grid", {{"points", box.points[0]}, {"box_length", box.length(0)}}},
                {"kind", "empirical upper estimate"}};
    if (!hardy && c.d() == 1 && c.s() == 1.0) {
        const double ref = gn_reference_1d().value;
        out.body["reference"] = ref;
        out.body["relative_error"] = std::abs(r.value - ref) / ref;
    }
    if (c.has("write_minimizer")) write_grid(c.get<std::string>("write_minimizer"), r.minimizer);
    out.csv.push_back("iteration,quotient");
    for (std::size_t i = 0; i < r.trace.size(); ++i) out.csv.push_back(std::to_string(i) + "," + csv_number(r.trace[i]));
    return out;
}

Result cmd_constants(const Ctx&) {
    Result out;
    json list = json::array();
    out.csv.push_back("name,value");
    for (const auto& k : all_constants()) {
        list.push_back({{"name", k.name}, {"value", k.value}, {"provenance", k.provenance}});
        out.csv.push_back("\"" + k.name + "\"," + csv_number(k.value));
    }
    out.body = {{"constants", list}};
    return out;
}

json decomposition_json(const Decomposition& dec, const GridFunction& rho, std::vector<std::string>& csv) {
    const int d = dec.box.d;
    json levels = json::array();
    csv.push_back("level,kind,cluster,index,mass");
    auto cluster_json = [&](const Cluster& k, const char* kind, int id, int level) {
        json cubes = json::array();
        for (std::size_t i = 0; i < k.cubes.size(); ++i) {
            cubes.push_back(cube_index(k.cubes[i], d));
            std::ostringstream idx;
            for (int a = 0; a < d; ++a) idx << (a ? " " : "") << k.cubes[i].index[a];
            csv.push_back(std::to_string(level) + "," + kind + "," + std::to_string(id) + "," + idx.str() + "," +
                          csv_number(k.cube_masses[i]));
        }
        return json{{"cubes", cubes},
                    {"cube_masses", k.cube_masses},
                    {"support_mass", k.support_mass},
                    {"closure_mass", k.closure_mass}};
    };
    for (const auto& lv : dec.levels) {
        json g0 = json::array();
        for (std::size_t i = 0; i < lv.g0.size(); ++i) {
            g0.push_back({{"index", cube_index(lv.g0[i], d)}, {"mass", lv.g0_mass[i]}});
            std::ostringstream idx;
            for (int a = 0; a < d; ++a) idx << (a ? " " : "") << lv.g0[i].index[a];
            csv.push_back(std::to_string(lv.n) + ",g0,-1," + idx.str() + "," + csv_number(lv.g0_mass[i]));
        }
        json light = json::array();
        json heavy = json::array();
        int id = 0;
        for (const auto& k : lv.light) light.push_back(cluster_json(k, "light", id++, lv.n));
        for (const auto& k : lv.heavy) heavy.push_back(cluster_json(k, "heavy", id++, lv.n));
        levels.push_back({{"n", lv.n}, {"g0", g0}, {"light", light}, {"heavy", heavy}});
    }
    json residual = json::array();
    for (const auto& q : dec.residual) residual.push_back(cube_index(q, d));
    const auto rep = verify(dec, rho);
    json checks = json::array();
    for (const auto& ch : rep.checks) checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    return {{"levels", levels},
            {"level_count", dec.levels.size()},
            {"max_level", dec.params.max_level},
            {"residual", residual},
            {"total_mass", dec.total_mass},
            {"verify", {{"checks", checks}, {"all_pass", rep.all_pass()}}}};
}

Result cmd_cover(const Ctx& c) {
    const auto in = read_input(c);
    const auto dec = decompose(*in.rho, c.covering());
    Result out;
    out.body = decomposition_json(dec, *in.rho, out.csv);
    return out;
}

Result cmd_exclusion(const Ctx& c) {
    const auto in = read_input(c);
    const auto dec = decompose(*in.rho, c.covering());
    const auto fams = build_ball_families(dec, *in.rho);
    const auto bound = exclusion_terms(fams, c.s());
    Result out;
    json scales = json::array();
    out.csv.push_back("level,radius,overlap,balls,dropped,weight,mass_excess,contribution");
    for (std::size_t i = 0; i < fams.scales.size(); ++i) {
        const auto& sc = fams.scales[i];
        const auto& t = bound.terms[i];
        scales.push_back({{"level", sc.level},
                          {"radius", sc.radius},
                          {"overlap", sc.overlap},
                          {"masses", sc.masses},
                          {"dropped", sc.dropped},
                          {"weight", t.weight},
                          {"mass_excess", t.mass_excess},
                          {"contribution", t.contribution}});
        out.csv.push_back(std::to_string(sc.level) + "," + csv_number(sc.radius) + "," + std::to_string(sc.overlap) +
                          "," + std::to_string(sc.masses.size()) + "," + std::to_string(sc.dropped) + "," +
                          csv_number(t.weight) + "," + csv_number(t.mass_excess) + "," + csv_number(t.contribution));
    }
    out.body = {{"scales", scales}, {"bound", bound.value}};
    if (in.state) {
        const double lam = c.lambda().value_or(1.0);
        const double inter = interaction_expectation(*in.state, c.s(), lam);
        out.body["lambda"] = lam;
        out.body["interaction"] = inter;
        out.body["holds"] = inter >= lam * bound.value - 1e-6 * std::max(1.0, std::abs(inter));
    }
    return out;
}

Result cmd_quotient(const Ctx& c, bool sweep) {
    const auto src = state_source(c);
    QuotientParams qp;
    qp.s = c.s();
    qp.hardy = c.hardy();
    auto eval = [&](double lam) {
        qp.lambda = lam;
        return src.full ? lt_quotient(*src.full, qp) : lt_quotient(*src.product, qp);
    };
    Result out;
    out.csv.push_back("lambda,quotient");
    if (!sweep) {
        const double lam = c.lambda().value_or(1.0);
        const auto q = eval(lam);
        out.body = quotient_json(q);
        out.body["lambda"] = lam;
        out.csv.push_back(csv_number(lam) + "," + csv_number(q.value));
    } else {
        json rows = json::array();
        for (double lam : c.get<std::vector<double>>("lambdas")) {
            if (!(lam >= 0.0)) throw ConfigError("lambdas must be nonnegative");
            const auto q = eval(lam);
            json row = quotient_json(q);
            row["lambda"] = lam;
            rows.push_back(row);
            out.csv.push_back(csv_number(lam) + "," + csv_number(q.value));
        }
        out.body = {{"rows", rows}};
    }
    out.body["state"] = src.description;
    out.body["kind"] = "trial upper bound";
    return out;
}

CertifyParams certify_params(const Ctx& c) {
    CertifyParams p;
    p.s = c.s();
    p.d = c.d();
    p.delta = c.get<double>("delta");
    p.epsilon_inv = c.get<int>("eps_inv");
    p.lambda = c.lambda();
    p.hardy = c.hardy();
    p.max_level = c.get<int>("max_level");
    p.local = c.optimizer();
    p.validate();
    return p;
}

Result cmd_certify(const Ctx& c) {
    const auto cal = require_calibration(c);
    const auto p = certify_params(c);
    const auto in = read_input(c);
    const auto rep = in.state ? certify(*in.state, p, cal) : certify(*in.rho, p, cal);
    Result out;
    out.body = to_json(rep);
    out.calibration = to_json(cal);
    out.csv.push_back("kind,level,coefficient,power,mass,positive,negative,value");
    for (const auto& e : rep.ledger)
        out.csv.push_back(e.kind + "," + std::to_string(e.level) + "," + csv_number(e.coefficient) + "," +
                          csv_number(e.power) + "," + csv_number(e.mass) + "," + csv_number(e.positive) + "," +
                          csv_number(e.negative) + "," + csv_number(e.value));
    return out;
}

Result cmd_sweep_delta(const Ctx& c) {
    const auto cal = require_calibration(c);
    const auto p = certify_params(c);
    const auto in = read_input(c);
    const auto deltas = c.get<std::vector<double>>("deltas");
    if (deltas.empty()) throw ConfigError("deltas must not be empty");
    const auto rows = sweep_delta(*in.rho, deltas, p, cal);
    Result out;
    out.calibration = to_json(cal);
    json list = json::array();
    out.csv.push_back("delta,lambda_star,factor");
    for (const auto& r : rows) {
        list.push_back({{"delta", r.delta}, {"lambda_threshold", r.lambda_threshold}, {"factor", r.factor},
                        {"c_loc", r.c_loc}});
        out.csv.push_back(csv_number(r.delta) + "," + csv_number(r.lambda_threshold) + "," + csv_number(r.factor));
    }
    out.body = {{"rows", list}};
    return out;
}

// Chain of `cubes` unit cubes along the first axis, dilated by `scale`, with
// its quarter-side closure.
std::pair<DomainMask, DomainMask> chain_masks(int d, int cubes, double scale, int points) {
    const double len = 4.0 * (cubes + 1) * scale;
    const int per_axis = points > 0 ? points : (d == 1 ? 512 : (d == 2 ? 128 : 32));
    BoxSpec box = BoxSpec::centered(d, len, per_axis);
    const double half = 0.5 * cubes * scale;
    auto gap2 = [&](const Point& x) {
        double g2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double lim = a == 0 ? half : 0.5 * scale;
            const double g = std::max(std::abs(x[a]) - lim, 0.0);
            g2 += g * g;
        }
        return g2;
    };
    const double r = 0.25 * scale;
    return {DomainMask::from_predicate(box, [&](const Point& x) { return gap2(x) == 0.0; }),
            DomainMask::from_predicate(box, [&](const Point& x) { return gap2(x) < r * r; })};
}

Result cmd_local_constant(const Ctx& c) {
    DomainMask omega, tilde;
    json geometry;
    if (c.has("omega") || c.has("omega_tilde")) {
        if (!c.has("omega") || !c.has("omega_tilde")) throw ConfigError("pass both --omega and --omega-tilde");
        omega = read_mask(c.get<std::string>("omega"));
        tilde = read_mask(c.get<std::string>("omega_tilde"));
        geometry = {{"omega", c.get<std::string>("omega")}, {"omega_tilde", c.get<std::string>("omega_tilde")}};
    } else {
        const int cubes = c.get<int>("cubes");
        const double scale = c.get<double>("scale");
        if (cubes < 1 || !(scale > 0.0)) throw ConfigError("cubes and scale must be positive");
        std::tie(omega, tilde) = chain_masks(c.d(), cubes, scale, c.get<int>("points"));
        geometry = {{"cubes", cubes}, {"scale", scale}};
    }
    double gn = 0.0;
    json cal_json;
    if (c.has("calibration")) {
        const auto cal = load_calibration(c.get<std::string>("calibration"));
        gn = c.hardy() ? cal.require("hgn") : cal.require("gn");
        cal_json = to_json(cal);
    } else if (c.d() == 1 && c.s() == 1.0 && !c.hardy()) {
        gn = gn_reference_1d().value;
        cal_json = {{"gn", gn}, {"source", "closed form"}};
    } else {
        throw ConfigError("missing calibration: pass --calibration");
    }
    const auto r = estimate_local_constant(c.s(), c.get<double>("delta"), omega, tilde, c.optimizer(), gn, c.hardy());
    Result out;
    out.calibration = cal_json;
    out.body = {{"value", r.value},
                {"supremum", r.supremum},
                {"margin", r.margin},
                {"dictionary_size", r.dictionary_size},
                {"start_values", r.start_values},
                {"geometry", geometry},
                {"kind", "empirical lower estimate"}};
    out.csv.push_back("start,value");
    for (std::size_t i = 0; i < r.start_values.size(); ++i)
        out.csv.push_back(std::to_string(i) + "," + csv_number(r.start_values[i]));
    return out;
}

Result cmd_lup1(const Ctx& c) {
    const double side = c.get<double>("side");
    if (!(side > 0.0)) throw ConfigError("side must be positive");
    const int holdout = c.get<int>("holdout");
    if (holdout < 0) throw ConfigError("holdout must be nonnegative");
    const auto r = estimate_lup1_constant(c.s(), c.d(), c.optimizer(), c.hardy(), side, holdout);
    Result out;
    out.body = {{"value", r.value},
                {"optimized", r.optimized},
                {"holdout_max", r.holdout_max},
                {"holdout_samples", r.holdout_samples},
                {"holdout_violations", r.holdout_violations},
                {"dictionary_size", r.dictionary_size},
                {"kind", "empirical lower estimate"}};
    out.csv.push_back("optimized,holdout_max");
    out.csv.push_back(csv_number(r.optimized) + "," + csv_number(r.holdout_max));
    return out;
}

Result cmd_calibrate(const Ctx& c) {
    CalibrationParams p;
    p.optimizer = c.optimizer();
    p.hardy = c.hardy();
    p.points = c.get<int>("points");
    p.box_length = c.get<double>("box");
    const auto cal = calibrate(c.s(), c.d(), p);
    fs::path dest = c.has("calibration_out")
                        ? fs::path(c.get<std::string>("calibration_out"))
                        : fs::path(c.get<std::string>("out_dir")) / (c.get<std::string>("name") + ".calibration.json");
    save_calibration(dest, cal);
    Result out;
    out.calibration = to_json(cal);
    out.body = {{"calibration_file", dest.filename().string()}};
    return out;
}

Result dispatch(const Ctx& c) {
    const std::string& cmd = c.command;
    if (cmd == "gn") return cmd_gn(c, false);
    if (cmd == "hgn") {
        if (!(2.0 * c.s() < c.d())) throw ConfigError("hgn needs 2s < d");
        return cmd_gn(c, true);
    }
    if (cmd == "constants") return cmd_constants(c);
    if (cmd == "cover") return cmd_cover(c);
    if (cmd == "exclusion") return cmd_exclusion(c);
    if (cmd == "quotient") return cmd_quotient(c, false);
    if (cmd == "sweep-lambda") return cmd_quotient(c, true);
    if (cmd == "sweep-delta") return cmd_sweep_delta(c);
    if (cmd == "certify") return cmd_certify(c);
    if (cmd == "local-constant") return cmd_local_constant(c);
    if (cmd == "lup1-constant") return cmd_lup1(c);
    if (cmd == "calibrate") return cmd_calibrate(c);
    throw ConfigError("unknown command: " + cmd);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

std::string quoted(const std::string& msg) {
    std::string q;
    for (char ch : msg) {
        if (ch == '"' || ch == '\\') q += '\\';
        q += (ch == '\n' ? ' ' : ch);
    }
    return "\"" + q + "\"";
}

int fail(std::ostream& err, ExitCode code, const char* kind, const std::string& msg) {
    err << "error code=" << int(code) << " kind=" << kind << " message=" << quoted(msg) << '\n';
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical laboratory for strong-coupling Lieb-Thirring inequalities", "ltlab"};
    app.require_subcommand(1);
    app.fallthrough();
    std::vector<Flag> flags;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override it");
    add_flag<double>(app, flags, "--s", "s", "fractional order");
    add_flag<int>(app, flags, "--d", "d", "dimension");
    add_flag<double>(app, flags, "--delta", "delta", "mass threshold delta");
    add_flag<int>(app, flags, "--eps-inv", "eps_inv", "refinement factor 1/epsilon");
    add_flag<double>(app, flags, "--lambda", "lambda", "coupling constant");
    add_flag<int>(app, flags, "--points", "points", "grid points per axis");
    add_flag<double>(app, flags, "--box", "box", "box length");
    add_flag<std::uint64_t>(app, flags, "--seed", "seed", "seed for every stochastic component");
    add_flag<int>(app, flags, "--threads", "threads", "worker cap");
    add_flag<std::string>(app, flags, "--input", "input", "density or state file");
    add_flag<std::string>(app, flags, "--calibration", "calibration", "calibration JSON");
    add_flag<int>(app, flags, "--max-level", "max_level", "deepest covering level (0 = auto)");
    add_switch(app, flags, "--hardy", "hardy", "Hardy variant");
    add_flag<int>(app, flags, "--restarts", "restarts", "optimiser restarts");
    add_flag<int>(app, flags, "--max-iters", "max_iters", "optimiser iteration cap");
    add_flag<double>(app, flags, "--tol", "tol", "relative stopping tolerance");
    add_flag<std::string>(app, flags, "--out-dir", "out_dir", "output directory");
    add_flag<std::string>(app, flags, "--name", "name", "report base name");
    add_switch(app, flags, "--csv", "csv", "also write <name>.csv");
    add_flag<std::vector<double>>(app, flags, "--deltas", "deltas", "sweep-delta values");
    add_flag<std::vector<double>>(app, flags, "--lambdas", "lambdas", "sweep-lambda values");
    add_flag<int>(app, flags, "--particles", "particles", "trial particle count");
    add_flag<std::string>(app, flags, "--trial", "trial", "separated | hardy-pair");
    add_flag<double>(app, flags, "--separation", "separation", "trial separation");
    add_flag<double>(app, flags, "--width", "width", "trial Gaussian width");
    add_flag<double>(app, flags, "--ell", "ell", "hardy-pair dilation");
    add_flag<double>(app, flags, "--side", "side", "LUP-I cube side");
    add_flag<int>(app, flags, "--holdout", "holdout", "LUP-I holdout samples");
    add_flag<std::string>(app, flags, "--omega", "omega", "mask file for Omega");
    add_flag<std::string>(app, flags, "--omega-tilde", "omega_tilde", "mask file for Omega tilde");
    add_flag<int>(app, flags, "--cubes", "cubes", "built-in chain length");
    add_flag<double>(app, flags, "--scale", "scale", "built-in chain scale");
    add_flag<std::string>(app, flags, "--write-minimizer", "write_minimizer", "grid file for the minimiser");
    add_flag<std::string>(app, flags, "--calibration-out", "calibration_out", "calibration output path");
    for (const auto& name : kCommands) app.add_subcommand(name, name + " subcommand");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        return fail(err, kConfig, "config", e.what());
    }

    try {
        Ctx ctx;
        ctx.command = app.get_subcommands().front()->get_name();
        ctx.cfg = defaults();
        if (!config_path.empty()) merge_config_file(ctx.cfg, config_path);
        for (const auto& f : flags)
            if (f.option->count() > 0) ctx.cfg[f.key] = f.value();
        if (ctx.cfg["eps_inv"].is_null()) ctx.cfg["eps_inv"] = ctx.get<bool>("hardy") ? 3 : 2;
        if (ctx.cfg["name"].is_null()) ctx.cfg["name"] = ctx.command;
        validate_common(ctx);

        const fs::path dir = ctx.get<std::string>("out_dir");
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string());

        const Result res = dispatch(ctx);
        json report = {{"command", ctx.command},
                       {"config", ctx.cfg},
                       {"result", res.body},
                       {"calibration", res.calibration}};
        const std::string name = ctx.get<std::string>("name");
        const fs::path report_path = dir / (name + ".report.json");
        write_text(report_path, report.dump(2) + "\n");
        if (ctx.get<bool>("csv") && !res.csv.empty()) {
            std::string text;
            for (const auto& line : res.csv) text += line + "\n";
            write_text(dir / (name + ".csv"), text);
        }
        out << "wrote " << report_path.string() << '\n';
        return kOk;
    } catch (const ConfigError& e) {
        return fail(err, kConfig, "config", e.what());
    } catch (const IoError& e) {
        return fail(err, kIo, "io", e.what());
    } catch (const NumericError& e) {
        return fail(err, kNumeric, "numeric", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(err, kConfig, "config", e.what());
    } catch (const std::exception& e) {
        return fail(err, kNumeric, "numeric", e.what());
    }
}

}  // namespace ltlab::app
