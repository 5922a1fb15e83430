#include "cqed/config.hpp"

#include "cqed/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>

namespace cqed::cli {

namespace {
using json = nlohmann::json;
constexpr const char* kModule = "cli";
constexpr const char* kOp = "parse_config";

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::config, kModule, kOp, path + ": " + msg);
}

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

// Typed access to one JSON object with key-path diagnostics.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items()) {
            if (!ok.count(k)) fail(join(path_, k), "unknown key");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    std::string path(const char* key) const { return join(path_, key); }
    const json& raw(const char* key) const { return j_.at(key); }

    Node child(const char* key) const {
        if (!has(key)) fail(path(key), "missing required key");
        return Node(j_.at(key), path(key));
    }

    double number(const char* key) const {
        if (!has(key)) fail(path(key), "missing required key");
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(path(key), "expected a finite number");
        return d;
    }

    std::optional<double> opt_number(const char* key) const {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    double number_or(const char* key, double fallback) const {
        return opt_number(key).value_or(fallback);
    }

    std::uint64_t unsigned_int(const char* key) const {
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            fail(path(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const char* key) const {
        if (!has(key)) fail(path(key), "missing required key");
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(path(key), "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const char* key) const {
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::map<std::string, std::string> string_map(const char* key) const {
        std::map<std::string, std::string> out;
        Node n = child(key);
        for (const auto& [k, v] : n.j_.items()) {
            if (!v.is_string()) fail(join(n.path_, k), "expected a string path");
            out[k] = v.get<std::string>();
        }
        return out;
    }

    const json& json_value() const { return j_; }
    const std::string& node_path() const { return path_; }

private:
    const json& j_;
    std::string path_;
};

void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, "out of range: " + msg);
}

Command parse_command(const Node& root) {
    const std::string c = root.string("command");
    if (c == "simulate") return Command::simulate;
    if (c == "fit") return Command::fit;
    if (c == "collective") return Command::collective;
    if (c == "oracle-check") return Command::oracle_check;
    if (c == "ensemble") return Command::ensemble;
    if (c == "tune") return Command::tune;
    if (c == "characterize") return Command::characterize;
    fail(root.path("command"), "unknown command '" + c + "'");
}

CavityParams parse_cavity(const Node& n) {
    n.allow({"omega_c", "kappa", "kappa_left", "kappa_right"});
    CavityParams c;
    c.omega_c = n.number_or("omega_c", 0.0);
    c.kappa = n.number("kappa");
    check(c.kappa > 0.0, n.path("kappa"), "kappa must be > 0");
    c.kappa_left = n.number_or("kappa_left", 0.5 * c.kappa);
    c.kappa_right = n.number_or("kappa_right", 0.5 * c.kappa);
    check(c.kappa_left >= 0.0, n.path("kappa_left"), "must be >= 0");
    check(c.kappa_right >= 0.0, n.path("kappa_right"), "must be >= 0");
    check(c.kappa_left + c.kappa_right <= c.kappa * (1.0 + 1e-12), n.node_path(),
          "kappa_left + kappa_right must not exceed kappa");
    return c;
}

Emitter parse_emitter(const Node& n) {
    n.allow({"omega_0", "g", "gamma_prime", "branching_zpl", "gamma_star"});
    Emitter e;
    e.omega_0 = n.number("omega_0");
    e.g = n.number("g");
    check(e.g >= 0.0, n.path("g"), "must be >= 0");
    e.gamma_prime = n.number_or("gamma_prime", e.gamma_prime);
    check(e.gamma_prime > 0.0, n.path("gamma_prime"), "must be > 0");
    e.branching_zpl = n.number_or("branching_zpl", e.branching_zpl);
    check(e.branching_zpl >= 0.0 && e.branching_zpl <= 1.0, n.path("branching_zpl"),
          "must lie in [0, 1]");
    e.gamma_star = n.number_or("gamma_star", 0.0);
    check(e.gamma_star >= 0.0, n.path("gamma_star"), "must be >= 0");
    return e;
}

void parse_model(const Node& n, RunConfig& cfg) {
    n.allow({"cavity", "emitters"});
    cfg.model.cavity = parse_cavity(n.child("cavity"));
    if (n.has("emitters")) {
        const auto& arr = n.raw("emitters");
        if (!arr.is_array()) fail(n.path("emitters"), "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg.model.emitters.push_back(
                parse_emitter(Node(arr[i], n.path("emitters") + "[" + std::to_string(i) + "]")));
        }
    }
    cfg.has_model = true;
}

void parse_grid(const Node& n, GridSpec& g) {
    n.allow({"start", "stop", "center", "half_span", "points"});
    g.start = n.opt_number("start");
    g.stop = n.opt_number("stop");
    g.center = n.opt_number("center");
    g.half_span = n.opt_number("half_span");
    if (n.has("points")) {
        g.points = static_cast<std::size_t>(n.unsigned_int("points"));
        check(*g.points >= 2, n.path("points"), "need at least 2 points");
    }
    if (g.start.has_value() != g.stop.has_value()) {
        fail(n.node_path(), "start and stop must be given together");
    }
    if (g.start && !(*g.stop > *g.start)) check(false, n.path("stop"), "stop must exceed start");
    if (g.start && (g.center || g.half_span)) {
        fail(n.node_path(), "use either start/stop or center/half_span");
    }
    if (g.half_span) check(*g.half_span > 0.0, n.path("half_span"), "must be > 0");
}

void parse_oracle(const Node& n, OracleSettings& o) {
    n.allow({"n_max", "alpha_in", "n_max_list", "rel_tol"});
    if (n.has("n_max")) {
        o.n_max = static_cast<std::size_t>(n.unsigned_int("n_max"));
        check(o.n_max >= 1, n.path("n_max"), "must be >= 1");
    }
    o.alpha_in = n.number_or("alpha_in", o.alpha_in);
    check(o.alpha_in > 0.0, n.path("alpha_in"), "must be > 0");
    o.rel_tol = n.number_or("rel_tol", o.rel_tol);
    check(o.rel_tol > 0.0, n.path("rel_tol"), "must be > 0");
    if (n.has("n_max_list")) {
        const auto& arr = n.raw("n_max_list");
        if (!arr.is_array()) fail(n.path("n_max_list"), "expected an array");
        for (const auto& v : arr) {
            if (!v.is_number_unsigned()) fail(n.path("n_max_list"), "expected non-negative integers");
            o.n_max_list.push_back(v.get<std::size_t>());
        }
        for (std::size_t i = 0; i < o.n_max_list.size(); ++i) {
            check(o.n_max_list[i] >= 1 && (i == 0 || o.n_max_list[i] > o.n_max_list[i - 1]),
                  n.path("n_max_list"), "must be increasing and >= 1");
        }
    }
}

void parse_collective(const Node& n, CollectiveSettings& c) {
    n.allow({"convention", "delta_mc"});
    if (n.has("convention")) {
        const auto s = n.string("convention");
        if (s == "common_mean") c.convention = DetuningConvention::common_mean;
        else if (s == "per_pair_geometric") c.convention = DetuningConvention::per_pair_geometric;
        else fail(n.path("convention"), "unknown convention '" + s + "'");
    }
    c.delta_mc = n.opt_number("delta_mc");
}

void parse_ensemble(const Node& n, RunConfig& cfg) {
    n.allow({"density", "sigma_inhom", "center_wavelength", "mode_volume", "refractive_index",
             "slab_thickness", "aspect_ratio", "g_max", "gamma_prime", "gamma_star",
             "branching_zpl", "seed", "band_halfwidth"});
    auto& e = cfg.ensemble;
    e.density = n.number_or("density", e.density);
    check(e.density >= 0.0, n.path("density"), "must be >= 0");
    e.sigma_inhom = n.number_or("sigma_inhom", e.sigma_inhom);
    check(e.sigma_inhom >= 0.0, n.path("sigma_inhom"), "must be >= 0");
    e.center_wavelength = n.number_or("center_wavelength", e.center_wavelength);
    check(e.center_wavelength > 0.0, n.path("center_wavelength"), "must be > 0");
    e.mode_volume = n.number_or("mode_volume", e.mode_volume);
    check(e.mode_volume > 0.0, n.path("mode_volume"), "must be > 0");
    e.refractive_index = n.number_or("refractive_index", e.refractive_index);
    check(e.refractive_index > 0.0, n.path("refractive_index"), "must be > 0");
    e.slab_thickness = n.number_or("slab_thickness", e.slab_thickness);
    check(e.slab_thickness > 0.0, n.path("slab_thickness"), "must be > 0");
    e.aspect_ratio = n.number_or("aspect_ratio", e.aspect_ratio);
    check(e.aspect_ratio > 0.0, n.path("aspect_ratio"), "must be > 0");
    e.g_max = n.number_or("g_max", e.g_max);
    check(e.g_max >= 0.0, n.path("g_max"), "must be >= 0");
    e.gamma_prime = n.number_or("gamma_prime", e.gamma_prime);
    check(e.gamma_prime > 0.0, n.path("gamma_prime"), "must be > 0");
    e.gamma_star = n.number_or("gamma_star", e.gamma_star);
    check(e.gamma_star >= 0.0, n.path("gamma_star"), "must be >= 0");
    e.branching_zpl = n.number_or("branching_zpl", e.branching_zpl);
    check(e.branching_zpl >= 0.0 && e.branching_zpl <= 1.0, n.path("branching_zpl"),
          "must lie in [0, 1]");
    if (n.has("seed")) {
        e.seed = n.unsigned_int("seed");
        cfg.ensemble_seed_set = true;
    }
    cfg.band_halfwidth = n.opt_number("band_halfwidth");
    if (cfg.band_halfwidth) check(*cfg.band_halfwidth >= 0.0, n.path("band_halfwidth"), "must be >= 0");
}

void parse_tuning(const Node& n, RunConfig& cfg) {
    n.allow({"shift_cap", "rate_scale", "jitter_sigma", "direction_bias", "max_dose_per_step",
             "seed", "tolerance", "max_steps"});
    auto& t = cfg.tune.config;
    t.shift_cap = n.number_or("shift_cap", t.shift_cap);
    check(t.shift_cap >= 0.0, n.path("shift_cap"), "must be >= 0");
    t.rate_scale = n.number_or("rate_scale", t.rate_scale);
    check(t.rate_scale >= 0.0, n.path("rate_scale"), "must be >= 0");
    t.jitter_sigma = n.number_or("jitter_sigma", t.jitter_sigma);
    check(t.jitter_sigma >= 0.0, n.path("jitter_sigma"), "must be >= 0");
    t.direction_bias = n.number_or("direction_bias", t.direction_bias);
    check(t.direction_bias >= -1.0 && t.direction_bias <= 1.0, n.path("direction_bias"),
          "must lie in [-1, 1]");
    t.max_dose_per_step = n.number_or("max_dose_per_step", t.max_dose_per_step);
    check(t.max_dose_per_step > 0.0, n.path("max_dose_per_step"), "must be > 0");
    if (n.has("seed")) {
        t.seed = n.unsigned_int("seed");
        cfg.tuning_seed_set = true;
    }
    cfg.tune.tolerance = n.number_or("tolerance", cfg.tune.tolerance);
    check(cfg.tune.tolerance > 0.0, n.path("tolerance"), "must be > 0");
    if (n.has("max_steps")) cfg.tune.max_steps = static_cast<std::size_t>(n.unsigned_int("max_steps"));
}

void parse_fit(const Node& n, FitSettings& f) {
    n.allow({"kind", "window", "gamma_prime", "branching_zpl", "guess"});
    const std::string kind = n.string("kind");
    if (kind == "lorentzian") f.kind = FitKind::lorentzian;
    else if (kind == "antiresonance") f.kind = FitKind::antiresonance;
    else if (kind == "decay") f.kind = FitKind::decay;
    else fail(n.path("kind"), "unknown fit kind '" + kind + "'");

    if (n.has("window")) {
        const auto& w = n.raw("window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
            fail(n.path("window"), "expected [lo, hi]");
        }
        FrequencyWindow win{w[0].get<double>(), w[1].get<double>()};
        check(win.hi > win.lo, n.path("window"), "hi must exceed lo");
        f.window = win;
    }
    f.antiresonance.gamma_prime = n.number_or("gamma_prime", f.antiresonance.gamma_prime);
    check(f.antiresonance.gamma_prime > 0.0, n.path("gamma_prime"), "must be > 0");
    f.antiresonance.branching_zpl = n.number_or("branching_zpl", f.antiresonance.branching_zpl);

    if (n.has("guess")) {
        Node g = n.child("guess");
        if (f.kind == FitKind::antiresonance) {
            g.allow({"g", "omega_0", "gamma_star"});
            f.antiresonance.g = g.opt_number("g");
            f.antiresonance.omega_0 = g.opt_number("omega_0");
            f.antiresonance.gamma_star = g.opt_number("gamma_star");
        } else if (f.kind == FitKind::lorentzian) {
            g.allow({"omega_c", "kappa", "amplitude", "baseline"});
            f.lorentzian = LorentzianGuess{g.number("omega_c"), g.number("kappa"),
                                           g.number("amplitude"), g.number("baseline")};
        } else {
            g.allow({});
        }
    }
    if (f.kind == FitKind::antiresonance && !f.window) fail(n.path("window"), "missing required key");
}

void parse_characterize(const Node& n, CharacterizeSettings& c) {
    n.allow({"tau1", "delta1", "tau2", "delta2", "kappa", "branching_zpl"});
    c.tau1 = n.number("tau1");
    check(c.tau1 > 0.0, n.path("tau1"), "must be > 0");
    c.delta1 = n.number("delta1");
    c.tau2 = n.number("tau2");
    check(c.tau2 > 0.0, n.path("tau2"), "must be > 0");
    c.delta2 = n.number("delta2");
    c.kappa = n.number_or("kappa", c.kappa);
    check(c.kappa > 0.0, n.path("kappa"), "must be > 0");
    c.branching_zpl = n.number_or("branching_zpl", c.branching_zpl);
    check(c.branching_zpl > 0.0 && c.branching_zpl <= 1.0, n.path("branching_zpl"),
          "must lie in (0, 1]");
}

void require_output(const RunConfig& cfg, const char* name) {
    if (!cfg.outputs.count(name)) fail(std::string("outputs.") + name, "missing required key");
}

void require_model(const RunConfig& cfg) {
    if (!cfg.has_model) fail("model", "missing required key");
}
} // namespace

std::string_view to_string(Command c) noexcept {
    switch (c) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::collective: return "collective";
    case Command::oracle_check: return "oracle-check";
    case Command::ensemble: return "ensemble";
    case Command::tune: return "tune";
    case Command::characterize: return "characterize";
    }
    return "unknown";
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("<document>", std::string("malformed JSON: ") + e.what());
    }
    const Node root(doc, "");
    root.allow({"command", "seed", "output_dir", "timestamp", "inputs", "outputs", "model", "grid",
                "frame", "noise_sigma", "oracle", "collective", "ensemble", "tuning", "fit",
                "characterize"});

    RunConfig cfg;
    cfg.command = parse_command(root);
    if (root.has("seed")) cfg.seed = root.unsigned_int("seed");
    if (root.has("output_dir")) cfg.output_dir = root.string("output_dir");
    if (root.has("timestamp")) cfg.timestamp = root.boolean("timestamp");
    if (root.has("inputs")) cfg.inputs = root.string_map("inputs");
    if (root.has("outputs")) cfg.outputs = root.string_map("outputs");
    for (const auto& [name, file] : cfg.outputs) {
        if (file.empty()) fail("outputs." + name, "empty file name");
    }
    if (root.has("model")) parse_model(root.child("model"), cfg);
    if (root.has("grid")) parse_grid(root.child("grid"), cfg.grid);
    if (root.has("frame")) {
        const auto f = root.string("frame");
        if (f == "absolute") cfg.frame = Frame::absolute;
        else if (f == "detuning") cfg.frame = Frame::detuning;
        else fail("frame", "expected 'absolute' or 'detuning'");
    }
    cfg.noise_sigma = root.number_or("noise_sigma", 0.0);
    check(cfg.noise_sigma >= 0.0, "noise_sigma", "must be >= 0");
    if (root.has("oracle")) parse_oracle(root.child("oracle"), cfg.oracle);
    if (root.has("collective")) parse_collective(root.child("collective"), cfg.collective);
    if (root.has("ensemble")) parse_ensemble(root.child("ensemble"), cfg);
    if (root.has("tuning")) parse_tuning(root.child("tuning"), cfg);
    if (root.has("fit")) parse_fit(root.child("fit"), cfg.fit);
    if (root.has("characterize")) parse_characterize(root.child("characterize"), cfg.characterize);

    switch (cfg.command) {
    case Command::simulate:
        require_model(cfg);
        require_output(cfg, "spectrum");
        break;
    case Command::fit:
        if (!root.has("fit")) fail("fit", "missing required key");
        if (cfg.fit.kind == FitKind::decay) {
            if (!cfg.inputs.count("histogram")) fail("inputs.histogram", "missing required key");
        } else if (!cfg.inputs.count("spectrum")) {
            fail("inputs.spectrum", "missing required key");
        }
        if (cfg.fit.kind == FitKind::antiresonance) require_model(cfg);
        require_output(cfg, "result");
        break;
    case Command::collective:
        require_model(cfg);
        require_output(cfg, "result");
        break;
    case Command::oracle_check:
        require_model(cfg);
        require_output(cfg, "report");
        if (cfg.model.emitters.size() > 3) fail("model.emitters", "oracle supports at most 3 emitters");
        break;
    case Command::ensemble:
        require_model(cfg);
        require_output(cfg, "emitters");
        break;
    case Command::tune:
        require_model(cfg);
        if (cfg.model.emitters.size() != 2) fail("model.emitters", "tune needs exactly 2 emitters");
        require_output(cfg, "trajectory");
        break;
    case Command::characterize:
        if (!root.has("characterize")) fail("characterize", "missing required key");
        require_output(cfg, "result");
        break;
    }
    return cfg;
}

std::vector<double> make_grid(const RunConfig& config) {
    const auto& g = config.grid;
    const std::size_t points = g.points.value_or(601);
    if (g.start) {
        std::vector<double> out(points);
        const double step = (*g.stop - *g.start) / static_cast<double>(points - 1);
        for (std::size_t i = 0; i < points; ++i) out[i] = *g.start + step * static_cast<double>(i);
        out.back() = *g.stop;
        return out;
    }
    const double omega_c = config.frame == Frame::absolute ? config.model.cavity.omega_c : 0.0;
    const double center = g.center.value_or(omega_c);
    const double half = g.half_span.value_or(3.0 * config.model.cavity.kappa);
    return uniform_grid(center, half, points);
}

} // namespace cqed::cli
