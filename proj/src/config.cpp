#include "kslab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace kslab {

namespace {

class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.is_object()) throw ConfigError(name_ + ": expected an object");
        obj_ = &doc;
        for (auto it = doc.begin(); it != doc.end(); ++it) keys_.insert(it.key());
    }

    bool has(const std::string& key) const { return obj_->contains(key) && !(*obj_)[key].is_null(); }

    const json& raw(const std::string& key) {
        keys_.erase(key);
        return (*obj_)[key];
    }

    void real(const std::string& key, Real& dst) {
        if (!obj_->contains(key)) return;
        const json& v = raw(key);
        try {
            dst = real_from_json(v);
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": expected a number");
        }
    }

    void real(const std::string& key, std::optional<Real>& dst) {
        if (!obj_->contains(key)) return;
        if ((*obj_)[key].is_null()) {
            raw(key);
            dst.reset();
            return;
        }
        Real v = 0;
        real(key, v);
        dst = v;
    }

    template <class I>
    void integer(const std::string& key, I& dst) {
        if (!obj_->contains(key)) return;
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        dst = v.get<I>();
    }

    void boolean(const std::string& key, bool& dst) {
        if (!obj_->contains(key)) return;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
        dst = v.get<bool>();
    }

    void string(const std::string& key, std::string& dst) {
        if (!obj_->contains(key)) return;
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
        dst = v.get<std::string>();
    }

    void reals(const std::string& key, std::vector<Real>& dst) {
        if (!obj_->contains(key)) return;
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
        dst.clear();
        for (const auto& x : v) {
            try {
                dst.push_back(real_from_json(x));
            } catch (const std::exception&) {
                throw ConfigError(where(key) + ": expected numbers");
            }
        }
    }

    void finish() const {
        if (!keys_.empty()) throw ConfigError(name_ + ": unknown key '" + *keys_.begin() + "'");
    }

    std::string where(const std::string& key) const { return name_ + "." + key; }

private:
    std::string name_;
    const json* obj_ = nullptr;
    std::set<std::string> keys_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

DataKind data_kind_from(const std::string& s) {
    if (s == "auto") return DataKind::Auto;
    if (s == "subsolution") return DataKind::Subsolution;
    if (s == "gaussian") return DataKind::Gaussian;
    throw ConfigError("initial.kind must be auto, subsolution or gaussian");
}

Integrator integrator_from(const std::string& s) {
    if (s == "imex") return Integrator::Imex;
    if (s == "explicit") return Integrator::Explicit;
    throw ConfigError("integrator must be imex or explicit");
}

const char* to_string(Integrator i) { return i == Integrator::Imex ? "imex" : "explicit"; }

void read_controls(Section& s, RunControls& c) {
    s.integer("N", c.N);
    s.real("s_min_rel", c.s_min_rel);
    s.real("rtol", c.rtol);
    s.real("atol", c.atol);
    s.real("horizon", c.horizon);
    s.real("dt_floor", c.dt_floor);
    s.real("dt_initial", c.dt_initial);
    s.real("u_max_factor", c.u_max_factor);
    s.real("u_max_threshold", c.u_max_threshold);
    s.real("cfl", c.cfl);
    std::string integ = to_string(c.integrator);
    s.string("integrator", integ);
    c.integrator = integrator_from(integ);
    s.real("output_interval", c.output_interval);
    s.integer("max_steps", c.max_steps);
    s.reals("p_exponents", c.p_exponents);
    s.reals("q_exponents", c.q_exponents);
}

void check_controls(const RunControls& c, const std::string& where) {
    require(c.N >= 8, where + ".N must be >= 8");
    require(c.s_min_rel > 0 && c.s_min_rel < 1, where + ".s_min_rel must lie in (0, 1)");
    require(c.rtol > 0 && c.atol >= 0, where + ": tolerances must be positive");
    require(c.horizon >= 0 && std::isfinite(static_cast<double>(c.horizon)), where + ".horizon must be finite and >= 0");
    require(!c.dt_floor || *c.dt_floor > 0, where + ".dt_floor must be positive");
    require(!c.dt_initial || *c.dt_initial > 0, where + ".dt_initial must be positive");
    require(c.u_max_factor > 1, where + ".u_max_factor must exceed 1");
    require(!c.u_max_threshold || *c.u_max_threshold > 0, where + ".u_max_threshold must be positive");
    require(c.cfl > 0, where + ".cfl must be positive");
    require(c.output_interval >= 0, where + ".output_interval must be >= 0");
    require(c.max_steps > 0, where + ".max_steps must be positive");
    for (Real p : c.p_exponents) require(p >= 1, where + ".p_exponents must be >= 1");
    for (Real q : c.q_exponents) require(q >= 1, where + ".q_exponents must be >= 1");
}

json controls_json(const RunControls& c) {
    auto opt = [](const std::optional<Real>& v) { return v ? to_json_real(*v) : json(nullptr); };
    json pe = json::array(), qe = json::array();
    for (Real p : c.p_exponents) pe.push_back(to_json_real(p));
    for (Real q : c.q_exponents) qe.push_back(to_json_real(q));
    return {{"N", c.N},
            {"s_min_rel", to_json_real(c.s_min_rel)},
            {"rtol", to_json_real(c.rtol)},
            {"atol", to_json_real(c.atol)},
            {"horizon", to_json_real(c.horizon)},
            {"dt_floor", opt(c.dt_floor)},
            {"dt_initial", opt(c.dt_initial)},
            {"u_max_factor", to_json_real(c.u_max_factor)},
            {"u_max_threshold", opt(c.u_max_threshold)},
            {"cfl", to_json_real(c.cfl)},
            {"integrator", to_string(c.integrator)},
            {"output_interval", to_json_real(c.output_interval)},
            {"max_steps", c.max_steps},
            {"p_exponents", pe},
            {"q_exponents", qe}};
}

}  // namespace

RunConfig parse_config(const json& doc) {
    Section top(doc, "config");
    RunConfig cfg;

    if (!top.has("model")) throw ConfigError("config: missing model section");
    {
        Section s(top.raw("model"), "model");
        s.integer("n", cfg.model.n);
        s.real("R", cfg.model.R);
        s.real("k1", cfg.model.k1);
        s.real("k2", cfg.model.k2);
        s.real("l1", cfg.model.l1);
        s.real("l2", cfg.model.l2);
        s.real("m", cfg.model.m);
        s.real("sigma", cfg.model.sigma);
        s.real("d0", cfg.model.d0);
        s.real("s0_coef", cfg.model.s0_coef);
        s.real("xi0", cfg.model.xi0);
        s.finish();
        try {
            validate(cfg.model);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
    }
    if (top.has("masses")) {
        Section s(top.raw("masses"), "masses");
        MassBounds mb;
        s.real("M_lo", mb.M_lo);
        s.real("M_hi", mb.M_hi);
        s.real("Tstar", mb.Tstar);
        s.real("window_cap", mb.window_cap);
        s.finish();
        require(mb.M_lo > 0 && mb.M_lo < mb.M_hi, "masses: need 0 < M_lo < M_hi");
        require(mb.Tstar > 0, "masses: Tstar must be positive");
        require(mb.window_cap > 0, "masses: window_cap must be positive");
        cfg.masses = mb;
    }
    if (top.has("solver")) {
        Section s(top.raw("solver"), "solver");
        read_controls(s, cfg.solver);
        s.finish();
    }
    check_controls(cfg.solver, "solver");
    if (top.has("initial")) {
        Section s(top.raw("initial"), "initial");
        std::string kind = to_string(cfg.initial_kind);
        s.string("kind", kind);
        cfg.initial_kind = data_kind_from(kind);
        s.real("mass", cfg.initial_mass);
        s.real("width", cfg.bump_width);
        s.real("blowup_horizon_multiplier", cfg.blowup_horizon_multiplier);
        s.finish();
        require(!cfg.initial_mass || *cfg.initial_mass > 0, "initial.mass must be positive");
        require(cfg.bump_width > 0, "initial.width must be positive");
        require(cfg.blowup_horizon_multiplier > 0, "initial.blowup_horizon_multiplier must be positive");
    }
    if (top.has("certify")) {
        Section s(top.raw("certify"), "certify");
        s.integer("n_s", cfg.certify.n_s);
        s.integer("n_t", cfg.certify.n_t);
        s.real("kink_band", cfg.certify.kink_band);
        s.real("t_clamp", cfg.certify.t_clamp);
        s.real("inner_depth", cfg.certify.inner_depth);
        s.real("rel_tol", cfg.certify.rel_tol);
        s.real("abs_tol", cfg.certify.abs_tol);
        s.boolean("dump_csv", cfg.dump_operator_csv);
        s.finish();
        const auto& g = cfg.certify;
        require(g.kink_band > 0 && g.kink_band < 0.5L, "certify.kink_band must lie in (0, 0.5)");
        require(g.t_clamp > 0 && g.t_clamp < 1, "certify.t_clamp must lie in (0, 1)");
        require(g.inner_depth > 0 && g.inner_depth < 1, "certify.inner_depth must lie in (0, 1)");
        require(g.rel_tol >= 0 && g.abs_tol >= 0, "certify tolerances must be >= 0");
    }
    if (top.has("sweep")) {
        Section s(top.raw("sweep"), "sweep");
        SweepConfig& w = cfg.sweep;
        s.real("m_min", w.m_min);
        s.real("m_max", w.m_max);
        s.integer("m_count", w.m_count);
        s.real("sigma_min", w.sigma_min);
        s.real("sigma_max", w.sigma_max);
        s.integer("sigma_count", w.sigma_count);
        std::string mode = to_string(w.mode);
        s.string("mode", mode);
        w.mode = sweep_mode_from(mode);
        s.real("margin", w.margin);
        s.real("bounded_horizon", w.run.controls.horizon);
        s.real("blowup_horizon_multiplier", w.run.blowup_horizon_multiplier);
        s.integer("N", w.run.controls.N);
        s.real("rtol", w.run.controls.rtol);
        s.integer("max_steps", w.run.controls.max_steps);
        s.finish();
        check_controls(w.run.controls, "sweep");
        require(w.run.blowup_horizon_multiplier > 0, "sweep.blowup_horizon_multiplier must be positive");
    }
    if (top.has("masses_table")) {
        Section s(top.raw("masses_table"), "masses_table");
        s.integer("points", cfg.masses_table.points);
        s.finish();
        require(cfg.masses_table.points >= 2, "masses_table.points must be >= 2");
    }
    if (top.has("output")) {
        Section s(top.raw("output"), "output");
        s.string("dir", cfg.out_dir);
        s.boolean("snapshot", cfg.snapshot);
        s.finish();
    }
    top.finish();

    SweepConfig& w = cfg.sweep;
    w.base = cfg.model;
    if (cfg.masses) w.run.masses = *cfg.masses;
    w.run.data = DataKind::Auto;
    w.run.bump_width = cfg.bump_width;
    w.run.target_mass = cfg.initial_mass;
    w.cert = cfg.certify;
    try {
        validate(w);
    } catch (const std::exception& e) {
        // sweep ranges only matter for the sweep subcommand, but a malformed section is still an error
        if (doc.contains("sweep")) throw ConfigError(std::string("sweep: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    const ModelParams& p = cfg.model;
    json j;
    j["model"] = {{"n", p.n},
                  {"R", to_json_real(p.R)},
                  {"k1", to_json_real(p.k1)},
                  {"k2", to_json_real(p.k2)},
                  {"l1", to_json_real(p.l1)},
                  {"l2", to_json_real(p.l2)},
                  {"m", to_json_real(p.m)},
                  {"sigma", to_json_real(p.sigma)},
                  {"d0", to_json_real(p.d0)},
                  {"s0_coef", to_json_real(p.s0_coef)},
                  {"xi0", to_json_real(p.xi0)}};
    if (cfg.masses)
        j["masses"] = {{"M_lo", to_json_real(cfg.masses->M_lo)},
                       {"M_hi", to_json_real(cfg.masses->M_hi)},
                       {"Tstar", to_json_real(cfg.masses->Tstar)},
                       {"window_cap", to_json_real(cfg.masses->window_cap)}};
    else
        j["masses"] = nullptr;
    j["solver"] = controls_json(cfg.solver);
    j["initial"] = {{"kind", to_string(cfg.initial_kind)},
                    {"mass", cfg.initial_mass ? to_json_real(*cfg.initial_mass) : json(nullptr)},
                    {"width", to_json_real(cfg.bump_width)},
                    {"blowup_horizon_multiplier", to_json_real(cfg.blowup_horizon_multiplier)}};
    const CertifyGrid& g = cfg.certify;
    j["certify"] = {{"n_s", g.n_s},
                    {"n_t", g.n_t},
                    {"kink_band", to_json_real(g.kink_band)},
                    {"t_clamp", to_json_real(g.t_clamp)},
                    {"inner_depth", to_json_real(g.inner_depth)},
                    {"rel_tol", to_json_real(g.rel_tol)},
                    {"abs_tol", to_json_real(g.abs_tol)},
                    {"dump_csv", cfg.dump_operator_csv}};
    const SweepConfig& w = cfg.sweep;
    j["sweep"] = {{"m_min", to_json_real(w.m_min)},
                  {"m_max", to_json_real(w.m_max)},
                  {"m_count", w.m_count},
                  {"sigma_min", to_json_real(w.sigma_min)},
                  {"sigma_max", to_json_real(w.sigma_max)},
                  {"sigma_count", w.sigma_count},
                  {"mode", to_string(w.mode)},
                  {"margin", to_json_real(w.margin)},
                  {"bounded_horizon", to_json_real(w.run.controls.horizon)},
                  {"blowup_horizon_multiplier", to_json_real(w.run.blowup_horizon_multiplier)},
                  {"N", w.run.controls.N},
                  {"rtol", to_json_real(w.run.controls.rtol)},
                  {"max_steps", w.run.controls.max_steps}};
    j["masses_table"] = {{"points", cfg.masses_table.points}};
    j["output"] = {{"dir", cfg.out_dir}, {"snapshot", cfg.snapshot}};
    return j;
}

const MassBounds& require_masses(const RunConfig& cfg) {
    if (!cfg.masses) throw ConfigError("config: missing masses section");
    return *cfg.masses;
}

CanonicalConfig canonical_from(const RunConfig& cfg) {
    CanonicalConfig c;
    c.masses = require_masses(cfg);
    c.controls = cfg.solver;
    c.data = cfg.initial_kind;
    c.blowup_horizon_multiplier = cfg.blowup_horizon_multiplier;
    c.bump_width = cfg.bump_width;
    c.target_mass = cfg.initial_mass;
    return c;
}

}  // namespace kslab

namespace kslab {

void apply_tamper(CertificateParams& cp, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("tamper expects KEY=VALUE or KEY*=FACTOR");
    std::string key = assignment.substr(0, eq);
    const bool scale = key.back() == '*';
    if (scale) key.pop_back();
    const std::string rhs = assignment.substr(eq + 1);
    char* end = nullptr;
    const Real v = std::strtold(rhs.c_str(), &end);
    if (rhs.empty() || *end != '\0') throw ConfigError("tamper value is not a number: " + rhs);
    Real* field = nullptr;
    if (key == "theta") field = &cp.theta;
    else if (key == "gamma") field = &cp.gamma;
    else if (key == "delta") field = &cp.delta;
    else if (key == "y0") field = &cp.y0;
    else if (key == "a") field = &cp.a;
    else throw ConfigError("tamper key not supported: " + key);
    *field = scale ? *field * v : v;
    if (key == "gamma" || key == "delta" || key == "y0") cp.T = blowup_time(cp.gamma, cp.delta, cp.y0);
}

}  // namespace kslab
