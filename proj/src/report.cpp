#include "kslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace kslab {

namespace {

json region_json(const RegionMax& r) {
    if (!r.any) return nullptr;
    return {{"ratio", to_json_real(r.ratio)},
            {"value", to_json_real(r.value)},
            {"scale", to_json_real(r.scale)},
            {"s", to_json_real(r.s)},
            {"t", to_json_real(r.t)}};
}

std::string exponent_label(const char* prefix, Real e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%Lg", prefix, e);
    return buf;
}

}  // namespace

json to_json(const CertificateParams& cp) {
    const Thresholds& a = cp.audit;
    json audit = {{"eta", to_json_real(a.eta)},
                  {"alpha_star", to_json_real(a.alpha_star)},
                  {"beta_star", to_json_real(a.beta_star)},
                  {"delta_star", to_json_real(a.delta_star)},
                  {"gamma_star", to_json_real(a.gamma_star)},
                  {"y_star", to_json_real(a.y_star)},
                  {"delta_ss", to_json_real(a.delta_ss)},
                  {"gamma_ss", to_json_real(a.gamma_ss)},
                  {"s1", to_json_real(a.s1)},
                  {"s_cap_slope", to_json_real(a.s_cap_slope)},
                  {"s_cap_balance", to_json_real(a.s_cap_balance)},
                  {"s_sss", to_json_real(a.s_sss)},
                  {"s_ssss", to_json_real(a.s_ssss)},
                  {"c1", to_json_real(a.c1)},
                  {"c2", to_json_real(a.c2)},
                  {"sup_D", to_json_real(a.sup_D)},
                  {"sup_S", to_json_real(a.sup_S)},
                  {"theta_star", to_json_real(a.theta_star)},
                  {"theta_ss", to_json_real(a.theta_ss)},
                  {"T_s", to_json_real(a.T_s)}};
    return {{"n", cp.n},
            {"R", to_json_real(cp.R)},
            {"mu_lo", to_json_real(cp.mu_lo)},
            {"mu_hi", to_json_real(cp.mu_hi)},
            {"a", to_json_real(cp.a)},
            {"alpha", to_json_real(cp.alpha)},
            {"beta", to_json_real(cp.beta)},
            {"delta", to_json_real(cp.delta)},
            {"gamma", to_json_real(cp.gamma)},
            {"theta", to_json_real(cp.theta)},
            {"y0", to_json_real(cp.y0)},
            {"T", to_json_real(cp.T)},
            {"s0", to_json_real(cp.s0)},
            {"T0", to_json_real(cp.T0)},
            {"Tstar", to_json_real(cp.Tstar)},
            {"audit", audit}};
}

CertificateParams certificate_from_json(const json& j) {
    CertificateParams cp;
    try {
        cp.n = j.at("n").get<int>();
        auto r = [&](const char* k) { return real_from_json(j.at(k)); };
        cp.R = r("R");
        cp.mu_lo = r("mu_lo");
        cp.mu_hi = r("mu_hi");
        cp.a = r("a");
        cp.alpha = r("alpha");
        cp.beta = r("beta");
        cp.delta = r("delta");
        cp.gamma = r("gamma");
        cp.theta = r("theta");
        cp.y0 = r("y0");
        cp.T = r("T");
        cp.s0 = r("s0");
        cp.T0 = r("T0");
        cp.Tstar = r("Tstar");
        if (j.contains("audit")) {
            const json& a = j.at("audit");
            auto q = [&](const char* k) { return real_from_json(a.at(k)); };
            Thresholds& th = cp.audit;
            th.eta = q("eta");
            th.alpha_star = q("alpha_star");
            th.beta_star = q("beta_star");
            th.delta_star = q("delta_star");
            th.gamma_star = q("gamma_star");
            th.y_star = q("y_star");
            th.delta_ss = q("delta_ss");
            th.gamma_ss = q("gamma_ss");
            th.s1 = q("s1");
            th.s_cap_slope = q("s_cap_slope");
            th.s_cap_balance = q("s_cap_balance");
            th.s_sss = q("s_sss");
            th.s_ssss = q("s_ssss");
            th.c1 = q("c1");
            th.c2 = q("c2");
            th.sup_D = q("sup_D");
            th.sup_S = q("sup_S");
            th.theta_star = q("theta_star");
            th.theta_ss = q("theta_ss");
            th.T_s = q("T_s");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed certificate: ") + e.what());
    }
    return cp;
}

json to_json(const CertificateReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"worst", to_json_real(c.worst)}, {"t", to_json_real(c.t)}, {"ok", c.ok}});
    return {{"pass", r.pass},
            {"n_s", r.n_s},
            {"n_t", r.n_t},
            {"spacing", r.spacing},
            {"tolerance_rel", to_json_real(r.tolerance_rel)},
            {"tolerance_abs", to_json_real(r.tolerance_abs)},
            {"P_inner", region_json(r.P_inner)},
            {"P_outer", region_json(r.P_outer)},
            {"Q_inner", region_json(r.Q_inner)},
            {"Q_outer", region_json(r.Q_outer)},
            {"checks", checks},
            {"failures", r.failures}};
}

json to_json(const RunOutcome& o) {
    json j = {{"kind", to_string(o.kind)},
              {"t_end", to_json_real(o.t_end)},
              {"sup_u_initial", to_json_real(o.sup_u_initial)},
              {"threshold", to_json_real(o.threshold)},
              {"message", o.message},
              {"steps_accepted", o.final_state.stats.accepted},
              {"steps_rejected", o.final_state.stats.rejected},
              {"monotonicity_clips", o.final_state.stats.clipped},
              {"samples", o.series.size()}};
    j["final_decade_growth"] = o.final_decade_growth ? to_json_real(*o.final_decade_growth) : json(nullptr);
    if (!o.series.empty()) {
        const Diagnostics& d = o.series.back();
        j["sup_u_final"] = to_json_real(d.sup_u);
        j["sup_w_final"] = to_json_real(d.sup_w);
        j["mass_u_final"] = to_json_real(d.mass_u);
        j["mass_w_final"] = to_json_real(d.mass_w);
    }
    return j;
}

void write_series_csv(std::ostream& os, const std::vector<Diagnostics>& series, const RunControls& c) {
    os << "t,sup_u,sup_w,mass_u,mass_w,dt";
    for (Real p : c.p_exponents) os << ',' << exponent_label("lp_", p);
    for (Real q : c.q_exponents) os << ',' << exponent_label("lq_", q);
    os << '\n';
    for (const auto& d : series) {
        std::vector<Real> row{d.t, d.sup_u, d.sup_w, d.mass_u, d.mass_w, d.dt};
        row.insert(row.end(), d.lp.begin(), d.lp.end());
        row.insert(row.end(), d.lq.begin(), d.lq.end());
        write_csv_row(os, row);
    }
}

void write_snapshot_csv(std::ostream& os, const RadialState& st, int n) {
    const auto u = nodal_density(st.s, st.U, n);
    const auto w = nodal_density(st.s, st.W, n);
    os << "s,U,W,u,w\n";
    for (std::size_t i = 0; i < st.s.size(); ++i) write_csv_row(os, {st.s[i], st.U[i], st.W[i], u[i], w[i]});
}

void write_mass_table_csv(std::ostream& os, const CertificateParams& cp, int points) {
    const MassProfiles mp = mass_profiles(cp);
    os << "r,M_u,M_w\n";
    for (int i = 0; i < points; ++i) {
        const Real r = i == points - 1 ? cp.R : cp.R * i / (points - 1);
        write_csv_row(os, {r, mp.Mu(r), mp.Mw(r)});
    }
}

void write_operator_csv(std::ostream& os, const CertificateParams& cp, const ModelParams& p, int n_s, int n_t) {
    os << "s,t,P,Q\n";
    const Real ext = cp.extent();
    for (int k = 0; k < n_t; ++k) {
        // T - t geometric from T down to 1e-6 T
        const Real t = n_t == 1 ? 0 : cp.T * (1 - std::pow(Real(1e-6L), Real(k) / (n_t - 1)));
        const Real y = y_closed_form(t, cp.gamma, cp.delta, cp.y0);
        const Real lo = Real(1e-12L) / y;
        for (int i = 0; i < n_s; ++i) {
            const Real s = lo * std::pow(ext / lo, Real(i) / (n_s - 1));
            const PairJet j = eval_pair(s, t, cp);
            write_csv_row(os, {s, t, apply_P(s, j.U, j.W, cp.mu_hi, p).value, apply_Q(s, j.U, j.W, p).value});
        }
    }
}

}  // namespace kslab
