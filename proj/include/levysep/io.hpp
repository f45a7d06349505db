#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "levysep/density.hpp"
#include "levysep/errors.hpp"
#include "levysep/levy.hpp"
#include "levysep/pathsim.hpp"
#include "levysep/poisson.hpp"
#include "levysep/verify.hpp"

namespace levysep {

inline constexpr const char* kVersionTag = "levysep 0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Triplet and density (de)serialization
// ---------------------------------------------------------------------------

inline json to_json(const JumpMeasure& nu) {
    switch (nu.kind()) {
        case JumpMeasure::Kind::none:
            return {{"kind", "none"}};
        case JumpMeasure::Kind::finite_atoms: {
            json atoms = json::array();
            for (const auto& a : nu.atom_list()) atoms.push_back({{"x", a.location}, {"rate", a.rate}});
            return {{"kind", "finite-atoms"}, {"atoms", atoms}};
        }
        case JumpMeasure::Kind::stable_density: {
            const auto& s = nu.stable_part();
            return {{"kind", "stable-density"}, {"index", s.index},      {"scale", s.scale},
                    {"weight_left", s.weight_left}, {"weight_right", s.weight_right},
                    {"truncation", s.truncation}};
        }
        case JumpMeasure::Kind::tabulated_density: {
            const auto& t = nu.table();
            return {{"kind", "tabulated-density"}, {"y", t.y}, {"density", t.density}};
        }
    }
    return {{"kind", "none"}};
}

inline JumpMeasure jump_measure_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") return JumpMeasure::none();
    if (kind == "finite-atoms") {
        std::vector<JumpAtom> atoms;
        for (const auto& a : j.at("atoms"))
            atoms.push_back({a.at("x").get<double>(), a.at("rate").get<double>()});
        return JumpMeasure::atoms(std::move(atoms));
    }
    if (kind == "stable-density") {
        StableJump s;
        s.index = j.at("index").get<double>();
        s.scale = j.at("scale").get<double>();
        s.weight_left = j.value("weight_left", 0.5);
        s.weight_right = j.value("weight_right", 0.5);
        s.truncation = j.value("truncation", 0.0);
        return JumpMeasure::stable(s);
    }
    if (kind == "tabulated-density") {
        TabulatedJump t;
        t.y = j.at("y").get<std::vector<double>>();
        t.density = j.at("density").get<std::vector<double>>();
        return JumpMeasure::tabulated(std::move(t));
    }
    throw ConfigError("unknown jump measure kind: " + kind);
}

inline json to_json(const LevyTriplet& t) {
    return {{"alpha2", t.alpha2}, {"gamma", t.gamma}, {"nu", to_json(t.nu)}};
}

inline LevyTriplet triplet_from_json(const json& j) {
    LevyTriplet t;
    t.alpha2 = j.at("alpha2").get<double>();
    t.gamma = j.at("gamma").get<double>();
    t.nu = jump_measure_from_json(j.at("nu"));
    t.validate();
    return t;
}

inline json to_json(const DensitySpec& d) {
    switch (d.kind()) {
        case DensitySpec::Kind::gaussian: {
            const auto& g = d.gaussian_params();
            return {{"kind", "gaussian"}, {"mean", g.mean}, {"variance", g.variance}};
        }
        case DensitySpec::Kind::gaussian_mixture: {
            json comps = json::array();
            for (const auto& c : d.mixture_params())
                comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
            return {{"kind", "gaussian-mixture"}, {"components", comps}};
        }
        case DensitySpec::Kind::laplace: {
            const auto& l = d.laplace_params();
            return {{"kind", "laplace"}, {"mean", l.mean}, {"scale", l.scale}};
        }
        case DensitySpec::Kind::stable_marginal: {
            const auto& s = d.stable_params();
            return {{"kind", "stable-marginal"}, {"index", s.index}, {"scale", s.scale},
                    {"time", s.time}};
        }
        case DensitySpec::Kind::tabulated: {
            const auto& t = d.tabulated_params();
            return {{"kind", "tabulated"}, {"x", t.x}, {"h", t.h}};
        }
    }
    throw ConfigError("unserializable density");
}

/// Two-column CSV (x, h), header row optional.
inline std::pair<std::vector<double>, std::vector<double>> read_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open density CSV: " + path);
    std::vector<double> xs, hs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        try {
            xs.push_back(std::stod(a));
            hs.push_back(std::stod(b));
        } catch (...) {
            continue;  // header row
        }
    }
    return {xs, hs};
}

inline DensitySpec density_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian")
        return DensitySpec::gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
    if (kind == "gaussian-mixture") {
        std::vector<MixtureComponent> comps;
        for (const auto& c : j.at("components"))
            comps.push_back({c.at("weight").get<double>(), c.at("mean").get<double>(),
                             c.at("variance").get<double>()});
        return DensitySpec::gaussian_mixture(std::move(comps));
    }
    if (kind == "laplace")
        return DensitySpec::laplace(j.at("mean").get<double>(), j.at("scale").get<double>());
    if (kind == "stable-marginal")
        return DensitySpec::stable_marginal(j.at("index").get<double>(), j.at("scale").get<double>(),
                                            j.at("time").get<double>());
    if (kind == "tabulated") {
        if (j.contains("csv")) {
            auto [xs, hs] = read_density_csv(j.at("csv").get<std::string>());
            return DensitySpec::tabulated(std::move(xs), std::move(hs));
        }
        return DensitySpec::tabulated(j.at("x").get<std::vector<double>>(),
                                      j.at("h").get<std::vector<double>>());
    }
    throw ConfigError("unknown density kind: " + kind);
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    LevyTriplet triplet;
    DensitySpec h0 = DensitySpec::gaussian(0, 1);
    DensitySpec h1 = DensitySpec::gaussian(0, 1);
    GridParams grid;
    PathConfig path;
    std::size_t n_paths = 100000;
    std::vector<double> u_probe;
    std::vector<double> s_probe;
    int workers = 1;
    double epsilon = 0.0;           ///< optional regularization; 0 disables
    double t_max_config = 0.0;      ///< 0 means auto: 50 * integral of H
    std::string output_dir = "out";
};

inline json to_json(const RunConfig& c) {
    return {
        {"triplet", to_json(c.triplet)},
        {"pair", {{"h0", to_json(c.h0)}, {"h1", to_json(c.h1)}}},
        {"grid",
         {{"extent", c.grid.extent},
          {"points_log2", c.grid.points_log2},
          {"xi_max", c.grid.xi_max},
          {"tail_tol", c.grid.tail_tol}}},
        {"path",
         {{"dt_base", c.path.dt_base},
          {"t_max", c.t_max_config},
          {"seed", c.path.seed},
          {"small_jump_cutoff", c.path.small_jump_cutoff}}},
        {"mc",
         {{"n_paths", c.n_paths},
          {"u_probe", c.u_probe},
          {"s_probe", c.s_probe},
          {"workers", c.workers}}},
        {"epsilon", c.epsilon},
        {"output_dir", c.output_dir},
    };
}

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    try {
        c.triplet = triplet_from_json(j.at("triplet"));
        c.h0 = density_from_json(j.at("pair").at("h0"));
        c.h1 = density_from_json(j.at("pair").at("h1"));
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            c.grid.extent = g.value("extent", 0.0);
            c.grid.points_log2 = g.value("points_log2", 12);
            c.grid.xi_max = g.value("xi_max", 0.0);
            c.grid.tail_tol = g.value("tail_tol", 1e-8);
        }
        if (j.contains("path")) {
            const auto& p = j.at("path");
            c.path.dt_base = p.value("dt_base", 1e-3);
            c.t_max_config = p.value("t_max", 0.0);
            c.path.seed = p.value("seed", std::uint64_t(1));
            c.path.small_jump_cutoff = p.value("small_jump_cutoff", 1e-3);
        }
        if (j.contains("mc")) {
            const auto& m = j.at("mc");
            c.n_paths = m.value("n_paths", std::size_t(100000));
            c.u_probe = m.value("u_probe", std::vector<double>{});
            c.s_probe = m.value("s_probe", std::vector<double>{});
            c.workers = m.value("workers", 1);
        }
        c.epsilon = j.value("epsilon", 0.0);
        c.output_dir = j.value("output_dir", std::string("out"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    c.grid.workers = c.workers;
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Report serialization and CSV emitters ('.' decimal, header row, LF endings)
// ---------------------------------------------------------------------------

inline json to_json(const Feasibility& f) {
    const char* v = f.verdict == Feasibility::Verdict::accepted    ? "accepted"
                    : f.verdict == Feasibility::Verdict::rejected ? "rejected"
                                                                   : "unverified";
    return {{"ratio_integrable", f.ratio_integrable},
            {"l1_ratio", f.l1_ratio},
            {"H_nonnegative", f.H_nonnegative},
            {"min_H", f.min_H},
            {"max_H", f.max_H},
            {"H_integrable", f.H_integrable},
            {"integral_H", f.integral_H},
            {"mean_gap", f.mean_gap},
            {"verdict", v},
            {"reason", f.reason}};
}

inline json to_json(const ProcessClass& c) {
    const char* tag = c.tag == ProcessClass::Tag::S      ? "S"
                      : c.tag == ProcessClass::Tag::Zero ? "0"
                                                          : "D";
    return {{"tag", tag},
            {"symmetric", c.evidence.symmetric},
            {"symmetry_residual", c.evidence.symmetry_residual},
            {"tail_integral", c.evidence.tail_integral},
            {"tail_converged", c.evidence.tail_converged},
            {"liminf_estimate", c.evidence.liminf_estimate},
            {"lattice_zeros", c.evidence.lattice_zeros},
            {"low_confidence", c.evidence.low_confidence}};
}

inline json to_json(const RegularityReport& r) {
    json items = json::array();
    for (const auto& it : r.items)
        items.push_back({{"name", it.name}, {"pass", it.pass}, {"measured", it.measured},
                         {"note", it.note}});
    return {{"all_pass", r.all_pass}, {"items", items}};
}

inline json to_json(const MCReport& r) {
    json dyn = json::array();
    for (const auto& d : r.dynkin)
        dyn.push_back({{"u", d.u},
                       {"residual_re", d.residual_re},
                       {"residual_im", d.residual_im},
                       {"se_re", d.se_re},
                       {"se_im", d.se_im}});
    json marg = json::array();
    for (const auto& m : r.marginals)
        marg.push_back({{"s", m.s}, {"ks", m.ks}, {"n", m.n}});
    return {{"n_paths", r.n_paths},
            {"seed", r.seed},
            {"epsilon", r.epsilon},
            {"mean_tau", r.mean_tau},
            {"se_tau", r.se_tau},
            {"integral_H", r.integral_H},
            {"ks_stat", r.ks_stat},
            {"wasserstein1", r.wasserstein1},
            {"dynkin", dyn},
            {"marginals", marg},
            {"n_censored", r.n_censored},
            {"n_exhausted", r.n_exhausted},
            {"n_offgrid", r.n_offgrid},
            {"censor_rate", r.censor_rate},
            {"valid", r.valid},
            {"max_identity_gap", r.max_identity_gap},
            {"mean_steps", r.mean_steps}};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);  // binary: keep LF endings everywhere
    if (!out) throw ConfigError("cannot write: " + path);
    out << text;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_solution_csv(const std::string& path, const PoissonSolution& sol) {
    std::string s = "x,H\n";
    for (std::size_t i = 0; i < sol.x.size(); ++i)
        s += fmt_double(sol.x[i]) + "," + fmt_double(sol.H[i]) + "\n";
    write_text(path, s);
}

inline void write_outcomes_csv(const std::string& path, const std::vector<PathRecord>& recs) {
    std::string s = "path_id,tau,L_tau,hit_rho,censored\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& o = recs[i].outcome;
        s += std::to_string(i) + "," + fmt_double(o.tau) + "," + fmt_double(o.L_tau) + "," +
             (o.hit_rho ? "1" : "0") + "," + (o.censored ? "1" : "0") + "\n";
    }
    write_text(path, s);
}

inline void write_path_csv(const std::string& path, const std::vector<SamplePath>& paths) {
    std::string s = "path_id,t,L,jump_flag\n";
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const auto& p = paths[k];
        for (std::size_t i = 0; i < p.times.size(); ++i)
            s += std::to_string(k) + "," + fmt_double(p.times[i]) + "," + fmt_double(p.states[i]) +
                 "," + std::to_string(int(p.jump_flags[i])) + "\n";
    }
    write_text(path, s);
}

/// Empirical CDF snapshot against the target CDF for external plotting.
inline void write_cdf_csv(const std::string& path, std::vector<double> samples,
                          const DensitySpec& target, std::size_t max_rows = 2048) {
    std::sort(samples.begin(), samples.end());
    std::string s = "x,F_empirical,F_target\n";
    const std::size_t n = samples.size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_rows);
    for (std::size_t i = 0; i < n; i += stride) {
        const double x = samples[i];
        s += fmt_double(x) + "," + fmt_double(double(i + 1) / double(n)) + "," +
             fmt_double(target.cdf(x)) + "\n";
    }
    write_text(path, s);
}

}  // namespace levysep
