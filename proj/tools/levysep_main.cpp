// Batch driver for the embedding pipeline: classify -> check -> solve ->
// simulate/embed -> verify, with a single JSON config and leaf overrides.
//
// Exit codes: 0 accepted/ok, 2 feasibility rejected, 3 conditions unverified,
// 64 config/usage errors, 1 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "levysep/io.hpp"
#include "levysep/pipeline.hpp"

namespace fs = std::filesystem;
using namespace levysep;

namespace {

json parse_override_value(const std::string& raw) {
    try {
        return json::parse(raw);
    } catch (...) {
        return json(raw);  // bare string
    }
}

RunConfig load_with_overrides(const std::string& config_path,
                              const std::vector<std::string>& sets) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key.path=value: " + kv);
        std::string key = "/" + kv.substr(0, eq);
        for (auto& c : key)
            if (c == '.') c = '/';
        try {
            j[json::json_pointer(key)] = parse_override_value(kv.substr(eq + 1));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("--set failed for ") + kv + ": " + e.what());
        }
    }
    return config_from_json(j);
}

void ensure_outdir(const RunConfig& cfg) { fs::create_directories(cfg.output_dir); }

int cmd_check(const RunConfig& cfg) {
    Pipeline p(cfg);
    ensure_outdir(cfg);
    const std::string text = p.check_json().dump(2) + "\n";
    write_text(cfg.output_dir + "/feasibility.json", text);
    std::cout << text;
    return p.exit_code();
}

int cmd_solve(const RunConfig& cfg) {
    Pipeline p(cfg);
    ensure_outdir(cfg);
    if (!p.solved()) {
        const std::string text = p.check_json().dump(2) + "\n";
        write_text(cfg.output_dir + "/feasibility.json", text);
        std::cout << text;
        return p.exit_code();
    }
    write_solution_csv(cfg.output_dir + "/H.csv", p.solution());
    json j = p.check_json();
    j["solution"]["residual_sup"] = residual(p.solution(), cfg.triplet, p.pair(), 0.8, 257);
    const auto lip = lipschitz_diag(p.ratio());
    j["solution"]["lipschitz"] = {{"value", lip.value}, {"established", lip.established}};
    write_text(cfg.output_dir + "/diagnostics.json", j.dump(2) + "\n");
    std::cout << "wrote " << cfg.output_dir << "/H.csv (" << p.solution().x.size() << " rows)\n";
    return p.exit_code();
}

int cmd_simulate(const RunConfig& cfg) {
    ensure_outdir(cfg);
    IncrementSampler sampler(cfg.triplet, cfg.path.small_jump_cutoff);
    PathConfig pc = cfg.path;
    if (cfg.t_max_config > 0) pc.t_max = cfg.t_max_config;
    std::vector<SamplePath> paths;
    const std::size_t n = std::min<std::size_t>(cfg.n_paths, 64);  // dumps are for debugging
    for (std::size_t i = 0; i < n; ++i)
        paths.push_back(simulate_path(sampler, cfg.h0, pc, i));
    write_path_csv(cfg.output_dir + "/paths.csv", paths);
    std::cout << "wrote " << cfg.output_dir << "/paths.csv (" << n << " paths)\n";
    return 0;
}

json embed_report(const Pipeline& p, const MCReport& rep) {
    json j = {{"version", kVersionTag},
              {"config", to_json(p.config())},
              {"t_max", p.t_max()},
              {"feasibility", to_json(p.feasibility())},
              {"report", to_json(rep)}};
    return j;
}

int cmd_embed(const RunConfig& cfg, bool full_verify) {
    Pipeline p(cfg);
    ensure_outdir(cfg);
    if (!p.feasibility().accepted()) {
        const std::string text = p.check_json().dump(2) + "\n";
        write_text(cfg.output_dir + "/feasibility.json", text);
        std::cout << text;
        return p.exit_code();
    }
    const SpeedField field = p.make_field();
    IncrementSampler sampler(cfg.triplet, cfg.path.small_jump_cutoff);
    const MCConfig mc = p.mc_config();
    const auto recs = collect_paths(field, sampler, mc);
    const MCReport rep = aggregate_report(field, sampler, mc, recs);
    write_outcomes_csv(cfg.output_dir + "/outcomes.csv", recs);
    json j = embed_report(p, rep);
    if (full_verify) {
        std::vector<double> l_tau;
        for (const auto& r : recs)
            if (!r.outcome.censored) l_tau.push_back(r.outcome.L_tau);
        write_cdf_csv(cfg.output_dir + "/cdf.csv", l_tau, p.pair().h1());
        // weak-form residuals on a small bank of smooth bumps
        json fp = json::array();
        const double w = 2.0 * p.pair().h0().sigma_width();
        for (double c : {-w, 0.0, w}) {
            auto bump_f = [c, w](double x) {
                const double z = (x - c) / w;
                return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
            };
            auto bump_df = [c, w, bump_f](double x) {
                const double z = (x - c) / w;
                if (std::abs(z) >= 1.0) return 0.0;
                const double q = 1.0 - z * z;
                return bump_f(x) * (-2.0 * z / (q * q)) / w;
            };
            auto bump_d2f = [c, w, bump_f](double x) {
                const double z = (x - c) / w;
                if (std::abs(z) >= 1.0) return 0.0;
                const double q = 1.0 - z * z;
                const double a = -2.0 * z / (q * q);
                const double da = (-2.0 * q * q - (-2.0 * z) * 2.0 * q * (-2.0 * z)) /
                                  (q * q * q * q);
                return bump_f(x) * (a * a + da) / (w * w);
            };
            TwiceDifferentiable f{bump_f, bump_df, bump_d2f};
            const double r1 = fokker_planck_residual(field, cfg.triplet, f, c - w, c + w, 1.0);
            const double rh = fokker_planck_residual(field, cfg.triplet, f, c - w, c + w, 0.5);
            fp.push_back({{"center", c}, {"width", w}, {"residual_t1", r1}, {"residual_t05", rh}});
        }
        j["fokker_planck"] = fp;
    }
    write_text(cfg.output_dir + "/report.json", j.dump(2) + "\n");
    std::cout << j["report"].dump(2) << "\n";
    if (!rep.valid) {
        std::cerr << "warning: censoring rate " << rep.censor_rate
                  << " exceeds 1%; report flagged invalid\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skorokhod embedding toolkit for one-dimensional Levy processes"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::string outdir_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
        sub->add_option("--set", sets, "override a config leaf, e.g. --set path.seed=7");
        sub->add_option("-o,--output", outdir_override, "override output directory");
    };

    auto* c_check = app.add_subcommand("check", "decide feasibility of the embedding");
    auto* c_solve = app.add_subcommand("solve", "solve the Poisson equation and export H");
    auto* c_sim = app.add_subcommand("simulate", "dump raw sample paths to CSV");
    auto* c_embed = app.add_subcommand("embed", "run the stopping-time construction");
    auto* c_verify = app.add_subcommand("verify", "embed plus distributional verification");
    for (auto* s : {c_check, c_solve, c_sim, c_embed, c_verify}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 64;
    }

    try {
        RunConfig cfg = load_with_overrides(config_path, sets);
        if (!outdir_override.empty()) cfg.output_dir = outdir_override;
        if (c_check->parsed()) return cmd_check(cfg);
        if (c_solve->parsed()) return cmd_solve(cfg);
        if (c_sim->parsed()) return cmd_simulate(cfg);
        if (c_embed->parsed()) return cmd_embed(cfg, false);
        if (c_verify->parsed()) return cmd_embed(cfg, true);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
