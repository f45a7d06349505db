// End-to-end acceptance runs, one numbered criterion per invocation
// (no argument = all). Each criterion prints a PASS/FAIL line with the
// measured quantities and the binary exits with the failure count.
//
//   acceptance <n> [path-to-cli]
//
// The CLI path is only needed by criterion 11 (byte-identical reports).

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "levysep/io.hpp"
#include "levysep/pipeline.hpp"

using namespace levysep;

namespace {

int g_failures = 0;

void report(int crit, bool pass, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", crit, what.c_str());
    if (!pass) ++g_failures;
    std::fflush(stdout);
}

std::string fmt(double v) {
    char b[64];
    std::snprintf(b, sizeof(b), "%.6g", v);
    return b;
}

// --- shared fixtures ------------------------------------------------------

RunConfig bm_config() {
    RunConfig c;
    c.triplet = {1.0, 0.0, JumpMeasure::none()};
    c.h0 = DensitySpec::gaussian(0, 1);
    c.h1 = DensitySpec::gaussian(0, 2);
    c.path.dt_base = 1e-3;
    c.path.seed = 20260810;
    c.n_paths = 100000;
    c.u_probe = {0.5, 1.0, 2.0};
    c.s_probe = {0.5};
    c.workers = 8;
    return c;
}

RunConfig stable_config() {
    RunConfig c;
    c.triplet = {0.0, 0.0, JumpMeasure::stable({1.5, 1.0, 0.5, 0.5, 0.0})};
    c.h0 = DensitySpec::stable_marginal(1.5, 1.0, 1.0);
    c.h1 = DensitySpec::stable_marginal(1.5, 1.0, 2.0);
    // the pure-jump occupation quadrature carries an O(dt) constant, and the
    // power tails ask for a wide grid; both knobs are config, not code
    c.path.dt_base = 2.5e-4;
    c.path.seed = 1234;
    c.grid.extent = 60.0;
    c.grid.points_log2 = 13;
    c.n_paths = 100000;
    c.u_probe = {0.5, 1.0, 2.0};
    c.s_probe = {0.5};
    c.workers = 8;
    return c;
}

MCReport run_mc(const Pipeline& p) {
    const SpeedField field = p.make_field();
    IncrementSampler sampler(p.config().triplet, p.config().path.small_jump_cutoff);
    return run_embedding_mc(field, sampler, p.mc_config());
}

/// Forward transform of the solution including its decay models, so heavy
/// tails beyond the grid are represented rather than truncated away.
Complex solution_transform(const PoissonSolution& sol, double xi) {
    Complex hhat = 0;
    for (std::size_t j = 0; j < sol.x.size(); ++j) {
        const double w = (j == 0 || j + 1 == sol.x.size()) ? 0.5 : 1.0;
        hhat += w * sol.H[j] * detail::cis(xi * sol.x[j]);
    }
    hhat *= sol.dx;
    GriddedFunction tails(sol.x, sol.H, 1e-8 * std::max(sol.max_H, 1e-300));
    auto tail_part = [&](const TailModel& tm, int side) -> Complex {
        const double X = sol.extent;
        if (tm.kind == TailKind::exponential) {
            // int_X^inf c e^{-r(x-X)} e^{i s xi x} dx
            const double s = double(side);
            return tm.eval(X) * detail::cis(s * xi * X) / Complex(tm.rate, -s * xi);
        }
        if (tm.kind == TailKind::power) {
            // int_X^inf c (x/X)^{-p} e^{i s xi x} dx = c X J_1(s xi X, p - 1)
            const double s = double(side);
            return tm.eval(X) * X * detail::osc_power_tail(s * xi * X, tm.power - 1.0);
        }
        return {0.0, 0.0};
    };
    hhat += tail_part(tails.right_tail(), +1);
    hhat += tail_part(tails.left_tail(), -1);
    return hhat;
}

// --- criteria ---------------------------------------------------------------

void criterion_1() {
    Pipeline p(bm_config());
    const auto rep = run_mc(p);
    const double ks_crit = 1.36 / std::sqrt(double(rep.n_paths)) + 0.005;
    const bool mean_ok = std::abs(rep.mean_tau - 1.0) <= 3.0 * rep.se_tau;
    const bool ks_ok = rep.ks_stat <= ks_crit;
    report(1, mean_ok && ks_ok && rep.valid,
           "Brownian embedding: mean_tau=" + fmt(rep.mean_tau) + " (3SE=" + fmt(3 * rep.se_tau) +
               "), KS=" + fmt(rep.ks_stat) + " (<= " + fmt(ks_crit) +
               "), censor_rate=" + fmt(rep.censor_rate));
}

void criterion_2() {
    Pipeline p(stable_config());
    const auto rep = run_mc(p);
    const double ks_crit = 1.36 / std::sqrt(double(rep.n_paths)) + 0.01;
    const bool mean_ok = std::abs(rep.mean_tau - 1.0) <= 3.0 * rep.se_tau;
    const bool ks_ok = rep.ks_stat <= ks_crit;
    report(2, mean_ok && ks_ok && rep.valid,
           "stable embedding: mean_tau=" + fmt(rep.mean_tau) + " (3SE=" + fmt(3 * rep.se_tau) +
               "), KS=" + fmt(rep.ks_stat) + " (<= " + fmt(ks_crit) +
               "), censor_rate=" + fmt(rep.censor_rate));
}

void criterion_3() {
    bool all = true;
    std::string msg;
    struct Case {
        const char* name;
        RunConfig cfg;
        double tol;
    };
    RunConfig bm = bm_config();
    RunConfig st = stable_config();
    st.grid = GridParams{};  // the residual criterion speaks about defaults
    const Case cases[] = {{"BM", bm, 1e-4}, {"stable", st, 1e-3}};
    for (const auto& c : cases) {
        DensityPair pair(c.cfg.h0, c.cfg.h1);
        RatioFunction r(pair, CharExponent(c.cfg.triplet));
        const auto sol = solve_H(r, GridParams{});
        const double res = residual(sol, c.cfg.triplet, pair, 0.8, 1024);
        double fsup = 0;
        for (int k = 1; k <= 64; ++k) {
            const double xi = 0.05 * k;
            fsup = std::max(fsup,
                            std::abs(solution_transform(sol, xi) * eta_eval(c.cfg.triplet, xi) -
                                     pair.g_hat(xi)));
        }
        all = all && res <= c.tol && fsup <= c.tol;
        msg += std::string(c.name) + ": residual=" + fmt(res) + ", transform identity=" +
               fmt(fsup) + " (tol " + fmt(c.tol) + ")  ";
    }
    report(3, all, "Poisson residuals: " + msg);
}

void criterion_4() {
    RunConfig cfg = bm_config();
    DensityPair pair(cfg.h0, cfg.h1);
    CharExponent eta(cfg.triplet);
    RatioFunction r(pair, eta);
    const auto sol = solve_H(r, GridParams{});
    GriddedFunction Hf(sol.x, sol.H, 1e-8 * sol.max_H);
    bool decreasing = true, final_ok = true;
    double prev = detail::inf, last = 0;
    std::string msg = "resolvent gap sup:";
    for (double q : {1e-2, 1e-3, 1e-4}) {
        double sup = 0;
        for (int i = -8; i <= 8; ++i) {
            const double x = 0.5 * i;
            sup = std::max(sup, std::abs(-resolvent_oracle(pair, eta, q, x) - Hf(x)));
        }
        msg += " q=" + fmt(q) + " -> " + fmt(sup);
        decreasing = decreasing && sup < prev;
        prev = sup;
        last = sup;
    }
    final_ok = last <= 1e-3;
    msg += decreasing ? "  (strictly decreasing)" : "  (NOT decreasing)";
    if (!final_ok)
        msg += "; final value exceeds 1e-3: the gap is ~ sqrt(q/2) * integral(H) "
               "= 7.07e-3 at q=1e-4 for any pair embedding in unit mean time";
    report(4, decreasing && final_ok, msg);
}

void criterion_5() {
    bool all = true;
    std::string msg;
    {
        RunConfig cfg = bm_config();
        std::swap(cfg.h0, cfg.h1);  // reversed pair
        Pipeline p(cfg);
        const auto& f = p.feasibility();
        const bool ok = p.exit_code() == 2 && !f.H_nonnegative &&
                        f.min_H < -0.01 * std::max(f.max_H, 0.0);
        all = all && ok;
        msg += "reversed pair: verdict=" + f.reason + ", min_H=" + fmt(f.min_H) +
               ", max_H=" + fmt(f.max_H) + "; ";
    }
    {
        RunConfig cfg = bm_config();
        cfg.h1 = DensitySpec::gaussian(1, 1);  // unequal means
        Pipeline p(cfg);
        const bool ok = p.exit_code() == 2 &&
                        p.feasibility().reason.find("singular") != std::string::npos;
        all = all && ok;
        msg += "unequal means: " + p.feasibility().reason;
    }
    report(5, all, "necessity gate: " + msg);
}

void criterion_6() {
    Pipeline p(bm_config());
    const auto rep = run_mc(p);
    bool all = true;
    std::string msg = "transform residuals at N=" + std::to_string(rep.n_paths) + ":";
    for (const auto& d : rep.dynkin) {
        const bool ok =
            std::abs(d.residual_re) <= 3 * d.se_re && std::abs(d.residual_im) <= 3 * d.se_im;
        all = all && ok;
        msg += " u=" + fmt(d.u) + ": re " + fmt(d.residual_re) + "/" + fmt(3 * d.se_re) + " im " +
               fmt(d.residual_im) + "/" + fmt(3 * d.se_im) + ";";
    }
    report(6, all, msg);
}

void criterion_7() {
    Pipeline p(bm_config());
    const auto rep = run_mc(p);
    const auto& m = rep.marginals.front();
    const double crit = 1.36 / std::sqrt(double(m.n)) + 0.005;
    report(7, m.ks <= crit,
           "intermediate marginal s=0.5: KS=" + fmt(m.ks) + " (<= " + fmt(crit) + ", n=" +
               std::to_string(m.n) + ")");
}

/// Frozen piecewise-constant path for the exact pathwise algebra checks.
struct FixedStream {
    std::vector<Segment> segs;
    std::size_t i = 0;
    double state() const { return i < segs.size() ? segs[i].x0 : segs.back().x1; }
    long steps() const { return long(i); }
    Segment next() { return segs[std::min(i++, segs.size() - 1)]; }
};

FixedStream frozen_walk(std::uint64_t seed, std::size_t n, double dt) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    FixedStream fs;
    double x = unif(rng);
    for (std::size_t k = 0; k < n; ++k) {
        const double nx = unif(rng);
        fs.segs.push_back({double(k) * dt, double(k + 1) * dt, x, k + 1 < n ? nx : x, false,
                           false, 0.0});
        x = nx;
    }
    return fs;
}

void criterion_8() {
    Pipeline p(bm_config());
    const SpeedField field = p.make_field();
    IncrementSampler sampler(p.config().triplet);
    PathConfig pc = p.config().path;
    pc.t_max = p.t_max();

    // (a) the schedule identity along 100 audited paths
    EmbeddingClock clock(field);
    double worst = 0;
    for (std::uint64_t pid = 0; pid < 100; ++pid) {
        SegmentStream s(sampler, field.pair().h0(), pc, pid);
        worst = std::max(worst, clock.run(s, pc.t_max).identity_gap);
    }
    const bool id_ok = worst < 1e-10;

    // (b) schedule level 1 is the stopping time, bitwise, per seed
    bool bitwise = true;
    for (std::uint64_t pid = 0; pid < 25; ++pid) {
        SegmentStream s1(sampler, field.pair().h0(), pc, pid);
        SegmentStream s2(sampler, field.pair().h0(), pc, pid);
        const auto a = delta_schedule(s1, field, 1.0, pc.t_max);
        const auto b = stop_time(s2, field, pc.t_max);
        bitwise = bitwise && a.time == b.tau && a.state == b.L_tau;
    }

    // (c) epsilon decomposition on frozen synthetic paths
    const double eps = 0.1;
    const double C = field.integral_H();
    const SpeedField feps = field.regularize(eps);
    double worst_dec = 0;
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        auto fa = frozen_walk(seed, 400, 0.005);
        auto fb = fa;
        ClockState sb, se;
        for (std::size_t k = 0; k < fa.segs.size(); ++k) {
            step_clock(sb, fa.segs[k], field);
            step_clock(se, fb.segs[k], feps);
            if (sb.exhausted || se.exhausted) break;
            const double want =
                progress_identity(sb) + eps / ((1 - eps) * C) * std::exp(sb.G) * sb.wtime;
            worst_dec = std::max(worst_dec, std::abs(progress_identity(se) - want));
        }
    }
    const bool dec_ok = worst_dec < 1e-8;

    report(8, id_ok && bitwise && dec_ok,
           "pathwise algebra: identity gap=" + fmt(worst) + " (<1e-10), schedule(1)==tau " +
               (bitwise ? "bitwise" : "MISMATCH") + ", eps-decomposition gap=" + fmt(worst_dec) +
               " (<1e-8)");
}

void criterion_9() {
    Pipeline p(bm_config());
    const SpeedField base = p.make_field();
    const SpeedField f01 = base.regularize(0.1);
    const SpeedField f02 = base.regularize(0.2);
    IncrementSampler sampler(p.config().triplet);
    PathConfig pc = p.config().path;
    pc.t_max = p.t_max();

    // pathwise ordering on shared seeds
    bool ordered = true;
    for (std::uint64_t pid = 0; pid < 1000; ++pid) {
        SegmentStream s0(sampler, base.pair().h0(), pc, pid);
        SegmentStream s1(sampler, base.pair().h0(), pc, pid);
        SegmentStream s2(sampler, base.pair().h0(), pc, pid);
        const double t0 = stop_time(s0, base, pc.t_max).tau;
        const double t1 = stop_time(s1, f01, pc.t_max).tau;
        const double t2 = stop_time(s2, f02, pc.t_max).tau;
        ordered = ordered && t2 <= t1 + 1e-12 && t1 <= t0 + 1e-12;
    }

    // mean of the regularized stopping time against (1 - eps) * integral H,
    // each regularized system started from its own shifted initial law
    bool means_ok = true;
    std::string mmsg;
    for (double eps : {0.1, 0.2}) {
        RunConfig cfg = p.config();
        cfg.epsilon = eps;
        cfg.n_paths = 1000;
        cfg.u_probe.clear();
        cfg.s_probe.clear();
        Pipeline pe(cfg);
        const auto rep = run_mc(pe);
        const double want = (1.0 - eps) * pe.solution().integral_H;
        const bool ok = std::abs(rep.mean_tau - want) <= 3.0 * rep.se_tau;
        means_ok = means_ok && ok;
        mmsg += " eps=" + fmt(eps) + ": mean=" + fmt(rep.mean_tau) + " vs " + fmt(want) +
                " (3SE=" + fmt(3 * rep.se_tau) + ");";
    }
    report(9, ordered && means_ok,
           std::string("regularization: pathwise ordering ") +
               (ordered ? "holds on 1000 shared-seed paths" : "VIOLATED") + ";" + mmsg);
}

void criterion_10() {
    struct Case {
        const char* name;
        LevyTriplet t;
        double dt;
    };
    const Case cases[] = {
        {"BM", {1.0, 0.0, JumpMeasure::none()}, 0.01},
        {"compound Poisson", {0.0, 0.0, JumpMeasure::atoms({{2.0, 1.0}})}, 0.05},
        {"stable", {0.0, 0.0, JumpMeasure::stable({1.5, 1.0, 0.5, 0.5, 0.0})}, 0.01}};
    const int n = 100000;
    bool all = true;
    std::string msg = "increment transforms vs exp(dt eta):";
    for (const auto& c : cases) {
        IncrementSampler sampler(c.t);
        auto rng = make_path_rng(424242, 0);
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) xs[i] = sampler.draw(c.dt, rng).dx;
        double worst = 0;
        for (double u : {0.5, 1.0, 2.0}) {
            Complex ecf = 0;
            for (double x : xs) ecf += detail::cis(u * x);
            ecf /= double(n);
            worst = std::max(worst, std::abs(ecf - std::exp(c.dt * eta_eval(c.t, u))));
        }
        const bool ok = worst <= 3.0 / std::sqrt(double(n));
        all = all && ok;
        msg += std::string(" ") + c.name + "=" + fmt(worst) + (ok ? "" : " (exceeds)") + ";";
    }
    report(10, all, msg + " bound " + fmt(3.0 / std::sqrt(double(n))));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_11(const char* cli) {
    if (!cli) {
        report(11, false, "determinism: CLI path not supplied");
        return;
    }
    namespace fs = std::filesystem;
    const fs::path work = fs::temp_directory_path() / "levysep_acceptance_11";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg_path = work / "config.json";
    {
        RunConfig cfg = bm_config();
        cfg.n_paths = 10000;
        cfg.workers = 4;
        cfg.output_dir = (work / "a").string();
        std::ofstream out(cfg_path);
        out << to_json(cfg).dump(2);
    }
    auto run = [&](const std::string& outdir, const std::string& extra) {
        const std::string cmd = std::string(cli) + " embed -c " + cfg_path.string() + " -o " +
                                outdir + " " + extra + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int r1 = run((work / "a").string(), "");
    const int r2 = run((work / "b").string(), "");
    const std::string ja = slurp((work / "a" / "report.json").string());
    const std::string jb = slurp((work / "b" / "report.json").string());
    // reports embed the resolved config; outputs land elsewhere, so compare
    // with the output_dir leaf aligned
    std::string jb_fixed = jb;
    const std::string from = (work / "b").string(), to = (work / "a").string();
    for (std::size_t pos = 0; (pos = jb_fixed.find(from, pos)) != std::string::npos;)
        jb_fixed.replace(pos, from.size(), to);
    const bool bytes_ok = r1 == 0 && r2 == 0 && !ja.empty() && ja == jb_fixed;

    double means[3] = {0, 0, 0};
    int k = 0;
    bool parse_ok = true;
    for (int w : {1, 4, 8}) {
        const std::string outdir = (work / ("w" + std::to_string(w))).string();
        run(outdir, "--set mc.workers=" + std::to_string(w));
        try {
            json j = json::parse(slurp(outdir + "/report.json"));
            means[k++] = j["report"]["mean_tau"].get<double>();
        } catch (...) {
            parse_ok = false;
        }
    }
    const bool workers_ok = parse_ok && means[0] == means[1] && means[1] == means[2];
    report(11, bytes_ok && workers_ok,
           std::string("determinism: reports ") + (bytes_ok ? "byte-identical" : "DIFFER") +
               "; mean_tau across workers {1,4,8}: " + fmt(means[0]) + "/" + fmt(means[1]) + "/" +
               fmt(means[2]) + (workers_ok ? " (identical)" : " (DIFFER)"));
}

}  // namespace

int main(int argc, char** argv) {
    const int which = argc > 1 ? std::atoi(argv[1]) : 0;
    const char* cli = argc > 2 ? argv[2] : nullptr;
    auto want = [&](int n) { return which == 0 || which == n; };
    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();
    if (want(10)) criterion_10();
    if (want(11)) criterion_11(cli);
    return g_failures;
}
