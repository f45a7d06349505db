#pragma once

#include <memory>
#include <optional>
#include <string>

#include "levysep/density.hpp"
#include "levysep/embed.hpp"
#include "levysep/io.hpp"
#include "levysep/levy.hpp"
#include "levysep/pathsim.hpp"
#include "levysep/poisson.hpp"
#include "levysep/verify.hpp"

namespace levysep {

/// The classify -> check -> solve -> embed chain shared by the CLI
/// subcommands and the acceptance suite. Each stage caches its result;
/// infeasibility is captured as a verdict, not an escaping exception.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)), pair_(cfg_.h0, cfg_.h1) {
        eta_.emplace(cfg_.triplet);
        cls_ = classify(cfg_.triplet);
        regularity_ = check_regularity(pair_, cls_);
        moments_ = check_moments(pair_);
        try {
            ratio_.emplace(pair_, *eta_);
            sol_ = solve_H(*ratio_, cfg_.grid);
            feas_ = check_feasibility(*sol_, pair_, regularity_.all_pass);
        } catch (const FeasibilityBreached& e) {
            feas_ = Feasibility::from_breach(e);
        } catch (const TailNotIntegrable& e) {
            feas_ = Feasibility::from_tail(e);
        }
    }

    const RunConfig& config() const { return cfg_; }
    const DensityPair& pair() const { return pair_; }
    const CharExponent& exponent() const { return *eta_; }
    const ProcessClass& process_class() const { return cls_; }
    const RegularityReport& regularity() const { return regularity_; }
    const MomentReport& moments() const { return moments_; }
    const Feasibility& feasibility() const { return feas_; }
    bool solved() const { return sol_.has_value(); }
    const PoissonSolution& solution() const { return *sol_; }
    const RatioFunction& ratio() const { return *ratio_; }

    /// Effective horizon: 50x the expected stopping time unless pinned.
    /// Floored at 1 so degenerate pairs (zero expected time) stay runnable.
    double t_max() const {
        if (cfg_.t_max_config > 0) return cfg_.t_max_config;
        const double c = sol_ ? sol_->integral_H : 1.0;
        return std::max(50.0 * c, 1.0);
    }

    SpeedField make_field() const {
        SpeedField f = SpeedField::create(pair_, *sol_, feas_);
        if (cfg_.epsilon > 0.0) return f.regularize(cfg_.epsilon);
        return f;
    }

    MCConfig mc_config() const {
        MCConfig mc;
        mc.n_paths = cfg_.n_paths;
        mc.path = cfg_.path;
        mc.path.t_max = t_max();
        mc.u_probe = cfg_.u_probe;
        mc.s_probe = cfg_.s_probe;
        mc.workers = cfg_.workers;
        return mc.normalized();
    }

    json check_json() const {
        json j = {{"version", kVersionTag},
                  {"config", to_json(cfg_)},
                  {"classification", to_json(cls_)},
                  {"regularity", to_json(regularity_)},
                  {"moments",
                   {{"integral_g", moments_.integral_g}, {"integral_xg", moments_.integral_xg}}},
                  {"feasibility", to_json(feas_)}};
        if (sol_) {
            j["solution"] = {{"extent", sol_->extent},   {"dx", sol_->dx},
                             {"xi_max", sol_->xi_max},   {"dxi", sol_->dxi},
                             {"l1_ratio", sol_->l1_ratio}, {"tail_mass", sol_->tail_mass},
                             {"min_H", sol_->min_H},     {"max_H", sol_->max_H},
                             {"integral_H", sol_->integral_H}, {"psi0", sol_->psi0},
                             {"imag_residual", sol_->imag_residual}};
        }
        return j;
    }

    int exit_code() const {
        switch (feas_.verdict) {
            case Feasibility::Verdict::accepted: return 0;
            case Feasibility::Verdict::rejected: return 2;
            case Feasibility::Verdict::unverified: return 3;
        }
        return 1;
    }

private:
    RunConfig cfg_;
    DensityPair pair_;
    std::optional<CharExponent> eta_;
    ProcessClass cls_;
    RegularityReport regularity_;
    MomentReport moments_;
    std::optional<RatioFunction> ratio_;
    std::optional<PoissonSolution> sol_;
    Feasibility feas_;
};

}  // namespace levysep
