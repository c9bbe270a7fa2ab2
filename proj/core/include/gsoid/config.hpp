#pragma once

// Experiment configuration and its TOML form.
//
//   [topology]  kind, n, norm_factor and the kind-specific generator knobs
//   [model]     p_order, noise_std, zero_prob, max_coeff_draws
//   [hyper]     path, mu, gamma, lambda, adjacency_only, eta, epsilon, delta,
//               recursive_h, mask_rule, support_eps, exclude_diagonal
//   [grid]      mu, eta, gamma, lambda candidate lists, or full = true
//   [run]       t_total, burn_in, t_star, t_end, trials, seed, objective

#include "gsoid/debiaser.hpp"
#include "gsoid/identifier.hpp"
#include "gsoid/rng.hpp"
#include "gsoid/topology_gen.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsoid {

enum class Objective { MinSteadyStateSigma, MinFaPlusMiss };

std::string to_string(Objective o);
Objective objective_from_string(std::string_view s);
std::string to_string(MaskRule r);
MaskRule mask_rule_from_string(std::string_view s);
TopologyKind topology_kind_from_string(std::string_view s);

/// Candidate values per hyperparameter. Each mu tuple is drawn from
/// mu_values with mu_1 >= mu_2 >= ... >= mu_P.
struct GridSpec {
    std::vector<double> mu_values;
    std::vector<double> eta_values;
    std::vector<double> gamma_values;
    std::vector<double> lambda_values;

    /// The full tuning lattice: mu, eta in (0,5] step 0.1, gamma in (0,2]
    /// step 0.1, lambda in (0.8,0.99] step 0.01.
    static GridSpec full();
    /// Same intervals with wider steps; the top of each interval is always kept.
    static GridSpec coarsened(double mu_step = 0.5, double eta_step = 0.5, double gamma_step = 0.25,
                              double lambda_step = 0.05);

    void validate() const;
};

struct GridPoint {
    std::vector<double> mu;
    double eta = 0.0;
    double gamma = 0.0;
    double lambda = 1.0;

    std::vector<double> tuple() const;  // mu..., eta, gamma, lambda
};

/// Grid points in lexicographic order of their tuple.
std::vector<GridPoint> enumerate_grid(const GridSpec& grid, int p_order);

struct ExperimentConfig {
    TopologySpec topology = TopologySpec::random(12);
    int p_order = 3;
    double noise_std = 1.0;
    double zero_prob = 0.25;
    int max_coeff_draws = 100;

    long t_total = 1100;
    long burn_in = 500;
    long t_star = 400;
    long t_end = 600;

    HyperParams hyper;
    DebiasOptions debias;
    StepsizeController stepsize;
    MaskRule mask_rule = MaskRule::Reachability;
    double support_eps = 1e-6;
    bool exclude_diagonal = true;

    std::optional<GridSpec> grid;
    int trials = 1;
    RngSeed seed{1};
    Objective objective = Objective::MinFaPlusMiss;

    /// Reference protocol for the given topology: N = 12, P = 3, 400 identify + 200 debias steps.
    static ExperimentConfig reference_protocol(TopologyKind kind);

    void validate() const;
    HyperParams hyper_at(const GridPoint& g) const;
    DebiasOptions debias_at(const GridPoint& g) const;
};

ExperimentConfig parse_config(std::string_view toml_text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolved config with every field spelled out; parse_config round-trips it.
std::string to_toml(const ExperimentConfig& cfg);

}  // namespace gsoid
