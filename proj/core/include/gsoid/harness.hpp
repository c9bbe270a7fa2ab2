#pragma once

// Seeded experiment pipeline: generate -> simulate -> identify -> debias ->
// metrics, plus grid search, aggregation and the output directory writers.
//
// Seeds: trial i uses trial_seed(base, i); inside a trial each stage draws
// from stage_seed(trial, stage) with the Stage values below.

#include "gsoid/config.hpp"
#include "gsoid/metrics.hpp"
#include "gsoid/var_sim.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gsoid {

enum Stage : std::uint64_t { kStageTopology = 1, kStageCoeffs = 2, kStageNoise = 3 };

/// Worker count: GSOID_THREADS if set and positive, else the hardware count.
unsigned worker_count();

/// Runs job(i) for i in [0, count) on at most `workers` threads. The first
/// failure by index is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job, unsigned workers = 0);

struct TrialData {
    RngSeed seed;
    GsoMatrix w;
    ArCoefficients coeffs;
    SignalStream stream;
    int coeff_draws = 1;
};

/// Generates the topology, draws stable AR coefficients and simulates.
TrialData prepare_trial(const ExperimentConfig& cfg, RngSeed trial);

struct InvariantCounts {
    long negative_splits = 0;   // entries < 0 in any split after a step
    long mask_violations = 0;   // non-zero Psi entries outside the mask
    long steps_checked = 0;
};

struct TrialResult {
    RngSeed seed;
    RecoveryReport report;
    Matrix w_true;
    Matrix w_star;   // after identification
    Matrix w_final;  // after debiasing
    Vector h_true;
    Vector h_final;
    long alg1_steps = 0;
    long armijo_failures = 0;
    InvariantCounts invariants;
};

struct TrialOptions {
    bool check_invariants = false;
    /// Stop after identification (enough for the sigma objective).
    bool identify_only = false;
};

TrialResult run_trial_on(const ExperimentConfig& cfg, const TrialData& data, const HyperParams& hp,
                         const DebiasOptions& debias, const TrialOptions& opts = {});
TrialResult run_trial(const ExperimentConfig& cfg, RngSeed trial, const TrialOptions& opts = {});

/// Objective value of one trial; NaN if undefined.
double trial_objective(Objective objective, const TrialResult& r);

struct SurfacePoint {
    GridPoint point;
    double objective = 0.0;  // mean over trials, NaN trials skipped
};

struct GridResult {
    GridPoint best;
    double best_objective = 0.0;
    std::vector<SurfacePoint> surface;  // enumeration order
};

/// Evaluates every grid point on the same `cfg.trials` realizations.
GridResult grid_search(const ExperimentConfig& cfg, unsigned workers = 0);

struct SummaryRow {
    std::string topology;
    int path = 1;
    std::size_t trials = 0;
    double p_fa = 0.0;
    double p_m = 0.0;
    double support_accuracy = 0.0;
    std::vector<double> sigma_trace;  // mean per step
    std::vector<double> zeta_trace;
    long phase_boundary = 0;
};

SummaryRow aggregate(const std::vector<RecoveryReport>& reports, std::string topology = "", int path = 1);

struct ExperimentResult {
    ExperimentConfig config;   // resolved, grid winner applied
    std::optional<GridResult> grid;
    std::vector<TrialResult> trials;
    SummaryRow summary;
};

/// Runs cfg.trials trials (after a grid search when cfg.grid is set).
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers = 0, bool search = true);

std::string report_json(const RecoveryReport& r);
std::string summary_json(const ExperimentResult& r);
std::string traces_csv(const SummaryRow& row);
std::string surface_csv(const ExperimentResult& r);

/// Writes config.toml, summary.json, traces.csv and surface.csv into dir.
void write_experiment_dir(const std::filesystem::path& dir, const ExperimentResult& r);

}  // namespace gsoid
