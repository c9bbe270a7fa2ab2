// gso-identify: command-line front end for the gsoid library.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure,
// 1 anything else (I/O).

#include "gsoid/checkpoint.hpp"
#include "gsoid/config.hpp"
#include "gsoid/debiaser.hpp"
#include "gsoid/errors.hpp"
#include "gsoid/harness.hpp"
#include "gsoid/identifier.hpp"
#include "gsoid/matrix_io.hpp"
#include "gsoid/metrics.hpp"
#include "gsoid/topology_gen.hpp"
#include "gsoid/var_sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace gsoid;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string csv_cell(double v) { return std::isnan(v) ? "" : format_shortest(v); }

void write_identify_trace(const std::string& path, const Algorithm1Result& r) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "t,sigma_t,zeta_t,nnz\n";
    for (std::size_t i = 0; i < r.sigma.size(); ++i) {
        out << (i + 1) << ',' << csv_cell(r.sigma[i]) << ',' << (i < r.zeta.size() ? csv_cell(r.zeta[i]) : "")
            << ',' << r.nnz[i] << '\n';
    }
}

void write_debias_trace(const std::string& path, long first, const Algorithm2Result& r) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "t,sigma_t,zeta_t\n";
    for (std::size_t i = 0; i < r.sigma.size(); ++i) {
        out << (first + static_cast<long>(i)) << ',' << csv_cell(r.sigma[i]) << ','
            << (i < r.zeta.size() ? csv_cell(r.zeta[i]) : "") << '\n';
    }
}

std::optional<Matrix> maybe_matrix(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return read_matrix_csv(path);
}

struct GenerateArgs {
    std::string kind = "random";
    int n = 12;
    std::uint64_t seed = 1;
    double norm_factor = 1.5;
    std::string out;
    std::string coeffs_out;
    int p_order = 3;
};

int cmd_generate(const GenerateArgs& a) {
    TopologySpec spec;
    switch (topology_kind_from_string(a.kind)) {
        case TopologyKind::Random: spec = TopologySpec::random(a.n); break;
        case TopologyKind::PowerLaw: spec = TopologySpec::power_law(a.n); break;
        default: spec = TopologySpec::sbm(a.n); break;
    }
    spec.norm_factor = a.norm_factor;
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const RngSeed seed{a.seed};
    const GsoMatrix w = gen_gso(spec, stage_seed(seed, kStageTopology));
    write_matrix_csv(a.out, w.entries);
    if (!a.coeffs_out.empty()) {
        // Same stability redraw as the experiment harness.
        const RngSeed base = stage_seed(seed, kStageCoeffs);
        for (int k = 0; k < ExperimentConfig{}.max_coeff_draws; ++k) {
            const auto coeffs = gen_ar_coeffs(a.p_order, stage_seed(base, static_cast<std::uint64_t>(k)));
            if (companion_spectral_radius(build_psi(w, coeffs)) < 1.0) {
                write_coeffs_csv(a.coeffs_out, coeffs);
                return 0;
            }
        }
        throw DegenerateInput("no stable coefficient draw for this topology");
    }
    return 0;
}

struct SimulateArgs {
    std::string w, coeffs, out;
    long t = 1100;
    long burn_in = 500;
    std::uint64_t seed = 1;
    double noise_std = 1.0;
};

int cmd_simulate(const SimulateArgs& a) {
    const GsoMatrix w(read_matrix_csv(a.w));
    const ArCoefficients coeffs = read_coeffs_csv(a.coeffs);
    SimulateOptions so;
    so.noise_std = a.noise_std;
    if (!(a.t > a.burn_in && a.burn_in >= 0)) throw ConfigError("need --t > --burn-in >= 0");
    const auto stream = simulate(w, coeffs, a.t, a.burn_in, RngSeed{a.seed}, so);
    write_signal_csv(a.out, stream);
    return 0;
}

struct IdentifyArgs {
    std::string x;
    int p_order = 3;
    int path = 1;
    std::vector<double> mu;
    double gamma = 0.0;
    double lambda = 0.99;
    long t_star = 400;
    std::string out_w, trace, checkpoint, w_true;
    bool adjacency_only = false;
};

int cmd_identify(const IdentifyArgs& a) {
    const auto stream = read_signal_csv(a.x);
    HyperParams hp;
    hp.mu = a.mu.empty() ? std::vector<double>(static_cast<std::size_t>(a.p_order), 0.1) : a.mu;
    hp.gamma = a.gamma;
    hp.lambda = a.lambda;
    hp.path = a.path == 2 ? Path::Path2 : Path::Path1;
    hp.adjacency_only = a.adjacency_only;
    try {
        hp.validate(a.p_order);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (a.t_star < 1 || a.t_star > static_cast<long>(stream.size())) {
        throw ConfigError("--t-star must be in [1, " + std::to_string(stream.size()) + "]");
    }
    Algorithm1Options opts;
    opts.w_true = maybe_matrix(a.w_true);
    const auto r = run_algorithm1(stream, hp, StepsizeController{}, a.t_star, opts);
    write_matrix_csv(a.out_w, r.w_star);
    if (!a.trace.empty()) write_identify_trace(a.trace, r);
    if (!a.checkpoint.empty()) write_checkpoint(a.checkpoint, Checkpoint{r.state, hp, r.w_star});
    return 0;
}

struct DebiasArgs {
    std::string resume, x, out_w, out_h, trace, w_true;
    long from = 0;
    long to = 0;
    double delta = 0.0;
    double eta = 0.0;
    double epsilon = 0.1;
    std::optional<double> lambda;
    std::string mask_rule = "reachability";
    double support_eps = 1e-6;
    bool recursive_h = false;
};

int cmd_debias(const DebiasArgs& a) {
    const Checkpoint cp = read_checkpoint(a.resume);
    const auto stream = read_signal_csv(a.x);
    if (stream.n != cp.state.n) throw ConfigError("signal has " + std::to_string(stream.n) + " columns, checkpoint n = " +
                                                  std::to_string(cp.state.n));
    if (a.from != cp.state.t + 1) {
        throw ConfigError("--from must be " + std::to_string(cp.state.t + 1) + " to continue the checkpoint");
    }
    const long last = a.to > 0 ? a.to : static_cast<long>(stream.size());
    if (last < a.from || last > static_cast<long>(stream.size())) throw ConfigError("--to outside the signal");

    DebiasOptions opts;
    opts.lambda = a.lambda.value_or(cp.hyper.lambda);
    opts.eta = a.eta;
    opts.epsilon = a.epsilon;
    opts.delta = a.delta;
    opts.recursive_h = a.recursive_h;
    const auto mask = build_support_mask(cp.w_star, cp.state.p_order, a.support_eps, mask_rule_from_string(a.mask_rule));

    Algorithm2Options run;
    run.w_true = maybe_matrix(a.w_true);
    const auto r = run_algorithm2(cp.state, stream, a.from, last, mask, opts, StepsizeController{}, run);
    write_matrix_csv(a.out_w, r.w_hat);
    if (!a.out_h.empty()) write_coeffs_csv(a.out_h, ArCoefficients::unflatten(r.h_hat, cp.state.p_order));
    if (!a.trace.empty()) write_debias_trace(a.trace, a.from, r);
    return 0;
}

struct ExperimentArgs {
    std::string config, out;
    bool full_grid = false;
    bool no_search = false;
};

int cmd_experiment(const ExperimentArgs& a, bool require_grid) {
    ExperimentConfig cfg = load_config(a.config);
    if (a.full_grid) cfg.grid = GridSpec::full();
    if (require_grid && !cfg.grid) throw ConfigError("grid-search needs a [grid] section or --full-grid");
    const auto result = run_experiment(cfg, worker_count(), require_grid || !a.no_search);
    write_experiment_dir(a.out, result);
    std::cout << "p_fa " << format_shortest(result.summary.p_fa) << "  p_m " << format_shortest(result.summary.p_m)
              << "  trials " << result.summary.trials << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online graph shift operator identification"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Draw a random graph shift operator");
    g->add_option("--kind", gen.kind, "random | powerlaw | sbm")->check(CLI::IsMember({"random", "powerlaw", "sbm"}));
    g->add_option("--n", gen.n, "Number of vertices");
    g->add_option("--seed", gen.seed, "Base seed");
    g->add_option("--norm-factor", gen.norm_factor, "Spectral radius after normalization");
    g->add_option("--out", gen.out, "Output .mat.csv")->required();
    g->add_option("--coeffs-out", gen.coeffs_out, "Also draw stable filter taps into this CSV");
    g->add_option("--p", gen.p_order, "AR order for --coeffs-out");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate the vertex-time AR process");
    s->add_option("--w", sim.w, "GSO .mat.csv")->required();
    s->add_option("--coeffs", sim.coeffs, "Coefficient CSV")->required();
    s->add_option("--t", sim.t, "Total samples, burn-in included");
    s->add_option("--burn-in", sim.burn_in, "Samples discarded");
    s->add_option("--seed", sim.seed, "Noise seed");
    s->add_option("--noise-std", sim.noise_std, "Innovation standard deviation");
    s->add_option("--out", sim.out, "Signal CSV")->required();

    IdentifyArgs id;
    auto* i = app.add_subcommand("identify", "Run the online identifier up to t*");
    i->add_option("--x", id.x, "Signal CSV")->required();
    i->add_option("--p", id.p_order, "AR order");
    i->add_option("--path", id.path, "1 or 2")->check(CLI::IsMember({1, 2}));
    i->add_option("--mu", id.mu, "Comma-separated mu_1..mu_P")->delimiter(',');
    i->add_option("--gamma", id.gamma, "Commutator weight");
    i->add_option("--lambda", id.lambda, "Forgetting factor");
    i->add_option("--t-star", id.t_star, "Samples to consume");
    i->add_flag("--adjacency-only", id.adjacency_only, "Non-negative estimates only");
    i->add_option("--out-w", id.out_w, "Estimated W .mat.csv")->required();
    i->add_option("--trace", id.trace, "Trace CSV (t, sigma_t, zeta_t, nnz)");
    i->add_option("--checkpoint", id.checkpoint, "Write identifier state for debias --resume");
    i->add_option("--w-true", id.w_true, "True W for the zeta trace");

    DebiasArgs db;
    auto* d = app.add_subcommand("debias", "Debias on the identified support and estimate the taps");
    d->add_option("--resume", db.resume, "Checkpoint from identify")->required();
    d->add_option("--x", db.x, "Signal CSV")->required();
    d->add_option("--from", db.from, "First sample (checkpoint t + 1)")->required();
    d->add_option("--to", db.to, "Last sample (default: end of signal)");
    d->add_option("--delta", db.delta, "Stop once |e_t| < delta");
    d->add_option("--eta", db.eta, "Attractor weight");
    d->add_option("--epsilon", db.epsilon, "Attractor regularizer");
    d->add_option("--lambda", db.lambda, "Forgetting factor (default: checkpoint value)");
    d->add_option("--mask-rule", db.mask_rule, "reachability | first_block")
        ->check(CLI::IsMember({"reachability", "first_block"}));
    d->add_option("--support-eps", db.support_eps, "Relative support threshold");
    d->add_flag("--recursive-h", db.recursive_h, "Use the recursive tap update");
    d->add_option("--out-w", db.out_w, "Debiased W .mat.csv")->required();
    d->add_option("--out-h", db.out_h, "Tap CSV");
    d->add_option("--trace", db.trace, "Trace CSV (t, sigma_t, zeta_t)");
    d->add_option("--w-true", db.w_true, "True W for the zeta trace");

    ExperimentArgs ex;
    auto* e = app.add_subcommand("run-experiment", "Run a configured experiment");
    e->add_option("--config", ex.config, "Experiment TOML")->required();
    e->add_option("--out", ex.out, "Output directory")->required();
    e->add_flag("--full-grid", ex.full_grid, "Search the full tuning lattice");
    e->add_flag("--no-search", ex.no_search, "Use [hyper] as given even if [grid] is present");

    ExperimentArgs gs;
    auto* gsc = app.add_subcommand("grid-search", "Tune hyperparameters, then run the experiment");
    gsc->add_option("--config", gs.config, "Experiment TOML")->required();
    gsc->add_option("--out", gs.out, "Output directory")->required();
    gsc->add_flag("--full-grid", gs.full_grid, "Search the full tuning lattice");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (g->parsed()) return cmd_generate(gen);
        if (s->parsed()) return cmd_simulate(sim);
        if (i->parsed()) return cmd_identify(id);
        if (d->parsed()) return cmd_debias(db);
        if (e->parsed()) return cmd_experiment(ex, false);
        if (gsc->parsed()) return cmd_experiment(gs, true);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& err) {
        std::cerr << "invalid input: " << err.what() << "\n";
        return kExitConfig;
    } catch (const InstabilityError& err) {
        std::cerr << "numeric failure at t = " << err.time_index() << ": " << err.what() << "\n";
        return kExitNumeric;
    } catch (const DegenerateInput& err) {
        std::cerr << "numeric failure: " << err.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
