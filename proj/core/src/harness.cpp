#include "gsoid/harness.hpp"

#include "gsoid/errors.hpp"
#include "gsoid/matrix_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace gsoid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string seed_tag(RngSeed s, const char* stage) {
    return "trial seed " + std::to_string(s.seed) + ", stage " + stage + ": ";
}

// Re-throws pipeline errors with the trial seed and stage prepended, keeping
// the error type so callers can still map it to an exit code.
template <typename F>
auto staged(RngSeed seed, const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InstabilityError& e) {
        throw InstabilityError(seed_tag(seed, stage) + e.what(), e.time_index());
    } catch (const DegenerateInput& e) {
        throw DegenerateInput(seed_tag(seed, stage) + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(seed_tag(seed, stage) + e.what());
    }
}

long count_negative(const Matrix& m) { return static_cast<long>((m.array() < 0.0).count()); }

}  // namespace

unsigned worker_count() {
    if (const char* env = std::getenv("GSOID_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job, unsigned workers) {
    if (count == 0) return;
    if (workers == 0) workers = worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

TrialData prepare_trial(const ExperimentConfig& cfg, RngSeed trial) {
    TrialData d;
    d.seed = trial;
    d.w = staged(trial, "generate", [&] { return gen_gso(cfg.topology, stage_seed(trial, kStageTopology)); });

    // Redraw the taps until the process is stable; attempt k uses its own
    // derived seed so the sequence is reproducible.
    const RngSeed coeff_base = stage_seed(trial, kStageCoeffs);
    bool stable = false;
    for (int k = 0; k < cfg.max_coeff_draws && !stable; ++k) {
        d.coeffs = gen_ar_coeffs(cfg.p_order, stage_seed(coeff_base, static_cast<std::uint64_t>(k)), cfg.zero_prob);
        d.coeff_draws = k + 1;
        stable = companion_spectral_radius(build_psi(d.w, d.coeffs)) < 1.0;
    }
    if (!stable) {
        throw DegenerateInput(seed_tag(trial, "coefficients") + "no stable draw in " +
                              std::to_string(cfg.max_coeff_draws) + " attempts");
    }

    SimulateOptions so;
    so.noise_std = cfg.noise_std;
    d.stream = staged(trial, "simulate", [&] {
        return simulate(d.w, d.coeffs, cfg.t_total, cfg.burn_in, stage_seed(trial, kStageNoise), so);
    });
    return d;
}

TrialResult run_trial_on(const ExperimentConfig& cfg, const TrialData& data, const HyperParams& hp,
                         const DebiasOptions& debias, const TrialOptions& opts) {
    TrialResult out;
    out.seed = data.seed;
    out.w_true = data.w.entries;
    out.h_true = data.coeffs.flatten();

    Algorithm1Options a1;
    a1.w_true = data.w.entries;
    if (opts.check_invariants) {
        a1.on_step = [&out](const IdentifierState& s) {
            out.invariants.negative_splits += count_negative(s.psi_plus) + count_negative(s.psi_minus) +
                                              count_negative(s.w_plus) + count_negative(s.w_minus);
            ++out.invariants.steps_checked;
        };
    }
    auto alg1 = staged(data.seed, "identify",
                       [&] { return run_algorithm1(data.stream, hp, cfg.stepsize, cfg.t_star, a1); });
    out.w_star = alg1.w_star;
    out.alg1_steps = alg1.steps;
    out.armijo_failures = alg1.state.armijo_failures;

    auto& rep = out.report;
    rep.sigma_trace = alg1.sigma;
    rep.zeta_trace = alg1.zeta;
    rep.phase_boundary = alg1.steps;

    const auto support = support_of(out.w_star, cfg.support_eps);
    if (opts.identify_only || !support.any()) {
        // An empty support leaves nothing to debias; the estimate stays zero.
        out.w_final = opts.identify_only ? out.w_star : Matrix::Zero(out.w_star.rows(), out.w_star.cols());
        out.h_final = Vector::Zero(coefficient_count(cfg.p_order));
        if (!opts.identify_only) {
            const auto tail = static_cast<std::size_t>(cfg.t_end - cfg.t_star);
            rep.sigma_trace.resize(rep.sigma_trace.size() + tail, kNaN);
            rep.zeta_trace.resize(rep.zeta_trace.size() + tail, 1.0);
        }
    } else {
        const SupportMask mask = build_support_mask(out.w_star, cfg.p_order, cfg.support_eps, cfg.mask_rule);
        Algorithm2Options a2;
        a2.w_true = data.w.entries;
        if (opts.check_invariants) {
            a2.on_step = [&out, &mask](const DebiasState& s) {
                out.invariants.mask_violations +=
                    static_cast<long>(((s.psi.array() != 0.0) && !mask.psi_mask.array()).count());
                ++out.invariants.steps_checked;
            };
        }
        auto alg2 = staged(data.seed, "debias", [&] {
            return run_algorithm2(alg1.state, data.stream, cfg.t_star + 1, cfg.t_end, mask, debias, cfg.stepsize,
                                  a2);
        });
        out.w_final = alg2.w_hat;
        out.h_final = alg2.h_hat;
        out.armijo_failures += alg2.state.armijo_failures;
        rep.sigma_trace.insert(rep.sigma_trace.end(), alg2.sigma.begin(), alg2.sigma.end());
        rep.zeta_trace.insert(rep.zeta_trace.end(), alg2.zeta.begin(), alg2.zeta.end());
    }

    const auto errs = support_errors(out.w_true, out.w_final, SupportOptions{cfg.support_eps, cfg.exclude_diagonal});
    rep.p_fa = errs.p_fa;
    rep.p_m = errs.p_m;
    rep.support_accuracy = errs.support_accuracy;
    return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, RngSeed trial, const TrialOptions& opts) {
    cfg.validate();
    const TrialData data = prepare_trial(cfg, trial);
    return run_trial_on(cfg, data, cfg.hyper, cfg.debias, opts);
}

double trial_objective(Objective objective, const TrialResult& r) {
    if (objective == Objective::MinFaPlusMiss) {
        if (!r.report.p_fa && !r.report.p_m) return kNaN;
        return r.report.p_fa.value_or(0.0) + r.report.p_m.value_or(0.0);
    }
    // Steady state: the last quarter of the identification steps.
    const long steps = r.alg1_steps;
    const long window = std::max(1L, steps / 4);
    const auto begin = r.report.sigma_trace.begin() + (steps - window);
    return nan_mean(std::vector<double>(begin, r.report.sigma_trace.begin() + steps));
}

GridResult grid_search(const ExperimentConfig& cfg, unsigned workers) {
    cfg.validate();
    if (!cfg.grid) throw InvalidArgument("grid_search: config has no grid");
    const auto points = enumerate_grid(*cfg.grid, cfg.p_order);
    if (points.empty()) throw InvalidArgument("grid_search: empty grid");

    const auto n_trials = static_cast<std::size_t>(cfg.trials);
    std::vector<TrialData> data(n_trials);
    parallel_for(n_trials, [&](std::size_t i) { data[i] = prepare_trial(cfg, trial_seed(cfg.seed, i)); }, workers);

    TrialOptions topts;
    topts.identify_only = cfg.objective == Objective::MinSteadyStateSigma;

    // Neither objective depends on eta (it only shapes the tap estimate), so
    // points differing in eta alone share one evaluation.
    std::vector<std::size_t> source(points.size());
    std::vector<std::size_t> unique;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& g = points[i];
        source[i] = i;
        for (std::size_t u = unique.size(); u-- > 0;) {
            const auto& h = points[unique[u]];
            if (h.mu == g.mu && h.gamma == g.gamma && h.lambda == g.lambda) {
                source[i] = unique[u];
                break;
            }
        }
        if (source[i] == i) unique.push_back(i);
    }

    std::vector<double> values(points.size() * n_trials, kNaN);
    parallel_for(
        unique.size() * n_trials,
        [&](std::size_t k) {
            const std::size_t i = unique[k / n_trials];
            const std::size_t trial = k % n_trials;
            const auto& g = points[i];
            const auto r = run_trial_on(cfg, data[trial], cfg.hyper_at(g), cfg.debias_at(g), topts);
            values[i * n_trials + trial] = trial_objective(cfg.objective, r);
        },
        workers);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (source[i] == i) continue;
        std::copy_n(values.begin() + static_cast<long>(source[i] * n_trials), n_trials,
                    values.begin() + static_cast<long>(i * n_trials));
    }

    GridResult out;
    out.surface.reserve(points.size());
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::vector<double> per(values.begin() + static_cast<long>(i * n_trials),
                                      values.begin() + static_cast<long>((i + 1) * n_trials));
        const double v = nan_mean(per);
        out.surface.push_back(SurfacePoint{points[i], v});
        // Strict improvement only: ties keep the lexicographically first point.
        if (!std::isnan(v) && (!best || v < out.surface[*best].objective)) best = i;
    }
    const std::size_t pick = best.value_or(0);
    out.best = out.surface[pick].point;
    out.best_objective = out.surface[pick].objective;
    return out;
}

SummaryRow aggregate(const std::vector<RecoveryReport>& reports, std::string topology, int path) {
    SummaryRow row;
    row.topology = std::move(topology);
    row.path = path;
    row.trials = reports.size();
    if (reports.empty()) return row;

    std::vector<double> fa, miss, acc;
    std::size_t len_sigma = 0, len_zeta = 0;
    for (const auto& r : reports) {
        fa.push_back(r.p_fa.value_or(kNaN));
        miss.push_back(r.p_m.value_or(kNaN));
        acc.push_back(r.support_accuracy);
        len_sigma = std::max(len_sigma, r.sigma_trace.size());
        len_zeta = std::max(len_zeta, r.zeta_trace.size());
    }
    row.p_fa = nan_mean(fa);
    row.p_m = nan_mean(miss);
    row.support_accuracy = nan_mean(acc);
    row.phase_boundary = reports.front().phase_boundary;

    auto mean_trace = [&](std::size_t len, auto member) {
        std::vector<double> out(len);
        std::vector<double> col;
        for (std::size_t t = 0; t < len; ++t) {
            col.clear();
            for (const auto& r : reports) {
                const auto& tr = r.*member;
                if (t < tr.size()) col.push_back(tr[t]);
            }
            out[t] = nan_mean(col);
        }
        return out;
    };
    row.sigma_trace = mean_trace(len_sigma, &RecoveryReport::sigma_trace);
    row.zeta_trace = mean_trace(len_zeta, &RecoveryReport::zeta_trace);
    return row;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers, bool search) {
    cfg.validate();
    ExperimentResult out;
    out.config = cfg;
    if (search && cfg.grid) {
        out.grid = grid_search(cfg, workers);
        out.config.hyper = cfg.hyper_at(out.grid->best);
        out.config.debias = cfg.debias_at(out.grid->best);
    }

    const auto n_trials = static_cast<std::size_t>(cfg.trials);
    out.trials.resize(n_trials);
    TrialOptions topts;
    topts.check_invariants = true;
    parallel_for(
        n_trials,
        [&](std::size_t i) {
            const TrialData data = prepare_trial(out.config, trial_seed(cfg.seed, i));
            out.trials[i] = run_trial_on(out.config, data, out.config.hyper, out.config.debias, topts);
        },
        workers);

    std::vector<RecoveryReport> reports;
    for (const auto& t : out.trials) reports.push_back(t.report);
    out.summary = aggregate(reports, std::string(to_string(cfg.topology.kind())), static_cast<int>(cfg.hyper.path));
    return out;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

Json trace(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

Json vec(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

std::string csv_num(double v) { return std::isnan(v) ? "" : format_shortest(v); }

}  // namespace

std::string report_json(const RecoveryReport& r) {
    Json j;
    j["p_fa"] = num(r.p_fa);
    j["p_m"] = num(r.p_m);
    j["support_accuracy"] = num(r.support_accuracy);
    j["sigma_trace"] = trace(r.sigma_trace);
    j["zeta_trace"] = trace(r.zeta_trace);
    return j.dump(2) + "\n";
}

std::string summary_json(const ExperimentResult& r) {
    const auto& c = r.config;
    const auto& s = r.summary;
    Json j;
    j["topology"] = s.topology;
    j["path"] = s.path;
    j["n"] = c.topology.n;
    j["p_order"] = c.p_order;
    j["trials"] = s.trials;
    j["seed"] = c.seed.seed;
    j["p_fa"] = num(s.p_fa);
    j["p_m"] = num(s.p_m);
    j["support_accuracy"] = num(s.support_accuracy);
    j["phase_boundary"] = s.phase_boundary;

    Json hyper;
    hyper["mu"] = trace(c.hyper.mu);
    hyper["gamma"] = num(c.hyper.gamma);
    hyper["lambda"] = num(c.hyper.lambda);
    hyper["eta"] = num(c.debias.eta);
    hyper["epsilon"] = num(c.debias.epsilon);
    j["hyper"] = hyper;

    if (r.grid) {
        Json g;
        g["objective"] = to_string(c.objective);
        g["points"] = r.grid->surface.size();
        g["best"] = trace(r.grid->best.tuple());
        g["best_objective"] = num(r.grid->best_objective);
        j["grid"] = g;
    }

    Json trials = Json::array();
    for (const auto& t : r.trials) {
        Json e;
        e["seed"] = t.seed.seed;
        e["p_fa"] = num(t.report.p_fa);
        e["p_m"] = num(t.report.p_m);
        e["support_accuracy"] = num(t.report.support_accuracy);
        e["armijo_failures"] = t.armijo_failures;
        e["negative_splits"] = t.invariants.negative_splits;
        e["mask_violations"] = t.invariants.mask_violations;
        e["h_true"] = vec(t.h_true);
        e["h_final"] = vec(t.h_final);
        trials.push_back(e);
    }
    j["per_trial"] = trials;
    j["sigma_trace"] = trace(s.sigma_trace);
    j["zeta_trace"] = trace(s.zeta_trace);
    return j.dump(2) + "\n";
}

std::string traces_csv(const SummaryRow& row) {
    std::ostringstream os;
    os << "t,phase,sigma_t,zeta_t\n";
    const std::size_t len = std::max(row.sigma_trace.size(), row.zeta_trace.size());
    for (std::size_t i = 0; i < len; ++i) {
        os << (i + 1) << ',' << (static_cast<long>(i) < row.phase_boundary ? "identify" : "debias") << ','
           << (i < row.sigma_trace.size() ? csv_num(row.sigma_trace[i]) : "") << ','
           << (i < row.zeta_trace.size() ? csv_num(row.zeta_trace[i]) : "") << '\n';
    }
    return os.str();
}

std::string surface_csv(const ExperimentResult& r) {
    const int p = r.config.p_order;
    std::ostringstream os;
    for (int i = 1; i <= p; ++i) os << "mu_" << i << ',';
    os << "eta,gamma,lambda,objective\n";
    auto row = [&](const GridPoint& g, double v) {
        for (double m : g.mu) os << format_shortest(m) << ',';
        os << format_shortest(g.eta) << ',' << format_shortest(g.gamma) << ',' << format_shortest(g.lambda) << ','
           << csv_num(v) << '\n';
    };
    if (r.grid) {
        for (const auto& sp : r.grid->surface) row(sp.point, sp.objective);
    } else {
        // Without a grid the surface is the single configured point.
        std::vector<double> per;
        for (const auto& t : r.trials) per.push_back(trial_objective(r.config.objective, t));
        row(GridPoint{r.config.hyper.mu, r.config.debias.eta, r.config.hyper.gamma, r.config.hyper.lambda},
            nan_mean(per));
    }
    return os.str();
}

void write_experiment_dir(const std::filesystem::path& dir, const ExperimentResult& r) {
    std::filesystem::create_directories(dir);
    auto put = [&](const char* name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        out << text;
    };
    put("config.toml", to_toml(r.config));
    put("summary.json", summary_json(r));
    put("traces.csv", traces_csv(r.summary));
    put("surface.csv", surface_csv(r));
}

}  // namespace gsoid
