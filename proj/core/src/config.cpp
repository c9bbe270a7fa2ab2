#include "gsoid/config.hpp"

#include "gsoid/errors.hpp"
#include "gsoid/matrix_io.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gsoid {

std::string to_string(Objective o) {
    return o == Objective::MinSteadyStateSigma ? "min_steady_state_sigma" : "min_fa_plus_miss";
}

Objective objective_from_string(std::string_view s) {
    if (s == "min_steady_state_sigma") return Objective::MinSteadyStateSigma;
    if (s == "min_fa_plus_miss") return Objective::MinFaPlusMiss;
    throw ConfigError("unknown objective '" + std::string(s) + "'");
}

std::string to_string(MaskRule r) { return r == MaskRule::Reachability ? "reachability" : "first_block"; }

MaskRule mask_rule_from_string(std::string_view s) {
    if (s == "reachability") return MaskRule::Reachability;
    if (s == "first_block") return MaskRule::FirstBlockPattern;
    throw ConfigError("unknown mask_rule '" + std::string(s) + "'");
}

TopologyKind topology_kind_from_string(std::string_view s) {
    if (s == "random") return TopologyKind::Random;
    if (s == "powerlaw") return TopologyKind::PowerLaw;
    if (s == "sbm") return TopologyKind::Sbm;
    throw ConfigError("unknown topology kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Grid

namespace {

// Multiples of `step` in (lo, hi], plus hi itself; rounded to 1e-9 so the
// lattice prints cleanly.
std::vector<double> lattice(double lo, double hi, double step) {
    std::vector<double> out;
    for (long k = 1;; ++k) {
        const double v = std::round((lo + k * step) * 1e9) / 1e9;
        if (v > hi + 1e-12) break;
        out.push_back(v);
    }
    if (out.empty() || std::abs(out.back() - hi) > 1e-12) out.push_back(hi);
    return out;
}

void check_axis(const std::vector<double>& v, const char* name, double lo, double hi) {
    if (v.empty()) throw InvalidArgument(std::string("grid: no candidates for ") + name);
    for (double x : v) {
        if (!(x > lo && x <= hi)) {
            throw InvalidArgument(std::string("grid: ") + name + " value " + format_double(x) + " outside (" +
                                  format_double(lo) + ", " + format_double(hi) + "]");
        }
    }
}

}  // namespace

GridSpec GridSpec::full() { return coarsened(0.1, 0.1, 0.1, 0.01); }

GridSpec GridSpec::coarsened(double mu_step, double eta_step, double gamma_step, double lambda_step) {
    if (!(mu_step > 0 && eta_step > 0 && gamma_step > 0 && lambda_step > 0)) {
        throw InvalidArgument("grid: steps must be positive");
    }
    GridSpec g;
    g.mu_values = lattice(0.0, 5.0, mu_step);
    g.eta_values = lattice(0.0, 5.0, eta_step);
    g.gamma_values = lattice(0.0, 2.0, gamma_step);
    g.lambda_values = lattice(0.8, 0.99, lambda_step);
    return g;
}

void GridSpec::validate() const {
    check_axis(mu_values, "mu", 0.0, 5.0);
    check_axis(eta_values, "eta", 0.0, 5.0);
    // gamma = 0 is admitted so grids can switch the commutator off.
    if (gamma_values.empty()) throw InvalidArgument("grid: no candidates for gamma");
    for (double g : gamma_values) {
        if (!(g >= 0.0 && g <= 2.0)) throw InvalidArgument("grid: gamma value " + format_double(g) + " outside [0, 2]");
    }
    check_axis(lambda_values, "lambda", 0.8, 0.99);
}

std::vector<double> GridPoint::tuple() const {
    std::vector<double> t = mu;
    t.push_back(eta);
    t.push_back(gamma);
    t.push_back(lambda);
    return t;
}

std::vector<GridPoint> enumerate_grid(const GridSpec& grid, int p_order) {
    grid.validate();
    if (p_order < 1) throw InvalidArgument("enumerate_grid: p_order must be >= 1");

    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto mus = sorted(grid.mu_values);
    const auto etas = sorted(grid.eta_values);
    const auto gammas = sorted(grid.gamma_values);
    const auto lambdas = sorted(grid.lambda_values);

    // Non-increasing mu tuples, already in lexicographic order.
    std::vector<std::vector<double>> mu_tuples;
    std::vector<std::size_t> idx(static_cast<std::size_t>(p_order), 0);
    std::vector<double> cur(static_cast<std::size_t>(p_order));
    auto rec = [&](auto&& self, std::size_t depth, std::size_t max_idx) -> void {
        if (depth == idx.size()) {
            mu_tuples.push_back(cur);
            return;
        }
        for (std::size_t i = 0; i <= max_idx; ++i) {
            cur[depth] = mus[i];
            self(self, depth + 1, i);
        }
    };
    rec(rec, 0, mus.size() - 1);

    std::vector<GridPoint> out;
    out.reserve(mu_tuples.size() * etas.size() * gammas.size() * lambdas.size());
    for (const auto& mu : mu_tuples)
        for (double e : etas)
            for (double g : gammas)
                for (double l : lambdas) out.push_back(GridPoint{mu, e, g, l});
    return out;
}

// ---------------------------------------------------------------------------
// ExperimentConfig

ExperimentConfig ExperimentConfig::reference_protocol(TopologyKind kind) {
    ExperimentConfig c;
    switch (kind) {
        case TopologyKind::Random: c.topology = TopologySpec::random(12); break;
        case TopologyKind::PowerLaw: c.topology = TopologySpec::power_law(12); break;
        case TopologyKind::Sbm: c.topology = TopologySpec::sbm(12); break;
        default: throw InvalidArgument("reference_protocol: generated topologies only");
    }
    c.hyper.mu = {0.1, 0.1, 0.1};
    c.hyper.gamma = 0.25;
    c.hyper.lambda = 0.99;
    c.hyper.path = Path::Path1;
    c.debias.lambda = 0.99;
    c.debias.eta = 0.0;
    return c;
}

void ExperimentConfig::validate() const {
    try {
        topology.validate();
        if (p_order < 1) throw ConfigError("model.p_order must be >= 1");
        if (!(noise_std >= 0.0)) throw ConfigError("model.noise_std must be >= 0");
        if (!(zero_prob >= 0.0 && zero_prob <= 1.0)) throw ConfigError("model.zero_prob must be in [0, 1]");
        if (max_coeff_draws < 1) throw ConfigError("model.max_coeff_draws must be >= 1");
        if (burn_in < 0) throw ConfigError("run.burn_in must be >= 0");
        if (!(0 < t_star && t_star < t_end && t_end <= t_total - burn_in)) {
            throw ConfigError("run: need 0 < t_star < t_end <= t_total - burn_in (got t_star=" +
                              std::to_string(t_star) + ", t_end=" + std::to_string(t_end) + ", t_total=" +
                              std::to_string(t_total) + ", burn_in=" + std::to_string(burn_in) + ")");
        }
        if (trials < 1) throw ConfigError("run.trials must be >= 1");
        hyper.validate(p_order);
        stepsize.validate();
        if (!(debias.lambda > 0.0 && debias.lambda <= 1.0)) throw ConfigError("hyper.lambda must be in (0, 1]");
        if (!(debias.eta >= 0.0)) throw ConfigError("hyper.eta must be >= 0");
        if (!(debias.epsilon > 0.0)) throw ConfigError("hyper.epsilon must be > 0");
        if (!(debias.delta >= 0.0)) throw ConfigError("hyper.delta must be >= 0");
        if (!(support_eps >= 0.0 && support_eps < 1.0)) throw ConfigError("hyper.support_eps must be in [0, 1)");
        if (grid) grid->validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

HyperParams ExperimentConfig::hyper_at(const GridPoint& g) const {
    HyperParams h = hyper;
    h.mu = g.mu;
    h.gamma = g.gamma;
    h.lambda = g.lambda;
    return h;
}

DebiasOptions ExperimentConfig::debias_at(const GridPoint& g) const {
    DebiasOptions d = debias;
    d.eta = g.eta;
    d.lambda = g.lambda;
    return d;
}

// ---------------------------------------------------------------------------
// TOML

namespace {

class Section {
public:
    Section(const toml::table* tbl, std::string name) : tbl_(tbl), name_(std::move(name)) {}

    template <typename T>
    void get(const char* key, T& out) {
        const toml::node* node = find(key);
        if (!node) return;
        if constexpr (std::is_same_v<T, bool>) {
            if (!node->is_boolean()) fail(key, "a boolean");
            out = *node->value<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!node->is_integer()) fail(key, "an integer");
            out = static_cast<T>(*node->value<std::int64_t>());
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!node->is_number()) fail(key, "a number");
            out = *node->value<double>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!node->is_string()) fail(key, "a string");
            out = *node->value<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            const auto* arr = node->as_array();
            if (!arr) fail(key, "an array of numbers");
            out.clear();
            for (const auto& el : *arr) {
                if (!el.is_number()) fail(key, "an array of numbers");
                out.push_back(*el.value<double>());
            }
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
            const auto* arr = node->as_array();
            if (!arr) fail(key, "an array of integers");
            out.clear();
            for (const auto& el : *arr) {
                if (!el.is_integer()) fail(key, "an array of integers");
                out.push_back(static_cast<int>(*el.value<std::int64_t>()));
            }
        }
    }

    bool has(const char* key) const { return tbl_ && tbl_->contains(key); }

    void finish() const {
        if (!tbl_) return;
        for (const auto& [k, v] : *tbl_) {
            if (!seen_.count(std::string(k.str()))) {
                throw ConfigError("unknown key '" + name_ + "." + std::string(k.str()) + "'");
            }
        }
    }

private:
    const toml::node* find(const char* key) {
        seen_.insert(key);
        return tbl_ ? tbl_->get(key) : nullptr;
    }

    [[noreturn]] void fail(const char* key, const char* what) const {
        throw ConfigError("'" + name_ + "." + key + "' must be " + what);
    }

    const toml::table* tbl_;
    std::string name_;
    std::set<std::string> seen_;
};

const toml::table* sub_table(const toml::table& root, const char* name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
    return n->as_table();
}

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    for (const auto& [k, v] : root) {
        const std::string key(k.str());
        if (key != "topology" && key != "model" && key != "hyper" && key != "grid" && key != "run") {
            throw ConfigError("unknown section [" + key + "]");
        }
    }

    ExperimentConfig cfg;

    {
        Section s(sub_table(root, "topology"), "topology");
        std::string kind = "random";
        s.get("kind", kind);
        int n = 12;
        s.get("n", n);
        switch (topology_kind_from_string(kind)) {
            case TopologyKind::Random: {
                cfg.topology = TopologySpec::random(n);
                auto& p = std::get<RandomParams>(cfg.topology.params);
                s.get("lo_frac", p.lo_frac);
                s.get("hi_frac", p.hi_frac);
                break;
            }
            case TopologyKind::PowerLaw: {
                cfg.topology = TopologySpec::power_law(n);
                auto& p = std::get<PowerLawParams>(cfg.topology.params);
                s.get("seed_nodes", p.seed_nodes);
                s.get("seed_connect_prob", p.seed_connect_prob);
                s.get("edges_per_node", p.edges_per_node);
                s.get("lo_frac", p.lo_frac);
                s.get("hi_frac", p.hi_frac);
                break;
            }
            default: {
                cfg.topology = TopologySpec::sbm(n);
                auto& p = std::get<SbmParams>(cfg.topology.params);
                s.get("cluster_sizes", p.cluster_sizes);
                s.get("base_diag", p.base_diag);
                s.get("prob_jitter_lo", p.prob_jitter_lo);
                s.get("prob_jitter_hi", p.prob_jitter_hi);
                s.get("weight_rate", p.weight_rate);
                break;
            }
        }
        s.get("norm_factor", cfg.topology.norm_factor);
        s.finish();
    }

    {
        Section s(sub_table(root, "model"), "model");
        s.get("p_order", cfg.p_order);
        s.get("noise_std", cfg.noise_std);
        s.get("zero_prob", cfg.zero_prob);
        s.get("max_coeff_draws", cfg.max_coeff_draws);
        s.finish();
    }

    {
        Section s(sub_table(root, "hyper"), "hyper");
        int path = 1;
        s.get("path", path);
        if (path != 1 && path != 2) throw ConfigError("hyper.path must be 1 or 2");
        cfg.hyper.path = path == 1 ? Path::Path1 : Path::Path2;
        cfg.hyper.mu.assign(static_cast<std::size_t>(cfg.p_order), 0.1);
        s.get("mu", cfg.hyper.mu);
        s.get("gamma", cfg.hyper.gamma);
        s.get("lambda", cfg.hyper.lambda);
        cfg.debias.lambda = cfg.hyper.lambda;
        s.get("adjacency_only", cfg.hyper.adjacency_only);
        s.get("eta", cfg.debias.eta);
        s.get("epsilon", cfg.debias.epsilon);
        s.get("delta", cfg.debias.delta);
        s.get("recursive_h", cfg.debias.recursive_h);
        std::string rule = to_string(cfg.mask_rule);
        s.get("mask_rule", rule);
        cfg.mask_rule = mask_rule_from_string(rule);
        s.get("support_eps", cfg.support_eps);
        s.get("exclude_diagonal", cfg.exclude_diagonal);
        s.get("armijo_c", cfg.stepsize.armijo_c);
        s.get("armijo_shrink", cfg.stepsize.shrink);
        s.get("armijo_max_backtracks", cfg.stepsize.max_backtracks);
        if (s.has("fixed_step")) {
            double step = 0.0;
            s.get("fixed_step", step);
            cfg.stepsize.fixed_step = step;
        }
        s.finish();
    }

    if (const toml::table* g = sub_table(root, "grid")) {
        Section s(g, "grid");
        bool full = false;
        s.get("full", full);
        GridSpec grid = full ? GridSpec::full() : GridSpec::coarsened();
        s.get("mu", grid.mu_values);
        s.get("eta", grid.eta_values);
        s.get("gamma", grid.gamma_values);
        s.get("lambda", grid.lambda_values);
        s.finish();
        cfg.grid = grid;
    }

    {
        Section s(sub_table(root, "run"), "run");
        s.get("t_total", cfg.t_total);
        s.get("burn_in", cfg.burn_in);
        s.get("t_star", cfg.t_star);
        s.get("t_end", cfg.t_end);
        s.get("trials", cfg.trials);
        std::int64_t seed = static_cast<std::int64_t>(cfg.seed.seed);
        s.get("seed", seed);
        if (seed < 0) throw ConfigError("run.seed must be >= 0");
        cfg.seed = RngSeed{static_cast<std::uint64_t>(seed)};
        std::string objective = to_string(cfg.objective);
        s.get("objective", objective);
        cfg.objective = objective_from_string(objective);
        s.finish();
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

namespace {

std::string list(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
}

// TOML needs a decimal point or exponent to keep a float a float.
std::string num(double v) {
    std::string s = format_shortest(v);
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

std::string list_f(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
}

}  // namespace

std::string to_toml(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[topology]\n";
    os << "kind = \"" << to_string(c.topology.kind()) << "\"\n";
    os << "n = " << c.topology.n << "\n";
    os << "norm_factor = " << num(c.topology.norm_factor) << "\n";
    if (const auto* p = std::get_if<RandomParams>(&c.topology.params)) {
        os << "lo_frac = " << num(p->lo_frac) << "\nhi_frac = " << num(p->hi_frac) << "\n";
    } else if (const auto* p = std::get_if<PowerLawParams>(&c.topology.params)) {
        os << "seed_nodes = " << p->seed_nodes << "\n";
        os << "seed_connect_prob = " << num(p->seed_connect_prob) << "\n";
        os << "edges_per_node = " << p->edges_per_node << "\n";
        os << "lo_frac = " << num(p->lo_frac) << "\nhi_frac = " << num(p->hi_frac) << "\n";
    } else if (const auto* p = std::get_if<SbmParams>(&c.topology.params)) {
        os << "cluster_sizes = " << list(p->cluster_sizes) << "\n";
        os << "base_diag = " << num(p->base_diag) << "\n";
        os << "prob_jitter_lo = " << num(p->prob_jitter_lo) << "\n";
        os << "prob_jitter_hi = " << num(p->prob_jitter_hi) << "\n";
        os << "weight_rate = " << num(p->weight_rate) << "\n";
    }

    os << "\n[model]\n";
    os << "p_order = " << c.p_order << "\n";
    os << "noise_std = " << num(c.noise_std) << "\n";
    os << "zero_prob = " << num(c.zero_prob) << "\n";
    os << "max_coeff_draws = " << c.max_coeff_draws << "\n";

    os << "\n[hyper]\n";
    os << "path = " << static_cast<int>(c.hyper.path) << "\n";
    os << "mu = " << list_f(c.hyper.mu) << "\n";
    os << "gamma = " << num(c.hyper.gamma) << "\n";
    os << "lambda = " << num(c.hyper.lambda) << "\n";
    os << "adjacency_only = " << (c.hyper.adjacency_only ? "true" : "false") << "\n";
    os << "eta = " << num(c.debias.eta) << "\n";
    os << "epsilon = " << num(c.debias.epsilon) << "\n";
    os << "delta = " << num(c.debias.delta) << "\n";
    os << "recursive_h = " << (c.debias.recursive_h ? "true" : "false") << "\n";
    os << "mask_rule = \"" << to_string(c.mask_rule) << "\"\n";
    os << "support_eps = " << num(c.support_eps) << "\n";
    os << "exclude_diagonal = " << (c.exclude_diagonal ? "true" : "false") << "\n";
    os << "armijo_c = " << num(c.stepsize.armijo_c) << "\n";
    os << "armijo_shrink = " << num(c.stepsize.shrink) << "\n";
    os << "armijo_max_backtracks = " << c.stepsize.max_backtracks << "\n";
    if (c.stepsize.fixed_step) os << "fixed_step = " << num(*c.stepsize.fixed_step) << "\n";

    if (c.grid) {
        os << "\n[grid]\n";
        os << "mu = " << list_f(c.grid->mu_values) << "\n";
        os << "eta = " << list_f(c.grid->eta_values) << "\n";
        os << "gamma = " << list_f(c.grid->gamma_values) << "\n";
        os << "lambda = " << list_f(c.grid->lambda_values) << "\n";
    }

    os << "\n[run]\n";
    os << "t_total = " << c.t_total << "\n";
    os << "burn_in = " << c.burn_in << "\n";
    os << "t_star = " << c.t_star << "\n";
    os << "t_end = " << c.t_end << "\n";
    os << "trials = " << c.trials << "\n";
    os << "seed = " << c.seed.seed << "\n";
    os << "objective = \"" << to_string(c.objective) << "\"\n";
    return os.str();
}

}  // namespace gsoid
