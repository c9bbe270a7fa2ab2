#include "gsoid/matrix_io.hpp"
#include "gsoid/var_sim.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef GSOID_CLI_PATH
#error "GSOID_CLI_PATH must point at the gso-identify binary"
#endif

using namespace gsoid;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(GSOID_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

long line_count(const fs::path& p) {
    std::ifstream in(p);
    long n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

struct Workdir {
    fs::path dir;
    explicit Workdir(const std::string& name) : dir(fs::temp_directory_path() / ("gsoid_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate, simulate, identify, debias") {
    Workdir w("pipeline");
    REQUIRE(run("generate --kind random --n 12 --seed 3 --p 3 --out " + (w / "w.mat.csv") + " --coeffs-out " +
                (w / "h.csv")) == 0);
    const Matrix gso = read_matrix_csv(fs::path(w / "w.mat.csv"));
    CHECK(gso.rows() == 12);
    Eigen::EigenSolver<Matrix> es(gso, false);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(1.0 / 1.5).epsilon(1e-8));
    CHECK(read_coeffs_csv(w / "h.csv").p_order() == 3);

    REQUIRE(run("simulate --w " + (w / "w.mat.csv") + " --coeffs " + (w / "h.csv") +
                " --t 1100 --burn-in 500 --seed 4 --out " + (w / "x.csv")) == 0);
    CHECK(read_signal_csv(w / "x.csv").size() == 600u);

    REQUIRE(run("identify --x " + (w / "x.csv") + " --p 3 --path 1 --mu 0.1,0.1,0.1 --gamma 0.25 --lambda 0.99"
                " --t-star 400 --out-w " + (w / "w_hat.mat.csv") + " --trace " + (w / "trace.csv") +
                " --checkpoint " + (w / "state.bin") + " --w-true " + (w / "w.mat.csv")) == 0);
    CHECK(first_line(w / "trace.csv") == "t,sigma_t,zeta_t,nnz");
    CHECK(line_count(w / "trace.csv") == 401);
    CHECK(read_matrix_csv(fs::path(w / "w_hat.mat.csv")).rows() == 12);

    const int rc = run("debias --resume " + (w / "state.bin") + " --x " + (w / "x.csv") +
                       " --from 401 --delta 1e-3 --out-w " + (w / "w_final.mat.csv") + " --out-h " + (w / "h_final.csv"));
    CHECK(rc == 0);
    CHECK(read_coeffs_csv(w / "h_final.csv").p_order() == 3);

    CHECK(run("debias --resume " + (w / "state.bin") + " --x " + (w / "x.csv") + " --from 402 --out-w " +
              (w / "bad.mat.csv")) == 2);
    CHECK(run("identify --x " + (w / "x.csv") + " --p 3 --mu 0.1,0.2,0.3 --out-w " + (w / "bad.mat.csv")) == 2);
}

TEST_CASE("experiments") {
    Workdir w("experiment");
    write_text(w.dir / "exp.toml", R"([topology]
kind = "sbm"
[hyper]
mu = [0.1, 0.1, 0.1]
[grid]
mu = [0.1, 0.2]
eta = [0.1]
gamma = [0.25]
lambda = [0.99]
[run]
t_total = 350
burn_in = 100
t_star = 150
t_end = 250
trials = 2
seed = 5
)");
    REQUIRE(run("grid-search --config " + (w / "exp.toml") + " --out " + (w / "grid")) == 0);
    for (const char* f : {"config.toml", "summary.json", "traces.csv", "surface.csv"}) CHECK(fs::exists(w.dir / "grid" / f));
    // Four non-increasing mu triples from two values.
    CHECK(line_count(w.dir / "grid" / "surface.csv") == 5);

    REQUIRE(run("run-experiment --no-search --config " + (w / "exp.toml") + " --out " + (w / "plain")) == 0);
    CHECK(line_count(w.dir / "plain" / "surface.csv") == 2);

    write_text(w.dir / "nogrid.toml", "[run]\ntrials = 1\n");
    CHECK(run("grid-search --config " + (w / "nogrid.toml") + " --out " + (w / "x")) == 2);
    write_text(w.dir / "bad.toml", "[run]\ntrails = 1\n");
    CHECK(run("run-experiment --config " + (w / "bad.toml") + " --out " + (w / "x")) == 2);
    CHECK(run("run-experiment --config " + (w / "missing.toml") + " --out " + (w / "x")) == 2);
}

TEST_CASE("exit codes for usage and numeric failures") {
    Workdir w("codes");
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("--help") == 0);
    write_text(w.dir / "w.mat.csv", "2\n");
    write_text(w.dir / "h.csv", "0,1\n");
    CHECK(run("simulate --w " + (w / "w.mat.csv") + " --coeffs " + (w / "h.csv") + " --t 200 --burn-in 0 --out " +
              (w / "x.csv")) == 3);
    CHECK(run("simulate --w " + (w / "w.mat.csv") + " --coeffs " + (w / "h.csv") + " --t 10 --burn-in 10 --out " +
              (w / "x.csv")) == 2);
}

}  // TEST_SUITE
