#include "gsoid/checkpoint.hpp"

#include "gsoid/errors.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace gsoid {

namespace {

constexpr std::size_t kMagicLen = sizeof(kCheckpointMagic) - 1;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void f64(double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
        out_.write(reinterpret_cast<const char*>(buf), 8);
    }

    void matrix(const Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    double f64() {
        unsigned char buf[8];
        if (!in_.read(reinterpret_cast<char*>(buf), 8)) throw ConfigError("checkpoint: truncated file");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return std::bit_cast<double>(bits);
    }

    long integer(const char* what, double lo, double hi) {
        const double v = f64();
        if (!(v >= lo && v <= hi) || v != std::floor(v)) {
            throw ConfigError(std::string("checkpoint: bad value for ") + what);
        }
        return static_cast<long>(v);
    }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
        return m;
    }

private:
    std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& cp) {
    const auto& s = cp.state;
    const auto& hp = cp.hyper;
    if (static_cast<int>(hp.mu.size()) != s.p_order) throw InvalidArgument("write_checkpoint: mu length != P");
    if (cp.w_star.rows() != s.n || cp.w_star.cols() != s.n) throw InvalidArgument("write_checkpoint: bad W* size");

    out.write(kCheckpointMagic, kMagicLen);
    Writer w(out);
    w.f64(static_cast<double>(s.n));
    w.f64(s.p_order);
    w.f64(static_cast<double>(s.t));
    w.f64(hp.lambda);
    w.f64(hp.gamma);
    w.f64(static_cast<int>(hp.path));
    w.f64(hp.adjacency_only ? 1.0 : 0.0);
    for (double m : hp.mu) w.f64(m);
    w.matrix(s.psi_plus);
    w.matrix(s.psi_minus);
    w.matrix(s.w_plus);
    w.matrix(s.w_minus);
    w.matrix(s.r);
    w.matrix(s.p_corr);
    w.matrix(s.q);
    w.matrix(s.s);
    w.f64(s.data_energy);
    for (const auto& h : s.history) w.matrix(h.transpose());
    w.matrix(cp.w_star);
    w.f64(s.last_objective);
    w.f64(static_cast<double>(s.armijo_failures));
    if (!out) throw std::runtime_error("write_checkpoint: write failed");
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_checkpoint(out, cp);
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[kMagicLen];
    if (!in.read(magic, kMagicLen) || std::memcmp(magic, kCheckpointMagic, kMagicLen) != 0) {
        throw ConfigError("checkpoint: missing GSOID01 header");
    }
    Reader r(in);
    const long n = r.integer("n", 1, 1e6);
    const int p_order = static_cast<int>(r.integer("p_order", 1, 1e3));
    const long t = r.integer("t", 0, 9e15);

    Checkpoint cp;
    auto& hp = cp.hyper;
    hp.lambda = r.f64();
    hp.gamma = r.f64();
    hp.path = r.integer("path", 1, 2) == 1 ? Path::Path1 : Path::Path2;
    hp.adjacency_only = r.integer("adjacency_only", 0, 1) == 1;
    hp.mu.resize(static_cast<std::size_t>(p_order));
    for (auto& m : hp.mu) m = r.f64();

    auto& s = cp.state;
    s = IdentifierState::zeros(n, p_order);
    s.t = t;
    const Eigen::Index np = n * p_order;
    s.psi_plus = r.matrix(n, np);
    s.psi_minus = r.matrix(n, np);
    s.w_plus = r.matrix(n, n);
    s.w_minus = r.matrix(n, n);
    s.r = r.matrix(np, np);
    s.p_corr = r.matrix(n, np);
    s.q = r.matrix(n, np);
    s.s = r.matrix(n, n);
    s.data_energy = r.f64();
    for (auto& h : s.history) h = r.matrix(1, n).transpose();
    cp.w_star = r.matrix(n, n);
    s.last_objective = r.f64();
    s.armijo_failures = r.integer("armijo_failures", 0, 9e15);
    for (int p = 0; p < p_order; ++p) s.x_lag.segment(p * n, n) = s.history[static_cast<std::size_t>(p)];
    return cp;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace gsoid
