#include "gsoid/matrix_io.hpp"

#include "gsoid/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gsoid {

std::string format_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    return out;
}

double parse_cell(std::string_view cell, std::size_t line_no) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
        cell.remove_suffix(1);
    }
    if (cell.empty()) throw ConfigError("empty CSV cell on line " + std::to_string(line_no));
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ConfigError("bad number '" + std::string(cell) + "' on line " + std::to_string(line_no));
    }
    return v;
}

}  // namespace

std::vector<std::vector<double>> read_csv_rows(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            row.push_back(parse_cell(rest.substr(0, comma), line_no));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_csv_rows(in);
}

void write_csv_rows(std::ostream& os, const std::vector<std::vector<double>>& rows) {
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ',';
            os << format_double(row[j]);
        }
        os << '\n';
    }
}

void write_csv_rows(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    write_csv_rows(out, rows);
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    auto out = open_out(path);
    write_matrix_csv(out, m);
}

Matrix read_matrix_csv(std::istream& is) {
    const auto rows = read_csv_rows(is);
    if (rows.empty()) return Matrix(0, 0);
    const std::size_t cols = rows.front().size();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw ConfigError("ragged matrix CSV: row " + std::to_string(i + 1) + " has " +
                              std::to_string(rows[i].size()) + " columns, expected " +
                              std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_matrix_csv(in);
}

}  // namespace gsoid
