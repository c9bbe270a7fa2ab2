#pragma once

// Plain-text formats shared by the CLI and the harness. Every number is
// written with 17 significant digits so files round-trip bit-exactly.
//
//   *.mat.csv   dense matrix, row-major, one row per line, no header
//   signal csv  one row per time step, N columns
//   coeff csv   one row per lag block p, p+1 entries (ragged)

#include "gsoid/graph_core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gsoid {

std::string format_double(double v);

/// Shortest text that reads back to the same double (for human-facing CSV/TOML).
std::string format_shortest(double v);

void write_matrix_csv(std::ostream& os, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Rows of numbers, possibly ragged. Blank lines are skipped.
std::vector<std::vector<double>> read_csv_rows(std::istream& is);
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);
void write_csv_rows(std::ostream& os, const std::vector<std::vector<double>>& rows);
void write_csv_rows(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows);

}  // namespace gsoid
