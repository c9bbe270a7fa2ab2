#pragma once

// Identifier checkpoint.
//
// Layout: the 7 ASCII bytes "GSOID01", then little-endian IEEE-754 doubles in
// this order (integers and flags are stored as doubles too):
//
//   n, p_order, t, lambda, gamma, path (1|2), adjacency_only (0|1),
//   mu[0..P-1],
//   psi_plus (N x NP), psi_minus (N x NP), w_plus (N x N), w_minus (N x N),
//   r (NP x NP), p_corr (N x NP), q (N x NP), s (N x N),
//   data_energy,
//   history (P vectors of length N, newest first),
//   w_star (N x N),
//   last_objective, armijo_failures
//
// Matrices are written row-major.

#include "gsoid/identifier.hpp"

#include <filesystem>
#include <iosfwd>

namespace gsoid {

inline constexpr char kCheckpointMagic[] = "GSOID01";

struct Checkpoint {
    IdentifierState state;
    HyperParams hyper;
    Matrix w_star;
};

void write_checkpoint(std::ostream& out, const Checkpoint& cp);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace gsoid
