#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ajd/solver.hpp"
#include "ajd/types.hpp"

namespace ajd {

// MSET container: "MSET" magic, u32 version (= 1), u32 n, u32 p, all
// little-endian, then n*p*p f64 little-endian values, matrices in order,
// row-major within each matrix. A file is exactly 16 + 8*n*p^2 bytes;
// load(save(set)) is byte-identical.
inline constexpr std::uint32_t kMatSetFormatVersion = 1;

/// Writes matrices (not necessarily symmetric; also used for the final B
/// with n = 1). Throws std::runtime_error on I/O failure.
void save_matrices(const std::string& path, const std::vector<Matrix>& mats);

/// Strict loader: rejects bad magic, unknown version, size mismatch, or
/// trailing bytes with std::runtime_error.
std::vector<Matrix> load_matrices(const std::string& path);

/// Set save/load; loading applies the symmetry gate of SymmetricMatrixSet.
void save_matset(const std::string& path, const SymmetricMatrixSet& cset);
SymmetricMatrixSet load_matset(const std::string& path);

/// Metadata block of a trace file. Optional fields are omitted from the file
/// when absent (e.g. sigma/seed for sets loaded from disk).
struct TraceMetadata {
  std::string method;
  std::string status;
  std::string generator;
  std::string version;
  int n = 0;
  int p = 0;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  double init_time_s = 0.0;
  double initial_loss = 0.0;
  double initial_grad_norm = 0.0;
};

/// Trace files are CSV with a '#'-prefixed metadata block, one row per
/// accepted iteration:  iter,loss,grad_norm,step_size,halvings,wall_time_s.
void save_trace(const std::string& path, const SolverTrace& trace,
                const TraceMetadata& meta);

struct TraceData {
  TraceMetadata meta;
  std::vector<TraceRecord> records;
};

TraceData load_trace(const std::string& path);

}  // namespace ajd
