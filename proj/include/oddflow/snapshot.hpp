#pragma once

// Field snapshot files.
//
// Layout (stable, version 1):
//   oddflow-snapshot 1\n
//   <key> <value>\n            (one per line: n, cutoff, parity, time,
//   ...                         config_hash, optional step)
//   end\n
//   N*N little-endian float64 values, row-major with the row index i
//   running over x1 = i/N and the column index j over x2 = j/N.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "oddflow/field.hpp"

namespace oddflow {

struct Snapshot {
  GridField grid;
  int cutoff = 1;
  double time = 0.0;
  std::string config_hash;
  std::map<std::string, std::string> extra;  // additional header keys
};

/// Writes f sampled on a 2*cutoff grid (exactly invertible by project()).
void write_snapshot(const std::filesystem::path& path, const SpectralField& f, double time,
                    const std::string& config_hash,
                    const std::map<std::string, std::string>& extra = {});

void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Recovers the spectral field stored in an odd-odd snapshot.
SpectralField snapshot_field(const Snapshot& s);

/// 64-bit FNV-1a hash rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace oddflow
