#include "oddflow/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace oddflow {
namespace {

constexpr const char* kMagic = "oddflow-snapshot 1";

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_snapshot(const std::filesystem::path& path, const SpectralField& f, double time,
                    const std::string& config_hash,
                    const std::map<std::string, std::string>& extra) {
  Snapshot s;
  s.grid = to_grid(f, 2 * f.cutoff());
  s.grid.time = time;
  s.cutoff = f.cutoff();
  s.time = time;
  s.config_hash = config_hash;
  s.extra = extra;
  write_snapshot(path, s);
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open snapshot for writing: " + path.string());
  const int n = s.grid.n();
  out << kMagic << '\n';
  out << "n " << n << '\n';
  out << "cutoff " << s.cutoff << '\n';
  out << "parity " << to_string(s.grid.parity) << '\n';
  out << "time " << format_double(s.time) << '\n';
  out << "config_hash " << (s.config_hash.empty() ? "-" : s.config_hash) << '\n';
  for (const auto& [k, v] : s.extra) out << k << ' ' << v << '\n';
  out << "end\n";
  std::vector<double> row(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = s.grid.values(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing snapshot: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMagic) throw Error("not an oddflow snapshot: " + path.string());

  Snapshot s;
  int n = -1;
  Parity parity = Parity::OddOdd;
  while (std::getline(in, line)) {
    if (line == "end") break;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw Error("malformed snapshot header line: " + line);
    const std::string key = line.substr(0, sp);
    const std::string value = line.substr(sp + 1);
    if (key == "n") {
      n = std::stoi(value);
    } else if (key == "cutoff") {
      s.cutoff = std::stoi(value);
    } else if (key == "parity") {
      parity = parity_from_string(value);
    } else if (key == "time") {
      s.time = std::stod(value);
    } else if (key == "config_hash") {
      s.config_hash = value == "-" ? "" : value;
    } else {
      s.extra[key] = value;
    }
  }
  if (line != "end" || n < 2) throw Error("truncated snapshot header: " + path.string());

  s.grid.values.resize(n, n);
  s.grid.parity = parity;
  s.grid.time = s.time;
  std::vector<double> row(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw Error("truncated snapshot payload: " + path.string());
    for (int j = 0; j < n; ++j) s.grid.values(i, j) = row[static_cast<size_t>(j)];
  }
  return s;
}

SpectralField snapshot_field(const Snapshot& s) { return to_spectral(s.grid, s.cutoff); }

}  // namespace oddflow
