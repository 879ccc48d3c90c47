#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "sampler.hpp"

namespace gperc {

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_number(const std::optional<double> &x) { return x ? format_number(*x) : std::string(); }

/// %.17g, the fixed-width form used in snapshot dumps.
inline std::string format_17g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Snapshot dumps
//
//   # gibbs-perc v1 nu=<nu> L=<L> n=<count> seed=<seed> sweep=<k>
//   x y [z]
//   ...

struct SnapshotHeader {
  int nu = 0;
  double box = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t sweep = 0;
};

template <int D>
void write_snapshot(std::ostream &os, const Snapshot<D> &snap, double box, std::uint64_t seed) {
  os << "# gibbs-perc v1 nu=" << D << " L=" << format_17g(box) << " n=" << snap.points.size() << " seed=" << seed
     << " sweep=" << snap.sweep << '\n';
  for (const auto &p : snap.points) {
    for (int i = 0; i < D; ++i) os << (i ? " " : "") << format_17g(p[i]);
    os << '\n';
  }
}

/// Reads one snapshot; throws ConfigError on a malformed header or point line.
template <int D>
Snapshot<D> read_snapshot(std::istream &is, SnapshotHeader *header = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::EmptyInput, "no snapshot header");
  SnapshotHeader h;
  {
    std::istringstream ss(line);
    std::string hash, tag, version;
    ss >> hash >> tag >> version;
    if (hash != "#" || tag != "gibbs-perc" || version != "v1")
      throw Error(ErrorCode::ConfigError, "bad snapshot header: " + line);
    std::string kv;
    while (ss >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "bad snapshot header field: " + kv);
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      if (key == "nu") h.nu = std::stoi(val);
      else if (key == "L") h.box = std::stod(val);
      else if (key == "n") h.n = std::stoull(val);
      else if (key == "seed") h.seed = std::stoull(val);
      else if (key == "sweep") h.sweep = std::stoull(val);
    }
  }
  if (h.nu != D) throw Error(ErrorCode::ConfigError, "snapshot dimension mismatch");
  Snapshot<D> snap;
  snap.sweep = h.sweep;
  snap.points.reserve(h.n);
  for (std::size_t k = 0; k < h.n; ++k) {
    if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "snapshot truncated");
    std::istringstream ss(line);
    Point<D> p{};
    for (int i = 0; i < D; ++i)
      if (!(ss >> p[i])) throw Error(ErrorCode::ConfigError, "bad point line: " + line);
    snap.points.push_back(p);
  }
  if (header) *header = h;
  return snap;
}

} // namespace gperc
