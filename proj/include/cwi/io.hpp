#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cwi/dynamics.hpp"

namespace cwi {

/// Binary snapshot: header {magic "CWI1", n: u32, L: f64, time: f64, s: f64,
/// N: f64}, then n^3 coefficients as little-endian f64 (re, im) pairs in
/// row-major index order (i3 fastest, standard FFT frequency layout per
/// axis), one block for u and one for du/dt.
struct SnapshotHeader {
  std::uint32_t n;
  double L, time, s, N;
};

void write_snapshot(const std::filesystem::path& file, const WaveState& state,
                    double s, double N);

struct LoadedSnapshot {
  WaveState state;
  SnapshotHeader header;
};
LoadedSnapshot read_snapshot(const std::filesystem::path& file);

/// Trajectory persistence: a directory of snapshots snap_000000.cwi, ... and
/// a manifest.json {dt, stride, times, config_hash, n, L, s, N, nonlinear,
/// cubic_sign}.
void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                     double s, double N, const std::string& config_hash);
struct LoadedTrajectory {
  Trajectory traj;
  double s, N;
  std::string config_hash;
};
LoadedTrajectory load_trajectory(const std::filesystem::path& dir);

/// FNV-1a 64-bit hash, rendered as 16 hex digits. Content hashing for config
/// echoes and manifests.
std::string fnv1a_hex(const std::string& content);

void write_text_file(const std::filesystem::path& file,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& file);

}  // namespace cwi
