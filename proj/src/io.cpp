#include "cwi/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts are not "
              "supported");

namespace cwi {

namespace {
constexpr char kMagic[4] = {'C', 'W', 'I', '1'};

void write_block(std::ofstream& os, const Eigen::ArrayXcd& c) {
  os.write(reinterpret_cast<const char*>(c.data()),
           static_cast<std::streamsize>(c.size() * sizeof(std::complex<double>)));
}

void read_block(std::ifstream& is, Eigen::ArrayXcd& c, std::int64_t count) {
  c.resize(count);
  is.read(reinterpret_cast<char*>(c.data()),
          static_cast<std::streamsize>(count * sizeof(std::complex<double>)));
  if (!is) throw std::runtime_error("snapshot: truncated coefficient block");
}
}  // namespace

void write_snapshot(const std::filesystem::path& file, const WaveState& state,
                    double s, double N) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string());
  os.write(kMagic, 4);
  std::uint32_t n = static_cast<std::uint32_t>(state.u.grid.n());
  double L = state.u.grid.box_length();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&L), sizeof L);
  os.write(reinterpret_cast<const char*>(&state.t), sizeof state.t);
  os.write(reinterpret_cast<const char*>(&s), sizeof s);
  os.write(reinterpret_cast<const char*>(&N), sizeof N);
  write_block(os, state.u.coeff);
  write_block(os, state.ut.coeff);
  if (!os) throw std::runtime_error("snapshot: write failed for " +
                                    file.string());
}

LoadedSnapshot read_snapshot(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("snapshot: bad magic in " + file.string());
  SnapshotHeader h{};
  is.read(reinterpret_cast<char*>(&h.n), sizeof h.n);
  is.read(reinterpret_cast<char*>(&h.L), sizeof h.L);
  is.read(reinterpret_cast<char*>(&h.time), sizeof h.time);
  is.read(reinterpret_cast<char*>(&h.s), sizeof h.s);
  is.read(reinterpret_cast<char*>(&h.N), sizeof h.N);
  if (!is) throw std::runtime_error("snapshot: truncated header");
  Grid3 grid(static_cast<int>(h.n), h.L);
  WaveState st{h.time, SpectralField(grid), SpectralField(grid)};
  read_block(is, st.u.coeff, grid.size());
  read_block(is, st.ut.coeff, grid.size());
  return {std::move(st), h};
}

void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                     double s, double N, const std::string& config_hash) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json man;
  man["dt"] = traj.dt;
  man["stride"] = traj.stride;
  man["nonlinear"] = traj.nonlinear;
  man["cubic_sign"] = traj.cubic_sign;
  man["n"] = traj.grid.n();
  man["L"] = traj.grid.box_length();
  man["s"] = s;
  man["N"] = N;
  man["config_hash"] = config_hash;
  std::vector<double> times;
  char name[32];
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::snprintf(name, sizeof name, "snap_%06zu.cwi", i);
    write_snapshot(dir / name, traj.states[i], s, N);
    times.push_back(traj.states[i].t);
  }
  man["times"] = times;
  write_text_file(dir / "manifest.json", man.dump(2) + "\n");
}

LoadedTrajectory load_trajectory(const std::filesystem::path& dir) {
  nlohmann::json man =
      nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  LoadedTrajectory out;
  out.traj.dt = man.at("dt").get<double>();
  out.traj.stride = man.at("stride").get<int>();
  out.traj.nonlinear = man.at("nonlinear").get<bool>();
  out.traj.cubic_sign = man.at("cubic_sign").get<double>();
  out.traj.grid = Grid3(man.at("n").get<int>(), man.at("L").get<double>());
  out.s = man.at("s").get<double>();
  out.N = man.at("N").get<double>();
  out.config_hash = man.at("config_hash").get<std::string>();
  auto times = man.at("times").get<std::vector<double>>();
  char name[32];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(name, sizeof name, "snap_%06zu.cwi", i);
    LoadedSnapshot snap = read_snapshot(dir / name);
    if (snap.state.u.grid != out.traj.grid)
      throw std::runtime_error("trajectory: snapshot grid mismatch");
    out.traj.states.push_back(std::move(snap.state));
  }
  if (out.traj.states.empty())
    throw std::runtime_error("trajectory: no snapshots listed in manifest");
  return out;
}

std::string fnv1a_hex(const std::string& content) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_file(const std::filesystem::path& file,
                     const std::string& content) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string());
  os << content;
  if (!os) throw std::runtime_error("write failed for " + file.string());
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace cwi
