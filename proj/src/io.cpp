#include "herdsim/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace herdsim {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(content.data(), std::streamsize(content.size()));
  }
  std::filesystem::rename(tmp, path);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,kind,id";
  for (int k = 0; k < traj.d; ++k) out += ",x" + std::to_string(k + 1);
  out += "\n";
  const std::size_t d = static_cast<std::size_t>(traj.d);
  for (std::size_t node = 0; node < traj.nodes(); ++node) {
    const std::string t = format_double(traj.times[node]);
    for (std::size_t n = 0; n < traj.N; ++n) {
      out += t;
      out += ",X,";
      out += std::to_string(n);
      for (std::size_t k = 0; k < d; ++k) {
        out += ',';
        out += format_double(traj.X[node][n * d + k]);
      }
      out += '\n';
    }
    for (std::size_t i = 0; i < traj.m; ++i) {
      out += t;
      out += ",Y,";
      out += std::to_string(i);
      for (std::size_t k = 0; k < d; ++k) {
        out += ',';
        out += format_double(traj.Y[node][i * d + k]);
      }
      out += '\n';
    }
  }
  return out;
}

namespace {

template <class T>
void append_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T read_raw(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw std::runtime_error("truncated HERD1 stream");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

std::string trajectory_binary(const Trajectory& traj) {
  std::string out;
  out.reserve(32 + traj.nodes() * (traj.N + traj.m) *
                       static_cast<std::size_t>(traj.d) * 8);
  out += "HERD1";
  append_raw<std::uint8_t>(out, 1);
  append_raw<std::uint16_t>(out, 0);
  append_raw<std::uint32_t>(out, std::uint32_t(traj.d));
  append_raw<std::uint32_t>(out, std::uint32_t(traj.N));
  append_raw<std::uint32_t>(out, std::uint32_t(traj.m));
  append_raw<std::uint32_t>(out, std::uint32_t(traj.nodes()));
  append_raw<double>(out, traj.dt);
  for (std::size_t node = 0; node < traj.nodes(); ++node) {
    append_raw<double>(out, traj.times[node]);
    for (double v : traj.X[node]) append_raw<double>(out, v);
    for (double v : traj.Y[node]) append_raw<double>(out, v);
  }
  return out;
}

Trajectory parse_trajectory_binary(std::istream& in) {
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "HERD1", 5) != 0)
    throw std::runtime_error("not a HERD1 trajectory stream");
  const auto version = read_raw<std::uint8_t>(in);
  if (version != 1)
    throw std::runtime_error("unsupported HERD1 version " +
                             std::to_string(version));
  read_raw<std::uint16_t>(in);
  Trajectory traj;
  traj.d = int(read_raw<std::uint32_t>(in));
  traj.N = read_raw<std::uint32_t>(in);
  traj.m = read_raw<std::uint32_t>(in);
  const auto nodes = read_raw<std::uint32_t>(in);
  traj.dt = read_raw<double>(in);
  const std::size_t d = static_cast<std::size_t>(traj.d);
  for (std::uint32_t node = 0; node < nodes; ++node) {
    traj.times.push_back(read_raw<double>(in));
    std::vector<double> X(traj.N * d), Y(traj.m * d);
    for (double& v : X) v = read_raw<double>(in);
    for (double& v : Y) v = read_raw<double>(in);
    traj.X.push_back(std::move(X));
    traj.Y.push_back(std::move(Y));
  }
  return traj;
}

std::string flow_csv(const LawFlow& flow, std::size_t stride) {
  if (stride < 1) stride = 1;
  std::string out = "t,weight";
  for (int k = 0; k < flow.dim(); ++k) out += ",x" + std::to_string(k + 1);
  out += "\n";
  const std::size_t d = static_cast<std::size_t>(flow.dim());
  const std::string w = format_double(1.0 / double(flow.members()));
  auto emit = [&](std::size_t node) {
    const std::string t = format_double(flow.time(node));
    const auto states = flow.states(node);
    for (std::size_t i = 0; i < flow.members(); ++i) {
      out += t;
      out += ',';
      out += w;
      for (std::size_t k = 0; k < d; ++k) {
        out += ',';
        out += format_double(states[i * d + k]);
      }
      out += '\n';
    }
  };
  for (std::size_t node = 0; node < flow.nodes(); node += stride) emit(node);
  if ((flow.nodes() - 1) % stride != 0) emit(flow.nodes() - 1);
  return out;
}

std::string density_csv(const FpSolution& fp) {
  std::string out = "t,x,rho\n";
  for (std::size_t q = 0; q < fp.times.size(); ++q) {
    const std::string t = format_double(fp.times[q]);
    const auto& g = fp.densities[q];
    for (std::size_t i = 0; i < g.cells(); ++i) {
      out += t;
      out += ',';
      out += format_double(g.center(i));
      out += ',';
      out += format_double(g.rho()[i]);
      out += '\n';
    }
  }
  return out;
}

std::string herder_csv(const std::vector<double>& times,
                       const std::vector<std::vector<double>>& herders,
                       std::size_t m, int d) {
  std::string out = "t,herder";
  for (int k = 0; k < d; ++k) out += ",x" + std::to_string(k + 1);
  out += "\n";
  const std::size_t dd = static_cast<std::size_t>(d);
  for (std::size_t q = 0; q < times.size(); ++q) {
    const std::string t = format_double(times[q]);
    for (std::size_t i = 0; i < m; ++i) {
      out += t;
      out += ',';
      out += std::to_string(i);
      for (std::size_t k = 0; k < dd; ++k) {
        out += ',';
        out += format_double(herders[q][i * dd + k]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace herdsim
