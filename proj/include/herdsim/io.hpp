#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "herdsim/fokker_planck.hpp"
#include "herdsim/mckean_vlasov.hpp"
#include "herdsim/particle_system.hpp"

namespace herdsim {

/// Shortest round-trip decimal form ('.' decimal point, no locale).
std::string format_double(double v);

/// Write-then-rename so partially written artifacts are never observed.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Trajectory CSV: header t,kind,id,x1..xd; kind is X (follower) or Y
/// (herder), one row per agent per node.
std::string trajectory_csv(const Trajectory& traj);

/// Compact binary snapshots. Header: magic "HERD1", u8 version, u16 zero,
/// u32 d, u32 N, u32 m, u32 nodes, f64 dt; then per node f64 t followed by
/// the N*d follower and m*d herder coordinates. All integers and doubles
/// little-endian.
std::string trajectory_binary(const Trajectory& traj);
Trajectory parse_trajectory_binary(std::istream& in);

/// Law-flow snapshot CSV (t,weight,x1..xd), every `stride`-th node.
std::string flow_csv(const LawFlow& flow, std::size_t stride = 1);

/// Density trajectory CSV: t,x,rho.
std::string density_csv(const FpSolution& fp);

/// Herder path CSV: t,herder,x1..xd.
std::string herder_csv(const std::vector<double>& times,
                       const std::vector<std::vector<double>>& herders,
                       std::size_t m, int d);

/// FNV-1a 64-bit content hash, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace herdsim
