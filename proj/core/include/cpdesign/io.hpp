#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cpdesign/grid.hpp"
#include "cpdesign/kernel.hpp"
#include "cpdesign/potential.hpp"

namespace cpd {

/// Writes to `path.tmp` and renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Flat binary array with a short text header (dims, spacing, origin, component, config hash).
struct FieldFile {
  Lattice lattice;
  std::string component;
  std::uint64_t config_hash = 0;
  std::vector<double> data;
};

std::string encode_field(const FieldFile& field);
FieldFile decode_field(std::string_view bytes);
void write_field(const std::filesystem::path& path, const FieldFile& field);
FieldFile read_field(const std::filesystem::path& path);

/// First-line provenance tag used by every text artifact.
std::string provenance_line(std::uint64_t config_hash);

/// `x,y,z,U` table with 9 significant digits.
std::string potential_table(const std::vector<PotentialSample>& samples, std::uint64_t config_hash);

/// Two-column `t,K` dump.
std::string kernel_table(const ConvolutionKernel& kernel, std::uint64_t config_hash);

/// Config hashes found in the provenance tags of files in `dir` (non-recursive).
std::set<std::uint64_t> directory_hashes(const std::filesystem::path& dir);

/// Throws ConfigError if `dir` already holds artifacts from another configuration.
void check_provenance(const std::filesystem::path& dir, std::uint64_t config_hash);

std::string format_number(double v);

}  // namespace cpd
