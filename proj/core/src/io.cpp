#include "cpdesign/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cpdesign/hash.hpp"

namespace cpd {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFieldMagic = "cpdesign-field 1";
constexpr std::string_view kProvenance = "# config_hash ";

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_field(const FieldFile& field) {
  const auto& s = field.lattice.shape;
  if (field.data.size() != s.size()) throw ConfigError("field data does not match its lattice");
  std::ostringstream h;
  h.precision(17);
  h << kFieldMagic << '\n'
    << "dims " << s.nx << ' ' << s.ny << ' ' << s.nz << '\n'
    << "spacing " << field.lattice.dx << '\n'
    << "origin " << field.lattice.origin.x << ' ' << field.lattice.origin.y << ' ' << field.lattice.origin.z << '\n'
    << "component " << (field.component.empty() ? "scalar" : field.component) << '\n'
    << "config_hash " << hash_to_hex(field.config_hash) << '\n'
    << "format float64-le\n"
    << "end\n";
  std::string out = h.str();
  const auto* p = reinterpret_cast<const char*>(field.data.data());
  out.append(p, field.data.size() * sizeof(double));
  return out;
}

FieldFile decode_field(std::string_view bytes) {
  FieldFile f;
  std::size_t pos = 0;
  auto line = [&]() {
    const auto e = bytes.find('\n', pos);
    if (e == std::string_view::npos) throw ConfigError("truncated field header");
    std::string l(bytes.substr(pos, e - pos));
    pos = e + 1;
    return l;
  };
  if (line() != kFieldMagic) throw ConfigError("not a cpdesign field file");
  for (;;) {
    const std::string l = line();
    if (l == "end") break;
    std::istringstream in(l);
    std::string key;
    in >> key;
    if (key == "dims") {
      in >> f.lattice.shape.nx >> f.lattice.shape.ny >> f.lattice.shape.nz;
    } else if (key == "spacing") {
      in >> f.lattice.dx;
    } else if (key == "origin") {
      in >> f.lattice.origin.x >> f.lattice.origin.y >> f.lattice.origin.z;
    } else if (key == "component") {
      in >> f.component;
    } else if (key == "config_hash") {
      std::string hex;
      in >> hex;
      f.config_hash = hash_from_hex(hex);
    } else if (key == "format") {
      std::string fmt;
      in >> fmt;
      if (fmt != "float64-le") throw ConfigError("unsupported field format " + fmt);
    } else {
      throw ConfigError("unknown field header key " + key);
    }
    if (in.fail()) throw ConfigError("malformed field header line: " + l);
  }
  const auto& s = f.lattice.shape;
  if (s.nx < 1 || s.ny < 1 || s.nz < 1 || !(f.lattice.dx > 0.0)) throw ConfigError("invalid field dimensions");
  const std::size_t need = s.size() * sizeof(double);
  if (bytes.size() - pos != need) throw ConfigError("field payload size does not match its header");
  f.data.resize(s.size());
  std::memcpy(f.data.data(), bytes.data() + pos, need);
  return f;
}

void write_field(const fs::path& path, const FieldFile& field) { write_atomic(path, encode_field(field)); }

FieldFile read_field(const fs::path& path) { return decode_field(read_file(path)); }

std::string provenance_line(std::uint64_t config_hash) {
  return std::string(kProvenance) + hash_to_hex(config_hash) + "\n";
}

std::string potential_table(const std::vector<PotentialSample>& samples, std::uint64_t config_hash) {
  std::string out = provenance_line(config_hash);
  out += "x,y,z,U\n";
  for (const auto& s : samples) {
    out += format_number(s.atom.x) + "," + format_number(s.atom.y) + "," + format_number(s.atom.z) + "," +
           format_number(s.potential) + "\n";
  }
  return out;
}

std::string kernel_table(const ConvolutionKernel& kernel, std::uint64_t config_hash) {
  std::string out = provenance_line(config_hash);
  out += "t,K\n";
  for (std::size_t n = 0; n < kernel.samples.size(); ++n) {
    out += format_number(kernel.dt * static_cast<double>(n)) + "," + format_number(kernel.samples[n]) + "\n";
  }
  return out;
}

std::set<std::uint64_t> directory_hashes(const fs::path& dir) {
  std::set<std::uint64_t> found;
  if (!fs::is_directory(dir)) return found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string first;
    std::getline(in, first);
    if (first.rfind(kProvenance, 0) == 0) {
      found.insert(hash_from_hex(first.substr(kProvenance.size())));
    } else if (first == kFieldMagic) {
      std::string l;
      while (std::getline(in, l) && l != "end") {
        if (l.rfind("config_hash ", 0) == 0) found.insert(hash_from_hex(l.substr(12)));
      }
    }
  }
  return found;
}

void check_provenance(const fs::path& dir, std::uint64_t config_hash) {
  for (auto h : directory_hashes(dir)) {
    if (h != config_hash) {
      throw ConfigError("output directory " + dir.string() + " holds artifacts from configuration " + hash_to_hex(h));
    }
  }
}

}  // namespace cpd
