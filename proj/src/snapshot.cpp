#include "kst/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "kst/error.hpp"

namespace kst {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

std::uint64_t to_little_endian(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

}  // namespace

void write_snapshot(const std::filesystem::path& stem, const Grid3& grid, std::span<const double> values,
                    double time, const std::string& field) {
  if (values.size() != grid.size()) throw Error(ErrorCode::InvalidGrid, "snapshot size mismatch");
  {
    std::ofstream out(with_suffix(stem, ".raw"), std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + stem.string() + ".raw");
    for (double v : values) {
      const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
  }
  std::ofstream meta(with_suffix(stem, ".txt"));
  if (!meta) throw Error(ErrorCode::IoError, "cannot write " + stem.string() + ".txt");
  meta.precision(17);
  meta << "n_cells=" << grid.n() << "\n"
       << "L=" << grid.half_width() << "\n"
       << "h=" << grid.h() << "\n"
       << "time=" << time << "\n"
       << "field=" << field << "\n";
}

Snapshot read_snapshot(const std::filesystem::path& stem) {
  std::ifstream meta(with_suffix(stem, ".txt"));
  if (!meta) throw Error(ErrorCode::IoError, "cannot open " + stem.string() + ".txt");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"n_cells", "L", "time", "field"}) {
    if (!kv.count(key)) throw Error(ErrorCode::ParseError, std::string("snapshot sidecar lacks ") + key);
  }
  Snapshot s{Grid3(std::stoi(kv["n_cells"]), std::stod(kv["L"])), std::stod(kv["time"]), kv["field"], {}};

  std::ifstream raw(with_suffix(stem, ".raw"), std::ios::binary);
  if (!raw) throw Error(ErrorCode::IoError, "cannot open " + stem.string() + ".raw");
  s.values.resize(s.grid.size());
  for (double& v : s.values) {
    std::uint64_t le = 0;
    if (!raw.read(reinterpret_cast<char*>(&le), sizeof le)) {
      throw Error(ErrorCode::ParseError, "snapshot data shorter than n_cells^3 values");
    }
    v = std::bit_cast<double>(to_little_endian(le));
  }
  if (raw.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::ParseError, "snapshot data longer than n_cells^3 values");
  }
  return s;
}

}  // namespace kst
