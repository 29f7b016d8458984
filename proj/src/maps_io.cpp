#include <cmath>
#include <fstream>
#include <iomanip>

#include "msr/binio.hpp"
#include "msr/error.hpp"
#include "msr/searchlight.hpp"

namespace msr {

void write_maps(std::ostream& os, const ResultMaps& maps) {
  const std::size_t n = maps.dims.count();
  if (maps.accuracy.size() != n || maps.best_k.size() != n || maps.flags.size() != n)
    throw ShapeMismatch("write_maps: map sizes differ from grid");
  binio::put_magic(os, kMapsMagic);
  binio::put<std::uint32_t>(os, maps.dims.nx);
  binio::put<std::uint32_t>(os, maps.dims.ny);
  binio::put<std::uint32_t>(os, maps.dims.nz);
  for (std::size_t f = 0; f < n; ++f) {
    const bool def = maps.defined(f);
    binio::put<double>(os, def ? maps.accuracy[f] : std::numeric_limits<double>::quiet_NaN());
    binio::put<std::uint16_t>(os, def ? maps.best_k[f] : 0);
    binio::put<std::uint8_t>(os, maps.flags[f]);
  }
  if (!os) throw FormatError("write_maps: stream error");
}

ResultMaps read_maps(std::istream& is) {
  binio::expect_magic(is, kMapsMagic);
  GridDims d;
  d.nx = binio::get<std::uint32_t>(is, "nx");
  d.ny = binio::get<std::uint32_t>(is, "ny");
  d.nz = binio::get<std::uint32_t>(is, "nz");
  if (d.count() == 0) throw FormatError("maps header has a zero dimension");
  ResultMaps maps = ResultMaps::empty(d);
  for (std::size_t f = 0; f < d.count(); ++f) {
    maps.accuracy[f] = binio::get<double>(is, "accuracy");
    maps.best_k[f] = binio::get<std::uint16_t>(is, "k");
    maps.flags[f] = binio::get<std::uint8_t>(is, "flags");
    const bool def = maps.defined(f);
    if (def && (!(maps.accuracy[f] >= 0.0 && maps.accuracy[f] <= 1.0) || maps.best_k[f] == 0))
      throw FormatError("maps: defined voxel with invalid accuracy or k");
    if (!def && (!std::isnan(maps.accuracy[f]) || maps.best_k[f] != 0))
      throw FormatError("maps: absent voxel without the absent sentinel");
  }
  if (!binio::at_end(is)) throw FormatError("trailing bytes in maps file");
  return maps;
}

void save_maps(const std::filesystem::path& path, const ResultMaps& maps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  write_maps(os, maps);
}

ResultMaps load_maps(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  return read_maps(is);
}

void write_maps_csv(std::ostream& os, const ResultMaps& maps) {
  os << "x,y,z,accuracy,k\n";
  const auto flags = os.flags();
  os << std::setprecision(17);
  for (std::size_t f = 0; f < maps.dims.count(); ++f) {
    if (!maps.defined(f)) continue;
    const Coord c = unflatten(maps.dims, f);
    os << c.x << ',' << c.y << ',' << c.z << ',' << maps.accuracy[f] << ',' << maps.best_k[f] << '\n';
  }
  os.flags(flags);
}

}  // namespace msr
