#include "msr/dataset_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "msr/binio.hpp"
#include "msr/error.hpp"

namespace msr {

void write_dataset(std::ostream& os, const SubjectDataset& dataset) {
  dataset.validate();
  const GridDims d = dataset.mask.dims();
  binio::put_magic(os, kDatasetMagic);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.subject_count()));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.voxel_count()));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.tr_count()));
  binio::put<std::uint32_t>(os, d.nx);
  binio::put<std::uint32_t>(os, d.ny);
  binio::put<std::uint32_t>(os, d.nz);
  binio::put<float>(os, static_cast<float>(dataset.tr_seconds));
  binio::put_span(os, dataset.mask.bytes());
  binio::put_span(os, dataset.grid.flat_coordinates());
  for (const Matrix& x : dataset.subjects) binio::put_span(os, x.values());
  if (!dataset.labels.empty()) {
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.labels.size()));
    for (const auto& l : dataset.labels) {
      binio::put<std::uint32_t>(os, l.start_tr);
      binio::put<std::uint32_t>(os, l.scene_id);
    }
  }
  if (!os) throw FormatError("write_dataset: stream error");
}

SubjectDataset read_dataset(std::istream& is) {
  binio::expect_magic(is, kDatasetMagic);
  const auto m = binio::get<std::uint32_t>(is, "subject count");
  const auto v = binio::get<std::uint32_t>(is, "voxel count");
  const auto t = binio::get<std::uint32_t>(is, "TR count");
  GridDims d;
  d.nx = binio::get<std::uint32_t>(is, "nx");
  d.ny = binio::get<std::uint32_t>(is, "ny");
  d.nz = binio::get<std::uint32_t>(is, "nz");
  const auto tr = binio::get<float>(is, "tr_seconds");
  if (m == 0 || v == 0 || t == 0 || d.count() == 0) throw FormatError("dataset header has a zero dimension");
  if (d.count() > (std::size_t{1} << 32)) throw FormatError("dataset grid too large");

  std::vector<std::uint8_t> bits(d.count());
  binio::get_span<std::uint8_t>(is, bits, "mask");
  for (auto b : bits)
    if (b > 1) throw FormatError("mask bytes must be 0 or 1");
  Mask mask = [&] {
    try {
      return Mask(d, std::move(bits));
    } catch (const InvalidInput& e) {
      throw FormatError(e.what());
    }
  }();
  VolumeGrid grid(mask);
  if (grid.voxel_count() != v) throw ShapeMismatch("dataset voxel count differs from mask population");

  std::vector<std::uint32_t> coords(v);
  binio::get_span<std::uint32_t>(is, coords, "voxel coordinates");
  for (std::size_t i = 0; i < v; ++i)
    if (coords[i] != grid.flat_of_row(i)) throw FormatError("voxel coordinates are not the mask order");

  std::vector<Matrix> subjects;
  subjects.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    std::vector<double> values(std::size_t{v} * t);
    binio::get_span<double>(is, values, "subject data");
    subjects.emplace_back(v, t, std::move(values));
  }

  std::vector<SceneInterval> labels;
  if (!binio::at_end(is)) {
    const auto n = binio::get<std::uint32_t>(is, "label count");
    labels.resize(n);
    for (auto& l : labels) {
      l.start_tr = binio::get<std::uint32_t>(is, "label start");
      l.scene_id = binio::get<std::uint32_t>(is, "label scene");
    }
    if (!binio::at_end(is)) throw FormatError("trailing bytes after label section");
  }
  try {
    return make_dataset(std::move(subjects), std::move(mask), tr, std::move(labels));
  } catch (const InvalidInput& e) {
    throw FormatError(e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const SubjectDataset& dataset) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  write_dataset(os, dataset);
}

SubjectDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  return read_dataset(is);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

}  // namespace msr
