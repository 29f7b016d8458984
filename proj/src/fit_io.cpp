#include "msr/fit_io.hpp"

#include <fstream>

#include "msr/binio.hpp"
#include "msr/error.hpp"

namespace msr {

void write_fit(std::ostream& os, const FactorFit& fit) {
  if (fit.w.empty()) throw InvalidInput("write_fit: fit has no subject maps");
  const std::size_t v = fit.voxel_count();
  const std::size_t k = fit.k();
  for (const Matrix& w : fit.w)
    if (w.rows() != v || w.cols() != k) throw ShapeMismatch("write_fit: inconsistent subject maps");
  binio::put_magic(os, kFitMagic);
  binio::put<std::uint8_t>(os, static_cast<std::uint8_t>(fit.model));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(fit.w.size()));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(v));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(k));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(fit.s.cols()));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(fit.iterations));
  binio::put<std::uint8_t>(os, fit.converged ? 1 : 0);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(fit.objective_trace.size()));
  binio::put_span<double>(os, fit.objective_trace);
  for (const Matrix& w : fit.w) binio::put_span(os, w.values());
  binio::put_span(os, fit.s.values());
  if (!os) throw FormatError("write_fit: stream error");
}

FactorFit read_fit(std::istream& is) {
  binio::expect_magic(is, kFitMagic);
  FactorFit fit;
  const auto model = binio::get<std::uint8_t>(is, "model id");
  if (model > static_cast<std::uint8_t>(ModelId::SRGICA)) throw FormatError("unknown model id in fit file");
  fit.model = static_cast<ModelId>(model);
  const auto m = binio::get<std::uint32_t>(is, "subject count");
  const auto v = binio::get<std::uint32_t>(is, "voxel count");
  const auto k = binio::get<std::uint32_t>(is, "factor count");
  const auto t = binio::get<std::uint32_t>(is, "TR count");
  if (m == 0 || v == 0 || k == 0 || t == 0) throw FormatError("fit header has a zero dimension");
  fit.iterations = static_cast<int>(binio::get<std::uint32_t>(is, "iterations"));
  fit.converged = binio::get<std::uint8_t>(is, "converged flag") != 0;
  fit.objective_trace.resize(binio::get<std::uint32_t>(is, "trace length"));
  binio::get_span<double>(is, fit.objective_trace, "objective trace");
  for (std::uint32_t i = 0; i < m; ++i) {
    std::vector<double> values(std::size_t{v} * k);
    binio::get_span<double>(is, values, "subject map");
    fit.w.emplace_back(v, k, std::move(values));
  }
  std::vector<double> s(std::size_t{k} * t);
  binio::get_span<double>(is, s, "shared response");
  fit.s = Matrix(k, t, std::move(s));
  if (!binio::at_end(is)) throw FormatError("trailing bytes in fit file");
  return fit;
}

void save_fit(const std::filesystem::path& path, const FactorFit& fit) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  write_fit(os, fit);
}

FactorFit load_fit(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  return read_fit(is);
}

}  // namespace msr
