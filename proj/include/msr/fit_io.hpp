#pragma once

#include <filesystem>
#include <iosfwd>

#include "msr/models.hpp"

namespace msr {

// Layout (little-endian):
//   "MSRF1", u8 model_id, u32 m, u32 v, u32 k, u32 t,
//   u32 iterations, u8 converged, u32 trace_len, trace_len f64,
//   m blocks of v*k f64 (W_i, row-major), k*t f64 (S, row-major).
inline constexpr const char* kFitMagic = "MSRF1";

void write_fit(std::ostream& os, const FactorFit& fit);
FactorFit read_fit(std::istream& is);
void save_fit(const std::filesystem::path& path, const FactorFit& fit);
FactorFit load_fit(const std::filesystem::path& path);

}  // namespace msr
