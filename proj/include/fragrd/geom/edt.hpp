#pragma once

#include <fragrd/geom/raster.hpp>

#include <cstdint>
#include <vector>

namespace fragrd::geom {

/// Exact squared Euclidean distance transform (separable lower-envelope
/// algorithm). Distances are measured between cell centers, in cell units;
/// cells with no seed anywhere in the grid get +inf.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& seeds, const Grid& grid);

/// 1-D lower envelope of parabolas: out[q] = min_p (q - p)^2 + f[p].
void squared_edt_1d(const double* f, double* out, std::size_t n, std::vector<std::size_t>& v,
                    std::vector<double>& z);

} // namespace fragrd::geom
