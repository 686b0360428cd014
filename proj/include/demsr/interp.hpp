#pragma once

#include "demsr/grid.hpp"

namespace demsr {

/// Block replication by a power-of-two factor; cell_size shrinks by the factor.
Grid upsample_nn(const Grid& g, int factor);

/// Bilinear interpolation over the 4 surrounding coarse cell centers
/// (cell-centered alignment, shared lower-left corner). Fine centers outside
/// the hull of coarse centers clamp to border interpolation. Any nodata cell
/// among the 4 makes the output nodata.
Grid upsample_bilinear(const Grid& g, int factor);

/// Separable cubic convolution with kernel parameter a = -0.5 over the 4x4
/// coarse neighborhood, edge-replicated at borders. Requires at least 4x4.
Grid upsample_bicubic(const Grid& g, int factor);

/// Inverse distance weighting over the k nearest coarse centers with weights
/// d^-power; a fine center coincident with a coarse center copies its value.
Grid upsample_idw(const Grid& g, int factor, double power = 2.0, int k = 4);

/// Cubic convolution kernel weight at offset t (a = -0.5 unless overridden).
double cubic_kernel(double t, double a = -0.5);

}  // namespace demsr
