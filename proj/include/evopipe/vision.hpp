#pragma once

#include <span>
#include <vector>

#include "evopipe/imaging.hpp"

namespace evopipe {

// Coordinates in response-map space, exactly as the argmax indexes the map.
struct Coordinate {
  int x = 0;
  int y = 0;
  bool operator==(const Coordinate&) const = default;
};

using CoordinateList = std::vector<Coordinate>;

// Ordered bank of k same-shaped kernels. The order is fixed for the life of
// the module: entry i of every locate() output comes from kernel i.
struct VisionModule {
  std::vector<Kernel> kernels;

  int kernel_count() const { return static_cast<int>(kernels.size()); }
};

// Argmax location of one response map; ties broken row-major (smallest y,
// then smallest x).
Coordinate argmax_location(const ResponseMap& map);

// Runs every kernel over the image and returns the per-kernel argmax
// coordinates, in kernel order.
CoordinateList locate(const VisionModule& vm, const ProcessedFrame& image);

// Flat genotype encoding: kernel-major, then row-major, then channel.
std::vector<double> to_parameters(const VisionModule& vm);
VisionModule from_parameters(std::span<const double> params, int kernel_count, int kernel_height, int kernel_width);

// Coordinates flattened as (x_1, y_1, ..., x_k, y_k) for the decision tree.
std::vector<double> coordinates_to_inputs(const CoordinateList& coords);

}  // namespace evopipe
