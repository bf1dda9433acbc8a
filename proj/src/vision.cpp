#include "evopipe/vision.hpp"

#include <stdexcept>

namespace evopipe {

Coordinate argmax_location(const ResponseMap& map) {
  Coordinate best{0, 0};
  double best_value = map.data.empty() ? 0.0 : map.data[0];
  for (int y = 0; y < map.height; ++y) {
    const double* row = map.data.data() + static_cast<std::size_t>(y) * map.width;
    for (int x = 0; x < map.width; ++x) {
      if (row[x] > best_value) {  // strict: first occurrence wins row-major
        best_value = row[x];
        best = {x, y};
      }
    }
  }
  return best;
}

CoordinateList locate(const VisionModule& vm, const ProcessedFrame& image) {
  const FrameIndex index = index_nonzero(image);  // shared by all kernels
  CoordinateList coords;
  coords.reserve(vm.kernels.size());
  for (const Kernel& k : vm.kernels) coords.push_back(argmax_location(convolve2d(image, k, index)));
  return coords;
}

std::vector<double> to_parameters(const VisionModule& vm) {
  std::vector<double> params;
  std::size_t total = 0;
  for (const Kernel& k : vm.kernels) total += k.weights.size();
  params.reserve(total);
  for (const Kernel& k : vm.kernels) params.insert(params.end(), k.weights.begin(), k.weights.end());
  return params;
}

VisionModule from_parameters(std::span<const double> params, int kernel_count, int kernel_height,
                             int kernel_width) {
  const std::size_t per_kernel = static_cast<std::size_t>(kernel_height) * kernel_width * 3;
  if (kernel_count < 1 || params.size() != per_kernel * static_cast<std::size_t>(kernel_count))
    throw std::invalid_argument("from_parameters: expected k*h*w*3 = " +
                                std::to_string(per_kernel * static_cast<std::size_t>(kernel_count)) +
                                " values, got " + std::to_string(params.size()));
  VisionModule vm;
  vm.kernels.reserve(static_cast<std::size_t>(kernel_count));
  for (int i = 0; i < kernel_count; ++i) {
    Kernel k;
    k.height = kernel_height;
    k.width = kernel_width;
    const double* begin = params.data() + per_kernel * static_cast<std::size_t>(i);
    k.weights.assign(begin, begin + per_kernel);
    vm.kernels.push_back(std::move(k));
  }
  return vm;
}

std::vector<double> coordinates_to_inputs(const CoordinateList& coords) {
  std::vector<double> inputs;
  inputs.reserve(coords.size() * 2);
  for (const Coordinate& c : coords) {
    inputs.push_back(static_cast<double>(c.x));
    inputs.push_back(static_cast<double>(c.y));
  }
  return inputs;
}

}  // namespace evopipe
