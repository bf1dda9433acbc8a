#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evopipe {

// 8-bit RGB frame, row-major, channels interleaved.
struct RawFrame {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // height * width * 3

  static RawFrame filled(int height, int width, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  static RawFrame zeros(int height, int width) { return filled(height, width, 0, 0, 0); }

  std::uint8_t at(int y, int x, int c) const { return data[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
  std::uint8_t& at(int y, int x, int c) { return data[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
};

// Real-valued frame in [0, 1], stored planar (channel, then row-major) so
// the convolution inner loops stream contiguous memory.
struct ProcessedFrame {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // 3 * height * width, plane c at c*height*width

  static ProcessedFrame zeros(int height, int width);

  const double* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * height * width; }
  double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
  double at(int y, int x, int c) const { return plane(c)[y * width + x]; }
  double& at(int y, int x, int c) { return plane(c)[y * width + x]; }
};

// Single convolution kernel, height x width x 3, weights interleaved by
// channel exactly as in the flat CMA-ES parameter layout.
struct Kernel {
  int height = 0;
  int width = 0;
  std::vector<double> weights;  // (y * width + x) * 3 + c

  static Kernel zeros(int height, int width);
  double at(int y, int x, int c) const { return weights[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
  double& at(int y, int x, int c) { return weights[static_cast<std::size_t>((y * width + x) * 3 + c)]; }
};

struct ResponseMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // row-major

  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kRawHeight = 210;
inline constexpr int kRawWidth = 160;
inline constexpr int kCropRows = 35;
inline constexpr int kImageSize = 96;

// Output extent of the valid convolution: h' = h_img - 2*floor(h_k/2).
inline constexpr int response_extent(int image_extent, int kernel_extent) {
  return image_extent - 2 * (kernel_extent / 2);
}

// Drops the topmost `rows` rows. rows >= height is an error.
RawFrame crop_top(const RawFrame& frame, int rows);

// Bilinear resize with a corner-aligned sample grid, per channel, rounded
// back to 8 bits. Deterministic.
RawFrame resize_bilinear(const RawFrame& frame, int target_height, int target_width);

// Joint min-max normalization over all pixels and channels. A constant
// frame maps to all zeros.
ProcessedFrame normalize(const RawFrame& frame);

// crop_top(35) then resize to 96x96 then normalize. Input must be a
// 210x160 frame.
ProcessedFrame preprocess(const RawFrame& frame);

// Valid-padding cross-correlation summed over the three channels. Output
// dimensions follow response_extent for both odd and even kernels. Skips
// all-zero pixels, which makes game frames (mostly background) cheap; the
// result is identical to the dense sum.
ResponseMap convolve2d(const ProcessedFrame& image, const Kernel& kernel);

// Nonzero-pixel index over one frame, shared when several kernels are
// applied to the same image.
struct FrameIndex {
  int height = 0;
  int width = 0;
  std::vector<int> positions;  // y * width + x, row-major order
};

FrameIndex index_nonzero(const ProcessedFrame& image);
ResponseMap convolve2d(const ProcessedFrame& image, const Kernel& kernel, const FrameIndex& index);

// Naive quadruple-loop evaluation of the same contract. Serial reference:
// kept as the oracle for tests and the baseline for the benchmark.
ResponseMap convolve2d_reference(const ProcessedFrame& image, const Kernel& kernel);

// Binary PPM (P6) I/O used by the render subcommand. Processed frames are
// dumped after scaling back to 8 bits.
void write_ppm(const RawFrame& frame, const std::string& path);
void write_ppm(const ProcessedFrame& frame, const std::string& path);
RawFrame read_ppm(const std::string& path);

}  // namespace evopipe
