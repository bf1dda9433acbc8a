#include "evopipe/imaging.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace evopipe {

RawFrame RawFrame::filled(int height, int width, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RawFrame f;
  f.height = height;
  f.width = width;
  f.data.resize(static_cast<std::size_t>(height) * width * 3);
  for (std::size_t i = 0; i < f.data.size(); i += 3) {
    f.data[i] = r;
    f.data[i + 1] = g;
    f.data[i + 2] = b;
  }
  return f;
}

ProcessedFrame ProcessedFrame::zeros(int height, int width) {
  ProcessedFrame f;
  f.height = height;
  f.width = width;
  f.data.assign(static_cast<std::size_t>(height) * width * 3, 0.0);
  return f;
}

Kernel Kernel::zeros(int height, int width) {
  Kernel k;
  k.height = height;
  k.width = width;
  k.weights.assign(static_cast<std::size_t>(height) * width * 3, 0.0);
  return k;
}

RawFrame crop_top(const RawFrame& frame, int rows) {
  if (rows < 0 || rows >= frame.height)
    throw std::invalid_argument("crop_top: rows must be in [0, height)");
  RawFrame out;
  out.height = frame.height - rows;
  out.width = frame.width;
  const std::size_t offset = static_cast<std::size_t>(rows) * frame.width * 3;
  out.data.assign(frame.data.begin() + offset, frame.data.end());
  return out;
}

namespace {

struct Tap {
  int lo = 0;
  int hi = 0;
  double w_hi = 0.0;  // weight of the hi sample; lo gets 1 - w_hi
};

std::vector<Tap> make_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  for (int i = 0; i < dst; ++i) {
    // Corner-aligned grid: output corners sample input corners exactly.
    const double pos = dst > 1 ? static_cast<double>(i) * (src - 1) / (dst - 1) : 0.0;
    Tap t;
    t.lo = static_cast<int>(pos);
    t.hi = std::min(t.lo + 1, src - 1);
    t.w_hi = pos - t.lo;
    taps[static_cast<std::size_t>(i)] = t;
  }
  return taps;
}

const std::vector<Tap>& cached_taps(int src, int dst) {
  thread_local std::map<std::pair<int, int>, std::vector<Tap>> cache;  // node-stable references
  auto it = cache.find({src, dst});
  if (it == cache.end()) it = cache.emplace(std::make_pair(src, dst), make_taps(src, dst)).first;
  return it->second;
}

// Separable bilinear: a horizontal 2-tap pass into doubles, then a vertical
// 2-tap pass with final rounding. Same arithmetic, expression for
// expression, as the direct 4-tap form.
void resize_rows(const RawFrame& frame, int row_offset, int src_height, int target_height, int target_width,
                 RawFrame& out) {
  const auto& ytaps = cached_taps(src_height, target_height);
  const auto& xtaps = cached_taps(frame.width, target_width);

  thread_local std::vector<double> hpass;  // src_height x target_width x 3
  hpass.resize(static_cast<std::size_t>(src_height) * target_width * 3);
  for (int y = 0; y < src_height; ++y) {
    const std::uint8_t* row = frame.data.data() + (static_cast<std::size_t>(y + row_offset) * frame.width) * 3;
    double* dst = hpass.data() + static_cast<std::size_t>(y) * target_width * 3;
    for (int x = 0; x < target_width; ++x) {
      const Tap& tx = xtaps[static_cast<std::size_t>(x)];
      const std::uint8_t* lo = row + tx.lo * 3;
      const std::uint8_t* hi = row + tx.hi * 3;
      const double w = tx.w_hi;
      dst[3 * x] = (1.0 - w) * lo[0] + w * hi[0];
      dst[3 * x + 1] = (1.0 - w) * lo[1] + w * hi[1];
      dst[3 * x + 2] = (1.0 - w) * lo[2] + w * hi[2];
    }
  }

  out.height = target_height;
  out.width = target_width;
  out.data.resize(static_cast<std::size_t>(target_height) * target_width * 3);
  for (int y = 0; y < target_height; ++y) {
    const Tap& ty = ytaps[static_cast<std::size_t>(y)];
    const double* top = hpass.data() + static_cast<std::size_t>(ty.lo) * target_width * 3;
    const double* bot = hpass.data() + static_cast<std::size_t>(ty.hi) * target_width * 3;
    std::uint8_t* dst = out.data.data() + static_cast<std::size_t>(y) * target_width * 3;
    const double w = ty.w_hi;
    const int n = target_width * 3;
    for (int i = 0; i < n; ++i) {
      const double v = (1.0 - w) * top[i] + w * bot[i];
      // v is a convex combination of 8-bit values, so v + 0.5 truncated is
      // exactly lround(v) without the libm call.
      dst[i] = static_cast<std::uint8_t>(v + 0.5);
    }
  }
}

}  // namespace

RawFrame resize_bilinear(const RawFrame& frame, int target_height, int target_width) {
  if (target_height < 1 || target_width < 1)
    throw std::invalid_argument("resize_bilinear: target dims must be >= 1");
  RawFrame out;
  resize_rows(frame, 0, frame.height, target_height, target_width, out);
  return out;
}

ProcessedFrame normalize(const RawFrame& frame) {
  ProcessedFrame out = ProcessedFrame::zeros(frame.height, frame.width);
  if (frame.data.empty()) return out;
  std::uint8_t lo = 255, hi = 0;
  for (const std::uint8_t v : frame.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) return out;  // constant frame -> all zeros
  const double lo_d = lo;
  const double scale = 1.0 / (static_cast<double>(hi) - lo_d);
  const std::uint8_t* src = frame.data.data();
  double* r = out.plane(0);
  double* g = out.plane(1);
  double* b = out.plane(2);
  const std::size_t n = static_cast<std::size_t>(frame.height) * frame.width;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = (static_cast<double>(src[0]) - lo_d) * scale;
    g[i] = (static_cast<double>(src[1]) - lo_d) * scale;
    b[i] = (static_cast<double>(src[2]) - lo_d) * scale;
    src += 3;
  }
  return out;
}

ProcessedFrame preprocess(const RawFrame& frame) {
  if (frame.height != kRawHeight || frame.width != kRawWidth ||
      frame.data.size() != static_cast<std::size_t>(kRawHeight) * kRawWidth * 3)
    throw std::invalid_argument("preprocess: expected a 210x160x3 frame");
  // The crop is a row-offset view into the same bytes crop_top would copy,
  // so this equals normalize(resize_bilinear(crop_top(frame, 35), 96, 96))
  // value for value.
  thread_local RawFrame resized;
  resize_rows(frame, kCropRows, kRawHeight - kCropRows, kImageSize, kImageSize, resized);
  return normalize(resized);
}

namespace {

void check_kernel_fits(const ProcessedFrame& image, const Kernel& kernel) {
  if (kernel.height < 1 || kernel.width < 1 || kernel.height > image.height || kernel.width > image.width)
    throw std::invalid_argument("convolve2d: kernel must fit within the image");
}

}  // namespace

FrameIndex index_nonzero(const ProcessedFrame& image) {
  FrameIndex idx;
  idx.height = image.height;
  idx.width = image.width;
  const double* r = image.plane(0);
  const double* g = image.plane(1);
  const double* b = image.plane(2);
  const int n = image.height * image.width;
  for (int i = 0; i < n; ++i)
    if (r[i] != 0.0 || g[i] != 0.0 || b[i] != 0.0) idx.positions.push_back(i);
  return idx;
}

ResponseMap convolve2d(const ProcessedFrame& image, const Kernel& kernel, const FrameIndex& index) {
  check_kernel_fits(image, kernel);
  if (index.height != image.height || index.width != image.width)
    throw std::invalid_argument("convolve2d: index does not belong to this image");
  ResponseMap out;
  out.height = response_extent(image.height, kernel.height);
  out.width = response_extent(image.width, kernel.width);
  out.data.assign(static_cast<std::size_t>(out.height) * out.width, 0.0);

  const int w = image.width;
  const double* r_plane = image.plane(0);
  const double* g_plane = image.plane(1);
  const double* b_plane = image.plane(2);
  for (const int pix : index.positions) {
    const int y = pix / w;
    const int x = pix % w;
    const double r = r_plane[pix], g = g_plane[pix], b = b_plane[pix];
    const int ylo = std::max(0, y - kernel.height + 1);
    const int yhi = std::min(out.height - 1, y);
    const int xlo = std::max(0, x - kernel.width + 1);
    const int xhi = std::min(out.width - 1, x);
    for (int oy = ylo; oy <= yhi; ++oy) {
      const int ky = y - oy;
      double* row = out.data.data() + static_cast<std::size_t>(oy) * out.width;
      const double* wrow = kernel.weights.data() + static_cast<std::size_t>(ky) * kernel.width * 3;
      for (int ox = xlo; ox <= xhi; ++ox) {
        const double* wpix = wrow + static_cast<std::size_t>(x - ox) * 3;
        row[ox] += r * wpix[0] + g * wpix[1] + b * wpix[2];
      }
    }
  }
  return out;
}

ResponseMap convolve2d(const ProcessedFrame& image, const Kernel& kernel) {
  return convolve2d(image, kernel, index_nonzero(image));
}

ResponseMap convolve2d_reference(const ProcessedFrame& image, const Kernel& kernel) {
  check_kernel_fits(image, kernel);
  ResponseMap out;
  out.height = response_extent(image.height, kernel.height);
  out.width = response_extent(image.width, kernel.width);
  out.data.assign(static_cast<std::size_t>(out.height) * out.width, 0.0);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.height; ++ky)
        for (int kx = 0; kx < kernel.width; ++kx)
          for (int c = 0; c < 3; ++c) acc += image.at(y + ky, x + kx, c) * kernel.at(ky, kx, c);
      out.at(y, x) = acc;
    }
  return out;
}

void write_ppm(const RawFrame& frame, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
  f << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(frame.data.data()), static_cast<std::streamsize>(frame.data.size()));
}

void write_ppm(const ProcessedFrame& frame, const std::string& path) {
  RawFrame raw;
  raw.height = frame.height;
  raw.width = frame.width;
  raw.data.resize(static_cast<std::size_t>(frame.height) * frame.width * 3);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      for (int c = 0; c < 3; ++c)
        raw.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(frame.at(y, x, c) * 255.0), 0L, 255L));
  write_ppm(raw, path);
}

RawFrame read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_ppm: cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255) throw std::runtime_error("read_ppm: unsupported format in " + path);
  f.get();  // single whitespace after header
  RawFrame frame;
  frame.height = h;
  frame.width = w;
  frame.data.resize(static_cast<std::size_t>(h) * w * 3);
  f.read(reinterpret_cast<char*>(frame.data.data()), static_cast<std::streamsize>(frame.data.size()));
  if (!f) throw std::runtime_error("read_ppm: truncated file " + path);
  return frame;
}

}  // namespace evopipe
