#include "hifreq/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "hifreq/core/error.hpp"

namespace hifreq::io {

namespace {

static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  fail(ErrorCode::IoError, path.string() + ": " + what);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 2) fail(ErrorCode::ShapeMismatch, "write_pfm expects an [H x W] image");
  const std::size_t H = image.dim(0), W = image.dim(1);
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail(path, "cannot open for writing");
  os << "Pf\n" << W << ' ' << H << "\n-1.0\n";
  std::vector<float> row(W);
  for (std::size_t r = H; r-- > 0;) {
    for (std::size_t c = 0; c < W; ++c) row[c] = static_cast<float>(image(r, c));
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(W * sizeof(float)));
  }
  if (!os) io_fail(path, "write failed");
}

Tensor read_pfm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail(path, "cannot open for reading");
  std::string magic;
  long long w = 0, h = 0;
  double scale = 0.0;
  is >> magic >> w >> h >> scale;
  if (!is || magic != "Pf") io_fail(path, "not a single-channel PFM");
  if (w <= 0 || h <= 0) io_fail(path, "bad PFM dimensions");
  if (scale >= 0.0) io_fail(path, "big-endian PFM not supported");
  is.get();  // single whitespace before the raster
  const auto W = static_cast<std::size_t>(w), H = static_cast<std::size_t>(h);
  Tensor out({H, W});
  std::vector<float> row(W);
  for (std::size_t r = H; r-- > 0;) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(W * sizeof(float)));
    if (!is) io_fail(path, "truncated PFM raster");
    for (std::size_t c = 0; c < W; ++c) out(r, c) = row[c];
  }
  return out;
}

void write_depth_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  Tensor img(depth.depth.shape(), 0.0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (depth.mask[i] == 0.0) continue;
    if (!(depth.depth[i] > 0.0)) fail(ErrorCode::InvalidArgument, "valid depth must be positive to be stored");
    img[i] = depth.depth[i];
  }
  write_pfm(path, img);
}

DepthMap read_depth_pfm(const std::filesystem::path& path) {
  Tensor d = read_pfm(path);
  Tensor m(d.shape(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) m[i] = d[i] > 0.0 ? 1.0 : 0.0;
  return DepthMap(std::move(d), std::move(m));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::filesystem::path& path, const Image8& image) {
  if (image.channels != 1 && image.channels != 3) fail(ErrorCode::InvalidArgument, "PNG needs 1 or 3 channels");
  if (image.width == 0 || image.height == 0) fail(ErrorCode::ZeroDim, "empty PNG");
  if (image.pixels.size() != image.width * image.height * image.channels) {
    fail(ErrorCode::SizeMismatch, "PNG pixel buffer size");
  }
  File f(std::fopen(path.string().c_str(), "wb"));
  if (!f) io_fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    io_fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    io_fail(path, "PNG encode failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = image.width * image.channels;
  for (std::size_t r = 0; r < image.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + r * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image8 read_png(const std::filesystem::path& path) {
  File f(std::fopen(path.string().c_str(), "rb"));
  if (!f) io_fail(path, "cannot open for reading");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    io_fail(path, "libpng init failed");
  }
  Image8 out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "PNG decode failed");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) != 8 || (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_GRAY)) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "only 8-bit gray or RGB PNGs are supported");
  }
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = color == PNG_COLOR_TYPE_RGB ? 3 : 1;
  out.pixels.resize(out.width * out.height * out.channels);
  const std::size_t stride = out.width * out.channels;
  for (std::size_t r = 0; r < out.height; ++r) png_read_row(png, out.pixels.data() + r * stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

Image8 to_gray8(const Tensor& image, double lo, double hi) {
  if (image.rank() != 2) fail(ErrorCode::ShapeMismatch, "to_gray8 expects an [H x W] image");
  if (!(hi > lo)) fail(ErrorCode::EmptyRange, "to_gray8 needs hi > lo");
  Image8 out{image.dim(1), image.dim(0), 1, std::vector<std::uint8_t>(image.size())};
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp((image[i] - lo) / (hi - lo), 0.0, 1.0)));
  }
  return out;
}

}  // namespace hifreq::io
