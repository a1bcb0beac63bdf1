#include "hifreq/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Core>

#include "hifreq/core/error.hpp"

namespace hifreq::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

// Upper bound on im2col buffer elements; larger images are unfolded in row tiles.
constexpr std::size_t kMaxColElements = std::size_t{1} << 23;

// Unfolding geometry: a `channels x img_h x img_w` image sampled on a
// `grid_h x grid_w` grid, grid point (gy, gx) and tap (ky, kx) reading image
// pixel (gy*stride - pad + ky, gx*stride - pad + kx).
struct Unfold {
  std::size_t channels, img_h, img_w, grid_h, grid_w, k, stride, pad;

  std::size_t rows() const { return channels * k * k; }
  std::size_t tile_rows() const { return std::max<std::size_t>(1, kMaxColElements / std::max<std::size_t>(1, rows() * grid_w)); }
};

template <typename T>
void im2col(const T* img, const Unfold& g, std::size_t g0, std::size_t g1, T* col) {
  const std::size_t n = (g1 - g0) * g.grid_w;
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        T* dst = col + ((c * g.k + ky) * g.k + kx) * n;
        for (std::size_t gy = g0; gy < g1; ++gy) {
          T* row = dst + (gy - g0) * g.grid_w;
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(gy * g.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.img_h)) {
            std::fill(row, row + g.grid_w, T{0});
            continue;
          }
          const T* src = img + (c * g.img_h + static_cast<std::size_t>(iy)) * g.img_w;
          if (g.stride == 1) {
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - pad;
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.grid_w),
                                                               static_cast<std::ptrdiff_t>(g.img_w) - shift);
            if (hi <= lo) {
              std::fill(row, row + g.grid_w, T{0});
              continue;
            }
            std::fill(row, row + lo, T{0});
            std::memcpy(row + lo, src + lo + shift, static_cast<std::size_t>(hi - lo) * sizeof(T));
            std::fill(row + hi, row + g.grid_w, T{0});
          } else {
            for (std::size_t gx = 0; gx < g.grid_w; ++gx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(gx * g.stride + kx) - pad;
              row[gx] = (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.img_w)) ? src[ix] : T{0};
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const Unfold& g, std::size_t g0, std::size_t g1, T* img) {
  const std::size_t n = (g1 - g0) * g.grid_w;
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const T* src = col + ((c * g.k + ky) * g.k + kx) * n;
        for (std::size_t gy = g0; gy < g1; ++gy) {
          const T* row = src + (gy - g0) * g.grid_w;
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(gy * g.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.img_h)) continue;
          T* dst = img + (c * g.img_h + static_cast<std::size_t>(iy)) * g.img_w;
          for (std::size_t gx = 0; gx < g.grid_w; ++gx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(gx * g.stride + kx) - pad;
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.img_w)) dst[ix] += row[gx];
          }
        }
      }
    }
  }
}

void check_rank4(const Shape& s, const char* what) {
  if (s.size() != 4) fail(ErrorCode::ShapeMismatch, std::string(what) + ": expected a [B x C x H x W] tensor");
}

template <typename T>
void check_conv(const BasicTensor<T>& x, const ConvLayer<T>& layer) {
  check_rank4(x.shape(), "conv2d");
  if (x.dim(1) != layer.in_channels()) {
    fail(ErrorCode::ShapeMismatch, "conv2d: input has " + std::to_string(x.dim(1)) + " channels, layer expects " +
                                       std::to_string(layer.in_channels()));
  }
  if (layer.kernel() % 2 == 0 || layer.kernels.dim(3) != layer.kernel()) {
    fail(ErrorCode::ShapeMismatch, "conv2d: kernel must be square with odd size");
  }
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const ConvLayer<T>& layer) {
  check_conv(x, layer);
  const std::size_t B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t Cout = layer.out_channels(), k = layer.kernel();
  const std::size_t HW = H * W;
  BasicTensor<T> y({B, Cout, H, W}, T{0});
  const Unfold g{Cin, H, W, H, W, k, 1, k / 2};
  const ConstMatMap<T> w(layer.kernels.data(), static_cast<Eigen::Index>(Cout), static_cast<Eigen::Index>(g.rows()));
  const std::size_t tile = g.tile_rows();
  std::vector<T> col;
  if (k > 1) col.resize(g.rows() * std::min(tile, H) * W);

  for (std::size_t b = 0; b < B; ++b) {
    const T* xb = x.data() + b * Cin * HW;
    T* yb = y.data() + b * Cout * HW;
    for (std::size_t g0 = 0; g0 < H; g0 += tile) {
      const std::size_t g1 = std::min(H, g0 + tile);
      const auto n = static_cast<Eigen::Index>((g1 - g0) * W);
      StridedMap<T> out(yb + g0 * W, static_cast<Eigen::Index>(Cout), n, Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
      if (k == 1) {
        const ConstStridedMap<T> in(xb + g0 * W, static_cast<Eigen::Index>(Cin), n,
                                    Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
        out.noalias() = w * in;
      } else {
        im2col(xb, g, g0, g1, col.data());
        const ConstMatMap<T> c(col.data(), static_cast<Eigen::Index>(g.rows()), n);
        out.noalias() = w * c;
      }
    }
    for (std::size_t co = 0; co < Cout; ++co) {
      const T bias = layer.bias[co];
      T* plane = yb + co * HW;
      for (std::size_t i = 0; i < HW; ++i) plane[i] += bias;
    }
  }
  return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& x, const ConvLayer<T>& layer, const BasicTensor<T>& dy,
                             bool need_dx) {
  check_conv(x, layer);
  const std::size_t B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t Cout = layer.out_channels(), k = layer.kernel();
  if (dy.shape() != Shape{B, Cout, H, W}) fail(ErrorCode::ShapeMismatch, "conv2d_backward: dY shape mismatch");
  const std::size_t HW = H * W;
  const Unfold g{Cin, H, W, H, W, k, 1, k / 2};
  const auto K = static_cast<Eigen::Index>(g.rows());

  ConvGrads<T> grads;
  grads.dkernels = BasicTensor<T>(layer.kernels.shape(), T{0});
  grads.dbias = BasicTensor<T>(layer.bias.shape(), T{0});
  if (need_dx) grads.dx = BasicTensor<T>(x.shape(), T{0});

  const ConstMatMap<T> w(layer.kernels.data(), static_cast<Eigen::Index>(Cout), K);
  MatMap<T> dw(grads.dkernels.data(), static_cast<Eigen::Index>(Cout), K);
  const std::size_t tile = g.tile_rows();
  std::vector<T> col(g.rows() * std::min(tile, H) * W);
  std::vector<T> dcol(need_dx ? col.size() : 0);

  for (std::size_t b = 0; b < B; ++b) {
    const T* xb = x.data() + b * Cin * HW;
    const T* dyb = dy.data() + b * Cout * HW;
    for (std::size_t g0 = 0; g0 < H; g0 += tile) {
      const std::size_t g1 = std::min(H, g0 + tile);
      const auto n = static_cast<Eigen::Index>((g1 - g0) * W);
      const ConstStridedMap<T> d(dyb + g0 * W, static_cast<Eigen::Index>(Cout), n,
                                 Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
      if (k == 1) {
        const ConstStridedMap<T> in(xb + g0 * W, static_cast<Eigen::Index>(Cin), n,
                                    Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
        dw.noalias() += d * in.transpose();
        if (need_dx) {
          StridedMap<T> dx(grads.dx.data() + b * Cin * HW + g0 * W, static_cast<Eigen::Index>(Cin), n,
                           Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
          dx.noalias() += w.transpose() * d;
        }
      } else {
        im2col(xb, g, g0, g1, col.data());
        const ConstMatMap<T> c(col.data(), K, n);
        dw.noalias() += d * c.transpose();
        if (need_dx) {
          MatMap<T> dc(dcol.data(), K, n);
          dc.noalias() = w.transpose() * d;
          col2im(dcol.data(), g, g0, g1, grads.dx.data() + b * Cin * HW);
        }
      }
    }
    for (std::size_t co = 0; co < Cout; ++co) {
      double s = 0.0;
      const T* plane = dyb + co * HW;
      for (std::size_t i = 0; i < HW; ++i) s += plane[i];
      grads.dbias[co] += static_cast<T>(s);
    }
  }
  return grads;
}

template <typename T>
BasicTensor<T> upconv2_forward(const BasicTensor<T>& x, const UpConvLayer<T>& layer) {
  check_rank4(x.shape(), "upconv2");
  if (x.dim(1) != layer.in_channels()) fail(ErrorCode::ShapeMismatch, "upconv2: input channel mismatch");
  const std::size_t B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t Cout = layer.out_channels();
  const std::size_t HW = H * W, OHW = 4 * HW;
  BasicTensor<T> y({B, Cout, 2 * H, 2 * W}, T{0});
  const Unfold g{Cout, 2 * H, 2 * W, H, W, 3, 2, 1};
  const auto K = static_cast<Eigen::Index>(g.rows());
  const ConstMatMap<T> w(layer.kernels.data(), static_cast<Eigen::Index>(Cin), K);
  const std::size_t tile = g.tile_rows();
  std::vector<T> col(g.rows() * std::min(tile, H) * W);

  for (std::size_t b = 0; b < B; ++b) {
    const T* xb = x.data() + b * Cin * HW;
    T* yb = y.data() + b * Cout * OHW;
    for (std::size_t g0 = 0; g0 < H; g0 += tile) {
      const std::size_t g1 = std::min(H, g0 + tile);
      const auto n = static_cast<Eigen::Index>((g1 - g0) * W);
      const ConstStridedMap<T> in(xb + g0 * W, static_cast<Eigen::Index>(Cin), n,
                                  Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
      MatMap<T> c(col.data(), K, n);
      c.noalias() = w.transpose() * in;
      col2im(col.data(), g, g0, g1, yb);
    }
    for (std::size_t co = 0; co < Cout; ++co) {
      const T bias = layer.bias[co];
      T* plane = yb + co * OHW;
      for (std::size_t i = 0; i < OHW; ++i) plane[i] += bias;
    }
  }
  return y;
}

template <typename T>
ConvGrads<T> upconv2_backward(const BasicTensor<T>& x, const UpConvLayer<T>& layer, const BasicTensor<T>& dy) {
  check_rank4(x.shape(), "upconv2");
  const std::size_t B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t Cout = layer.out_channels();
  if (Cin != layer.in_channels() || dy.shape() != Shape{B, Cout, 2 * H, 2 * W}) {
    fail(ErrorCode::ShapeMismatch, "upconv2_backward: shape mismatch");
  }
  const std::size_t HW = H * W, OHW = 4 * HW;
  const Unfold g{Cout, 2 * H, 2 * W, H, W, 3, 2, 1};
  const auto K = static_cast<Eigen::Index>(g.rows());

  ConvGrads<T> grads;
  grads.dx = BasicTensor<T>(x.shape(), T{0});
  grads.dkernels = BasicTensor<T>(layer.kernels.shape(), T{0});
  grads.dbias = BasicTensor<T>(layer.bias.shape(), T{0});
  const ConstMatMap<T> w(layer.kernels.data(), static_cast<Eigen::Index>(Cin), K);
  MatMap<T> dw(grads.dkernels.data(), static_cast<Eigen::Index>(Cin), K);
  const std::size_t tile = g.tile_rows();
  std::vector<T> col(g.rows() * std::min(tile, H) * W);

  for (std::size_t b = 0; b < B; ++b) {
    const T* xb = x.data() + b * Cin * HW;
    const T* dyb = dy.data() + b * Cout * OHW;
    for (std::size_t g0 = 0; g0 < H; g0 += tile) {
      const std::size_t g1 = std::min(H, g0 + tile);
      const auto n = static_cast<Eigen::Index>((g1 - g0) * W);
      im2col(dyb, g, g0, g1, col.data());
      const ConstMatMap<T> dc(col.data(), K, n);
      const ConstStridedMap<T> in(xb + g0 * W, static_cast<Eigen::Index>(Cin), n,
                                  Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
      StridedMap<T> dx(grads.dx.data() + b * Cin * HW + g0 * W, static_cast<Eigen::Index>(Cin), n,
                       Eigen::OuterStride<>(static_cast<Eigen::Index>(HW)));
      dx.noalias() = w * dc;
      dw.noalias() += in * dc.transpose();
    }
    for (std::size_t co = 0; co < Cout; ++co) {
      double s = 0.0;
      const T* plane = dyb + co * OHW;
      for (std::size_t i = 0; i < OHW; ++i) s += plane[i];
      grads.dbias[co] += static_cast<T>(s);
    }
  }
  return grads;
}

template <typename T>
PoolResult<T> maxpool2_forward(const BasicTensor<T>& x) {
  check_rank4(x.shape(), "maxpool2");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % 2 || W % 2) fail(ErrorCode::OddSize, "maxpool2 needs even height and width");
  const std::size_t OH = H / 2, OW = W / 2;
  PoolResult<T> out;
  out.y = BasicTensor<T>({B, C, OH, OW}, T{0});
  out.argmax.resize(out.y.size());
  for (std::size_t p = 0; p < B * C; ++p) {
    const T* in = x.data() + p * H * W;
    T* y = out.y.data() + p * OH * OW;
    std::uint32_t* arg = out.argmax.data() + p * OH * OW;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        std::size_t best = (2 * oy) * W + 2 * ox;
        for (std::size_t cand : {best + 1, best + W, best + W + 1}) {
          if (in[cand] > in[best]) best = cand;
        }
        y[oy * OW + ox] = in[best];
        arg[oy * OW + ox] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2_backward(const BasicTensor<T>& dy, const std::vector<std::uint32_t>& argmax,
                                 const Shape& x_shape) {
  check_rank4(x_shape, "maxpool2_backward");
  if (dy.rank() != 4 || dy.size() != argmax.size() || dy.dim(0) != x_shape[0] || dy.dim(1) != x_shape[1] ||
      2 * dy.dim(2) != x_shape[2] || 2 * dy.dim(3) != x_shape[3]) {
    fail(ErrorCode::ShapeMismatch, "maxpool2_backward: shape mismatch");
  }
  BasicTensor<T> dx(x_shape, T{0});
  const std::size_t plane_in = x_shape[2] * x_shape[3];
  const std::size_t plane_out = dy.dim(2) * dy.dim(3);
  for (std::size_t p = 0; p < x_shape[0] * x_shape[1]; ++p) {
    T* d = dx.data() + p * plane_in;
    for (std::size_t i = 0; i < plane_out; ++i) d[argmax[p * plane_out + i]] += dy[p * plane_out + i];
  }
  return dx;
}

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x) {
  BasicTensor<T> y = x;
  for (T& v : y.values()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
  if (!y.same_shape(dy)) fail(ErrorCode::ShapeMismatch, "relu_backward: shape mismatch");
  BasicTensor<T> dx(dy.shape(), T{0});
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = y[i] > T{0} ? dy[i] : T{0};
  return dx;
}

template <typename T>
BasicTensor<T> concat_forward(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  check_rank4(a.shape(), "concat");
  check_rank4(b.shape(), "concat");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    fail(ErrorCode::ShapeMismatch, "concat: batch/spatial sizes differ");
  }
  const std::size_t B = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), HW = a.dim(2) * a.dim(3);
  BasicTensor<T> y({B, Ca + Cb, a.dim(2), a.dim(3)}, T{0});
  for (std::size_t i = 0; i < B; ++i) {
    T* dst = y.data() + i * (Ca + Cb) * HW;
    std::copy_n(a.data() + i * Ca * HW, Ca * HW, dst);
    std::copy_n(b.data() + i * Cb * HW, Cb * HW, dst + Ca * HW);
  }
  return y;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_backward(const BasicTensor<T>& dy, std::size_t channels_a) {
  check_rank4(dy.shape(), "concat_backward");
  if (channels_a == 0 || channels_a >= dy.dim(1)) fail(ErrorCode::ShapeMismatch, "concat_backward: bad split");
  const std::size_t B = dy.dim(0), C = dy.dim(1), HW = dy.dim(2) * dy.dim(3);
  const std::size_t Cb = C - channels_a;
  BasicTensor<T> da({B, channels_a, dy.dim(2), dy.dim(3)}, T{0});
  BasicTensor<T> db({B, Cb, dy.dim(2), dy.dim(3)}, T{0});
  for (std::size_t i = 0; i < B; ++i) {
    const T* src = dy.data() + i * C * HW;
    std::copy_n(src, channels_a * HW, da.data() + i * channels_a * HW);
    std::copy_n(src + channels_a * HW, Cb * HW, db.data() + i * Cb * HW);
  }
  return {std::move(da), std::move(db)};
}

template <typename T>
void init_he_uniform(ConvLayer<T>& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.in_channels() * layer.kernel() * layer.kernel());
  const double bound = std::sqrt(6.0 / fan_in);
  for (T& v : layer.kernels.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  layer.bias.fill(T{0});
}

template <typename T>
void init_he_uniform(UpConvLayer<T>& layer, Rng& rng) {
  // Stride 2 with a 3x3 kernel: each output sees on average 9/4 taps per input channel.
  const double fan_in = static_cast<double>(layer.in_channels()) * 9.0 / 4.0;
  const double bound = std::sqrt(6.0 / fan_in);
  for (T& v : layer.kernels.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  layer.bias.fill(T{0});
}

#define HIFREQ_INSTANTIATE_LAYERS(T)                                                                          \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const ConvLayer<T>&);                        \
  template ConvGrads<T> conv2d_backward(const BasicTensor<T>&, const ConvLayer<T>&, const BasicTensor<T>&,   \
                                        bool);                                                                \
  template BasicTensor<T> upconv2_forward(const BasicTensor<T>&, const UpConvLayer<T>&);                     \
  template ConvGrads<T> upconv2_backward(const BasicTensor<T>&, const UpConvLayer<T>&, const BasicTensor<T>&); \
  template PoolResult<T> maxpool2_forward(const BasicTensor<T>&);                                             \
  template BasicTensor<T> maxpool2_backward(const BasicTensor<T>&, const std::vector<std::uint32_t>&,        \
                                            const Shape&);                                                    \
  template BasicTensor<T> relu_forward(const BasicTensor<T>&);                                                \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                        \
  template BasicTensor<T> concat_forward(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template std::pair<BasicTensor<T>, BasicTensor<T>> concat_backward(const BasicTensor<T>&, std::size_t);     \
  template void init_he_uniform(ConvLayer<T>&, Rng&);                                                         \
  template void init_he_uniform(UpConvLayer<T>&, Rng&);

HIFREQ_INSTANTIATE_LAYERS(float)
HIFREQ_INSTANTIATE_LAYERS(double)

}  // namespace hifreq::nn
