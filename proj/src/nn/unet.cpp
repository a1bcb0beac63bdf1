#include "hifreq/nn/unet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "hifreq/core/error.hpp"

namespace hifreq::nn {

namespace {

constexpr char kMagic[4] = {'U', 'N', 'W', '1'};

std::size_t conv_params(std::size_t cin, std::size_t cout, std::size_t k) { return cin * cout * k * k + cout; }

template <typename T>
void add_layer(std::vector<typename UNet<T>::ParamRef>& out, const std::string& name, ConvLayer<T>& l) {
  out.push_back({name + ".weight", &l.kernels});
  out.push_back({name + ".bias", &l.bias});
}

template <typename T>
void add_layer(std::vector<typename UNet<T>::ParamRef>& out, const std::string& name, UpConvLayer<T>& l) {
  out.push_back({name + ".weight", &l.kernels});
  out.push_back({name + ".bias", &l.bias});
}

template <typename T>
BasicTensor<T> conv_relu(const BasicTensor<T>& x, const ConvLayer<T>& layer) {
  BasicTensor<T> y = conv2d_forward(x, layer);
  for (T& v : y.values()) v = v > T{0} ? v : T{0};
  return y;
}

void check_input(const UNetArch& arch, const Shape& s) {
  if (s.size() != 4 || s[1] != arch.in_channels) {
    fail(ErrorCode::ShapeMismatch, "unet input must be [B x " + std::to_string(arch.in_channels) + " x H x W], got " +
                                       shape_string(s));
  }
  const std::size_t m = arch.size_multiple();
  if (s[2] % m || s[3] % m) {
    fail(ErrorCode::BadSize, "unet input height and width must be multiples of " + std::to_string(m));
  }
}

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

bool read_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

struct Record {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open checkpoint " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorCode::IoError, "not a UNW1 checkpoint: " + path.string());
  }
  std::vector<Record> records;
  std::uint32_t name_len = 0;
  while (read_u32(is, name_len)) {
    Record r;
    r.name.resize(name_len);
    std::uint32_t rank = 0;
    if (!is.read(r.name.data(), name_len) || !read_u32(is, rank) || rank == 0 || rank > 8) {
      fail(ErrorCode::IoError, "truncated checkpoint record in " + path.string());
    }
    for (std::uint32_t i = 0; i < rank; ++i) {
      std::uint32_t d = 0;
      if (!read_u32(is, d) || d == 0) fail(ErrorCode::IoError, "bad dimension in " + path.string());
      r.shape.push_back(d);
    }
    r.values.resize(shape_size(r.shape));
    for (float& f : r.values) {
      std::uint32_t bits = 0;
      if (!read_u32(is, bits)) fail(ErrorCode::IoError, "truncated values in " + path.string());
      f = std::bit_cast<float>(bits);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

std::size_t parameter_count(const UNetArch& a) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < a.levels; ++l) {
    const std::size_t cin = l == 0 ? a.in_channels : a.width(l - 1);
    n += conv_params(cin, a.width(l), 3) + conv_params(a.width(l), a.width(l), 3);
    n += conv_params(a.width(l + 1), a.width(l), 3);                                  // up
    n += conv_params(2 * a.width(l), a.width(l), 3) + conv_params(a.width(l), a.width(l), 3);  // decoder
  }
  n += conv_params(a.width(a.levels - 1), a.width(a.levels), 3) + conv_params(a.width(a.levels), a.width(a.levels), 3);
  n += conv_params(a.width(0), 1, 1);
  return n;
}

std::vector<std::string> parameter_manifest(const UNetArch& arch) {
  std::vector<std::string> names;
  for (const auto& p : UNet<float>(arch).parameters()) names.push_back(p.name);
  return names;
}

template <typename T>
UNet<T>::UNet(UNetArch arch) : arch_(arch) {
  if (arch.levels < 1 || arch.base_width < 1 || arch.in_channels < 1) {
    fail(ErrorCode::InvalidArgument, "unet needs at least one level, channel and feature");
  }
  for (std::size_t l = 0; l < arch.levels; ++l) {
    const std::size_t cin = l == 0 ? arch.in_channels : arch.width(l - 1);
    encoder.emplace_back(cin, arch.width(l));
    encoder.emplace_back(arch.width(l), arch.width(l));
    up.emplace_back(arch.width(l + 1), arch.width(l));
    decoder.emplace_back(2 * arch.width(l), arch.width(l));
    decoder.emplace_back(arch.width(l), arch.width(l));
  }
  bottleneck.emplace_back(arch.width(arch.levels - 1), arch.width(arch.levels));
  bottleneck.emplace_back(arch.width(arch.levels), arch.width(arch.levels));
  head = ConvLayer<T>(arch.width(0), 1, 1);
}

template <typename T>
std::vector<typename UNet<T>::ParamRef> UNet<T>::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t l = 0; l < arch_.levels; ++l) {
    add_layer<T>(out, "enc" + std::to_string(l) + ".conv0", encoder[2 * l]);
    add_layer<T>(out, "enc" + std::to_string(l) + ".conv1", encoder[2 * l + 1]);
  }
  add_layer<T>(out, "mid.conv0", bottleneck[0]);
  add_layer<T>(out, "mid.conv1", bottleneck[1]);
  for (std::size_t l = arch_.levels; l-- > 0;) {
    add_layer<T>(out, "up" + std::to_string(l), up[l]);
    add_layer<T>(out, "dec" + std::to_string(l) + ".conv0", decoder[2 * l]);
    add_layer<T>(out, "dec" + std::to_string(l) + ".conv1", decoder[2 * l + 1]);
  }
  add_layer<T>(out, "head", head);
  return out;
}

template <typename T>
std::vector<typename UNet<T>::ConstParamRef> UNet<T>::parameters() const {
  std::vector<ConstParamRef> out;
  for (auto& p : const_cast<UNet<T>*>(this)->parameters()) out.push_back({p.name, p.tensor});
  return out;
}

template <typename T>
std::size_t UNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor->size();
  return n;
}

template <typename T>
void UNet<T>::init(Rng& rng) {
  for (std::size_t l = 0; l < arch_.levels; ++l) {
    init_he_uniform(encoder[2 * l], rng);
    init_he_uniform(encoder[2 * l + 1], rng);
  }
  init_he_uniform(bottleneck[0], rng);
  init_he_uniform(bottleneck[1], rng);
  for (std::size_t l = arch_.levels; l-- > 0;) {
    init_he_uniform(up[l], rng);
    init_he_uniform(decoder[2 * l], rng);
    init_he_uniform(decoder[2 * l + 1], rng);
  }
  init_he_uniform(head, rng);
}

template <typename T>
BasicTensor<T> unet_forward(const UNet<T>& model, const BasicTensor<T>& input) {
  const UNetArch& a = model.arch();
  check_input(a, input.shape());
  std::vector<BasicTensor<T>> skip(a.levels);
  BasicTensor<T> cur = input;
  for (std::size_t l = 0; l < a.levels; ++l) {
    cur = conv_relu(cur, model.encoder[2 * l]);
    skip[l] = conv_relu(cur, model.encoder[2 * l + 1]);
    cur = maxpool2_forward(skip[l]).y;
  }
  cur = conv_relu(cur, model.bottleneck[0]);
  cur = conv_relu(cur, model.bottleneck[1]);
  for (std::size_t l = a.levels; l-- > 0;) {
    cur = upconv2_forward(cur, model.up[l]);
    cur = concat_forward(cur, skip[l]);
    skip[l] = BasicTensor<T>();
    cur = conv_relu(cur, model.decoder[2 * l]);
    cur = conv_relu(cur, model.decoder[2 * l + 1]);
  }
  return conv2d_forward(cur, model.head);
}

template <typename T>
BasicTensor<T> unet_forward(const UNet<T>& model, const BasicTensor<T>& input, UNetCache<T>& c) {
  const UNetArch& a = model.arch();
  check_input(a, input.shape());
  const std::size_t L = a.levels;
  c = UNetCache<T>{};
  c.input = input;
  c.enc_in.resize(L);
  c.enc_a.resize(L);
  c.skip.resize(L);
  c.pool_argmax.resize(L);
  c.up_in.resize(L);
  c.dec_in.resize(L);
  c.dec_a.resize(L);
  c.dec_b.resize(L);

  BasicTensor<T> cur = input;
  for (std::size_t l = 0; l < L; ++l) {
    c.enc_in[l] = std::move(cur);
    c.enc_a[l] = conv_relu(c.enc_in[l], model.encoder[2 * l]);
    c.skip[l] = conv_relu(c.enc_a[l], model.encoder[2 * l + 1]);
    PoolResult<T> pooled = maxpool2_forward(c.skip[l]);
    c.pool_argmax[l] = std::move(pooled.argmax);
    cur = std::move(pooled.y);
  }
  c.mid_in = std::move(cur);
  c.mid_a = conv_relu(c.mid_in, model.bottleneck[0]);
  c.mid_b = conv_relu(c.mid_a, model.bottleneck[1]);
  const BasicTensor<T>* prev = &c.mid_b;
  for (std::size_t l = L; l-- > 0;) {
    c.up_in[l] = *prev;
    c.dec_in[l] = concat_forward(upconv2_forward(c.up_in[l], model.up[l]), c.skip[l]);
    c.dec_a[l] = conv_relu(c.dec_in[l], model.decoder[2 * l]);
    c.dec_b[l] = conv_relu(c.dec_a[l], model.decoder[2 * l + 1]);
    prev = &c.dec_b[l];
  }
  return conv2d_forward(c.dec_b[0], model.head);
}

template <typename T>
UNet<T> unet_backward(const UNet<T>& model, const UNetCache<T>& c, const BasicTensor<T>& dy) {
  const std::size_t L = model.arch().levels;
  UNet<T> g(model.arch());
  auto take = [](ConvLayer<T>& dst, ConvGrads<T>& src) {
    dst.kernels = std::move(src.dkernels);
    dst.bias = std::move(src.dbias);
  };

  ConvGrads<T> head = conv2d_backward(c.dec_b[0], model.head, dy);
  take(g.head, head);
  BasicTensor<T> grad = std::move(head.dx);
  std::vector<BasicTensor<T>> dskip(L);
  for (std::size_t l = 0; l < L; ++l) {
    ConvGrads<T> b = conv2d_backward(c.dec_a[l], model.decoder[2 * l + 1], relu_backward(c.dec_b[l], grad));
    take(g.decoder[2 * l + 1], b);
    ConvGrads<T> a = conv2d_backward(c.dec_in[l], model.decoder[2 * l], relu_backward(c.dec_a[l], b.dx));
    take(g.decoder[2 * l], a);
    auto [dup, ds] = concat_backward(a.dx, model.up[l].out_channels());
    dskip[l] = std::move(ds);
    ConvGrads<T> u = upconv2_backward(c.up_in[l], model.up[l], dup);
    g.up[l].kernels = std::move(u.dkernels);
    g.up[l].bias = std::move(u.dbias);
    grad = std::move(u.dx);
  }
  ConvGrads<T> m1 = conv2d_backward(c.mid_a, model.bottleneck[1], relu_backward(c.mid_b, grad));
  take(g.bottleneck[1], m1);
  ConvGrads<T> m0 = conv2d_backward(c.mid_in, model.bottleneck[0], relu_backward(c.mid_a, m1.dx));
  take(g.bottleneck[0], m0);
  grad = std::move(m0.dx);
  for (std::size_t l = L; l-- > 0;) {
    BasicTensor<T> dskip_total = maxpool2_backward(grad, c.pool_argmax[l], c.skip[l].shape());
    for (std::size_t i = 0; i < dskip_total.size(); ++i) dskip_total[i] += dskip[l][i];
    ConvGrads<T> e1 = conv2d_backward(c.enc_a[l], model.encoder[2 * l + 1], relu_backward(c.skip[l], dskip_total));
    take(g.encoder[2 * l + 1], e1);
    // The network input needs no gradient.
    ConvGrads<T> e0 =
        conv2d_backward(c.enc_in[l], model.encoder[2 * l], relu_backward(c.enc_a[l], e1.dx), /*need_dx=*/l > 0);
    take(g.encoder[2 * l], e0);
    grad = std::move(e0.dx);
  }
  return g;
}

template <typename T>
void save_checkpoint(const UNet<T>& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::IoError, "cannot write checkpoint " + path.string());
  os.write(kMagic, 4);
  for (const auto& p : model.parameters()) {
    write_u32(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(os, static_cast<std::uint32_t>(p.tensor->rank()));
    for (std::size_t d : p.tensor->shape()) write_u32(os, static_cast<std::uint32_t>(d));
    for (T v : p.tensor->values()) write_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!os) fail(ErrorCode::IoError, "failed writing checkpoint " + path.string());
}

UNet<float> load_checkpoint(const std::filesystem::path& path) {
  const std::vector<Record> records = read_records(path);
  // enc0.conv0.weight is [base_width x in_channels x 3 x 3]; one encoder stage per "encN.conv0".
  UNetArch arch;
  std::size_t levels = 0;
  for (const Record& r : records) {
    if (r.name == "enc0.conv0.weight" && r.shape.size() == 4) {
      arch.base_width = r.shape[0];
      arch.in_channels = r.shape[1];
    }
    if (r.name.rfind("enc", 0) == 0 && r.name.find(".conv0.weight") != std::string::npos) ++levels;
  }
  if (levels == 0) fail(ErrorCode::ArchMismatch, "checkpoint has no encoder stages: " + path.string());
  arch.levels = levels;
  UNet<float> model(arch);
  load_checkpoint_into(model, path);
  return model;
}

template <typename T>
void load_checkpoint_into(UNet<T>& model, const std::filesystem::path& path) {
  const std::vector<Record> records = read_records(path);
  auto params = model.parameters();
  if (records.size() != params.size()) {
    fail(ErrorCode::ArchMismatch, "checkpoint has " + std::to_string(records.size()) + " tensors, model expects " +
                                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (records[i].name != params[i].name || records[i].shape != params[i].tensor->shape()) {
      fail(ErrorCode::ArchMismatch, "checkpoint tensor " + records[i].name + " " + shape_string(records[i].shape) +
                                        " does not match " + params[i].name + " " +
                                        shape_string(params[i].tensor->shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::transform(records[i].values.begin(), records[i].values.end(), params[i].tensor->data(),
                   [](float v) { return static_cast<T>(v); });
  }
}

#define HIFREQ_INSTANTIATE_UNET(T)                                                                   \
  template class UNet<T>;                                                                            \
  template BasicTensor<T> unet_forward(const UNet<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> unet_forward(const UNet<T>&, const BasicTensor<T>&, UNetCache<T>&);        \
  template UNet<T> unet_backward(const UNet<T>&, const UNetCache<T>&, const BasicTensor<T>&);        \
  template void save_checkpoint(const UNet<T>&, const std::filesystem::path&);                       \
  template void load_checkpoint_into(UNet<T>&, const std::filesystem::path&);

HIFREQ_INSTANTIATE_UNET(float)
HIFREQ_INSTANTIATE_UNET(double)

}  // namespace hifreq::nn
