#include "hifreq/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hifreq/core/error.hpp"
#include "hifreq/core/parallel.hpp"

namespace hifreq::eval {

namespace {

void require_same(const DepthMap& a, const DepthMap& b) {
  if (a.depth.shape() != b.depth.shape() || a.mask.shape() != b.mask.shape() || a.depth.shape() != a.mask.shape()) {
    fail(ErrorCode::ShapeMismatch, "depth maps differ in shape");
  }
}

// Summed-area table with one row/column of zero padding.
class Integral {
 public:
  Integral(std::size_t h, std::size_t w) : w1_(w + 1), s_((h + 1) * (w + 1), 0.0) {}

  void build(std::size_t h, std::size_t w, const std::function<double(std::size_t)>& value) {
    for (std::size_t r = 0; r < h; ++r) {
      double row = 0.0;
      for (std::size_t c = 0; c < w; ++c) {
        row += value(r * w + c);
        s_[(r + 1) * w1_ + c + 1] = s_[r * w1_ + c + 1] + row;
      }
    }
  }

  // Sum over rows [r0, r1) and columns [c0, c1).
  double sum(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) const {
    return s_[r1 * w1_ + c1] - s_[r0 * w1_ + c1] - s_[r1 * w1_ + c0] + s_[r0 * w1_ + c0];
  }

 private:
  std::size_t w1_;
  std::vector<double> s_;
};

Tensor joint_mask(const DepthMap& a, const DepthMap& b) {
  Tensor m(a.mask.shape(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (a.mask[i] != 0.0 && b.mask[i] != 0.0) ? 1.0 : 0.0;
  return m;
}

}  // namespace

DepthMap patch_normalize(const DepthMap& pred, const DepthMap& gt, const NormalizeConfig& cfg) {
  require_same(pred, gt);
  const std::size_t H = pred.height(), W = pred.width();
  if (cfg.patch % 2 == 0 || cfg.patch > H || cfg.patch > W) fail(ErrorCode::BadPatch, "patch must be odd and fit the image");
  const Tensor mask = joint_mask(pred, gt);
  const MaskedStats ps = masked_stats(pred.depth, mask);
  const MaskedStats gs = masked_stats(gt.depth, mask);
  if (ps.count == 0) fail(ErrorCode::EmptyMask, "patch_normalize: empty mask");

  // Centering by the global means keeps the summed squares well conditioned.
  auto m = [&](std::size_t i) { return mask[i]; };
  auto p = [&](std::size_t i) { return mask[i] != 0.0 ? pred.depth[i] - ps.mean : 0.0; };
  auto g = [&](std::size_t i) { return mask[i] != 0.0 ? gt.depth[i] - gs.mean : 0.0; };
  Integral n_i(H, W), p_i(H, W), pp_i(H, W), g_i(H, W), gg_i(H, W);
  n_i.build(H, W, m);
  p_i.build(H, W, p);
  pp_i.build(H, W, [&](std::size_t i) { return p(i) * p(i); });
  g_i.build(H, W, g);
  gg_i.build(H, W, [&](std::size_t i) { return g(i) * g(i); });

  const std::size_t half = cfg.patch / 2;
  const double need = cfg.min_coverage * static_cast<double>(cfg.patch * cfg.patch);
  DepthMap out(W, H);
  parallel_for(H, [&](std::size_t r_begin, std::size_t r_end) {
    for (std::size_t r = r_begin; r < r_end; ++r) {
      const std::size_t r0 = r >= half ? r - half : 0, r1 = std::min(H, r + half + 1);
      for (std::size_t c = 0; c < W; ++c) {
        const std::size_t i = r * W + c;
        if (mask[i] == 0.0) continue;
        const std::size_t c0 = c >= half ? c - half : 0, c1 = std::min(W, c + half + 1);
        const double n = n_i.sum(r0, r1, c0, c1);
        if (n < need) continue;
        const double mo = p_i.sum(r0, r1, c0, c1) / n;
        const double mg = g_i.sum(r0, r1, c0, c1) / n;
        const double so = std::sqrt(std::max(0.0, pp_i.sum(r0, r1, c0, c1) / n - mo * mo));
        const double sg = std::sqrt(std::max(0.0, gg_i.sum(r0, r1, c0, c1) / n - mg * mg));
        out.depth[i] = (p(i) - mo) / std::max(so, cfg.eps) * sg + mg + gs.mean;
        out.mask[i] = 1.0;
      }
    }
  });
  return out;
}

double rmse(const Tensor& pred, const Tensor& gt, const Tensor& mask) {
  if (pred.shape() != gt.shape() || pred.shape() != mask.shape()) fail(ErrorCode::ShapeMismatch, "rmse: shapes differ");
  double sum = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const double d = pred[i] - gt[i];
    sum += mask[i] * d * d;
    weight += mask[i];
  }
  if (!(weight > 0.0)) fail(ErrorCode::EmptyMask, "rmse: empty mask");
  return std::sqrt(sum / weight);
}

double rmse(const DepthMap& pred, const DepthMap& gt) {
  require_same(pred, gt);
  return rmse(pred.depth, gt.depth, joint_mask(pred, gt));
}

double rmse_norm(const DepthMap& pred, const DepthMap& gt, const NormalizeConfig& cfg) {
  const DepthMap norm = patch_normalize(pred, gt, cfg);
  return rmse(norm.depth, gt.depth, norm.mask);
}

Tensor error_map(const DepthMap& pred, const DepthMap& gt) {
  require_same(pred, gt);
  Tensor err(pred.depth.shape(), 0.0);
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (pred.mask[i] != 0.0 && gt.mask[i] != 0.0) err[i] = std::abs(pred.depth[i] - gt.depth[i]);
  }
  return err;
}

std::vector<std::uint8_t> error_levels(const Tensor& err, const Tensor& mask, double max_mm) {
  if (!(max_mm > 0.0)) fail(ErrorCode::InvalidArgument, "error map scale must be positive");
  if (err.shape() != mask.shape()) fail(ErrorCode::ShapeMismatch, "error map and mask differ");
  std::vector<std::uint8_t> levels(err.size(), 0);
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (mask[i] == 0.0) continue;
    levels[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(err[i] / max_mm, 0.0, 1.0)));
  }
  return levels;
}

std::vector<std::uint8_t> colorize_error(const Tensor& err, const Tensor& mask, double max_mm) {
  const std::vector<std::uint8_t> levels = error_levels(err, mask, max_mm);
  std::vector<std::uint8_t> rgb(levels.size() * 3, 0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (mask[i] == 0.0) continue;
    rgb[3 * i] = levels[i];
    rgb[3 * i + 1] = static_cast<std::uint8_t>(255 - levels[i]);
    rgb[3 * i + 2] = 128;
  }
  return rgb;
}

std::vector<std::uint8_t> decode_levels(const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() % 3 != 0) fail(ErrorCode::InvalidArgument, "rgb buffer size not a multiple of 3");
  std::vector<std::uint8_t> levels(rgb.size() / 3, 0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::uint8_t r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    if (r == 0 && g == 0 && b == 0) continue;
    if (b != 128 || r + g != 255) fail(ErrorCode::InvalidArgument, "color is not on the error map");
    levels[i] = r;
  }
  return levels;
}

const ModelSummary& EvalReport::model(const std::string& name) const {
  for (const ModelSummary& s : summary) {
    if (s.model_name == name) return s;
  }
  fail(ErrorCode::InvalidArgument, "no model named '" + name + "' in report");
}

std::vector<ModelSummary> summarize(const std::vector<ReportRow>& rows) {
  std::vector<ModelSummary> out;
  for (const ReportRow& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const ModelSummary& s) { return s.model_name == row.model_name; });
    if (it == out.end()) {
      out.push_back({row.model_name, 0.0, 0.0, 0});
      it = out.end() - 1;
    }
    it->mean_rmse_raw += row.rmse_raw;
    it->mean_rmse_norm += row.rmse_norm;
    ++it->count;
  }
  for (ModelSummary& s : out) {
    s.mean_rmse_raw /= static_cast<double>(s.count);
    s.mean_rmse_norm /= static_cast<double>(s.count);
  }
  return out;
}

EvalReport compare(const std::vector<NamedPredictor>& models, const std::vector<EvalCase>& cases,
                   const NormalizeConfig& cfg) {
  if (cases.empty()) fail(ErrorCode::EmptyDataset, "compare: no evaluation cases");
  EvalReport report;
  report.config = cfg;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const EvalCase& c = cases[k];
    report.rows.push_back({c.scene_id, kBaselineName, rmse(c.lowfreq, c.gt), rmse_norm(c.lowfreq, c.gt, cfg)});
    for (const NamedPredictor& m : models) {
      const DepthMap pred = m.predict(k);
      report.rows.push_back({c.scene_id, m.name, rmse(pred, c.gt), rmse_norm(pred, c.gt, cfg)});
    }
  }
  report.summary = summarize(report.rows);
  return report;
}

void write_report_csv(std::ostream& os, const EvalReport& report) {
  os << "scene_id,model_name,rmse_raw,rmse_norm\n";
  char nums[64];
  for (const ReportRow& row : report.rows) {
    std::snprintf(nums, sizeof nums, "%.9g,%.9g", row.rmse_raw, row.rmse_norm);
    os << row.scene_id << ',' << row.model_name << ',' << nums << '\n';
  }
}

}  // namespace hifreq::eval
