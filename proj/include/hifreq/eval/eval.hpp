#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hifreq/core/depth_map.hpp"
#include "hifreq/core/tensor.hpp"

namespace hifreq::eval {

struct NormalizeConfig {
  std::size_t patch = 49;
  double min_coverage = 0.25;  // fraction of the window that must be masked
  double eps = 1e-9;
};

/// Sliding-window mean/std matching of `pred` to `gt`: each masked pixel is
/// re-standardized with the masked statistics of both maps over the window
/// centered on it. Pixels whose window coverage is below min_coverage are
/// dropped from the output mask. Throws BadPatch, ShapeMismatch.
DepthMap patch_normalize(const DepthMap& pred, const DepthMap& gt, const NormalizeConfig& cfg = {});

/// sqrt(sum mask (pred - gt)^2 / sum mask). Throws EmptyMask, ShapeMismatch.
double rmse(const Tensor& pred, const Tensor& gt, const Tensor& mask);

/// rmse over the intersection of both masks.
double rmse(const DepthMap& pred, const DepthMap& gt);

/// rmse after patch_normalize, over the normalized mask.
double rmse_norm(const DepthMap& pred, const DepthMap& gt, const NormalizeConfig& cfg = {});

/// |pred - gt| on the joint mask, 0 elsewhere.
Tensor error_map(const DepthMap& pred, const DepthMap& gt);

/// 8-bit RGB preview with a fixed scale: level = round(255 * min(err / max_mm, 1))
/// is drawn as (level, 255 - level, 128); pixels outside the mask are black.
std::vector<std::uint8_t> colorize_error(const Tensor& err, const Tensor& mask, double max_mm);
std::vector<std::uint8_t> error_levels(const Tensor& err, const Tensor& mask, double max_mm);

/// Recovers levels from colors (black decodes to 0). Throws InvalidArgument on a
/// color outside the map.
std::vector<std::uint8_t> decode_levels(const std::vector<std::uint8_t>& rgb);

struct ReportRow {
  std::string scene_id;
  std::string model_name;
  double rmse_raw = 0.0;
  double rmse_norm = 0.0;
};

struct ModelSummary {
  std::string model_name;
  double mean_rmse_raw = 0.0;
  double mean_rmse_norm = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<ModelSummary> summary;  // one per model, in first-appearance order
  NormalizeConfig config;

  const ModelSummary& model(const std::string& name) const;
};

struct EvalCase {
  std::string scene_id;
  DepthMap lowfreq;
  DepthMap gt;
};

/// Produces one prediction for a case.
using Predictor = std::function<DepthMap(std::size_t case_index)>;

struct NamedPredictor {
  std::string name;
  Predictor predict;
};

inline constexpr const char* kBaselineName = "lowfreq";

/// Scores every model and the low-frequency baseline on every case.
/// Throws EmptyDataset.
EvalReport compare(const std::vector<NamedPredictor>& models, const std::vector<EvalCase>& cases,
                   const NormalizeConfig& cfg = {});

/// Recomputes summary means from rows.
std::vector<ModelSummary> summarize(const std::vector<ReportRow>& rows);

/// "scene_id,model_name,rmse_raw,rmse_norm" rows.
void write_report_csv(std::ostream& os, const EvalReport& report);

}  // namespace hifreq::eval
