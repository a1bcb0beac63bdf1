#include "hifreq/sparse/sparse_depth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <Eigen/Dense>

#include "hifreq/core/error.hpp"
#include "hifreq/core/parallel.hpp"

namespace hifreq::sparse {

SparseDepth sample_sparse(const DepthMap& depth_gt, const Tensor& pattern_cam, std::size_t stride, double noise_sigma,
                          Rng& rng) {
  if (!pattern_cam.same_shape(depth_gt.depth)) fail(ErrorCode::SizeMismatch, "pattern and depth sizes differ");
  if (stride < 1) fail(ErrorCode::InvalidArgument, "sampling stride must be >= 1");
  SparseDepth out;
  out.width = depth_gt.width();
  out.height = depth_gt.height();
  for (std::size_t v = 0; v < out.height; ++v) {
    for (std::size_t u = 0; u < out.width; ++u) {
      if (!depth_gt.valid(v, u) || pattern_cam(v, u) <= 0.5 || (u + v) % stride != 0) continue;
      const double noise = noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0;
      out.samples.push_back({u, v, depth_gt.depth(v, u) + noise});
    }
  }
  if (out.samples.empty()) fail(ErrorCode::NoSamples, "no lit, valid pixels to sample");
  return out;
}

void write_sparse(std::ostream& os, const SparseDepth& s) {
  os << "# " << s.width << ' ' << s.height << '\n';
  os.precision(17);
  for (const DepthSample& d : s.samples) os << d.u << ' ' << d.v << ' ' << d.depth << '\n';
}

SparseDepth read_sparse(std::istream& is) {
  SparseDepth s;
  char hash = 0;
  if (!(is >> hash >> s.width >> s.height) || hash != '#') fail(ErrorCode::IoError, "bad sparse depth header");
  DepthSample d;
  while (is >> d.u >> d.v >> d.depth) s.samples.push_back(d);
  return s;
}

Vec3 triangulate(const raster::PinholeDevice& cam, const raster::PinholeDevice& proj, const Eigen::Vector2d& cam_px,
                 const Eigen::Vector2d& proj_px) {
  const Ray a = cam.back_project(cam_px.x(), cam_px.y());
  const Ray b = proj.back_project(proj_px.x(), proj_px.y());
  // Closest points a.at(s), b.at(t) of the two lines.
  const Vec3 w0 = a.origin - b.origin;
  const double ab = a.direction.dot(b.direction);
  const double denom = 1.0 - ab * ab;
  if (denom < 1e-12) fail(ErrorCode::ParallelRays, "camera and projector rays are parallel");
  const double d = a.direction.dot(w0);
  const double e = b.direction.dot(w0);
  const double s = (ab * e - d) / denom;
  const double t = (e - ab * d) / denom;
  return 0.5 * (a.at(s) + b.at(t));
}

double RbfModel::evaluate(double u, double v) const {
  double f = affine[0] + affine[1] * u + affine[2] * v;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double du = u - centers[i].x();
    const double dv = v - centers[i].y();
    f += weights[static_cast<Eigen::Index>(i)] * tps_kernel(du * du + dv * dv);
  }
  return f;
}

RbfModel rbf_fit(const SparseDepth& s, double smoothing, std::size_t max_centers, Rng& rng) {
  if (smoothing < 0.0) fail(ErrorCode::InvalidArgument, "rbf smoothing must be non-negative");
  if (s.samples.size() < 3) fail(ErrorCode::SingularSystem, "rbf fit needs at least 3 samples");
  std::vector<std::size_t> pick(s.samples.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  if (max_centers >= 3 && pick.size() > max_centers) {
    // Partial Fisher-Yates, then restore scan order.
    for (std::size_t i = 0; i < max_centers; ++i) std::swap(pick[i], pick[i + rng.uniform_index(pick.size() - i)]);
    pick.resize(max_centers);
    std::sort(pick.begin(), pick.end());
  }

  const auto n = static_cast<Eigen::Index>(pick.size());
  RbfModel model;
  model.smoothing = smoothing;
  model.centers.reserve(pick.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DepthSample& d = s.samples[pick[static_cast<std::size_t>(i)]];
    model.centers.emplace_back(static_cast<double>(d.u), static_cast<double>(d.v));
    rhs[i] = d.depth;
  }

  {
    // The affine block needs three non-collinear centers.
    Eigen::MatrixXd P(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      P.row(i) << 1.0, model.centers[static_cast<std::size_t>(i)].x(), model.centers[static_cast<std::size_t>(i)].y();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) fail(ErrorCode::SingularSystem, "TPS centers are collinear");
  }
  if (smoothing == 0.0) {
    std::vector<std::pair<double, double>> keys;
    keys.reserve(model.centers.size());
    for (const auto& c : model.centers) keys.emplace_back(c.x(), c.y());
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
      fail(ErrorCode::SingularSystem, "duplicate TPS centers without smoothing");
    }
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 3, n + 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d& ci = model.centers[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k = tps_kernel((ci - model.centers[static_cast<std::size_t>(j)]).squaredNorm());
      A(i, j) = k;
      A(j, i) = k;
    }
    A(i, i) = smoothing;
    A(i, n) = A(n, i) = 1.0;
    A(i, n + 1) = A(n + 1, i) = ci.x();
    A(i, n + 2) = A(n + 2, i) = ci.y();
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) fail(ErrorCode::SingularSystem, "TPS solve produced non-finite weights");
  const double residual = (A * sol - rhs).norm() / std::max(1.0, rhs.norm());
  if (residual > 1e-6) fail(ErrorCode::SingularSystem, "TPS system is numerically singular");
  model.weights = sol.head(n);
  model.affine = sol.tail(3);
  return model;
}

DepthMap rbf_eval(const RbfModel& model, const Tensor& roi) {
  if (roi.rank() != 2) fail(ErrorCode::ShapeMismatch, "rbf_eval: roi must be 2-D");
  const std::size_t H = roi.dim(0);
  const std::size_t W = roi.dim(1);
  DepthMap out(W, H);
  out.mask = roi;
  parallel_for(H, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      for (std::size_t c = 0; c < W; ++c) {
        if (roi(r, c) != 0.0) out.depth(r, c) = model.evaluate(static_cast<double>(c), static_cast<double>(r));
      }
    }
  });
  return out;
}

}  // namespace hifreq::sparse
