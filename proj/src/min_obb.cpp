#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "dpack/geometry.hpp"

namespace dpack {
namespace {

using Samples = std::vector<Mat3>;

// Frames whose third axis covers the cap of directions within
// acos(1/sqrt(3)) + step of +z, twisted about that axis over a quarter turn.
// Every box frame is equivalent, under the 24 box symmetries, to one whose
// third axis lies in that cap, so this covers all box orientations.
Samples make_samples(double step) {
  const double cap = std::min(kPi / 2.0, std::acos(1.0 / std::sqrt(3.0)) + step);
  const double cap_area = 2.0 * kPi * (1.0 - std::cos(cap));
  const int n_dirs = std::max(1, static_cast<int>(std::ceil(cap_area / (step * step))));
  const int n_twist = std::max(1, static_cast<int>(std::ceil((kPi / 2.0) / step)));
  const double golden = kPi * (3.0 - std::sqrt(5.0));

  Samples out;
  out.reserve(static_cast<std::size_t>(n_dirs) * n_twist);
  for (int i = 0; i < n_dirs; ++i) {
    const double z = 1.0 - (1.0 - std::cos(cap)) * (i + 0.5) / n_dirs;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Vec3 dir(r * std::cos(phi), r * std::sin(phi), z);
    const Mat3 align = Quat::FromTwoVectors(Vec3::UnitZ(), dir).toRotationMatrix();
    for (int j = 0; j < n_twist; ++j) {
      const double psi = (kPi / 2.0) * j / n_twist;
      out.push_back(align * Eigen::AngleAxisd(psi, Vec3::UnitZ()).toRotationMatrix());
    }
  }
  return out;
}

std::shared_ptr<const Samples> samples_for(double step) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const Samples>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[step];
  if (!slot) slot = std::make_shared<const Samples>(make_samples(step));
  return slot;
}

class BoxVolume {
 public:
  BoxVolume(const Eigen::Matrix3Xd& pts, double floor) : pts_(pts), floor_(floor) {}

  double operator()(const Mat3& axes) const {
    const Eigen::Matrix3Xd local = axes.transpose() * pts_;
    const Vec3 ext = local.rowwise().maxCoeff() - local.rowwise().minCoeff();
    return ext.cwiseMax(2.0 * floor_).prod();
  }

 private:
  const Eigen::Matrix3Xd& pts_;
  double floor_;
};

Mat3 principal_axes(const Eigen::Matrix3Xd& pts, Vec3* spread) {
  const Vec3 mean = pts.rowwise().mean();
  const Eigen::Matrix3Xd centered = pts.colwise() - mean;
  const Mat3 cov = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Mat3 axes = eig.eigenvectors();
  if (axes.determinant() < 0.0) axes.col(0) = -axes.col(0);
  const Eigen::Matrix3Xd local = axes.transpose() * pts;
  *spread = local.rowwise().maxCoeff() - local.rowwise().minCoeff();
  return axes;
}

}  // namespace

std::size_t obb_search_size(double angular_step) {
  return samples_for(angular_step)->size() + 2;
}

Obb fit_obb(std::span<const Vec3> points, const Mat3& axes, double half_extent_floor) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : points) {
    const Vec3 l = axes.transpose() * p;
    lo = lo.cwiseMin(l);
    hi = hi.cwiseMax(l);
  }
  Obb box;
  box.half_extents = (0.5 * (hi - lo)).cwiseMax(half_extent_floor);
  box.center = axes * (0.5 * (hi + lo));
  box.orientation = Quat(axes).normalized();
  return box;
}

Obb min_obb(std::span<const Vec3> points, const ObbOptions& opts) {
  if (!(opts.angular_step > 0.0) || opts.angular_step > kPi / 4.0 + 1e-12) {
    throw InvalidInput("angular_step must lie in (0, pi/4]");
  }
  if (points.empty()) throw DegenerateInput("min_obb of an empty point set");

  const double scale = bounding_box(points).extent().norm();
  std::vector<Vec3> support;
  try {
    support = convex_hull(points, opts.hull).vertices;
  } catch (const DegenerateInput&) {
    // Flat input: keep every point, the spread check below decides.
    support.assign(points.begin(), points.end());
  }

  Eigen::Matrix3Xd pts(3, support.size());
  for (std::size_t i = 0; i < support.size(); ++i) pts.col(i) = support[i];

  Vec3 spread;
  const Mat3 pca = principal_axes(pts, &spread);
  const double flat = 1e-12 * std::max(scale, 1e-300);
  if ((spread.array() <= flat).count() >= 2) {
    throw DegenerateInput("point set has zero extent in two or more directions");
  }

  const BoxVolume volume(pts, opts.half_extent_floor);
  const auto& samples = *samples_for(opts.angular_step);
  // Grid candidates: identity, PCA frame, then the samples.
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(samples.size() + 2);
  auto frame = [&](std::size_t i) -> Mat3 {
    if (i == 0) return Mat3::Identity();
    if (i == 1) return pca;
    return samples[i - 2];
  };
  for (std::size_t i = 0; i < samples.size() + 2; ++i) scored.emplace_back(volume(frame(i)), i);
  const std::size_t seeds = std::min<std::size_t>(std::max(1, opts.refine_seeds), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + seeds, scored.end());

  // Coordinate descent on small rotations about the current box axes, from
  // each of the best grid candidates; several seeds avoid shallow basins.
  Mat3 best = frame(scored.front().second);
  double best_v = scored.front().first;
  for (std::size_t s = 0; s < seeds; ++s) {
    Mat3 cur = frame(scored[s].second);
    double cur_v = scored[s].first;
    for (double step = opts.angular_step; step >= opts.refine_min_step; step *= 0.5) {
      bool improved = true;
      for (int guard = 0; improved && guard < 200; ++guard) {
        improved = false;
        for (int k = 0; k < 3; ++k) {
          for (double sign : {1.0, -1.0}) {
            const Mat3 trial =
                cur * Eigen::AngleAxisd(sign * step, Vec3::Unit(k)).toRotationMatrix();
            const double v = volume(trial);
            if (v < cur_v * (1.0 - 1e-12)) {
              cur_v = v;
              cur = trial;
              improved = true;
            }
          }
        }
      }
    }
    if (cur_v < best_v * (1.0 - 1e-12)) {
      best_v = cur_v;
      best = cur;
    }
  }

  return fit_obb(support, best, opts.half_extent_floor);
}

}  // namespace dpack
