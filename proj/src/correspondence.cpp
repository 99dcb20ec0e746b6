#include "camlidar/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "camlidar/errors.hpp"
#include "camlidar/rng.hpp"

namespace camlidar {

FlowField FlowField::empty(int width, int height) {
  FlowField f;
  f.width = width;
  f.height = height;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  f.du.assign(n, 0.0);
  f.dv.assign(n, 0.0);
  f.sigma_u.assign(n, 1.0);
  f.sigma_v.assign(n, 1.0);
  f.valid.assign(n, 0);
  return f;
}

int FlowField::valid_count() const {
  int n = 0;
  for (std::uint8_t v : valid) n += (v != 0);
  return n;
}

namespace {

void invalidate_pixel(FlowField& f, std::size_t i) {
  f.du[i] = 0.0;
  f.dv[i] = 0.0;
  f.sigma_u[i] = 1.0;
  f.sigma_v[i] = 1.0;
  f.valid[i] = 0;
}

std::vector<std::size_t> valid_indices(const FlowField& f) {
  std::vector<std::size_t> idx;
  idx.reserve(f.valid.size());
  for (std::size_t i = 0; i < f.valid.size(); ++i) {
    if (f.valid[i]) idx.push_back(i);
  }
  return idx;
}

}  // namespace

std::pair<LidarImage, FlowField> ground_truth_flow(const PointCloud& cloud,
                                                   const PoseSE3& init,
                                                   const PoseSE3& gt,
                                                   const CameraIntrinsics& k,
                                                   const ProjectionConfig& cfg) {
  LidarImage img = render_lidar_image(cloud, init, k, cfg);
  FlowField flow = FlowField::empty(img.width, img.height);
  const Eigen::Matrix3d r = gt.rotation_matrix();
  const Eigen::Vector3d& t = gt.translation();
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    if (!img.valid(i)) continue;
    const Eigen::Vector3d p_gt = r * cloud.points[img.source_index[i]] + t;
    if (p_gt.z() <= kDepthEpsilon) continue;  // pixel stays invalid
    flow.du[i] = (k.fx * p_gt.x() / p_gt.z() + k.cx) - img.u_sub[i];
    flow.dv[i] = (k.fy * p_gt.y() / p_gt.z() + k.cy) - img.v_sub[i];
    flow.valid[i] = 1;
  }
  return {std::move(img), std::move(flow)};
}

FlowField oracle_match(const FlowField& gt_flow, const OracleNoiseConfig& cfg) {
  if (cfg.gaussian_sigma < 0.0 || cfg.outlier_fraction < 0.0 ||
      cfg.outlier_fraction > 1.0 || cfg.outlier_range <= 0.0) {
    throw std::invalid_argument("oracle_match: invalid noise configuration");
  }
  FlowField out = gt_flow;
  Rng rng(cfg.rng_seed);
  const std::vector<std::size_t> idx = valid_indices(out);

  const double inlier_sigma = std::max(cfg.gaussian_sigma, 0.1);
  for (std::size_t i : idx) {
    out.du[i] += cfg.gaussian_sigma * rng.normal();
    out.dv[i] += cfg.gaussian_sigma * rng.normal();
    out.sigma_u[i] = inlier_sigma;
    out.sigma_v[i] = inlier_sigma;
  }

  const std::size_t n_out = static_cast<std::size_t>(
      std::llround(cfg.outlier_fraction * static_cast<double>(idx.size())));
  std::vector<std::size_t> pool = idx;
  for (std::size_t i = 0; i < n_out; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> outliers(pool.begin(), pool.begin() + n_out);
  std::sort(outliers.begin(), outliers.end());

  const double sig_lo = 5.0 * cfg.gaussian_sigma + 1.0;
  const double sig_hi = std::max(cfg.outlier_range, sig_lo);
  for (std::size_t i : outliers) {
    out.du[i] = rng.uniform(-cfg.outlier_range, cfg.outlier_range);
    out.dv[i] = rng.uniform(-cfg.outlier_range, cfg.outlier_range);
    out.sigma_u[i] = rng.uniform(sig_lo, sig_hi);
    out.sigma_v[i] = rng.uniform(sig_lo, sig_hi);
  }

  if (cfg.blind_sigma) {
    for (std::size_t i : idx) {
      out.sigma_u[i] = 1.0;
      out.sigma_v[i] = 1.0;
    }
  }
  return out;
}

FlowField filter_by_uncertainty(const FlowField& flow, double keep_quantile) {
  if (!(keep_quantile > 0.0) || keep_quantile > 1.0) {
    throw std::invalid_argument("filter_by_uncertainty: quantile must be in (0, 1]");
  }
  std::vector<std::size_t> idx = valid_indices(flow);
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil(keep_quantile * static_cast<double>(idx.size())));
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double sa = flow.sigma_u[a] + flow.sigma_v[a];
    const double sb = flow.sigma_u[b] + flow.sigma_v[b];
    if (sa != sb) return sa < sb;
    return a < b;
  });
  FlowField out = flow;
  for (std::size_t i = keep; i < idx.size(); ++i) invalidate_pixel(out, idx[i]);
  return out;
}

CorrespondenceSet to_correspondences(const LidarImage& image,
                                     const FlowField& flow,
                                     const PointCloud& cloud) {
  if (image.width != flow.width || image.height != flow.height) {
    throw DimensionMismatch("to_correspondences: image and flow sizes differ");
  }
  CorrespondenceSet set;
  for (std::size_t i = 0; i < flow.valid.size(); ++i) {
    if (!flow.valid[i]) continue;
    if (!image.valid(i)) {
      throw MalformedInput(
          "to_correspondences: flow marks a pixel with no source point");
    }
    const std::uint32_t src = image.source_index[i];
    if (src >= cloud.points.size()) {
      throw DimensionMismatch("to_correspondences: source index out of range");
    }
    set.points3d.push_back(cloud.points[src]);
    set.pixels2d.emplace_back(image.u_sub[i] + flow.du[i],
                              image.v_sub[i] + flow.dv[i]);
    set.weights.push_back(1.0 / (flow.sigma_u[i] + flow.sigma_v[i]));
  }
  return set;
}

FlowField upscale_flow(const FlowField& flow, int factor) {
  if (factor < 1) throw std::invalid_argument("upscale_flow: factor must be >= 1");
  FlowField out = FlowField::empty(flow.width * factor, flow.height * factor);
  const double f = static_cast<double>(factor);
  for (int v = 0; v < out.height; ++v) {
    for (int u = 0; u < out.width; ++u) {
      const std::size_t src = flow.at(u / factor, v / factor);
      const std::size_t dst = out.at(u, v);
      if (!flow.valid[src]) continue;
      out.du[dst] = flow.du[src] * f;
      out.dv[dst] = flow.dv[src] * f;
      out.sigma_u[dst] = flow.sigma_u[src] * f;
      out.sigma_v[dst] = flow.sigma_v[src] * f;
      out.valid[dst] = 1;
    }
  }
  return out;
}

namespace {

void write_exact(std::ofstream& os, const void* data, std::size_t bytes) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_exact(std::ifstream& is, void* data, std::size_t bytes,
                const std::string& path) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(is.gcount()) != bytes) {
    throw IoFailure("short read: " + path);
  }
}

void write_grid_f32(std::ofstream& os, const std::vector<double>& grid) {
  std::vector<float> g32(grid.begin(), grid.end());
  write_exact(os, g32.data(), g32.size() * sizeof(float));
}

void read_grid_f32(std::ifstream& is, std::vector<double>& grid,
                   const std::string& path) {
  std::vector<float> g32(grid.size());
  read_exact(is, g32.data(), g32.size() * sizeof(float), path);
  std::copy(g32.begin(), g32.end(), grid.begin());
}

}  // namespace

void save_flow_field(const FlowField& flow, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  write_exact(os, "FLOW", 4);
  const std::uint32_t w = static_cast<std::uint32_t>(flow.width);
  const std::uint32_t h = static_cast<std::uint32_t>(flow.height);
  write_exact(os, &w, 4);
  write_exact(os, &h, 4);
  write_grid_f32(os, flow.du);
  write_grid_f32(os, flow.dv);
  write_grid_f32(os, flow.sigma_u);
  write_grid_f32(os, flow.sigma_v);
  write_exact(os, flow.valid.data(), flow.valid.size());
  if (!os) throw IoFailure("write failed: " + path);
}

FlowField load_flow_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open: " + path);
  char magic[4];
  read_exact(is, magic, 4, path);
  if (std::memcmp(magic, "FLOW", 4) != 0) {
    throw MalformedInput("bad magic, expected FLOW: " + path);
  }
  std::uint32_t w = 0, h = 0;
  read_exact(is, &w, 4, path);
  read_exact(is, &h, 4, path);
  if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1ull << 31)) {
    throw MalformedInput("implausible flow size: " + path);
  }
  FlowField flow = FlowField::empty(static_cast<int>(w), static_cast<int>(h));
  read_grid_f32(is, flow.du, path);
  read_grid_f32(is, flow.dv, path);
  read_grid_f32(is, flow.sigma_u, path);
  read_grid_f32(is, flow.sigma_v, path);
  read_exact(is, flow.valid.data(), flow.valid.size(), path);
  return flow;
}

}  // namespace camlidar
