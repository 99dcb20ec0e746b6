#include "camlidar/projection.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "camlidar/errors.hpp"

namespace camlidar {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

LidarImage make_empty_image(int width, int height) {
  LidarImage img;
  img.width = width;
  img.height = height;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  img.depth.assign(n, 0.0);
  img.source_index.assign(n, kEmptyIndex);
  img.u_sub.assign(n, 0.0);
  img.v_sub.assign(n, 0.0);
  return img;
}

void clear_pixel(LidarImage& img, std::size_t i) {
  img.depth[i] = 0.0;
  img.source_index[i] = kEmptyIndex;
  img.u_sub[i] = 0.0;
  img.v_sub[i] = 0.0;
}

// Sector layout: the window is split by its diagonals into north (up), east,
// south, west. Image v grows downward, so "north" is dv < 0. Pixels exactly
// on a diagonal belong to the clockwise-adjacent sector: NE->E, SE->S,
// SW->W, NW->N.
int sector_of(int du, int dv) {
  const int au = std::abs(du);
  const int av = std::abs(dv);
  if (av > au) return dv < 0 ? 0 : 2;  // N or S
  if (au > av) return du > 0 ? 1 : 3;  // E or W
  if (du > 0) return dv < 0 ? 1 : 2;   // NE->E, SE->S
  return dv < 0 ? 0 : 3;               // NW->N, SW->W
}

}  // namespace

int LidarImage::valid_count() const {
  int n = 0;
  for (std::uint32_t s : source_index) n += (s != kEmptyIndex);
  return n;
}

LidarImage render_lidar_image(const PointCloud& cloud, const PoseSE3& pose,
                              const CameraIntrinsics& k,
                              const ProjectionConfig& cfg) {
  if (cfg.max_depth <= 0.0) {
    throw std::invalid_argument("render_lidar_image: max_depth must be positive");
  }
  cloud.validate();
  LidarImage img = make_empty_image(k.width, k.height);
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Eigen::Vector3d& t = pose.translation();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Eigen::Vector3d p = r * cloud.points[i] + t;
    if (p.z() <= kDepthEpsilon || p.z() > cfg.max_depth) continue;
    const double u = k.fx * p.x() / p.z() + k.cx;
    const double v = k.fy * p.y() / p.z() + k.cy;
    const long ui = std::lround(u);
    const long vi = std::lround(v);
    if (ui < 0 || ui >= k.width || vi < 0 || vi >= k.height) continue;
    const std::size_t idx = img.at(static_cast<int>(ui), static_cast<int>(vi));
    if (img.source_index[idx] != kEmptyIndex && img.depth[idx] <= p.z()) {
      continue;
    }
    img.depth[idx] = p.z();
    img.source_index[idx] = static_cast<std::uint32_t>(i);
    img.u_sub[idx] = u;
    img.v_sub[idx] = v;
  }
  if (cfg.occlusion) {
    img = occlusion_filter(img, cloud, pose, *cfg.occlusion);
  }
  if (img.valid_count() == 0) {
    throw EmptyProjection("render_lidar_image: no point projects into the image");
  }
  return img;
}

LidarImage occlusion_filter(const LidarImage& image, const PointCloud& cloud,
                            const PoseSE3& pose, const OcclusionConfig& cfg) {
  if (cfg.kernel_size < 3 || cfg.kernel_size % 2 == 0) {
    throw std::invalid_argument("occlusion_filter: kernel_size must be odd and >= 3");
  }
  const int half = cfg.kernel_size / 2;
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Eigen::Vector3d& t = pose.translation();

  // Camera-frame coordinates for every valid pixel's source point.
  const std::size_t n = image.depth.size();
  std::vector<Eigen::Vector3d> cam(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!image.valid(i)) continue;
    const std::uint32_t src = image.source_index[i];
    if (src >= cloud.points.size()) {
      throw DimensionMismatch("occlusion_filter: source index out of range");
    }
    cam[i] = r * cloud.points[src] + t;
  }

  LidarImage out = image;
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const std::size_t ci = image.at(u, v);
      if (!image.valid(ci)) continue;
      const Eigen::Vector3d& p = cam[ci];
      const Eigen::Vector3d to_cam = -p.normalized();
      double best[4];
      bool seen[4] = {false, false, false, false};
      for (int dv = -half; dv <= half; ++dv) {
        const int vn = v + dv;
        if (vn < 0 || vn >= image.height) continue;
        for (int du = -half; du <= half; ++du) {
          if (du == 0 && dv == 0) continue;
          const int un = u + du;
          if (un < 0 || un >= image.width) continue;
          const std::size_t ni = image.at(un, vn);
          if (!image.valid(ni)) continue;
          const Eigen::Vector3d d = cam[ni] - p;
          const double dn = d.norm();
          if (dn < 1e-12) continue;
          const double alpha = to_cam.dot(d / dn);
          const int s = sector_of(du, dv);
          if (!seen[s] || alpha > best[s]) {
            best[s] = alpha;
            seen[s] = true;
          }
        }
      }
      bool any = false;
      double score = 0.0;
      for (int s = 0; s < 4; ++s) {
        if (seen[s]) {
          score += best[s];
          any = true;
        }
      }
      if (!any) continue;  // isolated point stays visible
      const bool greater = score > cfg.threshold;
      const bool visible =
          cfg.comparison == OcclusionComparison::VisibleIfGreater ? greater
                                                                  : !greater;
      if (!visible) clear_pixel(out, ci);
    }
  }
  return out;
}

std::vector<double> fourier_map(double d, int m) {
  if (m < 0) throw std::invalid_argument("fourier_map: m must be >= 0");
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(m) + 1);
  out.push_back(d);
  double scale = 1.0;
  for (int i = 0; i < m; ++i) {
    const double a = d * kPi * scale;
    out.push_back(std::sin(a));
    out.push_back(std::cos(a));
    scale *= 2.0;
  }
  return out;
}

std::pair<PointCloud, CameraIntrinsics> mirror_augmentation(
    const PointCloud& cloud, const CameraIntrinsics& k) {
  PointCloud mirrored = cloud;
  for (auto& p : mirrored.points) p.y() = -p.y();
  CameraIntrinsics mk = k;
  mk.cx = k.width - k.cx;
  return {std::move(mirrored), mk};
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

}  // namespace

void save_lidar_image(const LidarImage& image, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  write_exact(os, "LIMG", 4);
  const std::uint32_t w = static_cast<std::uint32_t>(image.width);
  const std::uint32_t h = static_cast<std::uint32_t>(image.height);
  write_exact(os, &w, 4);
  write_exact(os, &h, 4);
  std::vector<float> depth32(image.depth.begin(), image.depth.end());
  write_exact(os, depth32.data(), depth32.size() * sizeof(float));
  write_exact(os, image.source_index.data(),
              image.source_index.size() * sizeof(std::uint32_t));
  if (!os) throw IoFailure("write failed: " + path);
}

LidarImage load_lidar_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open: " + path);
  char magic[4];
  read_exact(is, magic, 4, path);
  if (std::memcmp(magic, "LIMG", 4) != 0) {
    throw MalformedInput("bad magic, expected LIMG: " + path);
  }
  std::uint32_t w = 0, h = 0;
  read_exact(is, &w, 4, path);
  read_exact(is, &h, 4, path);
  if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1ull << 31)) {
    throw MalformedInput("implausible image size: " + path);
  }
  LidarImage img = make_empty_image(static_cast<int>(w), static_cast<int>(h));
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> depth32(n);
  read_exact(is, depth32.data(), n * sizeof(float), path);
  read_exact(is, img.source_index.data(), n * sizeof(std::uint32_t), path);
  img.has_subpixel = false;
  for (std::size_t i = 0; i < n; ++i) {
    img.depth[i] = depth32[i];
    if (img.source_index[i] != kEmptyIndex) {
      img.u_sub[i] = static_cast<double>(i % w);
      img.v_sub[i] = static_cast<double>(i / w);
    }
  }
  return img;
}

}  // namespace camlidar
