#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "camlidar/errors.hpp"
#include "camlidar/projection.hpp"
#include "helpers.hpp"

using namespace camlidar;

namespace {

PointCloud cam_frame_cloud(std::initializer_list<Eigen::Vector3d> pts) {
  PointCloud c;
  c.points = pts;
  return c;
}

// Dense frontal plane at depth z covering the pixel box [u0,u1]x[v0,v1]
// with the given pixel stride, expressed in the camera frame.
PointCloud plane_at_depth(const CameraIntrinsics& k, double z, int u0, int u1,
                          int v0, int v1, int stride) {
  PointCloud c;
  for (int v = v0; v <= v1; v += stride) {
    for (int u = u0; u <= u1; u += stride) {
      c.points.push_back(unproject_pixel(k, u, v, z));
    }
  }
  return c;
}

void append(PointCloud& dst, const PointCloud& src) {
  dst.points.insert(dst.points.end(), src.points.begin(), src.points.end());
}

}  // namespace

TEST_CASE("z-buffer keeps the nearest point per pixel") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const PointCloud cloud = cam_frame_cloud({{0.0, 0.0, 20.0}, {0.0, 0.0, 5.0}});
  const LidarImage img = render_lidar_image(cloud, PoseSE3(), k);
  CHECK(img.valid_count() == 1);
  const std::size_t c = img.at(320, 240);
  CHECK(img.source_index[c] == 1);
  CHECK(img.depth[c] == doctest::Approx(5.0));
}

TEST_CASE("exact depth ties resolve to the lower point index") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const Eigen::Vector3d p(1.0, -0.5, 12.0);
  PointCloud cloud = cam_frame_cloud({p, p, p});
  const LidarImage img = render_lidar_image(cloud, PoseSE3(), k);
  CHECK(img.valid_count() == 1);
  const PixelProjection px = project_point(k, p);
  CHECK(img.source_index[img.at(static_cast<int>(std::lround(px.u)),
                                static_cast<int>(std::lround(px.v)))] == 0);
}

TEST_CASE("pixel binning rounds to nearest, continuous projection retained") {
  const CameraIntrinsics k(100.0, 100.0, 50.0, 50.0, 100, 100);
  // u = 100 * 0.104 / 1 + 50 = 60.4, v = 100 * 0.206 + 50 = 70.6
  const PointCloud cloud = cam_frame_cloud({{0.104, 0.206, 1.0}});
  const LidarImage img = render_lidar_image(cloud, PoseSE3(), k);
  const std::size_t i = img.at(60, 71);
  REQUIRE(img.valid(i));
  CHECK(img.u_sub[i] == doctest::Approx(60.4).epsilon(1e-12));
  CHECK(img.v_sub[i] == doctest::Approx(70.6).epsilon(1e-12));
  CHECK(img.has_subpixel);
}

TEST_CASE("points behind the camera or beyond max depth are dropped") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  ProjectionConfig cfg;
  cfg.max_depth = 160.0;
  const PointCloud cloud = cam_frame_cloud({{0.0, 0.0, -3.0},
                                            {0.0, 0.0, 1e-7},
                                            {10.0, 0.0, 160.0001},
                                            {0.0, 0.0, 160.0},
                                            {1.0, 1.0, 30.0}});
  const LidarImage img = render_lidar_image(cloud, PoseSE3(), k, cfg);
  CHECK(img.valid_count() == 2);  // the z=160 point and the z=30 point
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    if (img.valid(i)) {
      CHECK(img.depth[i] > 0.0);
      CHECK(img.depth[i] <= cfg.max_depth);
    } else {
      CHECK(img.depth[i] == 0.0);
    }
  }
}

TEST_CASE("empty projection throws") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const PointCloud behind = cam_frame_cloud({{0.0, 0.0, -10.0}});
  CHECK_THROWS_AS(render_lidar_image(behind, PoseSE3(), k), EmptyProjection);
}

TEST_CASE("valid pixels satisfy the image invariants on a random scene") {
  Rng rng(11);
  const PoseSE3 view = camlidar::testing::random_pose(rng, 3.0);
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const PointCloud cloud = camlidar::testing::make_street_scene(view, 5000, rng);
  const LidarImage img = render_lidar_image(cloud, view, k);
  CHECK(img.valid_count() > 1000);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const std::size_t i = img.at(u, v);
      if (!img.valid(i)) continue;
      CHECK(img.source_index[i] < cloud.points.size());
      CHECK(std::lround(img.u_sub[i]) == u);
      CHECK(std::lround(img.v_sub[i]) == v);
      const Eigen::Vector3d p_cam = view.apply(cloud.points[img.source_index[i]]);
      CHECK(img.depth[i] == doctest::Approx(p_cam.z()).epsilon(1e-12));
    }
  }
}

TEST_CASE("occlusion filter removes points hidden behind a sparse wall") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  // Sparse foreground wall (stride 2) over [200,440]x[140,340], solid
  // background plane behind it; both frontal.
  PointCloud cloud = plane_at_depth(k, 10.0, 200, 440, 140, 340, 2);
  const std::size_t n_wall = cloud.points.size();
  append(cloud, plane_at_depth(k, 30.0, 1, 639, 1, 479, 3));

  OcclusionConfig occ;
  occ.comparison = OcclusionComparison::VisibleIfSmaller;
  const LidarImage raw = render_lidar_image(cloud, PoseSE3(), k);
  const LidarImage filtered = occlusion_filter(raw, cloud, PoseSE3(), occ);

  // The wall spans x in [-2.4, 2.4], y in [-2.0, 2.0] at z=10. A background
  // point is ray-blocked when the segment camera->point crosses that
  // rectangle.
  int blocked_total = 0, blocked_removed = 0, wall_kept = 0, wall_total = 0;
  for (std::size_t i = 0; i < raw.depth.size(); ++i) {
    if (!raw.valid(i)) continue;
    const std::uint32_t src = raw.source_index[i];
    const Eigen::Vector3d& p = cloud.points[src];
    if (src < n_wall) {
      ++wall_total;
      wall_kept += filtered.valid(i);
      continue;
    }
    const double s = 10.0 / p.z();
    const double x_hit = p.x() * s, y_hit = p.y() * s;
    const bool blocked = std::abs(x_hit) <= 2.4 && std::abs(y_hit) <= 2.0;
    if (blocked) {
      ++blocked_total;
      blocked_removed += !filtered.valid(i);
    }
  }
  REQUIRE(blocked_total > 500);
  CHECK(static_cast<double>(blocked_removed) / blocked_total >= 0.95);
  // The wall itself stays almost entirely visible.
  CHECK(static_cast<double>(wall_kept) / wall_total >= 0.95);
}

TEST_CASE("occlusion comparison direction flips the visible set") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  PointCloud cloud = plane_at_depth(k, 10.0, 300, 340, 220, 260, 2);
  append(cloud, cam_frame_cloud({unproject_pixel(k, 321, 241, 30.0)}));
  const std::uint32_t bg_index = static_cast<std::uint32_t>(cloud.points.size() - 1);

  const LidarImage raw = render_lidar_image(cloud, PoseSE3(), k);
  std::size_t bg_pixel = 0;
  for (std::size_t i = 0; i < raw.depth.size(); ++i) {
    if (raw.valid(i) && raw.source_index[i] == bg_index) bg_pixel = i;
  }
  REQUIRE(raw.valid(bg_pixel));

  OcclusionConfig occ;
  occ.comparison = OcclusionComparison::VisibleIfSmaller;
  CHECK_FALSE(occlusion_filter(raw, cloud, PoseSE3(), occ).valid(bg_pixel));
  occ.comparison = OcclusionComparison::VisibleIfGreater;
  CHECK(occlusion_filter(raw, cloud, PoseSE3(), occ).valid(bg_pixel));
}

TEST_CASE("isolated points survive the occlusion filter") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const PointCloud cloud = cam_frame_cloud({{0.0, 0.0, 25.0}});
  const LidarImage raw = render_lidar_image(cloud, PoseSE3(), k);
  for (OcclusionComparison cmp : {OcclusionComparison::VisibleIfGreater,
                                  OcclusionComparison::VisibleIfSmaller}) {
    OcclusionConfig occ;
    occ.comparison = cmp;
    CHECK(occlusion_filter(raw, cloud, PoseSE3(), occ).valid_count() == 1);
  }
}

TEST_CASE("occlusion filter validates the kernel size") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const PointCloud cloud = cam_frame_cloud({{0.0, 0.0, 25.0}});
  const LidarImage raw = render_lidar_image(cloud, PoseSE3(), k);
  OcclusionConfig occ;
  occ.kernel_size = 8;
  CHECK_THROWS_AS(occlusion_filter(raw, cloud, PoseSE3(), occ),
                  std::invalid_argument);
  occ.kernel_size = 1;
  CHECK_THROWS_AS(occlusion_filter(raw, cloud, PoseSE3(), occ),
                  std::invalid_argument);
}

TEST_CASE("fourier mapping values and length") {
  const std::vector<double> at0 = fourier_map(0.0, 3);
  REQUIRE(at0.size() == 7);
  CHECK(at0[0] == 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(at0[1 + 2 * i] - 0.0) < 1e-15);  // sin
    CHECK(std::abs(at0[2 + 2 * i] - 1.0) < 1e-15);  // cos
  }

  const std::vector<double> at1 = fourier_map(1.0, 12);
  REQUIRE(at1.size() == 25);
  CHECK(at1[0] == 1.0);
  CHECK(std::abs(at1[1]) < 1e-12);         // sin(pi)
  CHECK(std::abs(at1[2] + 1.0) < 1e-12);   // cos(pi)
  for (int i = 1; i < 12; ++i) {
    CHECK(std::abs(at1[1 + 2 * i]) < 1e-12);        // sin(2^i pi)
    CHECK(std::abs(at1[2 + 2 * i] - 1.0) < 1e-12);  // cos(2^i pi)
  }

  CHECK(fourier_map(0.37, 0) == std::vector<double>{0.37});
  CHECK(fourier_map(2.5, 12).size() == 25);
  CHECK_THROWS_AS(fourier_map(1.0, -1), std::invalid_argument);
}

TEST_CASE("mirror augmentation reflects projections about the image center") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  const PoseSE3 c = robot_to_pinhole();
  Rng rng(12);
  PointCloud cloud;
  for (int i = 0; i < 100; ++i) {
    // Robot frame: X forward. Keep points well in front of the camera.
    cloud.points.push_back({rng.uniform(5.0, 60.0), rng.uniform(-15.0, 15.0),
                            rng.uniform(-2.0, 6.0)});
  }
  const auto [mirrored, mk] = mirror_augmentation(cloud, k);
  CHECK(mk.cx == doctest::Approx(k.width - k.cx));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const PixelProjection a = project_point(k, c.apply(cloud.points[i]));
    const PixelProjection b = project_point(mk, c.apply(mirrored.points[i]));
    CHECK(b.u == doctest::Approx(k.width - a.u).epsilon(1e-12));
    CHECK(b.v == doctest::Approx(a.v).epsilon(1e-12));
  }
  // Mirroring twice restores the original scene and intrinsics.
  const auto [twice, k2] = mirror_augmentation(mirrored, mk);
  CHECK(k2.cx == doctest::Approx(k.cx));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    CHECK((twice.points[i] - cloud.points[i]).norm() == 0.0);
  }
}

TEST_CASE("lidar image IO roundtrip and error handling") {
  const CameraIntrinsics k = camlidar::testing::default_intrinsics();
  Rng rng(13);
  const PoseSE3 view = camlidar::testing::random_pose(rng, 2.0);
  const PointCloud cloud = camlidar::testing::make_street_scene(view, 2000, rng);
  const LidarImage img = render_lidar_image(cloud, view, k);

  const std::string path =
      (std::filesystem::temp_directory_path() / "camlidar_test.limg").string();
  save_lidar_image(img, path);
  const LidarImage back = load_lidar_image(path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  CHECK_FALSE(back.has_subpixel);
  CHECK(back.source_index == img.source_index);
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    CHECK(back.depth[i] == static_cast<double>(static_cast<float>(img.depth[i])));
    if (back.valid(i)) {
      CHECK(back.u_sub[i] == static_cast<double>(i % back.width));
      CHECK(back.v_sub[i] == static_cast<double>(i / back.width));
    }
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_lidar_image("/nonexistent/file.limg"), IoFailure);
  const std::string bad =
      (std::filesystem::temp_directory_path() / "camlidar_bad.limg").string();
  std::ofstream(bad, std::ios::binary) << "NOPE";
  CHECK_THROWS_AS(load_lidar_image(bad), MalformedInput);
  std::remove(bad.c_str());
}
