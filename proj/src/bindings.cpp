#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "camlidar/cli.hpp"
#include "camlidar/errors.hpp"

namespace py = pybind11;
using namespace camlidar;

namespace {

template <typename T>
py::array_t<T> grid_array(const std::vector<T>& data, int height, int width) {
  py::array_t<T> out({static_cast<py::ssize_t>(height),
                      static_cast<py::ssize_t>(width)});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

Eigen::MatrixXd stack_rows(const std::vector<Eigen::Vector3d>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = rows[i].transpose();
  return m;
}

Eigen::MatrixXd stack_rows2(const std::vector<Eigen::Vector2d>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = rows[i].transpose();
  return m;
}

std::vector<Eigen::Vector3d> split_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& m, const char* name) {
  if (m.cols() != 3) {
    throw std::invalid_argument(std::string(name) + " must have shape (n, 3)");
  }
  std::vector<Eigen::Vector3d> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows[i] = m.row(i).transpose();
  return rows;
}

std::vector<Eigen::Vector2d> split_rows2(
    const Eigen::Ref<const Eigen::MatrixXd>& m, const char* name) {
  if (m.cols() != 2) {
    throw std::invalid_argument(std::string(name) + " must have shape (n, 2)");
  }
  std::vector<Eigen::Vector2d> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows[i] = m.row(i).transpose();
  return rows;
}

PoseSE3 pose_from_wxyz(const Eigen::Vector4d& q_wxyz,
                       const Eigen::Vector3d& t) {
  return PoseSE3(Eigen::Quaterniond(q_wxyz[0], q_wxyz[1], q_wxyz[2], q_wxyz[3]),
                 t);
}

Eigen::Vector4d wxyz_of(const PoseSE3& pose) {
  const Eigen::Quaterniond& q = pose.rotation();
  return {q.w(), q.x(), q.y(), q.z()};
}

py::array_t<std::uint8_t> rgb_array(
    const std::vector<std::array<std::uint8_t, 3>>& rgb, py::ssize_t rows,
    py::ssize_t cols) {
  py::array_t<std::uint8_t> out(cols > 0
                                    ? std::vector<py::ssize_t>{rows, cols, 3}
                                    : std::vector<py::ssize_t>{rows, 3});
  std::uint8_t* dst = out.mutable_data();
  for (const auto& c : rgb) {
    *dst++ = c[0];
    *dst++ = c[1];
    *dst++ = c[2];
  }
  return out;
}

std::vector<std::array<std::uint8_t, 3>> rgb_from_array(
    const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>&
        arr,
    int expected_dim, const char* name) {
  if (arr.ndim() != expected_dim || arr.shape(expected_dim - 1) != 3) {
    throw std::invalid_argument(std::string(name) + " must have a trailing " +
                                "dimension of 3 uint8 channels");
  }
  const std::uint8_t* src = arr.data();
  std::vector<std::array<std::uint8_t, 3>> out(
      static_cast<std::size_t>(arr.size() / 3));
  for (auto& c : out) {
    c = {src[0], src[1], src[2]};
    src += 3;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Camera-to-LiDAR matching core: map projection, flow-based "
            "correspondences, robust PnP, iterative localization, "
            "calibration metrics and dataset IO.";
  m.attr("__version__") = "0.1.0";
  m.attr("EMPTY_INDEX") = kEmptyIndex;
  m.attr("DEPTH_EPSILON") = kDepthEpsilon;

  // Exceptions. Subclasses registered after the base so their translators
  // take precedence.
  auto err = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<NonPositiveDepth>(m, "NonPositiveDepth", err);
  py::register_exception<EmptyProjection>(m, "EmptyProjection", err);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", err);
  py::register_exception<TooFewPoints>(m, "TooFewPoints", err);
  py::register_exception<DegenerateConfiguration>(m, "DegenerateConfiguration",
                                                  err);
  py::register_exception<NoConsensus>(m, "NoConsensus", err);
  py::register_exception<ZeroInitialError>(m, "ZeroInitialError", err);
  py::register_exception<MalformedScan>(m, "MalformedScan", err);
  py::register_exception<MalformedInput>(m, "MalformedInput", err);
  py::register_exception<LabelLengthMismatch>(m, "LabelLengthMismatch", err);
  py::register_exception<IoFailure>(m, "IoFailure", err);

  py::class_<PoseSE3>(m, "PoseSE3",
                      "Rigid transform stored as a canonical unit quaternion "
                      "plus translation.")
      .def(py::init<>())
      .def(py::init(&pose_from_wxyz), py::arg("quaternion_wxyz"),
           py::arg("translation"))
      .def_static("from_matrix", &PoseSE3::from_matrix, py::arg("matrix"))
      .def_static("from_rt", &PoseSE3::from_rt, py::arg("rotation"),
                  py::arg("translation"))
      .def_property_readonly("quaternion_wxyz", &wxyz_of)
      .def_property_readonly(
          "translation",
          [](const PoseSE3& p) -> Eigen::Vector3d { return p.translation(); })
      .def("rotation_matrix", &PoseSE3::rotation_matrix)
      .def("matrix", &PoseSE3::matrix)
      .def("inverse", &PoseSE3::inverse)
      .def("apply", &PoseSE3::apply, py::arg("point"))
      .def("__matmul__",
           [](const PoseSE3& a, const PoseSE3& b) { return compose(a, b); })
      .def("__repr__", [](const PoseSE3& p) {
        const Eigen::Vector4d q = wxyz_of(p);
        const Eigen::Vector3d& t = p.translation();
        return "PoseSE3(q_wxyz=[" + std::to_string(q[0]) + ", " +
               std::to_string(q[1]) + ", " + std::to_string(q[2]) + ", " +
               std::to_string(q[3]) + "], t=[" + std::to_string(t[0]) + ", " +
               std::to_string(t[1]) + ", " + std::to_string(t[2]) + "])";
      });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics",
                               "Pinhole camera: Z forward, X right, Y down.")
      .def(py::init<>())
      .def(py::init<double, double, double, double, int, int>(),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
           py::arg("width"), py::arg("height"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height);

  py::class_<PointCloud>(m, "PointCloud",
                         "Point set with optional intensity and color.")
      .def(py::init<>())
      .def_static(
          "from_arrays",
          [](const Eigen::Ref<const Eigen::MatrixXd>& points,
             const std::vector<float>& intensity) {
            PointCloud cloud;
            cloud.points = split_rows(points, "points");
            cloud.intensity = intensity;
            cloud.validate();
            return cloud;
          },
          py::arg("points"), py::arg("intensity") = std::vector<float>{})
      .def_property(
          "points",
          [](const PointCloud& c) { return stack_rows(c.points); },
          [](PointCloud& c, const Eigen::Ref<const Eigen::MatrixXd>& m) {
            c.points = split_rows(m, "points");
          })
      .def_readwrite("intensity", &PointCloud::intensity)
      .def_property(
          "colors",
          [](const PointCloud& c) {
            return rgb_array(c.color, static_cast<py::ssize_t>(c.color.size()),
                             0);
          },
          [](PointCloud& c,
             const py::array_t<std::uint8_t,
                               py::array::c_style | py::array::forcecast>& a) {
            c.color = rgb_from_array(a, 2, "colors");
          })
      .def_readwrite("color_valid", &PointCloud::color_valid)
      .def("__len__", &PointCloud::size)
      .def("size", &PointCloud::size)
      .def("validate", &PointCloud::validate);

  py::class_<PixelProjection>(m, "PixelProjection")
      .def_readonly("u", &PixelProjection::u)
      .def_readonly("v", &PixelProjection::v)
      .def_readonly("depth", &PixelProjection::depth)
      .def("__repr__", [](const PixelProjection& p) {
        return "PixelProjection(u=" + std::to_string(p.u) + ", v=" +
               std::to_string(p.v) + ", depth=" + std::to_string(p.depth) +
               ")";
      });

  py::class_<PoseError>(m, "PoseError")
      .def_readonly("translation_m", &PoseError::translation_m)
      .def_readonly("rotation_deg", &PoseError::rotation_deg);

  py::class_<LidarImage>(m, "LidarImage",
                         "Sparse depth image from a projected cloud; grids "
                         "have shape (height, width).")
      .def_readonly("width", &LidarImage::width)
      .def_readonly("height", &LidarImage::height)
      .def_readonly("has_subpixel", &LidarImage::has_subpixel)
      .def("valid_count", &LidarImage::valid_count)
      .def_property_readonly(
          "depth",
          [](const LidarImage& im) {
            return grid_array(im.depth, im.height, im.width);
          })
      .def_property_readonly(
          "source_index",
          [](const LidarImage& im) {
            return grid_array(im.source_index, im.height, im.width);
          })
      .def_property_readonly(
          "u_sub",
          [](const LidarImage& im) {
            return grid_array(im.u_sub, im.height, im.width);
          })
      .def_property_readonly("v_sub", [](const LidarImage& im) {
        return grid_array(im.v_sub, im.height, im.width);
      });

  py::enum_<OcclusionComparison>(m, "OcclusionComparison")
      .value("VISIBLE_IF_GREATER", OcclusionComparison::VisibleIfGreater)
      .value("VISIBLE_IF_SMALLER", OcclusionComparison::VisibleIfSmaller);

  py::class_<OcclusionConfig>(m, "OcclusionConfig")
      .def(py::init<>())
      .def_readwrite("kernel_size", &OcclusionConfig::kernel_size)
      .def_readwrite("threshold", &OcclusionConfig::threshold)
      .def_readwrite("comparison", &OcclusionConfig::comparison);

  py::class_<ProjectionConfig>(m, "ProjectionConfig")
      .def(py::init<>())
      .def_readwrite("max_depth", &ProjectionConfig::max_depth)
      .def_readwrite("occlusion", &ProjectionConfig::occlusion);

  py::class_<FlowField>(m, "FlowField",
                        "Dense pixel displacement field; grids have shape "
                        "(height, width).")
      .def(py::init<>())
      .def_static("empty", &FlowField::empty, py::arg("width"),
                  py::arg("height"))
      .def_readonly("width", &FlowField::width)
      .def_readonly("height", &FlowField::height)
      .def("valid_count", &FlowField::valid_count)
      .def_property_readonly(
          "du",
          [](const FlowField& f) { return grid_array(f.du, f.height, f.width); })
      .def_property_readonly(
          "dv",
          [](const FlowField& f) { return grid_array(f.dv, f.height, f.width); })
      .def_property_readonly(
          "sigma_u",
          [](const FlowField& f) {
            return grid_array(f.sigma_u, f.height, f.width);
          })
      .def_property_readonly(
          "sigma_v",
          [](const FlowField& f) {
            return grid_array(f.sigma_v, f.height, f.width);
          })
      .def_property_readonly("valid", [](const FlowField& f) {
        return grid_array(f.valid, f.height, f.width);
      });

  py::class_<OracleNoiseConfig>(m, "OracleNoiseConfig")
      .def(py::init<>())
      .def_readwrite("gaussian_sigma", &OracleNoiseConfig::gaussian_sigma)
      .def_readwrite("outlier_fraction", &OracleNoiseConfig::outlier_fraction)
      .def_readwrite("outlier_range", &OracleNoiseConfig::outlier_range)
      .def_readwrite("rng_seed", &OracleNoiseConfig::rng_seed)
      .def_readwrite("blind_sigma", &OracleNoiseConfig::blind_sigma);

  py::class_<CorrespondenceSet>(m, "CorrespondenceSet",
                                "2D-3D correspondences with weights.")
      .def(py::init<>())
      .def_static(
          "from_arrays",
          [](const Eigen::Ref<const Eigen::MatrixXd>& points3d,
             const Eigen::Ref<const Eigen::MatrixXd>& pixels2d,
             std::vector<double> weights) {
            CorrespondenceSet set;
            set.points3d = split_rows(points3d, "points3d");
            set.pixels2d = split_rows2(pixels2d, "pixels2d");
            if (weights.empty()) weights.assign(set.points3d.size(), 1.0);
            if (weights.size() != set.points3d.size() ||
                set.pixels2d.size() != set.points3d.size()) {
              throw std::invalid_argument(
                  "points3d, pixels2d and weights must have equal lengths");
            }
            set.weights = std::move(weights);
            return set;
          },
          py::arg("points3d"), py::arg("pixels2d"),
          py::arg("weights") = std::vector<double>{})
      .def_property_readonly(
          "points3d",
          [](const CorrespondenceSet& s) { return stack_rows(s.points3d); })
      .def_property_readonly(
          "pixels2d",
          [](const CorrespondenceSet& s) { return stack_rows2(s.pixels2d); })
      .def_readwrite("weights", &CorrespondenceSet::weights)
      .def("__len__", &CorrespondenceSet::size)
      .def("size", &CorrespondenceSet::size);

  py::class_<RansacConfig>(m, "RansacConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &RansacConfig::iterations)
      .def_readwrite("reproj_threshold", &RansacConfig::reproj_threshold)
      .def_readwrite("min_inliers", &RansacConfig::min_inliers)
      .def_readwrite("rng_seed", &RansacConfig::rng_seed)
      .def_readwrite("refine_with_lm", &RansacConfig::refine_with_lm);

  py::class_<PnPResult>(m, "PnPResult")
      .def_readonly("pose", &PnPResult::pose)
      .def_readonly("inlier_indices", &PnPResult::inlier_indices)
      .def_readonly("inlier_rms", &PnPResult::inlier_rms)
      .def_readonly("hypothesis_count", &PnPResult::hypothesis_count);

  py::class_<NoiseRange>(m, "NoiseRange")
      .def(py::init<>())
      .def(py::init([](double t, double r) {
             NoiseRange n;
             n.max_translation_m = t;
             n.max_rotation_deg = r;
             return n;
           }),
           py::arg("max_translation_m"), py::arg("max_rotation_deg"))
      .def_readwrite("max_translation_m", &NoiseRange::max_translation_m)
      .def_readwrite("max_rotation_deg", &NoiseRange::max_rotation_deg);

  py::class_<MatcherConfig>(m, "MatcherConfig")
      .def(py::init<>())
      .def_readwrite("oracle", &MatcherConfig::oracle)
      .def_readwrite("external_flow_path", &MatcherConfig::external_flow_path);

  py::class_<StageConfig>(m, "StageConfig")
      .def(py::init<>())
      .def_readwrite("noise_range", &StageConfig::noise_range)
      .def_readwrite("matcher", &StageConfig::matcher)
      .def_readwrite("ransac", &StageConfig::ransac)
      .def_readwrite("keep_quantile", &StageConfig::keep_quantile);

  py::class_<StageResult>(m, "StageResult")
      .def_readonly("result", &StageResult::result)
      .def_readonly("succeeded", &StageResult::succeeded)
      .def_readonly("failure", &StageResult::failure)
      .def_readonly("runtime_ms", &StageResult::runtime_ms);

  py::class_<CalibrationMetrics>(m, "CalibrationMetrics")
      .def_readonly("msee", &CalibrationMetrics::msee)
      .def_readonly("mrr", &CalibrationMetrics::mrr);

  py::class_<AggregationResult>(m, "AggregationResult")
      .def_readonly("mean_pose", &AggregationResult::mean_pose)
      .def_readonly("mode_pose", &AggregationResult::mode_pose)
      .def_readonly("median_translation",
                    &AggregationResult::median_translation)
      .def_readonly("frame_count", &AggregationResult::frame_count);

  py::class_<ColorImage>(m, "ColorImage", "8-bit RGB raster, row-major.")
      .def(py::init<>())
      .def_static(
          "from_array",
          [](const py::array_t<std::uint8_t,
                               py::array::c_style | py::array::forcecast>& a) {
            if (a.ndim() != 3 || a.shape(2) != 3) {
              throw std::invalid_argument(
                  "rgb must have shape (height, width, 3)");
            }
            ColorImage im;
            im.height = static_cast<int>(a.shape(0));
            im.width = static_cast<int>(a.shape(1));
            im.rgb = rgb_from_array(a, 3, "rgb");
            return im;
          },
          py::arg("rgb"))
      .def_readonly("width", &ColorImage::width)
      .def_readonly("height", &ColorImage::height)
      .def_property_readonly("rgb", [](const ColorImage& im) {
        return rgb_array(im.rgb, im.height, im.width);
      });

  py::class_<TrajectoryEntry>(m, "TrajectoryEntry")
      .def(py::init<>())
      .def(py::init([](double timestamp, const PoseSE3& pose) {
             TrajectoryEntry e;
             e.timestamp = timestamp;
             e.pose = pose;
             return e;
           }),
           py::arg("timestamp"), py::arg("pose"))
      .def_readwrite("timestamp", &TrajectoryEntry::timestamp)
      .def_readwrite("pose", &TrajectoryEntry::pose);

  py::enum_<FrameConvention>(m, "FrameConvention")
      .value("PINHOLE_Z_FORWARD", FrameConvention::PinholeZForward)
      .value("ROBOT_X_FORWARD", FrameConvention::RobotXForward);

  py::class_<IntrinsicsFile>(m, "IntrinsicsFile")
      .def(py::init<>())
      .def_readwrite("k", &IntrinsicsFile::k)
      .def_readwrite("frame", &IntrinsicsFile::frame);

  py::class_<VoxelGridConfig>(m, "VoxelGridConfig")
      .def(py::init<>())
      .def_readwrite("voxel_size", &VoxelGridConfig::voxel_size);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("map_path", &RunConfig::map_path)
      .def_readwrite("trajectory_path", &RunConfig::trajectory_path)
      .def_readwrite("intrinsics_path", &RunConfig::intrinsics_path)
      .def_readwrite("output_path", &RunConfig::output_path)
      .def_readwrite("seeds", &RunConfig::seeds)
      .def_readwrite("projection", &RunConfig::projection)
      .def_readwrite("stages", &RunConfig::stages)
      .def_readwrite("zero_runtime", &RunConfig::zero_runtime);

  py::class_<StageRecord>(m, "StageRecord")
      .def(py::init<>())
      .def_readwrite("seed", &StageRecord::seed)
      .def_readwrite("stage", &StageRecord::stage)
      .def_readwrite("e_t", &StageRecord::e_t)
      .def_readwrite("e_r", &StageRecord::e_r)
      .def_readwrite("inliers", &StageRecord::inliers)
      .def_readwrite("runtime_ms", &StageRecord::runtime_ms)
      .def_readwrite("succeeded", &StageRecord::succeeded)
      .def_readwrite("failure", &StageRecord::failure);

  py::class_<BenchmarkSummary>(m, "BenchmarkSummary")
      .def(py::init<>())
      .def_readwrite("median_e_t", &BenchmarkSummary::median_e_t)
      .def_readwrite("median_e_r", &BenchmarkSummary::median_e_r)
      .def_readwrite("msee", &BenchmarkSummary::msee)
      .def_readwrite("mrr", &BenchmarkSummary::mrr)
      .def_readwrite("metrics_valid", &BenchmarkSummary::metrics_valid)
      .def_readwrite("runs", &BenchmarkSummary::runs);

  py::class_<BenchmarkResult>(m, "BenchmarkResult")
      .def_readonly("records", &BenchmarkResult::records)
      .def_readonly("summary", &BenchmarkResult::summary)
      .def_readonly("report", &BenchmarkResult::report);

  py::class_<CalibrationRun>(m, "CalibrationRun")
      .def_readonly("records", &CalibrationRun::records)
      .def_readonly("aggregate", &CalibrationRun::aggregate)
      .def_readonly("summary", &CalibrationRun::summary)
      .def_readonly("report", &CalibrationRun::report);

  // Geometry.
  m.def("compose", &compose, py::arg("a"), py::arg("b"),
        "Transform that applies b first, then a.");
  m.def("transform_points", &transform_points, py::arg("pose"),
        py::arg("cloud"));
  m.def("project_point", &project_point, py::arg("k"), py::arg("p_cam"));
  m.def("unproject_pixel", &unproject_pixel, py::arg("k"), py::arg("u"),
        py::arg("v"), py::arg("depth"));
  m.def("so3_exp", &so3_exp, py::arg("phi"));
  m.def("so3_log", &so3_log, py::arg("rotation"));
  m.def("se3_exp", &se3_exp, py::arg("delta"));
  m.def("se3_log", &se3_log, py::arg("pose"));
  m.def("se3_log_norm", &se3_log_norm, py::arg("a"), py::arg("b"));
  m.def("pose_errors", &pose_errors, py::arg("gt"), py::arg("estimate"));
  m.def("robot_to_pinhole", &robot_to_pinhole);

  // Projection.
  m.def("render_lidar_image", &render_lidar_image, py::arg("cloud"),
        py::arg("pose"), py::arg("k"),
        py::arg("config") = ProjectionConfig{});
  m.def("occlusion_filter", &occlusion_filter, py::arg("image"),
        py::arg("cloud"), py::arg("pose"), py::arg("config"));
  m.def("fourier_map", &fourier_map, py::arg("d"), py::arg("m"));
  m.def("mirror_augmentation", &mirror_augmentation, py::arg("cloud"),
        py::arg("k"));
  m.def("save_lidar_image", &save_lidar_image, py::arg("image"),
        py::arg("path"));
  m.def("load_lidar_image", &load_lidar_image, py::arg("path"));
  m.def("occlusion_projection", &occlusion_projection,
        "Projection defaults with the occlusion filter enabled.");

  // Correspondences.
  m.def("ground_truth_flow", &ground_truth_flow, py::arg("cloud"),
        py::arg("init"), py::arg("gt"), py::arg("k"),
        py::arg("config") = ProjectionConfig{});
  m.def("oracle_match", &oracle_match, py::arg("gt_flow"), py::arg("config"));
  m.def("filter_by_uncertainty", &filter_by_uncertainty, py::arg("flow"),
        py::arg("keep_quantile"));
  m.def("to_correspondences", &to_correspondences, py::arg("image"),
        py::arg("flow"), py::arg("cloud"));
  m.def("upscale_flow", &upscale_flow, py::arg("flow"), py::arg("factor"));
  m.def("save_flow_field", &save_flow_field, py::arg("flow"), py::arg("path"));
  m.def("load_flow_field", &load_flow_field, py::arg("path"));

  // Pose solvers.
  m.def("epnp", &epnp, py::arg("correspondences"), py::arg("k"));
  m.def("reprojection_errors", &reprojection_errors, py::arg("pose"),
        py::arg("correspondences"), py::arg("k"));
  m.def("reprojection_jacobian", &reprojection_jacobian, py::arg("pose"),
        py::arg("p_map"), py::arg("k"));
  m.def("lm_refine", &lm_refine, py::arg("initial"),
        py::arg("correspondences"), py::arg("k"),
        py::arg("max_iterations") = 50);
  m.def("ransac_pnp", &ransac_pnp, py::arg("correspondences"), py::arg("k"),
        py::arg("config"));

  // Pipeline.
  m.def("sample_initial_pose", &sample_initial_pose, py::arg("gt"),
        py::arg("range"), py::arg("seed"));
  m.def("run_stage", &run_stage, py::arg("cloud"), py::arg("init"),
        py::arg("k"), py::arg("stage"), py::arg("gt_for_oracle"),
        py::arg("projection") = ProjectionConfig{});
  m.def("iterative_localize", &iterative_localize, py::arg("cloud"),
        py::arg("init"), py::arg("k"), py::arg("stages"),
        py::arg("gt_for_oracle"), py::arg("projection") = ProjectionConfig{});
  m.def("msee_mrr", &msee_mrr, py::arg("initial"), py::arg("final_pairs"));
  m.def("aggregate_extrinsics", &aggregate_extrinsics, py::arg("poses"));
  m.def("colorize_map", &colorize_map, py::arg("cloud"), py::arg("images"),
        py::arg("k"), py::arg("projection") = occlusion_projection());

  // Dataset IO.
  m.def("load_scan", &load_scan, py::arg("path"));
  m.def("save_scan", &save_scan, py::arg("cloud"), py::arg("path"));
  m.def("load_trajectory", &load_trajectory, py::arg("path"));
  m.def("save_trajectory", &save_trajectory, py::arg("entries"),
        py::arg("path"), py::arg("with_timestamps") = true);
  m.def("load_intrinsics", &load_intrinsics, py::arg("path"));
  m.def("save_intrinsics", &save_intrinsics, py::arg("file"), py::arg("path"));
  m.def("build_map", &build_map, py::arg("scans"), py::arg("grid"),
        py::arg("labels") = std::vector<std::vector<std::uint32_t>>{},
        py::arg("drop_labels") = std::vector<std::uint32_t>{});
  m.def("export_ply", &export_ply, py::arg("cloud"), py::arg("path"));
  m.def("import_ply", &import_ply, py::arg("path"));
  m.def("save_ppm", &save_ppm, py::arg("image"), py::arg("path"));
  m.def("load_ppm", &load_ppm, py::arg("path"));

  // Reports and CLI.
  m.def("parse_run_config", &parse_run_config, py::arg("json_text"));
  m.def("load_run_config", &load_run_config, py::arg("path"));
  m.def("record_line", &record_line, py::arg("record"));
  m.def("summary_line", &summary_line, py::arg("summary"));
  m.def("run_benchmark", &run_benchmark, py::arg("map"), py::arg("gt"),
        py::arg("k"), py::arg("config"));
  m.def("run_calibration", &run_calibration, py::arg("map"),
        py::arg("gt_per_frame"), py::arg("k"), py::arg("config"));
  m.def("cli_dispatch", &cli_dispatch, py::arg("args"),
        "Runs the command-line surface; returns the process exit code.");
}
