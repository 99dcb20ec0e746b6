#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <vector>

namespace camlidar {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Rigid transform in 3D, stored as a unit quaternion plus translation.
//
// Canonical form is maintained after every constructor and composition:
// the quaternion is normalized (|q| within 1e-9 of 1 before renormalization
// is accepted from callers as-is, i.e. any nonzero quaternion is normalized)
// and its sign is fixed so that w >= 0; when w == 0 the first nonzero
// component of (x, y, z) is made positive. Two PoseSE3 representing the same
// rotation therefore compare bit-equal on their quaternions.
class PoseSE3 {
 public:
  // Identity transform.
  PoseSE3();

  // q given as (w, x, y, z); normalized and sign-canonicalized on entry.
  // Throws std::invalid_argument on a zero or non-finite quaternion.
  PoseSE3(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

  static PoseSE3 from_matrix(const Eigen::Matrix4d& m);
  static PoseSE3 from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t);

  const Eigen::Quaterniond& rotation() const { return q_; }
  const Eigen::Vector3d& translation() const { return t_; }
  Eigen::Matrix3d rotation_matrix() const { return q_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  PoseSE3 inverse() const;

  // Applies the transform: R * p + t.
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return q_ * p + t_;
  }

 private:
  Eigen::Quaterniond q_;
  Eigen::Vector3d t_;

  void canonicalize();
};

// compose(a, b): the transform that applies b first, then a.
// compose(a, b).apply(p) == a.apply(b.apply(p)).
PoseSE3 compose(const PoseSE3& a, const PoseSE3& b);

// Pinhole camera. Frame convention: Z forward, X right, Y down.
// u = fx * x / z + cx, v = fy * y / z + cy.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  CameraIntrinsics() = default;
  // Throws std::invalid_argument unless fx > 0, fy > 0, width > 0, height > 0.
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width,
                   int height);
};

// Point set with optional per-point attributes. When present, `intensity`,
// `color` and `color_valid` have exactly one entry per point.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<float> intensity;
  std::vector<std::array<std::uint8_t, 3>> color;
  std::vector<std::uint8_t> color_valid;

  std::size_t size() const { return points.size(); }

  // Throws DimensionMismatch if an attribute array disagrees in length,
  // MalformedScan if any coordinate is non-finite.
  void validate() const;
};

PointCloud transform_points(const PoseSE3& pose, const PointCloud& cloud);

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// Guard below which a camera-frame depth is treated as "behind the camera".
inline constexpr double kDepthEpsilon = 1e-6;

// Projects a camera-frame point. Throws NonPositiveDepth when z <= 1e-6.
PixelProjection project_point(const CameraIntrinsics& k,
                              const Eigen::Vector3d& p_cam);

// Inverse of project_point: pixel plus depth back to a camera-frame point.
// Throws NonPositiveDepth when depth <= 1e-6.
Eigen::Vector3d unproject_pixel(const CameraIntrinsics& k, double u, double v,
                                double depth);

// so(3) exponential and logarithm.
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& phi);
Eigen::Vector3d so3_log(const Eigen::Matrix3d& r);

// SE(3) exponential: delta = (rho, phi) -> pose with rotation exp(phi) and
// translation V(phi) * rho.
PoseSE3 se3_exp(const Vector6d& delta);

// SE(3) logarithm, inverse of se3_exp. Stacked (rho, phi).
Vector6d se3_log(const PoseSE3& pose);

// || log(a^-1 b) ||_2 of the stacked 6-vector (meters and radians mix with
// equal weight). Zero iff a == b; symmetric in its arguments.
double se3_log_norm(const PoseSE3& a, const PoseSE3& b);

struct PoseError {
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};

// Translation error ||t - t_ref||_2 and geodesic rotation angle between the
// two orientations in degrees (in [0, 180]).
PoseError pose_errors(const PoseSE3& gt, const PoseSE3& estimate);

// Fixed change of basis from a robot body frame (X forward, Y left, Z up) to
// the pinhole camera frame (Z forward, X right, Y down), as a pure rotation.
// Applying it to a robot-frame point yields the same physical point expressed
// in pinhole axes.
PoseSE3 robot_to_pinhole();

}  // namespace camlidar
