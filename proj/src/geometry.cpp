#include "camlidar/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "camlidar/errors.hpp"

namespace camlidar {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool quaternion_finite(const Eigen::Quaterniond& q) {
  return std::isfinite(q.w()) && std::isfinite(q.x()) &&
         std::isfinite(q.y()) && std::isfinite(q.z());
}

}  // namespace

PoseSE3::PoseSE3() : q_(Eigen::Quaterniond::Identity()), t_(Eigen::Vector3d::Zero()) {}

PoseSE3::PoseSE3(const Eigen::Quaterniond& q, const Eigen::Vector3d& t)
    : q_(q), t_(t) {
  if (!quaternion_finite(q_) || q_.norm() < 1e-12) {
    throw std::invalid_argument("PoseSE3: quaternion must be finite and nonzero");
  }
  canonicalize();
}

void PoseSE3::canonicalize() {
  q_.normalize();
  const double* c = q_.coeffs().data();  // (x, y, z, w)
  double sign = 0.0;
  if (c[3] != 0.0) {
    sign = c[3];
  } else {
    for (int i = 0; i < 3; ++i) {
      if (c[i] != 0.0) {
        sign = c[i];
        break;
      }
    }
  }
  if (sign < 0.0) q_.coeffs() = -q_.coeffs();
}

PoseSE3 PoseSE3::from_matrix(const Eigen::Matrix4d& m) {
  return from_rt(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

PoseSE3 PoseSE3::from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  return PoseSE3(Eigen::Quaterniond(r), t);
}

Eigen::Matrix4d PoseSE3::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = q_.toRotationMatrix();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

PoseSE3 PoseSE3::inverse() const {
  const Eigen::Quaterniond qi = q_.conjugate();
  return PoseSE3(qi, qi * -t_);
}

PoseSE3 compose(const PoseSE3& a, const PoseSE3& b) {
  return PoseSE3(a.rotation() * b.rotation(),
                 a.rotation() * b.translation() + a.translation());
}

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy,
                                   int width, int height)
    : fx(fx), fy(fy), cx(cx), cy(cy), width(width), height(height) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("CameraIntrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("CameraIntrinsics: image size must be positive");
  }
}

void PointCloud::validate() const {
  if (!intensity.empty() && intensity.size() != points.size()) {
    throw DimensionMismatch("PointCloud: intensity length mismatch");
  }
  if (!color.empty() && color.size() != points.size()) {
    throw DimensionMismatch("PointCloud: color length mismatch");
  }
  if (!color_valid.empty() && color_valid.size() != points.size()) {
    throw DimensionMismatch("PointCloud: color_valid length mismatch");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) {
      throw MalformedScan("PointCloud: non-finite coordinate");
    }
  }
}

PointCloud transform_points(const PoseSE3& pose, const PointCloud& cloud) {
  PointCloud out = cloud;
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Eigen::Vector3d& t = pose.translation();
  for (auto& p : out.points) p = r * p + t;
  return out;
}

PixelProjection project_point(const CameraIntrinsics& k,
                              const Eigen::Vector3d& p_cam) {
  if (p_cam.z() <= kDepthEpsilon) {
    throw NonPositiveDepth("project_point: depth below epsilon");
  }
  PixelProjection out;
  out.u = k.fx * p_cam.x() / p_cam.z() + k.cx;
  out.v = k.fy * p_cam.y() / p_cam.z() + k.cy;
  out.depth = p_cam.z();
  return out;
}

Eigen::Vector3d unproject_pixel(const CameraIntrinsics& k, double u, double v,
                                double depth) {
  if (depth <= kDepthEpsilon) {
    throw NonPositiveDepth("unproject_pixel: depth below epsilon");
  }
  return {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 1) = -phi.z(); m(0, 2) = phi.y();
    m(1, 0) = phi.z();  m(1, 2) = -phi.x();
    m(2, 0) = -phi.y(); m(2, 1) = phi.x();
    return m;
  }
  return Eigen::AngleAxisd(theta, phi / theta).toRotationMatrix();
}

namespace {

// Quaternion logarithm: rotation vector of the unit quaternion q.
Eigen::Vector3d quat_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d v = q.vec();
  const double vn = v.norm();
  if (vn < 1e-12) return 2.0 * v / q.w();
  return v * (2.0 * std::atan2(vn, q.w()) / vn);
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

}  // namespace

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  return quat_log(Eigen::Quaterniond(r));
}

PoseSE3 se3_exp(const Vector6d& delta) {
  const Eigen::Vector3d rho = delta.head<3>();
  const Eigen::Vector3d phi = delta.tail<3>();
  const double theta = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  double a, b;
  if (theta < 1e-5) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double t2 = theta * theta;
    a = (1.0 - std::cos(theta)) / t2;
    b = (theta - std::sin(theta)) / (t2 * theta);
  }
  const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + a * k + b * k * k;
  return PoseSE3::from_rt(so3_exp(phi), v * rho);
}

Vector6d se3_log(const PoseSE3& pose) {
  const Eigen::Vector3d phi = quat_log(pose.rotation());
  const double theta = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  double c;
  if (theta < 1e-5) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) /
        (theta * theta);
  }
  const Eigen::Matrix3d v_inv =
      Eigen::Matrix3d::Identity() - 0.5 * k + c * k * k;
  Vector6d out;
  out.head<3>() = v_inv * pose.translation();
  out.tail<3>() = phi;
  return out;
}

double se3_log_norm(const PoseSE3& a, const PoseSE3& b) {
  return se3_log(compose(a.inverse(), b)).norm();
}

PoseError pose_errors(const PoseSE3& gt, const PoseSE3& estimate) {
  PoseError err;
  err.translation_m = (gt.translation() - estimate.translation()).norm();
  const Eigen::Quaterniond m = gt.rotation() * estimate.rotation().conjugate();
  err.rotation_deg =
      2.0 * std::atan2(m.vec().norm(), std::abs(m.w())) * 180.0 / kPi;
  return err;
}

PoseSE3 robot_to_pinhole() {
  Eigen::Matrix3d c;
  c << 0.0, -1.0, 0.0,
       0.0, 0.0, -1.0,
       1.0, 0.0, 0.0;
  return PoseSE3::from_rt(c, Eigen::Vector3d::Zero());
}

}  // namespace camlidar
