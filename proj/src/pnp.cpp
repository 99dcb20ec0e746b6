#include "camlidar/pnp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "camlidar/errors.hpp"
#include "camlidar/parallel.hpp"
#include "camlidar/rng.hpp"

namespace camlidar {

namespace {

constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;

// Control points: centroid plus principal axes scaled by the standard
// deviation along each. Spatial clouds get four control points; planar
// clouds (relative thickness below 1e-10) get three, which keeps the
// null-space dimension small enough for the combination-weight solve to
// stay well posed on planar and minimal-planar input.
struct ControlPoints {
  int count = 4;
  std::array<Eigen::Vector3d, 4> cw;
};

ControlPoints choose_control_points(const std::vector<Eigen::Vector3d>& pts) {
  const std::size_t n = pts.size();
  Eigen::Vector3d c0 = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c0 += p;
  c0 /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p - c0;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (ev[1] <= 1e-12 * std::max(ev[2], 1e-300)) {
    throw DegenerateConfiguration("epnp: points are collinear");
  }
  ControlPoints cp;
  cp.count = ev[0] <= 1e-10 * ev[2] ? 3 : 4;
  cp.cw[0] = c0;
  for (int i = 1; i < cp.count; ++i) {
    const double s = std::sqrt(std::max(ev[3 - i], 0.0));
    cp.cw[i] = c0 + s * eig.eigenvectors().col(3 - i);
  }
  return cp;
}

// alpha row per point: p = sum_j alpha_j cw_j with sum_j alpha_j = 1.
Eigen::MatrixXd barycentric_coordinates(const std::vector<Eigen::Vector3d>& pts,
                                        const ControlPoints& cp) {
  const int nb = cp.count - 1;
  Eigen::Matrix<double, 3, Eigen::Dynamic> basis(3, nb);
  for (int j = 0; j < nb; ++j) basis.col(j) = cp.cw[j + 1] - cp.cw[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < nb; ++i) {
    if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) {
      inv_sv[i] = 1.0 / svd.singularValues()[i];
    }
  }
  const Eigen::MatrixXd pinv =
      svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();

  Eigen::MatrixXd alphas(pts.size(), cp.count);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::VectorXd a = pinv * (pts[i] - cp.cw[0]);
    alphas(i, 0) = 1.0 - a.sum();
    for (int j = 0; j < nb; ++j) alphas(i, j + 1) = a[j];
  }
  return alphas;
}

// Unordered control-point pairs, in the fixed order used by both the
// distance matrix and its right-hand side.
std::vector<std::pair<int, int>> cp_pairs(int ncp) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < ncp; ++a) {
    for (int b = a + 1; b < ncp; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

// Index of the product beta_k * beta_l (k <= l) in the flattened triangular
// order (0,0), (0,1), (1,1), (0,2), (1,2), (2,2), ...
int product_index(int k, int l) { return l * (l + 1) / 2 + k; }

// Distance-constraint matrix: row per control-point pair, column per beta
// product, cross terms premultiplied by 2.
Eigen::MatrixXd compute_l(const Eigen::MatrixXd& kernel, int ncp) {
  const int kdim = static_cast<int>(kernel.cols());
  const auto pairs = cp_pairs(ncp);
  Eigen::MatrixXd l(pairs.size(), kdim * (kdim + 1) / 2);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    std::vector<Eigen::Vector3d> dv(kdim);
    for (int k = 0; k < kdim; ++k) {
      dv[k] = kernel.block<3, 1>(3 * pairs[j].first, k) -
              kernel.block<3, 1>(3 * pairs[j].second, k);
    }
    for (int b = 0; b < kdim; ++b) {
      for (int a = 0; a <= b; ++a) {
        l(j, product_index(a, b)) =
            (a == b ? 1.0 : 2.0) * dv[a].dot(dv[b]);
      }
    }
  }
  return l;
}

Eigen::VectorXd compute_rho(const ControlPoints& cp) {
  const auto pairs = cp_pairs(cp.count);
  Eigen::VectorXd rho(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    rho[j] = (cp.cw[pairs[j].first] - cp.cw[pairs[j].second]).squaredNorm();
  }
  return rho;
}

Eigen::VectorXd beta_products(const Eigen::VectorXd& b) {
  const int d = static_cast<int>(b.size());
  Eigen::VectorXd v(d * (d + 1) / 2);
  for (int l = 0; l < d; ++l) {
    for (int k = 0; k <= l; ++k) v[product_index(k, l)] = b[k] * b[l];
  }
  return v;
}

double safe_div(double a, double b) { return std::abs(b) < 1e-12 ? 0.0 : a / b; }

// Seed assuming a one-dimensional null space: solve for beta_1 * beta_j.
Eigen::VectorXd betas_seed_rank1(const Eigen::MatrixXd& l,
                                 const Eigen::VectorXd& rho, int kdim) {
  Eigen::MatrixXd sub(l.rows(), kdim);
  for (int j = 0; j < kdim; ++j) sub.col(j) = l.col(product_index(0, j));
  const Eigen::VectorXd b = sub.colPivHouseholderQr().solve(rho);
  Eigen::VectorXd betas(kdim);
  const double sign = b[0] < 0 ? -1.0 : 1.0;
  betas[0] = std::sqrt(std::abs(b[0]));
  for (int j = 1; j < kdim; ++j) betas[j] = safe_div(sign * b[j], betas[0]);
  return betas;
}

// Seed assuming two active components: solve for the (1,1), (1,2), (2,2)
// products only.
Eigen::VectorXd betas_seed_rank2(const Eigen::MatrixXd& l,
                                 const Eigen::VectorXd& rho, int kdim) {
  Eigen::MatrixXd sub(l.rows(), 3);
  sub.col(0) = l.col(product_index(0, 0));
  sub.col(1) = l.col(product_index(0, 1));
  sub.col(2) = l.col(product_index(1, 1));
  const Eigen::Vector3d b = sub.colPivHouseholderQr().solve(rho);
  Eigen::VectorXd betas = Eigen::VectorXd::Zero(kdim);
  if (b[0] < 0) {
    betas[0] = std::sqrt(-b[0]);
    betas[1] = b[2] < 0 ? std::sqrt(-b[2]) : 0.0;
  } else {
    betas[0] = std::sqrt(b[0]);
    betas[1] = b[2] > 0 ? std::sqrt(b[2]) : 0.0;
  }
  if (b[1] < 0) betas[0] = -betas[0];
  return betas;
}

// Seed assuming three active components: solve for the five products that
// ignore the last basis vector (four-vector kernels only).
Eigen::VectorXd betas_seed_rank3(const Eigen::MatrixXd& l,
                                 const Eigen::VectorXd& rho) {
  Eigen::MatrixXd sub(l.rows(), 5);
  for (int j = 0; j < 5; ++j) sub.col(j) = l.col(j);
  const Eigen::VectorXd b = sub.colPivHouseholderQr().solve(rho);
  Eigen::VectorXd betas = Eigen::VectorXd::Zero(4);
  if (b[0] < 0) {
    betas[0] = std::sqrt(-b[0]);
    betas[1] = b[2] < 0 ? std::sqrt(-b[2]) : 0.0;
  } else {
    betas[0] = std::sqrt(b[0]);
    betas[1] = b[2] > 0 ? std::sqrt(b[2]) : 0.0;
  }
  if (b[1] < 0) betas[0] = -betas[0];
  betas[2] = safe_div(b[3], betas[0]);
  return betas;
}

// Seed from the best rank-one factorization of the least-squares product
// vector: assemble the symmetric beta-product matrix and take its principal
// eigenpair. Falls back gracefully when the null space has extra dimensions.
Eigen::VectorXd betas_seed_factor(const Eigen::MatrixXd& l,
                                  const Eigen::VectorXd& rho, int kdim) {
  const Eigen::VectorXd prod =
      l.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rho);
  Eigen::MatrixXd b(kdim, kdim);
  for (int col = 0; col < kdim; ++col) {
    for (int row = 0; row <= col; ++row) {
      b(row, col) = b(col, row) = prod[product_index(row, col)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  const int top = kdim - 1;
  const double lambda = std::max(eig.eigenvalues()[top], 0.0);
  return std::sqrt(lambda) * eig.eigenvectors().col(top);
}

void gauss_newton_betas(const Eigen::MatrixXd& l, const Eigen::VectorXd& rho,
                        Eigen::VectorXd& betas) {
  const int kdim = static_cast<int>(betas.size());
  for (int iter = 0; iter < 10; ++iter) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(l.rows(), kdim);
    for (int j = 0; j < l.rows(); ++j) {
      for (int col_l = 0; col_l < kdim; ++col_l) {
        for (int col_k = 0; col_k <= col_l; ++col_k) {
          const double lv = l(j, product_index(col_k, col_l));
          a(j, col_k) += lv * betas[col_l];
          a(j, col_l) += lv * betas[col_k];
        }
      }
    }
    const Eigen::VectorXd residual = rho - l * beta_products(betas);
    betas += a.colPivHouseholderQr().solve(residual);
    if (!betas.allFinite()) return;
  }
}

// Rigid alignment camera = R * world + t from paired point sets (Kabsch).
void estimate_rt(const std::vector<Eigen::Vector3d>& world,
                 const std::vector<Eigen::Vector3d>& cam, Eigen::Matrix3d& r,
                 Eigen::Vector3d& t) {
  const std::size_t n = world.size();
  Eigen::Vector3d cw = Eigen::Vector3d::Zero(), cc = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cw += world[i];
    cc += cam[i];
  }
  cw /= static_cast<double>(n);
  cc /= static_cast<double>(n);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (cam[i] - cc) * (world[i] - cw).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0
                ? -1.0
                : 1.0;
  r = svd.matrixU() * d * svd.matrixV().transpose();
  t = cc - r * cw;
}

double total_reprojection_error(const std::vector<Eigen::Vector3d>& pts,
                                const std::vector<Eigen::Vector2d>& pix,
                                const CameraIntrinsics& k,
                                const Eigen::Matrix3d& r,
                                const Eigen::Vector3d& t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d p = r * pts[i] + t;
    if (p.z() <= kDepthEpsilon) return std::numeric_limits<double>::infinity();
    const double u = k.fx * p.x() / p.z() + k.cx;
    const double v = k.fy * p.y() / p.z() + k.cy;
    sum += (Eigen::Vector2d(u, v) - pix[i]).norm();
  }
  return sum;
}

}  // namespace

PoseSE3 epnp(const CorrespondenceSet& set, const CameraIntrinsics& k) {
  const std::size_t n = set.points3d.size();
  if (set.pixels2d.size() != n) {
    throw DimensionMismatch("epnp: points and pixels differ in length");
  }
  if (n < 4) throw TooFewPoints("epnp: needs at least 4 correspondences");

  const ControlPoints cp = choose_control_points(set.points3d);
  const int ncp = cp.count;
  const int dim = 3 * ncp;
  const Eigen::MatrixXd alphas = barycentric_coordinates(set.points3d, cp);

  // Projection constraints: each point contributes two rows over the
  // control-point camera coordinates; accumulate M^T M directly.
  Eigen::MatrixXd mtm = Eigen::MatrixXd::Zero(dim, dim);
  {
    Eigen::MatrixXd rows(2, dim);
    for (std::size_t i = 0; i < n; ++i) {
      rows.setZero();
      const double u = set.pixels2d[i].x();
      const double v = set.pixels2d[i].y();
      for (int j = 0; j < ncp; ++j) {
        const double a = alphas(i, j);
        rows(0, 3 * j + 0) = a * k.fx;
        rows(0, 3 * j + 2) = a * (k.cx - u);
        rows(1, 3 * j + 1) = a * k.fy;
        rows(1, 3 * j + 2) = a * (k.cy - v);
      }
      mtm.noalias() += rows.transpose() * rows;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mtm);
  const int kdim = ncp == 4 ? 4 : 3;
  const Eigen::MatrixXd kernel = eig.eigenvectors().leftCols(kdim);

  const Eigen::MatrixXd l = compute_l(kernel, ncp);
  const Eigen::VectorXd rho = compute_rho(cp);

  std::vector<Eigen::VectorXd> seeds = {betas_seed_rank1(l, rho, kdim),
                                        betas_seed_rank2(l, rho, kdim),
                                        betas_seed_factor(l, rho, kdim)};
  if (kdim == 4) seeds.push_back(betas_seed_rank3(l, rho));

  double best_err = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d best_r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d best_t = Eigen::Vector3d::Zero();
  bool found = false;
  for (Eigen::VectorXd& betas : seeds) {
    if (!betas.allFinite()) continue;
    gauss_newton_betas(l, rho, betas);
    if (!betas.allFinite()) continue;

    const Eigen::VectorXd x = kernel * betas;
    std::vector<Eigen::Vector3d> ccs(ncp);
    std::vector<Eigen::Vector3d> pcs(n);
    for (int j = 0; j < ncp; ++j) ccs[j] = x.segment<3>(3 * j);
    std::size_t negative = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      for (int j = 0; j < ncp; ++j) p += alphas(i, j) * ccs[j];
      pcs[i] = p;
      negative += p.z() < 0.0;
    }
    if (2 * negative > n) {
      for (auto& c : pcs) c = -c;
    }

    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    estimate_rt(set.points3d, pcs, r, t);
    const double err =
        total_reprojection_error(set.points3d, set.pixels2d, k, r, t);
    if (err < best_err) {
      best_err = err;
      best_r = r;
      best_t = t;
      found = true;
    }
  }
  if (!found) {
    throw DegenerateConfiguration("epnp: no usable solution candidate");
  }
  return PoseSE3::from_rt(best_r, best_t);
}

std::vector<double> reprojection_errors(const PoseSE3& pose,
                                        const CorrespondenceSet& set,
                                        const CameraIntrinsics& k) {
  std::vector<double> errs(set.size());
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Eigen::Vector3d& t = pose.translation();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Eigen::Vector3d p = r * set.points3d[i] + t;
    if (p.z() <= kDepthEpsilon) {
      errs[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double u = k.fx * p.x() / p.z() + k.cx;
    const double v = k.fy * p.y() / p.z() + k.cy;
    errs[i] = (Eigen::Vector2d(u, v) - set.pixels2d[i]).norm();
  }
  return errs;
}

Eigen::Matrix<double, 2, 6> reprojection_jacobian(const PoseSE3& pose,
                                                  const Eigen::Vector3d& p_map,
                                                  const CameraIntrinsics& k) {
  const Eigen::Vector3d p = pose.apply(p_map);
  if (p.z() <= kDepthEpsilon) {
    throw NonPositiveDepth("reprojection_jacobian: point behind camera");
  }
  const double iz = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> d_pix;
  d_pix << k.fx * iz, 0.0, -k.fx * p.x() * iz * iz,
      0.0, k.fy * iz, -k.fy * p.y() * iz * iz;
  Eigen::Matrix<double, 3, 6> d_point;
  d_point.leftCols<3>() = Eigen::Matrix3d::Identity();
  d_point.col(3) = Eigen::Vector3d(0.0, -p.z(), p.y());
  d_point.col(4) = Eigen::Vector3d(p.z(), 0.0, -p.x());
  d_point.col(5) = Eigen::Vector3d(-p.y(), p.x(), 0.0);
  return d_pix * d_point;
}

namespace {

double weighted_cost(const PoseSE3& pose, const CorrespondenceSet& set,
                     const CameraIntrinsics& k) {
  double cost = 0.0;
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Eigen::Vector3d& t = pose.translation();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Eigen::Vector3d p = r * set.points3d[i] + t;
    if (p.z() <= kDepthEpsilon) {
      return std::numeric_limits<double>::infinity();
    }
    const double u = k.fx * p.x() / p.z() + k.cx;
    const double v = k.fy * p.y() / p.z() + k.cy;
    const double w = set.weights.empty() ? 1.0 : set.weights[i];
    cost += w * (Eigen::Vector2d(u, v) - set.pixels2d[i]).squaredNorm();
  }
  return cost;
}

}  // namespace

PoseSE3 lm_refine(const PoseSE3& initial, const CorrespondenceSet& set,
                  const CameraIntrinsics& k, int max_iterations) {
  if (set.size() == 0) return initial;
  if (set.pixels2d.size() != set.size() ||
      (!set.weights.empty() && set.weights.size() != set.size())) {
    throw DimensionMismatch("lm_refine: correspondence arrays differ in length");
  }

  PoseSE3 pose = initial;
  double cost = weighted_cost(pose, set, k);
  if (!std::isfinite(cost)) return initial;

  double lambda = 1e-3;
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Vector6d jtr = Vector6d::Zero();
    const Eigen::Matrix3d r = pose.rotation_matrix();
    const Eigen::Vector3d& t = pose.translation();
    for (std::size_t i = 0; i < set.size(); ++i) {
      const Eigen::Vector3d p = r * set.points3d[i] + t;
      const double iz = 1.0 / p.z();
      Eigen::Matrix<double, 2, 6> j;
      j << k.fx * iz, 0.0, -k.fx * p.x() * iz * iz,
          -k.fx * p.x() * p.y() * iz * iz, k.fx * (1.0 + p.x() * p.x() * iz * iz),
          -k.fx * p.y() * iz,
          0.0, k.fy * iz, -k.fy * p.y() * iz * iz,
          -k.fy * (1.0 + p.y() * p.y() * iz * iz), k.fy * p.x() * p.y() * iz * iz,
          k.fy * p.x() * iz;
      const Eigen::Vector2d residual(
          k.fx * p.x() * iz + k.cx - set.pixels2d[i].x(),
          k.fy * p.y() * iz + k.cy - set.pixels2d[i].y());
      const double w = set.weights.empty() ? 1.0 : set.weights[i];
      jtj += w * j.transpose() * j;
      jtr += w * j.transpose() * residual;
    }

    const Vector6d delta =
        (jtj + lambda * Eigen::Matrix<double, 6, 6>::Identity())
            .ldlt()
            .solve(-jtr);
    if (!delta.allFinite()) break;
    const PoseSE3 candidate = compose(se3_exp(delta), pose);
    const double candidate_cost = weighted_cost(candidate, set, k);
    if (candidate_cost < cost) {
      const double rel = (cost - candidate_cost) / std::max(cost, 1e-300);
      pose = candidate;
      cost = candidate_cost;
      lambda = std::max(lambda * 0.1, 1e-12);
      if (rel < 1e-10) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  return pose;
}

namespace {

// PCA angle between the first two principal axes of a 4-point sample;
// samples within 1 degree of collinear are degenerate.
bool sample_is_degenerate(const CorrespondenceSet& set, const int idx[4]) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int j = 0; j < 4; ++j) c += set.points3d[idx[j]];
  c /= 4.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector3d d = set.points3d[idx[j]] - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const double major = std::sqrt(std::max(eig.eigenvalues()[2], 0.0));
  const double minor = std::sqrt(std::max(eig.eigenvalues()[1], 0.0));
  if (major <= 0.0) return true;
  return std::atan2(minor, major) < 1.0 * kDegToRad;
}

}  // namespace

PnPResult ransac_pnp(const CorrespondenceSet& set, const CameraIntrinsics& k,
                     const RansacConfig& cfg) {
  const std::size_t n = set.size();
  if (n < 4) throw TooFewPoints("ransac_pnp: needs at least 4 correspondences");
  if (cfg.iterations < 1 || !(cfg.reproj_threshold > 0.0) || cfg.min_inliers < 4) {
    throw std::invalid_argument("ransac_pnp: invalid configuration");
  }

  // All minimal samples are drawn serially up front so that the hypothesis
  // set is a pure function of the seed, independent of scoring order.
  Rng rng(cfg.rng_seed);
  std::vector<std::array<int, 4>> samples(cfg.iterations);
  std::vector<char> usable(cfg.iterations, 0);
  for (int s = 0; s < cfg.iterations; ++s) {
    std::array<int, 4>& idx = samples[s];
    for (int j = 0; j < 4; ++j) {
      int v;
      bool fresh;
      do {
        v = static_cast<int>(rng.below(n));
        fresh = true;
        for (int q = 0; q < j; ++q) fresh &= (v != idx[q]);
      } while (!fresh);
      idx[j] = v;
    }
    usable[s] = !sample_is_degenerate(set, idx.data());
  }

  struct Slot {
    int count = -1;
    double rms = std::numeric_limits<double>::infinity();
    PoseSE3 pose;
  };
  std::vector<Slot> slots(cfg.iterations);

  parallel_for(static_cast<std::size_t>(cfg.iterations), [&](std::size_t s) {
    if (!usable[s]) return;
    CorrespondenceSet minimal;
    minimal.points3d.reserve(4);
    minimal.pixels2d.reserve(4);
    for (int j = 0; j < 4; ++j) {
      minimal.points3d.push_back(set.points3d[samples[s][j]]);
      minimal.pixels2d.push_back(set.pixels2d[samples[s][j]]);
    }
    PoseSE3 pose;
    try {
      pose = epnp(minimal, k);
    } catch (const Error&) {
      return;
    }
    const std::vector<double> errs = reprojection_errors(pose, set, k);
    int count = 0;
    double sq = 0.0;
    for (double e : errs) {
      if (e <= cfg.reproj_threshold) {
        ++count;
        sq += e * e;
      }
    }
    slots[s].count = count;
    slots[s].rms = count > 0 ? std::sqrt(sq / count)
                             : std::numeric_limits<double>::infinity();
    slots[s].pose = pose;
  });

  int best = -1;
  int evaluated = 0;
  for (int s = 0; s < cfg.iterations; ++s) {
    if (slots[s].count < 0) continue;
    ++evaluated;
    if (best < 0 || slots[s].count > slots[best].count ||
        (slots[s].count == slots[best].count && slots[s].rms < slots[best].rms)) {
      best = s;
    }
  }
  if (best < 0 || slots[best].count < cfg.min_inliers) {
    throw NoConsensus("ransac_pnp: no hypothesis reached min_inliers");
  }

  // Refit on the winning consensus set, then optionally polish with LM.
  auto collect_inliers = [&](const PoseSE3& pose) {
    std::vector<int> inliers;
    const std::vector<double> errs = reprojection_errors(pose, set, k);
    for (std::size_t i = 0; i < errs.size(); ++i) {
      if (errs[i] <= cfg.reproj_threshold) inliers.push_back(static_cast<int>(i));
    }
    return inliers;
  };
  auto subset = [&](const std::vector<int>& idx) {
    CorrespondenceSet s;
    s.points3d.reserve(idx.size());
    s.pixels2d.reserve(idx.size());
    if (!set.weights.empty()) s.weights.reserve(idx.size());
    for (int i : idx) {
      s.points3d.push_back(set.points3d[i]);
      s.pixels2d.push_back(set.pixels2d[i]);
      if (!set.weights.empty()) s.weights.push_back(set.weights[i]);
    }
    return s;
  };

  PoseSE3 pose = slots[best].pose;
  const std::vector<int> consensus = collect_inliers(pose);
  try {
    pose = epnp(subset(consensus), k);
  } catch (const Error&) {
    // Keep the hypothesis pose when the consensus refit is degenerate.
  }
  if (cfg.refine_with_lm) {
    pose = lm_refine(pose, subset(collect_inliers(pose)), k);
  }

  PnPResult result;
  result.pose = pose;
  result.inlier_indices = collect_inliers(pose);
  result.hypothesis_count = evaluated;
  double sq = 0.0;
  const std::vector<double> errs = reprojection_errors(pose, set, k);
  for (int i : result.inlier_indices) sq += errs[i] * errs[i];
  result.inlier_rms = result.inlier_indices.empty()
                          ? 0.0
                          : std::sqrt(sq / result.inlier_indices.size());
  return result;
}

}  // namespace camlidar
