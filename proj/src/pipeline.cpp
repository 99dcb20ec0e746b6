#include "camlidar/pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "camlidar/errors.hpp"
#include "camlidar/rng.hpp"

namespace camlidar {

namespace {

constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;

}  // namespace

PoseSE3 sample_initial_pose(const PoseSE3& gt, const NoiseRange& range,
                            std::uint64_t seed) {
  if (range.max_translation_m < 0.0 || range.max_rotation_deg < 0.0) {
    throw std::invalid_argument("sample_initial_pose: negative noise range");
  }
  Rng rng(seed);
  const double bt = range.max_translation_m;
  const double br = range.max_rotation_deg;
  const Eigen::Vector3d dt(rng.uniform(-bt, bt), rng.uniform(-bt, bt),
                           rng.uniform(-bt, bt));
  const double roll = rng.uniform(-br, br) * kDegToRad;
  const double pitch = rng.uniform(-br, br) * kDegToRad;
  const double yaw = rng.uniform(-br, br) * kDegToRad;
  if (bt == 0.0 && br == 0.0) return gt;

  const Eigen::Quaterniond dq =
      Eigen::Quaterniond(Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX())) *
      Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ());
  return PoseSE3(gt.rotation() * dq, gt.translation() + dt);
}

PnPResult run_stage(const PointCloud& cloud, const PoseSE3& init,
                    const CameraIntrinsics& k, const StageConfig& stage,
                    const PoseSE3& gt_for_oracle,
                    const ProjectionConfig& projection) {
  LidarImage image;
  FlowField flow;
  if (!stage.matcher.external_flow_path.empty()) {
    image = render_lidar_image(cloud, init, k, projection);
    flow = load_flow_field(stage.matcher.external_flow_path);
    if (flow.width != image.width || flow.height != image.height) {
      throw DimensionMismatch(
          "run_stage: external flow field does not match the image size");
    }
  } else {
    auto rendered = ground_truth_flow(cloud, init, gt_for_oracle, k, projection);
    image = std::move(rendered.first);
    flow = oracle_match(rendered.second, stage.matcher.oracle);
  }
  flow = filter_by_uncertainty(flow, stage.keep_quantile);
  const CorrespondenceSet corr = to_correspondences(image, flow, cloud);
  return ransac_pnp(corr, k, stage.ransac);
}

std::vector<StageResult> iterative_localize(
    const PointCloud& cloud, const PoseSE3& init, const CameraIntrinsics& k,
    const std::vector<StageConfig>& stages, const PoseSE3& gt_for_oracle,
    const ProjectionConfig& projection) {
  if (stages.empty()) {
    throw std::invalid_argument("iterative_localize: stages must be nonempty");
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i].noise_range.max_translation_m >
            stages[i - 1].noise_range.max_translation_m ||
        stages[i].noise_range.max_rotation_deg >
            stages[i - 1].noise_range.max_rotation_deg) {
      throw std::invalid_argument(
          "iterative_localize: stage noise ranges must be non-increasing");
    }
  }
  std::vector<StageResult> results;
  results.reserve(stages.size());
  PoseSE3 current = init;
  for (const StageConfig& stage : stages) {
    StageResult outcome;
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed_ms = [&start] {
      return std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - start)
          .count();
    };
    try {
      outcome.result =
          run_stage(cloud, current, k, stage, gt_for_oracle, projection);
      outcome.succeeded = true;
      outcome.runtime_ms = elapsed_ms();
      current = outcome.result.pose;
      results.push_back(std::move(outcome));
    } catch (const NoConsensus& e) {
      outcome.result.pose = current;  // pass through, keep refining
      outcome.failure = e.what();
      outcome.runtime_ms = elapsed_ms();
      results.push_back(std::move(outcome));
    } catch (const Error& e) {
      outcome.result.pose = current;
      outcome.failure = e.what();
      outcome.runtime_ms = elapsed_ms();
      results.push_back(std::move(outcome));
      break;
    }
  }
  return results;
}

CalibrationMetrics msee_mrr(const std::vector<PosePair>& initial,
                            const std::vector<PosePair>& final_pairs) {
  if (initial.empty()) {
    throw std::invalid_argument("msee_mrr: inputs must be nonempty");
  }
  if (initial.size() != final_pairs.size()) {
    throw DimensionMismatch("msee_mrr: arrays differ in length");
  }
  const double n = static_cast<double>(initial.size());
  double sum_e = 0.0;
  double sum_rate = 0.0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const double eta = se3_log_norm(initial[i].first, initial[i].second);
    if (eta == 0.0) {
      throw ZeroInitialError("msee_mrr: initial error is zero");
    }
    const double e = se3_log_norm(final_pairs[i].first, final_pairs[i].second);
    sum_e += e;
    sum_rate += std::abs((eta - e) / eta);
  }
  return {sum_e / n, sum_rate / n};
}

namespace {

// Most frequent key; ties go to the key seen earliest.
template <typename Key>
Key mode_key(const std::vector<Key>& keys) {
  std::map<Key, std::pair<int, std::size_t>> counts;  // count, first index
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, fresh] = counts.try_emplace(keys[i], 0, i);
    ++it->second.first;
  }
  const Key* best = nullptr;
  int best_count = 0;
  std::size_t best_first = 0;
  for (const auto& [key, stat] : counts) {
    if (stat.first > best_count ||
        (stat.first == best_count && stat.second < best_first)) {
      best = &key;
      best_count = stat.first;
      best_first = stat.second;
    }
  }
  return *best;
}

double component_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

AggregationResult aggregate_extrinsics(const std::vector<PoseSE3>& poses) {
  if (poses.empty()) {
    throw std::invalid_argument("aggregate_extrinsics: empty pose list");
  }
  const std::size_t n = poses.size();

  Eigen::Matrix4d accum = Eigen::Matrix4d::Zero();
  Eigen::Vector3d t_mean = Eigen::Vector3d::Zero();
  for (const PoseSE3& p : poses) {
    const Eigen::Vector4d q = p.rotation().coeffs();
    accum.noalias() += q * q.transpose();
    t_mean += p.translation();
  }
  accum /= static_cast<double>(n);
  t_mean /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(accum);
  const Eigen::Vector4d qv = eig.eigenvectors().col(3);  // largest eigenvalue
  const Eigen::Quaterniond q_mean(qv[3], qv[0], qv[1], qv[2]);

  AggregationResult out;
  out.frame_count = static_cast<int>(n);
  out.mean_pose = PoseSE3(q_mean, t_mean);

  for (int c = 0; c < 3; ++c) {
    std::vector<double> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = poses[i].translation()[c];
    out.median_translation[c] = component_median(comp);
  }

  // Mode: per-component over integer-rounded grids.
  Eigen::Vector3d t_mode;
  for (int c = 0; c < 3; ++c) {
    std::vector<long long> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = std::llround(poses[i].translation()[c] * 100.0);
    }
    t_mode[c] = static_cast<double>(mode_key(keys)) / 100.0;
  }
  Eigen::Vector4d q_raw;
  for (int c = 0; c < 4; ++c) {
    std::vector<long long> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = std::llround(poses[i].rotation().coeffs()[c] * 10000.0);
    }
    q_raw[c] = static_cast<double>(mode_key(keys)) / 10000.0;
  }
  bool tuple_fallback = q_raw.norm() == 0.0;
  if (!tuple_fallback) {
    const Eigen::Vector4d q_unit = q_raw / q_raw.norm();
    tuple_fallback = ((q_unit - q_raw).cwiseAbs().maxCoeff() > 1e-4);
    if (!tuple_fallback) q_raw = q_unit;
  }
  if (tuple_fallback) {
    std::vector<std::array<long long, 4>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 4; ++c) {
        keys[i][c] = std::llround(poses[i].rotation().coeffs()[c] * 10000.0);
      }
    }
    const std::array<long long, 4> best = mode_key(keys);
    for (int c = 0; c < 4; ++c) {
      q_raw[c] = static_cast<double>(best[c]) / 10000.0;
    }
  }
  out.mode_pose = PoseSE3(Eigen::Quaterniond(q_raw[3], q_raw[0], q_raw[1], q_raw[2]),
                          t_mode);
  return out;
}

PointCloud colorize_map(
    const PointCloud& cloud,
    const std::vector<std::pair<ColorImage, PoseSE3>>& images,
    const CameraIntrinsics& k, const ProjectionConfig& projection) {
  if (images.empty()) {
    throw std::invalid_argument("colorize_map: images must be nonempty");
  }
  cloud.validate();
  PointCloud out = cloud;
  out.color.assign(cloud.size(), {0, 0, 0});
  out.color_valid.assign(cloud.size(), 0);

  for (const auto& [image, pose] : images) {
    if (image.width != k.width || image.height != k.height ||
        image.rgb.size() !=
            static_cast<std::size_t>(image.width) * image.height) {
      throw DimensionMismatch("colorize_map: image does not match intrinsics");
    }
    LidarImage rendered;
    try {
      rendered = render_lidar_image(cloud, pose, k, projection);
    } catch (const EmptyProjection&) {
      continue;  // nothing visible in this frame
    }
    for (std::size_t px = 0; px < rendered.depth.size(); ++px) {
      if (!rendered.valid(px)) continue;
      const std::uint32_t idx = rendered.source_index[px];
      if (out.color_valid[idx]) continue;  // earlier image wins

      const double u =
          std::clamp(rendered.u_sub[px], 0.0, static_cast<double>(k.width - 1));
      const double v = std::clamp(rendered.v_sub[px], 0.0,
                                  static_cast<double>(k.height - 1));
      const int x0 = static_cast<int>(std::floor(u));
      const int y0 = static_cast<int>(std::floor(v));
      const int x1 = std::min(x0 + 1, k.width - 1);
      const int y1 = std::min(y0 + 1, k.height - 1);
      const double fu = u - x0;
      const double fv = v - y0;
      for (int c = 0; c < 3; ++c) {
        const double val =
            (1.0 - fv) * ((1.0 - fu) * image.rgb[image.at(x0, y0)][c] +
                          fu * image.rgb[image.at(x1, y0)][c]) +
            fv * ((1.0 - fu) * image.rgb[image.at(x0, y1)][c] +
                  fu * image.rgb[image.at(x1, y1)][c]);
        out.color[idx][c] = static_cast<std::uint8_t>(
            std::clamp(std::llround(val), 0ll, 255ll));
      }
      out.color_valid[idx] = 1;
    }
  }
  return out;
}

}  // namespace camlidar
