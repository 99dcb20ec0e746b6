#include "camlidar/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "camlidar/errors.hpp"

namespace camlidar {

namespace {

std::ifstream open_input(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoFailure("cannot open for reading: " + path);
  return in;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace

PointCloud load_scan(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw IoFailure("read failed: " + path);
  if (bytes.size() % 16 != 0) {
    throw MalformedScan(path + ": byte length " + std::to_string(bytes.size()) +
                        " is not a multiple of 16");
  }
  const std::size_t n = bytes.size() / 16;
  PointCloud cloud;
  cloud.points.resize(n);
  cloud.intensity.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    float f[4];
    std::memcpy(f, bytes.data() + 16 * i, 16);
    cloud.points[i] = Eigen::Vector3d(f[0], f[1], f[2]);
    cloud.intensity[i] = f[3];
  }
  cloud.validate();
  return cloud;
}

void save_scan(const PointCloud& cloud, const std::string& path) {
  cloud.validate();
  std::ofstream out = open_output(path, std::ios::binary);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float f[4] = {static_cast<float>(cloud.points[i].x()),
                        static_cast<float>(cloud.points[i].y()),
                        static_cast<float>(cloud.points[i].z()),
                        cloud.intensity.empty() ? 0.0f : cloud.intensity[i]};
    out.write(reinterpret_cast<const char*>(f), 16);
  }
  finish_output(out, path);
}

std::vector<TrajectoryEntry> load_trajectory(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::in);
  std::vector<TrajectoryEntry> entries;
  std::string line;
  int expected_tokens = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    std::string trailing;
    if (!row.eof() && row.fail()) {
      row.clear();
      if (row >> trailing) {
        throw MalformedInput(path + ":" + std::to_string(line_no) +
                             ": non-numeric token '" + trailing + "'");
      }
    }
    if (vals.empty()) continue;  // blank line
    if (vals.size() != 12 && vals.size() != 13) {
      throw MalformedInput(path + ":" + std::to_string(line_no) + ": expected " +
                           "12 or 13 values, got " +
                           std::to_string(vals.size()));
    }
    if (expected_tokens == 0) {
      expected_tokens = static_cast<int>(vals.size());
    } else if (static_cast<int>(vals.size()) != expected_tokens) {
      throw MalformedInput(path + ":" + std::to_string(line_no) +
                           ": inconsistent column count");
    }
    for (double x : vals) {
      if (!std::isfinite(x)) {
        throw MalformedInput(path + ":" + std::to_string(line_no) +
                             ": non-finite value");
      }
    }
    TrajectoryEntry entry;
    std::size_t base = 0;
    if (vals.size() == 13) {
      entry.timestamp = vals[0];
      base = 1;
    } else {
      entry.timestamp = static_cast<double>(entries.size());
    }
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    for (int row_i = 0; row_i < 3; ++row_i) {
      for (int col = 0; col < 3; ++col) {
        r(row_i, col) = vals[base + 4 * row_i + col];
      }
      t[row_i] = vals[base + 4 * row_i + 3];
    }
    if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
            1e-3 ||
        r.determinant() < 0.0) {
      throw MalformedInput(path + ":" + std::to_string(line_no) +
                           ": rotation block is not orthonormal");
    }
    entry.pose = PoseSE3::from_rt(r, t);
    if (!entries.empty() && entry.timestamp <= entries.back().timestamp) {
      throw MalformedInput(path + ":" + std::to_string(line_no) +
                           ": timestamps must increase strictly");
    }
    entries.push_back(entry);
  }
  if (in.bad()) throw IoFailure("read failed: " + path);
  return entries;
}

void save_trajectory(const std::vector<TrajectoryEntry>& entries,
                     const std::string& path, bool with_timestamps) {
  std::ofstream out = open_output(path, std::ios::out);
  char buf[32];
  const auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << sep;
  };
  for (const TrajectoryEntry& e : entries) {
    if (with_timestamps) put(e.timestamp, ' ');
    const Eigen::Matrix3d r = e.pose.rotation_matrix();
    const Eigen::Vector3d& t = e.pose.translation();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) put(r(row, col), ' ');
      put(t[row], row == 2 ? '\n' : ' ');
    }
  }
  finish_output(out, path);
}

IntrinsicsFile load_intrinsics(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::in);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(path + ": " + e.what());
  }
  const auto need = [&](const char* key) -> double {
    if (!j.contains(key) || !j[key].is_number()) {
      throw MalformedInput(path + ": missing numeric field '" +
                           std::string(key) + "'");
    }
    return j[key].get<double>();
  };
  IntrinsicsFile file;
  try {
    file.k = CameraIntrinsics(need("fx"), need("fy"), need("cx"), need("cy"),
                              static_cast<int>(need("width")),
                              static_cast<int>(need("height")));
  } catch (const std::invalid_argument& e) {
    throw MalformedInput(path + ": " + e.what());
  }
  if (j.contains("frame")) {
    const std::string tag = j["frame"].is_string() ? j["frame"].get<std::string>()
                                                   : std::string();
    if (tag == "pinhole-z-forward") {
      file.frame = FrameConvention::PinholeZForward;
    } else if (tag == "robot-x-forward") {
      file.frame = FrameConvention::RobotXForward;
    } else {
      throw MalformedInput(path + ": unknown frame tag '" + tag + "'");
    }
  }
  return file;
}

void save_intrinsics(const IntrinsicsFile& file, const std::string& path) {
  nlohmann::json j;
  j["fx"] = file.k.fx;
  j["fy"] = file.k.fy;
  j["cx"] = file.k.cx;
  j["cy"] = file.k.cy;
  j["width"] = file.k.width;
  j["height"] = file.k.height;
  j["frame"] = file.frame == FrameConvention::RobotXForward
                   ? "robot-x-forward"
                   : "pinhole-z-forward";
  std::ofstream out = open_output(path, std::ios::out);
  out << j.dump(2) << '\n';
  finish_output(out, path);
}

PointCloud build_map(const std::vector<std::pair<PointCloud, PoseSE3>>& scans,
                     const VoxelGridConfig& grid,
                     const std::vector<std::vector<std::uint32_t>>& labels,
                     const std::vector<std::uint32_t>& drop_labels) {
  if (!(grid.voxel_size > 0.0)) {
    throw std::invalid_argument("build_map: voxel_size must be positive");
  }
  if (!labels.empty() && labels.size() != scans.size()) {
    throw LabelLengthMismatch("build_map: one label array per scan required");
  }
  const std::unordered_set<std::uint32_t> drop(drop_labels.begin(),
                                               drop_labels.end());

  struct Member {
    std::array<long long, 3> voxel;
    Eigen::Vector3d point;
    float intensity;
  };
  std::vector<Member> members;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    const PointCloud& cloud = scans[s].first;
    cloud.validate();
    if (!labels.empty() && labels[s].size() != cloud.size()) {
      throw LabelLengthMismatch("build_map: scan " + std::to_string(s) +
                                " labels do not match its point count");
    }
    const Eigen::Matrix3d r = scans[s].second.rotation_matrix();
    const Eigen::Vector3d& t = scans[s].second.translation();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!labels.empty() && drop.count(labels[s][i])) continue;
      Member m;
      m.point = r * cloud.points[i] + t;
      m.intensity = cloud.intensity.empty() ? 0.0f : cloud.intensity[i];
      for (int c = 0; c < 3; ++c) {
        m.voxel[c] =
            static_cast<long long>(std::floor(m.point[c] / grid.voxel_size));
      }
      members.push_back(m);
    }
  }

  // Canonical order: voxel index, then coordinates, then intensity. Sorting
  // makes both grouping and per-voxel accumulation independent of input
  // order.
  std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
    if (a.voxel != b.voxel) return a.voxel < b.voxel;
    for (int c = 0; c < 3; ++c) {
      if (a.point[c] != b.point[c]) return a.point[c] < b.point[c];
    }
    return a.intensity < b.intensity;
  });

  PointCloud out;
  std::size_t i = 0;
  while (i < members.size()) {
    std::size_t j = i;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double intensity_sum = 0.0;
    while (j < members.size() && members[j].voxel == members[i].voxel) {
      sum += members[j].point;
      intensity_sum += members[j].intensity;
      ++j;
    }
    const double count = static_cast<double>(j - i);
    out.points.push_back(sum / count);
    out.intensity.push_back(static_cast<float>(intensity_sum / count));
    i = j;
  }
  return out;
}

void export_ply(const PointCloud& cloud, const std::string& path) {
  cloud.validate();
  const bool with_intensity = !cloud.intensity.empty();
  const bool with_color =
      !cloud.color_valid.empty() &&
      std::any_of(cloud.color_valid.begin(), cloud.color_valid.end(),
                  [](std::uint8_t v) { return v != 0; });

  std::ofstream out = open_output(path, std::ios::out);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << '\n';
  out << "property float x\nproperty float y\nproperty float z\n";
  if (with_intensity) out << "property float intensity\n";
  if (with_color) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";

  char buf[32];
  const auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf << sep;
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    put(cloud.points[i].x(), ' ');
    put(cloud.points[i].y(), ' ');
    put(cloud.points[i].z(), with_intensity || with_color ? ' ' : '\n');
    if (with_intensity) {
      put(cloud.intensity[i], with_color ? ' ' : '\n');
    }
    if (with_color) {
      const bool valid = i < cloud.color_valid.size() && cloud.color_valid[i];
      const std::array<std::uint8_t, 3> rgb =
          valid ? cloud.color[i] : std::array<std::uint8_t, 3>{0, 0, 0};
      out << int(rgb[0]) << ' ' << int(rgb[1]) << ' ' << int(rgb[2]) << '\n';
    }
  }
  finish_output(out, path);
}

PointCloud import_ply(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::in);
  std::string line;
  const auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line.rfind("comment", 0) != 0) return true;
    }
    return false;
  };
  if (!next_line() || line != "ply") {
    throw MalformedInput(path + ": missing ply magic");
  }
  if (!next_line() || line.rfind("format ascii", 0) != 0) {
    throw MalformedInput(path + ": only ascii format is supported");
  }

  std::size_t n_vertices = 0;
  std::vector<std::string> properties;
  bool in_vertex_element = false;
  while (next_line()) {
    std::istringstream row(line);
    std::string word;
    row >> word;
    if (word == "end_header") break;
    if (word == "element") {
      std::string name;
      row >> name >> n_vertices;
      if (name != "vertex") {
        throw MalformedInput(path + ": unsupported element '" + name + "'");
      }
      in_vertex_element = true;
    } else if (word == "property") {
      if (!in_vertex_element) {
        throw MalformedInput(path + ": property before element");
      }
      std::string type, name;
      row >> type >> name;
      if (type == "list") {
        throw MalformedInput(path + ": list properties are not supported");
      }
      properties.push_back(name);
    } else {
      throw MalformedInput(path + ": unexpected header line '" + line + "'");
    }
  }
  const auto index_of = [&](const char* name) {
    const auto it = std::find(properties.begin(), properties.end(), name);
    return it == properties.end()
               ? -1
               : static_cast<int>(it - properties.begin());
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int ii = index_of("intensity");
  const int ir = index_of("red"), ig = index_of("green"), ib = index_of("blue");
  if (ix < 0 || iy < 0 || iz < 0) {
    throw MalformedInput(path + ": vertex element lacks x/y/z");
  }
  const bool with_color = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud;
  std::vector<double> vals(properties.size());
  for (std::size_t v = 0; v < n_vertices; ++v) {
    if (!next_line()) throw MalformedInput(path + ": truncated vertex list");
    std::istringstream row(line);
    for (double& x : vals) {
      if (!(row >> x)) throw MalformedInput(path + ": short vertex row");
    }
    cloud.points.emplace_back(vals[ix], vals[iy], vals[iz]);
    if (ii >= 0) cloud.intensity.push_back(static_cast<float>(vals[ii]));
    if (with_color) {
      cloud.color.push_back({static_cast<std::uint8_t>(vals[ir]),
                             static_cast<std::uint8_t>(vals[ig]),
                             static_cast<std::uint8_t>(vals[ib])});
      cloud.color_valid.push_back(1);
    }
  }
  cloud.validate();
  return cloud;
}

void save_ppm(const ColorImage& image, const std::string& path) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() !=
          static_cast<std::size_t>(image.width) * image.height) {
    throw DimensionMismatch("save_ppm: inconsistent image dimensions");
  }
  std::ofstream out = open_output(path, std::ios::binary);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (const auto& px : image.rgb) {
    out.write(reinterpret_cast<const char*>(px.data()), 3);
  }
  finish_output(out, path);
}

ColorImage load_ppm(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw MalformedInput(path + ": not a P6 ppm");
  const auto next_int = [&]() {
    // Skip whitespace and '#' comment lines between header fields.
    int c = in.peek();
    while (c == '#' || std::isspace(c)) {
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else {
        in.get();
      }
      c = in.peek();
    }
    long long v = -1;
    in >> v;
    if (!in || v < 0) throw MalformedInput(path + ": bad ppm header");
    return v;
  };
  const long long w = next_int();
  const long long h = next_int();
  const long long maxval = next_int();
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw MalformedInput(path + ": unsupported ppm geometry or depth");
  }
  in.get();  // single whitespace after maxval
  ColorImage image;
  image.width = static_cast<int>(w);
  image.height = static_cast<int>(h);
  image.rgb.resize(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(image.rgb.data()),
          static_cast<std::streamsize>(image.rgb.size() * 3));
  if (in.gcount() != static_cast<std::streamsize>(image.rgb.size() * 3)) {
    throw MalformedInput(path + ": truncated pixel payload");
  }
  return image;
}

}  // namespace camlidar
