#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mfsync/core/error.hpp"
#include "mfsync/core/rng.hpp"

namespace mfsync::so3 {

/// Rotation stored as a unit quaternion w + xi + yj + zk with w >= 0.
class Rotation {
 public:
  Rotation() = default;

  /// Normalizes and canonicalizes the sign; a zero quaternion is rejected.
  Rotation(double w, double x, double y, double z) {
    const double norm = std::sqrt(w * w + x * x + y * y + z * z);
    require(norm > 0.0 && std::isfinite(norm), ErrorKind::PreconditionViolation, "quaternion has zero norm");
    q_ = {w / norm, x / norm, y / norm, z / norm};
    if (q_[0] < 0.0 || (q_[0] == 0.0 && first_nonzero_negative())) {
      for (double& c : q_) c = -c;
    }
  }

  static Rotation identity() { return {}; }

  /// Rotation by `angle` about `axis` (need not be normalized).
  static Rotation axis_angle(const Eigen::Vector3d& axis, double angle) {
    const double len = axis.norm();
    require(len > 0.0, ErrorKind::PreconditionViolation, "rotation axis is zero");
    const Eigen::Vector3d u = axis / len;
    const double s = std::sin(0.5 * angle);
    return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
  }

  /// Nearest rotation to a matrix that is already (numerically) a rotation.
  static Rotation from_matrix(const Eigen::Matrix3d& r) {
    const double tr = r.trace();
    if (tr > 0.0) {
      const double s = 2.0 * std::sqrt(tr + 1.0);
      return {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
    }
    if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
      const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
      return {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
    }
    if (r(1, 1) > r(2, 2)) {
      const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
      return {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
    }
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    return {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }

  double w() const noexcept { return q_[0]; }
  double x() const noexcept { return q_[1]; }
  double y() const noexcept { return q_[2]; }
  double z() const noexcept { return q_[3]; }

  Rotation inverse() const { return {q_[0], -q_[1], -q_[2], -q_[3]}; }

  /// Composition: (a * b) applies b first, then a.
  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    const auto& p = a.q_;
    const auto& q = b.q_;
    return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
            p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
            p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
            p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
  }

  Eigen::Matrix3d matrix() const {
    const double w = q_[0], x = q_[1], y = q_[2], z = q_[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
  }

  /// Rotation angle in [0, pi].
  double angle() const {
    const double v = std::sqrt(q_[1] * q_[1] + q_[2] * q_[2] + q_[3] * q_[3]);
    return 2.0 * std::atan2(v, q_[0]);
  }

  friend bool operator==(const Rotation&, const Rotation&) = default;

 private:
  bool first_nonzero_negative() const {
    for (double c : q_)
      if (c != 0.0) return c < 0.0;
    return false;
  }

  std::array<double, 4> q_{1.0, 0.0, 0.0, 0.0};
};

/// Angular distance between two rotations, in [0, pi].
inline double angular_distance(const Rotation& a, const Rotation& b) { return (a.inverse() * b).angle(); }

/// Haar-uniform rotation from a normalized 4D Gaussian vector.
inline Rotation sample_rotation(Rng& rng) {
  for (;;) {
    const double w = rng.normal(), x = rng.normal(), y = rng.normal(), z = rng.normal();
    if (w * w + x * x + y * y + z * z > 1e-300) return {w, x, y, z};
  }
}

inline std::vector<Rotation> sample_rotations(int n, Rng& rng) {
  require(n >= 1, ErrorKind::PreconditionViolation, "need at least one rotation");
  std::vector<Rotation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_rotation(rng));
  return out;
}

/// Nearest rotation in Frobenius norm: polar factor with a determinant fix.
inline Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

/// CSV with header w,x,y,z, one rotation per row.
inline void write_rotations_csv(const std::vector<Rotation>& rotations, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path + " for writing");
  out << "w,x,y,z\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rotations) out << r.w() << ',' << r.x() << ',' << r.y() << ',' << r.z() << '\n';
  require(static_cast<bool>(out), ErrorKind::IoError, "failed writing " + path);
}

inline std::vector<Rotation> read_rotations_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  require(line == "w,x,y,z", ErrorKind::IoError, path + ": expected header w,x,y,z");
  std::vector<Rotation> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    double q[4];
    for (int c = 0; c < 4; ++c) {
      std::string cell;
      require(static_cast<bool>(std::getline(ss, cell, ',')), ErrorKind::IoError,
              path + ":" + std::to_string(row) + ": expected 4 columns");
      try {
        q[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::IoError, path + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    out.emplace_back(q[0], q[1], q[2], q[3]);
  }
  return out;
}

}  // namespace mfsync::so3
