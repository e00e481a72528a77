#ifndef LOCSUB_VEC_HPP
#define LOCSUB_VEC_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace locsub {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
  return a / n;
}

/// Symmetric 3x3 tensor, row-major.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity(double s = 1.0) {
    Mat3 r;
    r.m = {s, 0, 0, 0, s, 0, 0, 0, s};
    return r;
  }
  static Mat3 diag(double a, double b, double c) {
    Mat3 r;
    r.m = {a, 0, 0, 0, b, 0, 0, 0, c};
    return r;
  }

  double& operator()(std::size_t i, std::size_t j) { return m[3 * i + j]; }
  double operator()(std::size_t i, std::size_t j) const { return m[3 * i + j]; }

  Mat3& operator-=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) m[i] -= o.m[i];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (double& v : m) v *= s;
    return *this;
  }
};

inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }

inline Vec3 operator*(const Mat3& A, const Vec3& v) {
  return {A.m[0] * v.x + A.m[1] * v.y + A.m[2] * v.z,
          A.m[3] * v.x + A.m[4] * v.y + A.m[5] * v.z,
          A.m[6] * v.x + A.m[7] * v.y + A.m[8] * v.z};
}

inline Mat3 operator*(const Mat3& A, const Mat3& B) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += A(i, k) * B(k, j);
      r(i, j) = s;
    }
  return r;
}

inline double det(const Mat3& A) {
  return A.m[0] * (A.m[4] * A.m[8] - A.m[5] * A.m[7]) -
         A.m[1] * (A.m[3] * A.m[8] - A.m[5] * A.m[6]) +
         A.m[2] * (A.m[3] * A.m[7] - A.m[4] * A.m[6]);
}

inline Mat3 inverse(const Mat3& A) {
  double d = det(A);
  if (d == 0.0) throw std::invalid_argument("singular 3x3 matrix");
  Mat3 r;
  r.m[0] = (A.m[4] * A.m[8] - A.m[5] * A.m[7]) / d;
  r.m[1] = (A.m[2] * A.m[7] - A.m[1] * A.m[8]) / d;
  r.m[2] = (A.m[1] * A.m[5] - A.m[2] * A.m[4]) / d;
  r.m[3] = (A.m[5] * A.m[6] - A.m[3] * A.m[8]) / d;
  r.m[4] = (A.m[0] * A.m[8] - A.m[2] * A.m[6]) / d;
  r.m[5] = (A.m[2] * A.m[3] - A.m[0] * A.m[5]) / d;
  r.m[6] = (A.m[3] * A.m[7] - A.m[4] * A.m[6]) / d;
  r.m[7] = (A.m[1] * A.m[6] - A.m[0] * A.m[7]) / d;
  r.m[8] = (A.m[0] * A.m[4] - A.m[1] * A.m[3]) / d;
  return r;
}

inline Mat3 transpose(const Mat3& A) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r(i, j) = A(j, i);
  return r;
}

inline bool is_symmetric(const Mat3& A, double tol = 1e-12) {
  return std::abs(A(0, 1) - A(1, 0)) <= tol && std::abs(A(0, 2) - A(2, 0)) <= tol &&
         std::abs(A(1, 2) - A(2, 1)) <= tol;
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
/// Returns eigenvalues; V columns hold the corresponding eigenvectors.
inline std::array<double, 3> symmetric_eigen(const Mat3& A, Mat3& V) {
  Mat3 a = A;
  V = Mat3::identity();
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t q = p + 1; q < 3; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < 3; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }
  return {a(0, 0), a(1, 1), a(2, 2)};
}

}  // namespace locsub

#endif
