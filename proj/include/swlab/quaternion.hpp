#pragma once

#include <cmath>
#include <complex>
#include <ostream>

namespace swlab {

struct Quaternion {
    double w = 0, x = 0, y = 0, z = 0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
    constexpr explicit Quaternion(double re) : w(re) {}

    static constexpr Quaternion one() { return {1, 0, 0, 0}; }
    static constexpr Quaternion I() { return {0, 1, 0, 0}; }
    static constexpr Quaternion J() { return {0, 0, 1, 0}; }
    static constexpr Quaternion K() { return {0, 0, 0, 1}; }
    // w + x i, embedded in the (1, i) plane
    static Quaternion from_complex(std::complex<double> c) { return {c.real(), c.imag(), 0, 0}; }

    constexpr double operator[](int c) const { return c == 0 ? w : c == 1 ? x : c == 2 ? y : z; }
    double& operator[](int c) { return c == 0 ? w : c == 1 ? x : c == 2 ? y : z; }

    constexpr Quaternion conj() const { return {w, -x, -y, -z}; }
    constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
    double abs() const { return std::sqrt(norm2()); }

    Quaternion& operator+=(const Quaternion& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
    Quaternion& operator-=(const Quaternion& o) { w -= o.w; x -= o.x; y -= o.y; z -= o.z; return *this; }
    Quaternion& operator*=(double s) { w *= s; x *= s; y *= s; z *= s; return *this; }
};

constexpr Quaternion operator+(const Quaternion& a, const Quaternion& b) { return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Quaternion operator-(const Quaternion& a, const Quaternion& b) { return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Quaternion operator-(const Quaternion& a) { return {-a.w, -a.x, -a.y, -a.z}; }
constexpr Quaternion operator*(double s, const Quaternion& a) { return {s * a.w, s * a.x, s * a.y, s * a.z}; }
constexpr Quaternion operator*(const Quaternion& a, double s) { return s * a; }
constexpr Quaternion operator/(const Quaternion& a, double s) { return {a.w / s, a.x / s, a.y / s, a.z / s}; }

// Hamilton product
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

inline Quaternion quat_mul(const Quaternion& a, const Quaternion& b) { return a * b; }

constexpr double real_dot(const Quaternion& a, const Quaternion& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double max_abs_diff(const Quaternion& a, const Quaternion& b) {
    return std::max({std::abs(a.w - b.w), std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

// left multiplication by e^{i t}, kept accurate for small t
inline Quaternion phase_left(double t, const Quaternion& q) {
    const double c = std::cos(t), s = std::sin(t);
    return {c * q.w - s * q.x, c * q.x + s * q.w, c * q.y - s * q.z, c * q.z + s * q.y};
}

// (e^{i t} - 1) q
inline Quaternion phase_left_minus_one(double t, const Quaternion& q) {
    const double sh = std::sin(0.5 * t);
    const double cm = -2.0 * sh * sh, s = std::sin(t);
    return {cm * q.w - s * q.x, cm * q.x + s * q.w, cm * q.y - s * q.z, cm * q.z + s * q.y};
}

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
    return os << "(" << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ")";
}

struct ImQuaternion {
    double x = 0, y = 0, z = 0;

    constexpr ImQuaternion() = default;
    constexpr ImQuaternion(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Quaternion q() const { return {0, x, y, z}; }
    static constexpr ImQuaternion from(const Quaternion& a) { return {a.x, a.y, a.z}; }
    constexpr double operator[](int c) const { return c == 0 ? x : c == 1 ? y : z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    std::complex<double> complex_part() const { return {y, z}; }
};

constexpr ImQuaternion operator+(const ImQuaternion& a, const ImQuaternion& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr ImQuaternion operator-(const ImQuaternion& a, const ImQuaternion& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr ImQuaternion operator*(double s, const ImQuaternion& a) { return {s * a.x, s * a.y, s * a.z}; }

}  // namespace swlab
