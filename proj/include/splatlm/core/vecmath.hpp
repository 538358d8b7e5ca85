#pragma once

#include <cmath>
#include <cstddef>

namespace splatlm {

// Minimal fixed-size vector/matrix templates. The scalar type T is either
// double or autodiff::Dual so that the same geometry code serves both the
// plain renderer and the forward-mode derivative pass.

inline double scalar_value(double v) { return v; }

template <class T>
struct Vec2 {
    T x{}, y{};
};

template <class T>
struct Vec3 {
    T x{}, y{}, z{};
};

// Quaternion storage order (w, x, y, z).
template <class T>
struct Vec4 {
    T w{}, x{}, y{}, z{};
};

// Row-major 3x3 matrix.
template <class T>
struct Mat3 {
    T m[9]{};

    T& operator()(int r, int c) { return m[3 * r + c]; }
    const T& operator()(int r, int c) const { return m[3 * r + c]; }
};

// Symmetric 2x2 matrix [[a, b], [b, c]].
template <class T>
struct Sym2 {
    T a{}, b{}, c{};
};

template <class T>
Vec3<T> operator+(const Vec3<T>& u, const Vec3<T>& v) {
    return {u.x + v.x, u.y + v.y, u.z + v.z};
}

template <class T>
Vec3<T> operator-(const Vec3<T>& u, const Vec3<T>& v) {
    return {u.x - v.x, u.y - v.y, u.z - v.z};
}

template <class T>
Vec3<T> cross(const Vec3<T>& u, const Vec3<T>& v) {
    return {u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
}

template <class T>
T dot(const Vec3<T>& u, const Vec3<T>& v) {
    return u.x * v.x + u.y * v.y + u.z * v.z;
}

template <class T>
Mat3<T> matmul(const Mat3<T>& a, const Mat3<T>& b) {
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    return r;
}

template <class T>
Mat3<T> transpose(const Mat3<T>& a) {
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = a(j, i);
    return r;
}

template <class T>
Vec3<T> matvec(const Mat3<T>& a, const Vec3<T>& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

// Largest eigenvalue of a symmetric 2x2 matrix.
inline double sym2_max_eigenvalue(const Sym2<double>& s) {
    const double mid = 0.5 * (s.a + s.c);
    const double det = s.a * s.c - s.b * s.b;
    const double disc = std::sqrt(std::max(0.0, mid * mid - det));
    return mid + disc;
}

inline double sym2_min_eigenvalue(const Sym2<double>& s) {
    const double mid = 0.5 * (s.a + s.c);
    const double det = s.a * s.c - s.b * s.b;
    const double disc = std::sqrt(std::max(0.0, mid * mid - det));
    return mid - disc;
}

}  // namespace splatlm
