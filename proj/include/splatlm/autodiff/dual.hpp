#pragma once

#include <cmath>

namespace splatlm::autodiff {

// Forward-mode scalar: value plus directional derivative along one probe
// vector. Every overload propagates both parts in a single pass, so a dual
// evaluation of the render pipeline yields one column combination of the
// Jacobian (a Jv product restricted to the evaluated outputs).
struct Dual {
    double re = 0.0;  // value
    double pr = 0.0;  // tangent

    constexpr Dual() = default;
    constexpr Dual(double real) : re(real) {}
    constexpr Dual(double real, double prime) : re(real), pr(prime) {}

    Dual& operator+=(const Dual& o) {
        re += o.re;
        pr += o.pr;
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        re -= o.re;
        pr -= o.pr;
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        pr = pr * o.re + re * o.pr;  // product rule
        re = re * o.re;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        pr = (pr * o.re - re * o.pr) / (o.re * o.re);
        re = re / o.re;
        return *this;
    }

    Dual operator-() const { return {-re, -pr}; }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }

inline Dual operator+(double a, const Dual& b) { return Dual(a) + b; }
inline Dual operator-(double a, const Dual& b) { return Dual(a) - b; }
inline Dual operator*(double a, const Dual& b) { return Dual(a) * b; }
inline Dual operator/(double a, const Dual& b) { return Dual(a) / b; }

inline Dual operator+(const Dual& a, double b) { return a + Dual(b); }
inline Dual operator-(const Dual& a, double b) { return a - Dual(b); }
inline Dual operator*(const Dual& a, double b) { return a * Dual(b); }
inline Dual operator/(const Dual& a, double b) { return a / Dual(b); }

inline Dual exp(const Dual& x) {
    const double e = std::exp(x.re);
    return {e, x.pr * e};
}

inline Dual sqrt(const Dual& x) {
    const double s = std::sqrt(x.re);
    return {s, x.pr / (2.0 * s)};
}

// 1 / (1 + e^-x)
inline Dual sigmoid(const Dual& x) {
    const double s = 1.0 / (1.0 + std::exp(-x.re));
    return {s, x.pr * s * (1.0 - s)};
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace splatlm::autodiff

namespace splatlm {
inline double scalar_value(const autodiff::Dual& d) { return d.re; }
}  // namespace splatlm
