#ifndef W2P_HALFPLANE_HPP
#define W2P_HALFPLANE_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include "error.hpp"

namespace w2p {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

struct HPoint {
    double x = 0.0;
    double y = 1.0;

    HPoint() = default;
    HPoint(double x_, double y_) : x(x_), y(y_) {
        require(y_ > 0.0 && std::isfinite(x_) && std::isfinite(y_), "point not in upper half-plane");
    }
    explicit HPoint(cplx z) : HPoint(z.real(), z.imag()) {}

    cplx z() const { return {x, y}; }
};

// Element of PSL(2,R), stored with determinant 1.
struct Moebius {
    double a = 1, b = 0, c = 0, d = 1;

    Moebius() = default;
    Moebius(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
        double det = a * d - b * c;
        require(det > 0.0 && std::isfinite(det), "matrix must have positive determinant");
        if (det != 1.0) {
            double s = std::sqrt(det);
            a /= s; b /= s; c /= s; d /= s;
        }
    }

    static Moebius identity() { return {}; }

    double det() const { return a * d - b * c; }

    Moebius inverse() const {
        Moebius m;
        m.a = d; m.b = -b; m.c = -c; m.d = a;
        return m;
    }

    Moebius operator*(const Moebius& o) const {
        Moebius m;
        m.a = a * o.a + b * o.c;
        m.b = a * o.b + b * o.d;
        m.c = c * o.a + d * o.c;
        m.d = c * o.b + d * o.d;
        return m;
    }

    cplx apply(cplx t) const { return (a * t + b) / (c * t + d); }
    HPoint apply(const HPoint& t) const {
        cplx w = apply(t.z());
        // Im(g t) = y / |ct+d|^2 computed directly keeps full relative accuracy.
        double den = std::norm(c * t.z() + d);
        return HPoint(w.real(), t.y / den);
    }

    cplx derivative(cplx t) const {
        cplx den = c * t + d;
        return 1.0 / (den * den);
    }

    // Sign-insensitive entrywise distance.
    double distance(const Moebius& o) const {
        double p = std::abs(a - o.a) + std::abs(b - o.b) + std::abs(c - o.c) + std::abs(d - o.d);
        double m = std::abs(a + o.a) + std::abs(b + o.b) + std::abs(c + o.c) + std::abs(d + o.d);
        return std::min(p, m);
    }

    bool approx_equal(const Moebius& o, double tol = 1e-10) const { return distance(o) <= tol; }

    // Representative with c > 0, or c == 0 and d > 0.
    Moebius canonical() const {
        if (c < 0 || (c == 0 && d < 0)) {
            Moebius m;
            m.a = -a; m.b = -b; m.c = -c; m.d = -d;
            return m;
        }
        return *this;
    }

    double trace() const { return a + d; }
};

inline HPoint moebius_apply(const Moebius& g, const HPoint& t) { return g.apply(t); }
inline cplx moebius_derivative(const Moebius& g, const HPoint& t) { return g.derivative(t.z()); }

inline cplx cayley(const HPoint& t) { return (t.z() - kI) / (t.z() + kI); }
inline cplx cayley_derivative(const HPoint& t) {
    cplx den = t.z() + kI;
    return 2.0 * kI / (den * den);
}
inline HPoint cayley_inverse(cplx zeta) {
    require(std::abs(zeta) < 1.0, "point not in unit disk");
    return HPoint(kI * (1.0 + zeta) / (1.0 - zeta));
}

inline cplx q_coordinate(const HPoint& t) { return std::exp(2.0 * kPi * kI * t.z()); }

// e^{2 pi i a t} for real exponent a.
inline cplx qpow(cplx t, double a) { return std::exp(2.0 * kPi * kI * a * t); }

}  // namespace w2p

#endif
