#pragma once

// Real quaternions, complexified quaternions (2x2 complex matrices) and
// Euclidean 3-vectors identified with pure quaternions.
//
// Basis convention: w + x e1 + y e2 + z e3 with e_j = -i sigma_j (Pauli),
// so that e1^2 = e2^2 = e3^2 = -1 and e1 e2 = e3, e2 e3 = e1, e3 e1 = e2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "tsnet/error.hpp"

namespace tsnet {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    constexpr Vec3& operator/=(double s) { x /= s; y /= s; z /= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a /= s; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    if (n == 0.0) {
        throw NumericalError("cannot normalize the zero vector");
    }
    return a / n;
}

/// Unsigned angle between two vectors in [0, pi], via atan2 for accuracy near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// Real quaternion w + x e1 + y e2 + z e3.
struct Quat {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quat() = default;
    constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
    constexpr explicit Quat(double s) : w(s) {}

    static constexpr Quat one() { return {1, 0, 0, 0}; }
    static constexpr Quat e1() { return {0, 1, 0, 0}; }
    static constexpr Quat e2() { return {0, 0, 1, 0}; }
    static constexpr Quat e3() { return {0, 0, 0, 1}; }
    static constexpr Quat pure(const Vec3& v) { return {0, v.x, v.y, v.z}; }

    constexpr Vec3 vec() const { return {x, y, z}; }
    constexpr Quat conj() const { return {w, -x, -y, -z}; }
    /// Hermitian adjoint; for real quaternions this is the conjugate.
    constexpr Quat dagger() const { return conj(); }
    constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }

    Quat inverse() const {
        const double n2 = norm2();
        if (n2 == 0.0) {
            throw NumericalError("inverse of the zero quaternion");
        }
        return {w / n2, -x / n2, -y / n2, -z / n2};
    }

    constexpr Quat& operator+=(const Quat& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Quat& operator-=(const Quat& o) { w -= o.w; x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Quat& operator*=(double s) { w *= s; x *= s; y *= s; z *= s; return *this; }
    constexpr Quat& operator/=(double s) { w /= s; x /= s; y /= s; z /= s; return *this; }

    friend constexpr Quat operator+(Quat a, const Quat& b) { return a += b; }
    friend constexpr Quat operator-(Quat a, const Quat& b) { return a -= b; }
    friend constexpr Quat operator-(const Quat& a) { return {-a.w, -a.x, -a.y, -a.z}; }
    friend constexpr Quat operator*(Quat a, double s) { return a *= s; }
    friend constexpr Quat operator*(double s, Quat a) { return a *= s; }
    friend constexpr Quat operator/(Quat a, double s) { return a /= s; }

    friend constexpr Quat operator*(const Quat& a, const Quat& b) {
        return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
    }

    friend constexpr bool operator==(const Quat&, const Quat&) = default;
};

/// <A, B> = 1/2 Tr(A B^dagger); the basis {1, e1, e2, e3} is orthonormal.
constexpr double scalar_product(const Quat& a, const Quat& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Quat im_project(const Quat& a) { return {0, a.x, a.y, a.z}; }

/// exp of a pure quaternion: cos|v| + sin|v| v/|v|.
inline Quat exp_pure(const Quat& v) {
    const double len = v.norm();
    if (std::abs(v.w) > 1e-12 * std::max(1.0, len)) {
        throw DomainError("exp_pure requires a pure quaternion");
    }
    if (len == 0.0) {
        return Quat::one();
    }
    const double s = std::sin(len) / len;
    return {std::cos(len), s * v.x, s * v.y, s * v.z};
}

/// Secant (chord) delta derivative (phi_next - phi) / eps.
inline Quat chord_delta(const Quat& phi, const Quat& phi_next, double eps) {
    if (!(eps > 0.0)) {
        throw DomainError("chord_delta requires positive graininess");
    }
    return (phi_next - phi) / eps;
}

/// Delta derivative along the great-circle arc of S^3 joining two unit quaternions.
///
/// Returns the tangent vector at phi whose length is delta/eps, delta being the
/// arc length. Falls back to the chord for delta < 1e-8 and rejects nearly
/// antipodal pairs, where the geodesic is not unique.
inline Quat geodesic_delta(const Quat& phi, const Quat& phi_next, double eps) {
    if (!(eps > 0.0)) {
        throw DomainError("geodesic_delta requires positive graininess");
    }
    constexpr double unit_tol = 1e-10;
    if (std::abs(phi.norm() - 1.0) > unit_tol || std::abs(phi_next.norm() - 1.0) > unit_tol) {
        throw DomainError("geodesic_delta requires unit quaternions");
    }
    const double chord = (phi_next - phi).norm();
    const double delta = 2.0 * std::asin(std::min(1.0, chord / 2.0));
    if (delta < 1e-8) {
        return chord_delta(phi, phi_next, eps);
    }
    if (std::numbers::pi - delta < 1e-8) {
        throw NumericalError("geodesic_delta: antipodal points, geodesic is not unique");
    }
    const double cos_delta = scalar_product(phi_next, phi);
    return (phi_next - phi * cos_delta) * (delta / (eps * std::sin(delta)));
}

/// Complexified quaternion stored as a 2x2 complex matrix (row-major).
class CQuat {
public:
    constexpr CQuat() = default;
    constexpr CQuat(cplx m00, cplx m01, cplx m10, cplx m11) : m_{m00, m01, m10, m11} {}
    constexpr explicit CQuat(cplx s) : m_{s, 0.0, 0.0, s} {}

    static constexpr CQuat identity() { return CQuat(cplx(1.0)); }
    static constexpr CQuat zero() { return CQuat(cplx(0.0)); }

    /// w + x e1 + y e2 + z e3 with complex coefficients.
    static constexpr CQuat from_coeffs(cplx w, cplx x, cplx y, cplx z) {
        constexpr cplx i(0.0, 1.0);
        return {w - i * z, -i * x - y, -i * x + y, w + i * z};
    }

    static constexpr CQuat embed(const Quat& q) { return from_coeffs(q.w, q.x, q.y, q.z); }
    static constexpr CQuat e1() { return embed(Quat::e1()); }
    static constexpr CQuat e2() { return embed(Quat::e2()); }
    static constexpr CQuat e3() { return embed(Quat::e3()); }

    constexpr cplx operator()(int row, int col) const { return m_[2 * row + col]; }
    constexpr cplx& operator()(int row, int col) { return m_[2 * row + col]; }

    /// Coefficients on {1, e1, e2, e3}, index 0..3.
    constexpr std::array<cplx, 4> coeffs() const {
        constexpr cplx i(0.0, 1.0);
        return {(m_[0] + m_[3]) * 0.5, i * (m_[1] + m_[2]) * 0.5, (m_[2] - m_[1]) * 0.5,
                i * (m_[0] - m_[3]) * 0.5};
    }

    constexpr cplx trace() const { return m_[0] + m_[3]; }
    constexpr cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    constexpr CQuat dagger() const {
        return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
    }

    /// 1/2 Tr(A A^dagger); equals |q|^2 for an embedded real quaternion.
    constexpr double norm2() const {
        return 0.5 * (std::norm(m_[0]) + std::norm(m_[1]) + std::norm(m_[2]) + std::norm(m_[3]));
    }

    /// Largest singular value.
    double op_norm() const {
        const double fro2 = 2.0 * norm2();
        const double d = std::abs(det());
        const double disc = std::max(0.0, fro2 * fro2 - 4.0 * d * d);
        return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
    }

    CQuat inverse() const {
        const cplx d = det();
        if (std::abs(d) <= 1e-14 * norm2()) {
            throw NumericalError("inverse of a singular complexified quaternion");
        }
        return {m_[3] / d, -m_[1] / d, -m_[2] / d, m_[0] / d};
    }

    /// True when all four basis coefficients are real to within tol.
    bool is_real(double tol = 1e-12) const {
        return std::ranges::all_of(coeffs(), [tol](cplx c) { return std::abs(c.imag()) <= tol; });
    }

    Quat to_quat(double tol = 1e-12) const {
        if (!is_real(tol)) {
            throw DomainError("complexified quaternion is not real");
        }
        return real_part();
    }

    /// Real parts of the basis coefficients, without checking.
    constexpr Quat real_part() const {
        const auto c = coeffs();
        return {c[0].real(), c[1].real(), c[2].real(), c[3].real()};
    }

    constexpr CQuat& operator+=(const CQuat& o) {
        for (int k = 0; k < 4; ++k) m_[k] += o.m_[k];
        return *this;
    }
    constexpr CQuat& operator-=(const CQuat& o) {
        for (int k = 0; k < 4; ++k) m_[k] -= o.m_[k];
        return *this;
    }
    constexpr CQuat& operator*=(cplx s) {
        for (auto& v : m_) v *= s;
        return *this;
    }
    constexpr CQuat& operator/=(cplx s) {
        for (auto& v : m_) v /= s;
        return *this;
    }

    friend constexpr CQuat operator+(CQuat a, const CQuat& b) { return a += b; }
    friend constexpr CQuat operator-(CQuat a, const CQuat& b) { return a -= b; }
    friend constexpr CQuat operator-(CQuat a) { return a *= cplx(-1.0); }
    friend constexpr CQuat operator*(CQuat a, cplx s) { return a *= s; }
    friend constexpr CQuat operator*(cplx s, CQuat a) { return a *= s; }
    friend constexpr CQuat operator*(CQuat a, double s) { return a *= cplx(s); }
    friend constexpr CQuat operator*(double s, CQuat a) { return a *= cplx(s); }
    friend constexpr CQuat operator/(CQuat a, cplx s) { return a /= s; }
    friend constexpr CQuat operator/(CQuat a, double s) { return a /= cplx(s); }

    friend constexpr CQuat operator*(const CQuat& a, const CQuat& b) {
        return {a.m_[0] * b.m_[0] + a.m_[1] * b.m_[2], a.m_[0] * b.m_[1] + a.m_[1] * b.m_[3],
                a.m_[2] * b.m_[0] + a.m_[3] * b.m_[2], a.m_[2] * b.m_[1] + a.m_[3] * b.m_[3]};
    }

    friend constexpr bool operator==(const CQuat&, const CQuat&) = default;

private:
    std::array<cplx, 4> m_{};
};

/// <A, B> = 1/2 Tr(A B^dagger).
constexpr cplx scalar_product(const CQuat& a, const CQuat& b) { return 0.5 * (a * b.dagger()).trace(); }

/// Drops the scalar (trace) part, keeping the e1, e2, e3 components.
constexpr CQuat im_project(const CQuat& a) { return a - CQuat(0.5 * a.trace()); }

/// Operator-norm distance, the default metric for residuals.
inline double distance(const CQuat& a, const CQuat& b) { return (a - b).op_norm(); }

/// Pure quaternion part of a (nominally real) complexified quaternion as a 3-vector.
constexpr Vec3 im_vec(const CQuat& a) {
    const auto c = a.coeffs();
    return {c[1].real(), c[2].real(), c[3].real()};
}

/// q^-1 v q for a real quaternion q and a pure vector v (a rotation of v).
inline Vec3 conjugate_by(const Quat& q, const Vec3& v) { return (q.inverse() * Quat::pure(v) * q).vec(); }

}  // namespace tsnet
