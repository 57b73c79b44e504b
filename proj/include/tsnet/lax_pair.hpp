#pragma once

// Quaternion-valued Lax pair on a product of time scales:
//
//   D1 Psi = U Psi,   U = lambda (a e1 + b e2) + c e3 + h,
//   D2 Psi = V Psi,   V = lambda^-1 (p e1 + q e2) + r e3 + s,
//
// with eight real coefficient fields. On a finite time scale every node is
// right-scattered, so the linear problem is an exact transfer recursion
// Psi(sigma_j) = (1 + eps_j U_j) Psi.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>

#include "tsnet/error.hpp"
#include "tsnet/quaternion.hpp"
#include "tsnet/timescale.hpp"

namespace tsnet {

/// The eight real coefficients at a single node.
struct NodeCoefficients {
    double a = 0, b = 0, c = 0, h = 0;
    double p = 0, q = 0, r = 0, s = 0;
};

class CoefficientField {
public:
    explicit CoefficientField(DomainPtr domain)
        : a(domain), b(domain), c(domain), h(domain), p(domain), q(domain), r(domain), s(domain) {}

    GridFunction<double> a, b, c, h, p, q, r, s;

    const GridDomain& domain() const { return a.domain(); }
    const DomainPtr& domain_ptr() const { return a.domain_ptr(); }

    NodeCoefficients at(std::size_t i, std::size_t j) const {
        return {a(i, j), b(i, j), c(i, j), h(i, j), p(i, j), q(i, j), r(i, j), s(i, j)};
    }

    void set(std::size_t i, std::size_t j, const NodeCoefficients& v) {
        a(i, j) = v.a; b(i, j) = v.b; c(i, j) = v.c; h(i, j) = v.h;
        p(i, j) = v.p; q(i, j) = v.q; r(i, j) = v.r; s(i, j) = v.s;
    }

    /// All eight fields must live on one domain.
    void validate() const {
        const std::array<const GridFunction<double>*, 8> all{&a, &b, &c, &h, &p, &q, &r, &s};
        for (const auto* f : all) {
            if (!f->domain_ptr() || !(f->domain() == domain())) {
                throw DomainError("coefficient fields must share one domain");
            }
            for (double v : f->values()) {
                if (!std::isfinite(v)) throw ConstructionError("coefficient field holds a non-finite value");
            }
        }
    }

    /// Weak Chebyshev structure: a^2 + b^2 depends only on t1 and p^2 + q^2 only on t2.
    bool is_chebyshev(double tol = 1e-12) const {
        const auto& d = domain();
        for (std::size_t i = 0; i < d.n1(); ++i) {
            const double ref = a(i, 0) * a(i, 0) + b(i, 0) * b(i, 0);
            for (std::size_t j = 1; j < d.n2(); ++j) {
                if (std::abs(a(i, j) * a(i, j) + b(i, j) * b(i, j) - ref) > tol * std::max(1.0, ref)) return false;
            }
        }
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const double ref = p(0, j) * p(0, j) + q(0, j) * q(0, j);
            for (std::size_t i = 1; i < d.n1(); ++i) {
                if (std::abs(p(i, j) * p(i, j) + q(i, j) * q(i, j) - ref) > tol * std::max(1.0, ref)) return false;
            }
        }
        return true;
    }
};

/// Sine-Gordon vacuum seed: a = p = 1, all other coefficients zero.
inline CoefficientField vacuum(DomainPtr domain) {
    CoefficientField cf(std::move(domain));
    for (auto& v : cf.a.values()) v = 1.0;
    for (auto& v : cf.p.values()) v = 1.0;
    return cf;
}

inline CQuat assemble_U(const NodeCoefficients& k, cplx lambda) {
    return CQuat::from_coeffs(k.h, lambda * k.a, lambda * k.b, k.c);
}

inline CQuat assemble_U_lambda(const NodeCoefficients& k, cplx /*lambda*/) {
    return CQuat::from_coeffs(0.0, k.a, k.b, 0.0);
}

inline CQuat assemble_V(const NodeCoefficients& k, cplx lambda) {
    if (lambda == cplx(0.0)) throw DomainError("V is undefined at lambda = 0");
    return CQuat::from_coeffs(k.s, k.p / lambda, k.q / lambda, k.r);
}

inline CQuat assemble_V_lambda(const NodeCoefficients& k, cplx lambda) {
    if (lambda == cplx(0.0)) throw DomainError("V is undefined at lambda = 0");
    const cplx f = -1.0 / (lambda * lambda);
    return CQuat::from_coeffs(0.0, f * k.p, f * k.q, 0.0);
}

inline CQuat assemble_U(const CoefficientField& cf, std::size_t i, std::size_t j, cplx lambda) {
    return assemble_U(cf.at(i, j), lambda);
}
inline CQuat assemble_V(const CoefficientField& cf, std::size_t i, std::size_t j, cplx lambda) {
    return assemble_V(cf.at(i, j), lambda);
}
inline CQuat assemble_U_lambda(const CoefficientField& cf, std::size_t i, std::size_t j, cplx lambda) {
    return assemble_U_lambda(cf.at(i, j), lambda);
}
inline CQuat assemble_V_lambda(const CoefficientField& cf, std::size_t i, std::size_t j, cplx lambda) {
    return assemble_V_lambda(cf.at(i, j), lambda);
}

/// U_1 := U, U_2 := V.
inline CQuat assemble(const CoefficientField& cf, int direction, std::size_t i, std::size_t j, cplx lambda) {
    return direction == 1 ? assemble_U(cf, i, j, lambda) : assemble_V(cf, i, j, lambda);
}
inline CQuat assemble_lambda(const CoefficientField& cf, int direction, std::size_t i, std::size_t j,
                             cplx lambda) {
    return direction == 1 ? assemble_U_lambda(cf, i, j, lambda) : assemble_V_lambda(cf, i, j, lambda);
}

struct CompatibilityReport {
    /// D2 U - D1 V + sigma2(U) V - sigma1(V) U; nullopt where a successor is missing.
    GridFunction<std::optional<CQuat>> residuals;
    double max_norm = 0.0;
};

inline CompatibilityReport compatibility_residual(const CoefficientField& cf, cplx lambda) {
    const auto& d = cf.domain();
    if (d.n1() < 2 || d.n2() < 2) throw DomainError("compatibility check needs at least a 2x2 grid");
    CompatibilityReport report{GridFunction<std::optional<CQuat>>(cf.domain_ptr(), std::nullopt), 0.0};
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            const double e1 = d.graininess(1, i, j);
            const double e2 = d.graininess(2, i, j);
            const CQuat u = assemble_U(cf, i, j, lambda);
            const CQuat v = assemble_V(cf, i, j, lambda);
            const CQuat u_s2 = assemble_U(cf, i, j + 1, lambda);
            const CQuat v_s1 = assemble_V(cf, i + 1, j, lambda);
            const CQuat res = (u_s2 - u) / e2 - (v_s1 - v) / e1 + u_s2 * v - v_s1 * u;
            report.residuals(i, j) = res;
            report.max_norm = std::max(report.max_norm, res.op_norm());
        }
    }
    return report;
}

enum class Sweep {
    /// Along t1 on the first row, then every column step along t2.
    RowMajor,
    /// Along t2 on the first column, then every row step along t1.
    ColumnMajor,
};

/// Psi and its analytic lambda-derivative at a fixed spectral parameter.
struct WaveField {
    cplx lambda;
    CQuat init;
    GridFunction<CQuat> psi;
    GridFunction<CQuat> psi_lambda;

    const GridDomain& domain() const { return psi.domain(); }
    const DomainPtr& domain_ptr() const { return psi.domain_ptr(); }
};

namespace detail {

inline void transfer_step(const CoefficientField& cf, WaveField& wf, int direction, std::size_t from_i,
                          std::size_t from_j, std::size_t to_i, std::size_t to_j) {
    const double eps = cf.domain().graininess(direction, from_i, from_j);
    const CQuat gen = assemble(cf, direction, from_i, from_j, wf.lambda);
    const CQuat gen_lambda = assemble_lambda(cf, direction, from_i, from_j, wf.lambda);
    const CQuat transfer = CQuat::identity() + eps * gen;
    if (std::abs(transfer.det()) <= 1e-13 * transfer.norm2()) {
        throw NumericalError("singular transfer matrix in direction " + std::to_string(direction) +
                             " at node (" + std::to_string(from_i) + ", " + std::to_string(from_j) + ")");
    }
    const CQuat& psi = wf.psi(from_i, from_j);
    wf.psi(to_i, to_j) = transfer * psi;
    wf.psi_lambda(to_i, to_j) = eps * gen_lambda * psi + transfer * wf.psi_lambda(from_i, from_j);
}

}  // namespace detail

/// Solves D1 Psi = U Psi, D2 Psi = V Psi from Psi(0,0) = init, Psi_lambda(0,0) = 0.
///
/// The lambda-derivative is carried through the recursion exactly:
/// Psi_lambda(sigma_j) = eps_j (U_j)_lambda Psi + (1 + eps_j U_j) Psi_lambda.
inline WaveField propagate(const CoefficientField& cf, cplx lambda, const CQuat& init = CQuat::identity(),
                           Sweep sweep = Sweep::RowMajor) {
    if (lambda == cplx(0.0)) throw DomainError("propagate requires lambda != 0");
    if (std::abs(init.det()) <= 1e-14 * init.norm2()) throw NumericalError("singular initial value");
    const auto& d = cf.domain();
    WaveField wf{lambda, init, GridFunction<CQuat>(cf.domain_ptr()), GridFunction<CQuat>(cf.domain_ptr())};
    wf.psi(0, 0) = init;
    wf.psi_lambda(0, 0) = CQuat::zero();
    if (sweep == Sweep::RowMajor) {
        for (std::size_t i = 0; i + 1 < d.n1(); ++i) detail::transfer_step(cf, wf, 1, i, 0, i + 1, 0);
        for (std::size_t j = 0; j + 1 < d.n2(); ++j)
            for (std::size_t i = 0; i < d.n1(); ++i) detail::transfer_step(cf, wf, 2, i, j, i, j + 1);
    } else {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) detail::transfer_step(cf, wf, 2, 0, j, 0, j + 1);
        for (std::size_t i = 0; i + 1 < d.n1(); ++i)
            for (std::size_t j = 0; j < d.n2(); ++j) detail::transfer_step(cf, wf, 1, i, j, i + 1, j);
    }
    return wf;
}

struct LaxReport {
    /// max over nodes of |Psi_row - Psi_col| / |Psi_row| (operator norm).
    double path_independence = 0.0;
    /// max |U(-lambda) - e3 U(lambda) e3^-1| and the same for V.
    double red1 = 0.0;
    /// max |U^dagger(conj lambda) U(lambda) - (lambda^2 (a^2+b^2) + c^2 + h^2)| and the V analogue.
    double red2 = 0.0;
    /// max over nodes of |Psi_lambda - FD(Psi)| / |Psi_lambda|, fourth-order central difference in lambda.
    double lambda_fd = 0.0;
};

/// Grid-wise relative error max|Psi_lambda - FD| / max|Psi_lambda| against a five-point
/// finite difference of Psi in lambda. Node-wise ratios are ill-posed where Psi_lambda
/// vanishes (e.g. the diagonal of a symmetric vacuum grid at lambda = 1).
inline double lambda_fd_deviation(const CoefficientField& cf, cplx lambda, double step = 1e-3) {
    if (!(step > 0.0)) throw DomainError("lambda_fd_deviation requires step > 0");
    const WaveField base = propagate(cf, lambda);
    const double h = step * std::max(1.0, std::abs(lambda));
    const WaveField p1 = propagate(cf, lambda + h), m1 = propagate(cf, lambda - h);
    const WaveField p2 = propagate(cf, lambda + 2.0 * h), m2 = propagate(cf, lambda - 2.0 * h);
    const auto& d = cf.domain();
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const CQuat fd = (8.0 * (p1.psi(i, j) - m1.psi(i, j)) - (p2.psi(i, j) - m2.psi(i, j))) / (12.0 * h);
            err = std::max(err, distance(base.psi_lambda(i, j), fd));
            scale = std::max(scale, base.psi_lambda(i, j).op_norm());
        }
    }
    if (scale == 0.0) throw NumericalError("lambda_fd_deviation: Psi_lambda vanishes on the whole grid");
    return err / scale;
}

inline LaxReport verify_lax(const CoefficientField& cf, double lambda) {
    if (lambda == 0.0) throw DomainError("verify_lax requires lambda != 0");
    LaxReport rep;
    const WaveField rows = propagate(cf, lambda, CQuat::identity(), Sweep::RowMajor);
    const WaveField cols = propagate(cf, lambda, CQuat::identity(), Sweep::ColumnMajor);
    const auto& d = cf.domain();
    const CQuat e3 = CQuat::e3();
    const CQuat e3_inv = e3.inverse();
    const cplx lam(lambda);
    const cplx lam_conj = std::conj(lam);
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const double scale = std::max(rows.psi(i, j).op_norm(), 1e-300);
            rep.path_independence = std::max(rep.path_independence, distance(rows.psi(i, j), cols.psi(i, j)) / scale);

            const NodeCoefficients k = cf.at(i, j);
            const CQuat u = assemble_U(k, lam);
            const CQuat v = assemble_V(k, lam);
            rep.red1 = std::max(rep.red1, distance(assemble_U(k, -lam), e3 * u * e3_inv));
            rep.red1 = std::max(rep.red1, distance(assemble_V(k, -lam), e3 * v * e3_inv));

            const cplx u_norm = lam * lam * (k.a * k.a + k.b * k.b) + k.c * k.c + k.h * k.h;
            const cplx v_norm = (k.p * k.p + k.q * k.q) / (lam * lam) + k.r * k.r + k.s * k.s;
            rep.red2 = std::max(rep.red2, distance(assemble_U(k, lam_conj).dagger() * u, CQuat(u_norm)));
            rep.red2 = std::max(rep.red2, distance(assemble_V(k, lam_conj).dagger() * v, CQuat(v_norm)));
        }
    }
    rep.lambda_fd = lambda_fd_deviation(cf, lam);
    return rep;
}

}  // namespace tsnet
