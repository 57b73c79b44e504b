#pragma once

// Darboux-Backlund transformation with the quaternionic reduction
// lambda_1 = -mu_1 = i kappa, P = (1 + i p)/2, p = p1 e1 + p2 e2, in the N = 1 gauge:
//
//   B = (lambda - kappa p) / (lambda - i kappa),
//   r~ = r + kappa / (lambda^2 + kappa^2) Psi^-1 p Psi.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "tsnet/error.hpp"
#include "tsnet/lax_pair.hpp"
#include "tsnet/quaternion.hpp"
#include "tsnet/surface.hpp"
#include "tsnet/timescale.hpp"

namespace tsnet {

using Spinor = std::array<cplx, 2>;

inline Spinor act(const CQuat& m, const Spinor& v) {
    return {m(0, 0) * v[0] + m(0, 1) * v[1], m(1, 0) * v[0] + m(1, 1) * v[1]};
}

/// v^dagger w
inline cplx inner(const Spinor& v, const Spinor& w) { return std::conj(v[0]) * w[0] + std::conj(v[1]) * w[1]; }

/// kappa and the two phases of c1 = (e^{i chi1}, e^{i chi2}) / sqrt(2).
struct DarbouxParams {
    double kappa = 1.0;
    double chi1 = 0.0;
    double chi2 = 0.0;

    Spinor c1() const {
        const double s = 1.0 / std::numbers::sqrt2;
        return {std::polar(s, chi1), std::polar(s, chi2)};
    }
};

struct ProjectorField {
    GridFunction<CQuat> P;
    /// (p1, p2) with P = (1 + i(p1 e1 + p2 e2)) / 2.
    GridFunction<std::array<double, 2>> p;

    const GridDomain& domain() const { return P.domain(); }
    const DomainPtr& domain_ptr() const { return P.domain_ptr(); }

    Quat p_quat(std::size_t i, std::size_t j) const {
        const auto& v = p(i, j);
        return {0.0, v[0], v[1], 0.0};
    }
    Quat p_quat_shifted(int direction, std::size_t i, std::size_t j) const {
        const auto& v = p.shifted(direction, i, j);
        return {0.0, v[0], v[1], 0.0};
    }
};

struct ProjectorOptions {
    /// Kernel/image orthogonality tolerance, relative to |v||w|.
    double orthogonality_tol = 1e-8;
    /// Tolerance for P^2 = P, P^dagger = P, tr P = 1, |p| = 1 and e3 (1 - P) e3^-1 = P.
    double invariant_tol = 1e-10;
    /// Also propagate Psi(-i kappa) directly and compare with e3 Psi(i kappa) e3^-1.
    bool propagate_both = false;
    double symmetry_tol = 1e-10;
};

namespace detail {

inline void check_projector_invariants(const CQuat& P, const std::array<double, 2>& p, double tol, std::size_t i,
                                       std::size_t j) {
    const CQuat one = CQuat::identity();
    const CQuat e3 = CQuat::e3();
    const cplx I(0.0, 1.0);
    const CQuat rebuilt = 0.5 * (one + I * CQuat::embed({0.0, p[0], p[1], 0.0}));
    const double worst = std::max({distance(P * P, P), distance(P.dagger(), P), std::abs(P.trace() - 1.0),
                                   std::abs(p[0] * p[0] + p[1] * p[1] - 1.0), distance(rebuilt, P),
                                   distance(e3 * (one - P) * e3.inverse(), P)});
    if (!(worst <= tol)) {
        throw NumericalError("projector invariants violated at node (" + std::to_string(i) + ", " +
                             std::to_string(j) + "), deviation " + std::to_string(worst));
    }
}

}  // namespace detail

/// Projector field from a wave field propagated at lambda = i kappa from the identity.
///
/// ker P = Psi(i kappa) c1 and Im P = Psi(-i kappa) e3 c1 = e3 Psi(i kappa) c1; the two
/// must be orthogonal, which holds whenever the reduction constraints are satisfied.
inline ProjectorField build_projector(const WaveField& wf, const DarbouxParams& params,
                                      const ProjectorOptions& opts = {},
                                      const CoefficientField* cf_for_check = nullptr) {
    if (params.kappa == 0.0) throw DomainError("Darboux parameter kappa must be nonzero");
    if (std::abs(wf.lambda - cplx(0.0, params.kappa)) > 1e-14 * std::abs(params.kappa)) {
        throw DomainError("projector needs the wave field at lambda = i kappa");
    }
    if (distance(wf.init, CQuat::identity()) > 1e-14) {
        throw NumericalError("projector construction requires a wave field started from the identity");
    }
    const auto& d = wf.domain();
    ProjectorField pf{GridFunction<CQuat>(wf.domain_ptr()), GridFunction<std::array<double, 2>>(wf.domain_ptr())};
    const CQuat e3 = CQuat::e3();
    const Spinor c1 = params.c1();
    const Spinor c2 = act(e3, c1);

    std::optional<WaveField> mirror;
    if (opts.propagate_both) {
        if (cf_for_check == nullptr) throw DomainError("propagate_both needs the coefficient field");
        mirror = propagate(*cf_for_check, cplx(0.0, -params.kappa));
    }

    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const CQuat& psi = wf.psi(i, j);
            if (mirror) {
                const double dev = distance(mirror->psi(i, j), e3 * psi * e3.inverse()) / psi.op_norm();
                if (dev > opts.symmetry_tol) {
                    throw NumericalError("Psi(-i kappa) != e3 Psi(i kappa) e3^-1 at node (" + std::to_string(i) +
                                         ", " + std::to_string(j) + ")");
                }
            }
            const Spinor v = act(psi, c1);
            const Spinor w = mirror ? act(mirror->psi(i, j), c2) : act(e3 * psi * e3.inverse(), c2);
            const double ww = inner(w, w).real();
            const double vv = inner(v, v).real();
            if (!(ww > 1e-300)) throw NumericalError("projector image vector vanishes");
            if (std::abs(inner(v, w)) > opts.orthogonality_tol * std::sqrt(vv * ww)) {
                throw NumericalError("kernel and image of the projector are not orthogonal at node (" +
                                     std::to_string(i) + ", " + std::to_string(j) +
                                     "); reduction constraints are violated");
            }
            const CQuat P(w[0] * std::conj(w[0]) / ww, w[0] * std::conj(w[1]) / ww, w[1] * std::conj(w[0]) / ww,
                          w[1] * std::conj(w[1]) / ww);
            const std::array<double, 2> p{2.0 * P(1, 0).real(), 2.0 * P(1, 0).imag()};
            detail::check_projector_invariants(P, p, opts.invariant_tol, i, j);
            pf.P(i, j) = P;
            pf.p(i, j) = p;
        }
    }
    return pf;
}

inline ProjectorField build_projector(const CoefficientField& cf, const DarbouxParams& params,
                                      const ProjectorOptions& opts = {}) {
    if (params.kappa == 0.0) throw DomainError("Darboux parameter kappa must be nonzero");
    return build_projector(propagate(cf, cplx(0.0, params.kappa)), params, opts, &cf);
}

/// Max residual of the four projector equations with lambda_1 = i kappa, mu_1 = -i kappa:
///   D_j(P)(1 - P) + sigma_j(P) U_j(lambda_1)(1 - P) = 0,
///   (1 - sigma_j(P))(-D_j P + U_j(mu_1) P) = 0.
inline double projector_system_residual(const CoefficientField& cf, const ProjectorField& pf, double kappa) {
    const auto& d = cf.domain();
    const cplx l1(0.0, kappa);
    const cplx m1(0.0, -kappa);
    const CQuat one = CQuat::identity();
    double worst = 0.0;
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const CQuat& P = pf.P(i, j);
            for (int dir = 1; dir <= 2; ++dir) {
                if (!d.has_successor(dir, i, j)) continue;
                const CQuat dP = delta_at(pf.P, dir, i, j);
                const CQuat& Ps = pf.P.shifted(dir, i, j);
                const CQuat first = dP * (one - P) + Ps * assemble(cf, dir, i, j, l1) * (one - P);
                const CQuat second = (one - Ps) * (-dP + assemble(cf, dir, i, j, m1) * P);
                worst = std::max({worst, first.op_norm(), second.op_norm()});
            }
        }
    }
    return worst;
}

namespace detail {

inline void check_p(const Quat& p) {
    if (std::abs(p.w) > 1e-10 || std::abs(p.z) > 1e-10 || std::abs(p.norm2() - 1.0) > 1e-10) {
        throw DomainError("p must be a unit quaternion in span{e1, e2}");
    }
}

inline void check_pole(cplx lambda, cplx pole) {
    if (std::abs(lambda - pole) <= 1e-14 * std::max(1.0, std::abs(pole))) {
        throw NumericalError("Darboux matrix evaluated at its pole");
    }
}

}  // namespace detail

/// B(lambda) = (lambda - kappa p) / (lambda - i kappa).
inline CQuat darboux_matrix(cplx lambda, double kappa, const Quat& p) {
    detail::check_p(p);
    detail::check_pole(lambda, cplx(0.0, kappa));
    return (CQuat(lambda) - kappa * CQuat::embed(p)) / (lambda - cplx(0.0, kappa));
}

/// B^-1(lambda) = (lambda + kappa p) / (lambda + i kappa).
inline CQuat darboux_matrix_inverse(cplx lambda, double kappa, const Quat& p) {
    detail::check_p(p);
    detail::check_pole(lambda, cplx(0.0, -kappa));
    return (CQuat(lambda) + kappa * CQuat::embed(p)) / (lambda + cplx(0.0, kappa));
}

/// dB/dlambda = kappa (p - i) / (lambda - i kappa)^2.
inline CQuat darboux_matrix_lambda(cplx lambda, double kappa, const Quat& p) {
    detail::check_p(p);
    detail::check_pole(lambda, cplx(0.0, kappa));
    const cplx den = (lambda - cplx(0.0, kappa)) * (lambda - cplx(0.0, kappa));
    return kappa * (CQuat::embed(p) - CQuat(cplx(0.0, 1.0))) / den;
}

namespace detail {

inline void check_same_domain(const GridDomain& a, const GridDomain& b, const char* what) {
    if (&a != &b && !(a == b)) throw DomainError(std::string("domain mismatch: ") + what);
}

}  // namespace detail

/// Dressed wave field Psi~ = B Psi with Psi~_lambda = B_lambda Psi + B Psi_lambda.
inline WaveField transform_wave(const WaveField& wf, double kappa, const ProjectorField& pf) {
    detail::check_same_domain(wf.domain(), pf.domain(), "wave field vs projector");
    const auto& d = wf.domain();
    WaveField out{wf.lambda, CQuat::identity(), GridFunction<CQuat>(wf.domain_ptr()),
                  GridFunction<CQuat>(wf.domain_ptr())};
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const Quat p = pf.p_quat(i, j);
            const CQuat B = darboux_matrix(wf.lambda, kappa, p);
            out.psi(i, j) = B * wf.psi(i, j);
            out.psi_lambda(i, j) = darboux_matrix_lambda(wf.lambda, kappa, p) * wf.psi(i, j) + B * wf.psi_lambda(i, j);
        }
    }
    out.init = out.psi(0, 0);
    return out;
}

/// r~ = r + kappa/(lambda^2 + kappa^2) Psi^-1 p Psi, with n~ taken from Psi~ = B Psi.
inline SurfaceNet transform_surface(const SurfaceNet& s, const WaveField& wf, double kappa, const ProjectorField& pf) {
    detail::check_same_domain(s.domain(), wf.domain(), "surface vs wave field");
    detail::check_same_domain(s.domain(), pf.domain(), "surface vs projector");
    const double lambda = detail::real_lambda(wf);
    if (s.lambda && *s.lambda != lambda) throw DomainError("surface and wave field use different lambda");
    if (kappa == 0.0) throw DomainError("Darboux parameter kappa must be nonzero");
    const auto& d = s.domain();
    SurfaceNet out{GridFunction<Vec3>(s.domain_ptr()), GridFunction<Vec3>(s.domain_ptr()), lambda};
    const double scale = kappa / (lambda * lambda + kappa * kappa);
    const CQuat e3 = CQuat::e3();
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const CQuat& psi = wf.psi(i, j);
            const CQuat inv = psi.inverse();
            const CQuat p = CQuat::embed(pf.p_quat(i, j));
            out.r(i, j) = s.r(i, j) + scale * im_vec(inv * p * psi);
            // The scalar prefactor of B cancels under conjugation.
            const CQuat dressed = (CQuat(lambda) - kappa * p) * psi;
            out.n(i, j) = im_vec(dressed.inverse() * e3 * dressed);
        }
    }
    return out;
}

struct SegmentReport {
    double expected_length = 0;
    /// (max - min) / expected of |r~ - r|.
    double length_spread = 0;
    /// max | |r~ - r| - expected | / expected.
    double length_error = 0;
    /// max |(r~ - r) . n|.
    double tangency = 0;
};

inline SegmentReport segment_report(const SurfaceNet& before, const SurfaceNet& after, double kappa) {
    detail::check_same_domain(before.domain(), after.domain(), "segment endpoints");
    if (!before.lambda) throw DomainError("segment report needs a spectral surface");
    const double lambda = *before.lambda;
    SegmentReport rep;
    rep.expected_length = std::abs(kappa) / (lambda * lambda + kappa * kappa);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    const auto& d = before.domain();
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const Vec3 seg = after.r(i, j) - before.r(i, j);
            const double len = norm(seg);
            lo = std::min(lo, len);
            hi = std::max(hi, len);
            rep.length_error = std::max(rep.length_error, std::abs(len - rep.expected_length) / rep.expected_length);
            rep.tangency = std::max(rep.tangency, std::abs(dot(seg, before.n(i, j))));
        }
    }
    rep.length_spread = (hi - lo) / rep.expected_length;
    return rep;
}

/// Coefficients of the dressed Lax pair (N = 1):
///   u1~ = u1, u0~ = u0 + kappa (u1 p - sigma1(p) u1), v0~ = v0, v1~ = sigma2(p) v1 p^-1.
inline CoefficientField transform_coefficients(const CoefficientField& cf, double kappa, const ProjectorField& pf,
                                               double structural_tol = 1e-10) {
    detail::check_same_domain(cf.domain(), pf.domain(), "coefficients vs projector");
    const auto& d = cf.domain();
    CoefficientField out(cf.domain_ptr());
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const NodeCoefficients k = cf.at(i, j);
            const Quat p = pf.p_quat(i, j);
            const Quat u1{0.0, k.a, k.b, 0.0};
            const Quat u0{k.h, 0.0, 0.0, k.c};
            const Quat v1{0.0, k.p, k.q, 0.0};
            const Quat u0t = u0 + kappa * (u1 * p - pf.p_quat_shifted(1, i, j) * u1);
            const Quat v1t = pf.p_quat_shifted(2, i, j) * v1 * p.inverse();
            const double leak_u = std::max(std::abs(u0t.x), std::abs(u0t.y));
            const double leak_v = std::max(std::abs(v1t.w), std::abs(v1t.z));
            if (leak_u > structural_tol * (1.0 + u0t.norm()) || leak_v > structural_tol * (1.0 + v1t.norm())) {
                throw NumericalError("transformed coefficients leave the Lax-pair form at node (" +
                                     std::to_string(i) + ", " + std::to_string(j) + "); projector is broken");
            }
            out.set(i, j, {k.a, k.b, u0t.z, u0t.w, v1t.x, v1t.y, k.r, k.s});
        }
    }
    return out;
}

struct ChainResult {
    /// surfaces[0] is the seed surface; surfaces[k+1] is the k-th transform.
    std::vector<SurfaceNet> surfaces;
    /// fields[k] is the coefficient field whose wave field produced surfaces[k].
    std::vector<CoefficientField> fields;
    std::vector<WaveField> waves;
    std::vector<ProjectorField> projectors;
};

/// Iterated Darboux steps. Each transformed coefficient field is propagated
/// again from the identity, so every intermediate object is a plain Lax-pair
/// solution that can be checked on its own.
inline ChainResult darboux_chain(const CoefficientField& seed, const std::vector<DarbouxParams>& steps,
                                 double lambda_surface, const ProjectorOptions& opts = {}) {
    if (lambda_surface == 0.0) throw DomainError("surface spectral parameter must be nonzero");
    for (std::size_t a = 0; a < steps.size(); ++a) {
        if (steps[a].kappa == 0.0) throw DomainError("Darboux parameter kappa must be nonzero");
        for (std::size_t b = 0; b < a; ++b) {
            if (std::abs(steps[a].kappa - steps[b].kappa) <= 1e-12 * std::max(1.0, std::abs(steps[a].kappa))) {
                throw NumericalError("pole collision: repeated kappa " + std::to_string(steps[a].kappa));
            }
        }
    }
    ChainResult out;
    out.fields.push_back(seed);
    out.waves.push_back(propagate(seed, lambda_surface));
    out.surfaces.push_back(sym_surface(out.waves.back()));
    for (const auto& step : steps) {
        const CoefficientField& cf = out.fields.back();
        ProjectorField pf = build_projector(cf, step, opts);
        SurfaceNet next = transform_surface(sym_surface(out.waves.back()), out.waves.back(), step.kappa, pf);
        CoefficientField next_cf = transform_coefficients(cf, step.kappa, pf);
        out.waves.push_back(propagate(next_cf, lambda_surface));
        out.fields.push_back(std::move(next_cf));
        out.surfaces.push_back(std::move(next));
        out.projectors.push_back(std::move(pf));
    }
    return out;
}

}  // namespace tsnet
