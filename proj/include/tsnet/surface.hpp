#pragma once

// Surfaces from wave fields (Sym formula), delta frames, Gaussian curvature by
// the dot-product formula and by tetrahedron dihedral angles, and the
// asymptotic / weak-Chebyshev net diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "tsnet/error.hpp"
#include "tsnet/lax_pair.hpp"
#include "tsnet/quaternion.hpp"
#include "tsnet/timescale.hpp"

namespace tsnet {

/// Nodes whose tangents satisfy sin^2(phi) below this are flagged degenerate.
inline constexpr double kDefaultCondTol = 1e-10;

struct SurfaceNet {
    GridFunction<Vec3> r;
    GridFunction<Vec3> n;
    /// Spectral parameter the net was extracted at, when it came from a wave field.
    std::optional<double> lambda;

    const GridDomain& domain() const { return r.domain(); }
    const DomainPtr& domain_ptr() const { return r.domain_ptr(); }
};

namespace detail {

inline double real_lambda(const WaveField& wf) {
    if (wf.lambda.imag() != 0.0 || wf.lambda.real() == 0.0) {
        throw DomainError("surface extraction needs a real, nonzero spectral parameter");
    }
    return wf.lambda.real();
}

}  // namespace detail

/// r = Im(Psi^-1 Psi_lambda), n = Psi^-1 e3 Psi.
inline SurfaceNet sym_surface(const WaveField& wf) {
    const double lambda = detail::real_lambda(wf);
    const auto& d = wf.domain();
    SurfaceNet s{GridFunction<Vec3>(wf.domain_ptr()), GridFunction<Vec3>(wf.domain_ptr()), lambda};
    const CQuat e3 = CQuat::e3();
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const CQuat& psi = wf.psi(i, j);
            const CQuat inv = psi.inverse();
            s.r(i, j) = im_vec(inv * wf.psi_lambda(i, j));
            s.n(i, j) = im_vec(inv * e3 * psi);
        }
    }
    return s;
}

struct DeltaFrame {
    Vec3 d1r, d2r, d1n, d2n;
};

/// Forward differences of r and n at a node with successors in both directions.
inline DeltaFrame delta_frame_at(const SurfaceNet& s, std::size_t i, std::size_t j) {
    return {delta_at(s.r, 1, i, j), delta_at(s.r, 2, i, j), delta_at(s.n, 1, i, j), delta_at(s.n, 2, i, j)};
}

/// Frames at every node with successors in both directions; nullopt elsewhere.
inline GridFunction<std::optional<DeltaFrame>> delta_frame(const SurfaceNet& s) {
    GridFunction<std::optional<DeltaFrame>> out(s.domain_ptr(), std::nullopt);
    const auto& d = s.domain();
    for (std::size_t i = 0; i + 1 < d.n1(); ++i)
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) out(i, j) = delta_frame_at(s, i, j);
    return out;
}

/// D_j r = Im(sigma_j(Psi)^-1 (U_j)_lambda Psi), evaluated from the wave field.
inline Vec3 closed_form_tangent(const WaveField& wf, const CoefficientField& cf, int direction, std::size_t i,
                                std::size_t j) {
    check_direction(direction);
    if (!wf.domain().has_successor(direction, i, j)) {
        throw DomainError("tangent undefined on the trailing boundary");
    }
    const CQuat& next = wf.psi.shifted(direction, i, j);
    return im_vec(next.inverse() * assemble_lambda(cf, direction, i, j, wf.lambda) * wf.psi(i, j));
}

/// max |forward-difference D_j r - closed form| over both directions.
inline double closed_form_deviation(const SurfaceNet& s, const WaveField& wf, const CoefficientField& cf) {
    const auto& d = s.domain();
    double worst = 0.0;
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            for (int dir = 1; dir <= 2; ++dir) {
                if (!d.has_successor(dir, i, j)) continue;
                worst = std::max(worst, norm(delta_at(s.r, dir, i, j) - closed_form_tangent(wf, cf, dir, i, j)));
            }
        }
    }
    return worst;
}

/// sin^2 of the angle between the tangents, or 0 if either vanishes.
inline double tangent_sin2(const Vec3& t1, const Vec3& t2) {
    const double l = dot(t1, t1) * dot(t2, t2);
    if (l == 0.0) return 0.0;
    return dot(cross(t1, t2), cross(t1, t2)) / l;
}

struct CurvatureMap {
    /// K at every valid node; nullopt on trailing boundaries and at degenerate nodes.
    GridFunction<std::optional<double>> K;
    std::size_t valid = 0;
    std::size_t degenerate = 0;
};

/// K = -(D1n.D2r)(D2n.D1r) / ((D1r)^2 (D2r)^2 - (D1r.D2r)^2).
inline std::optional<double> gauss_curvature_dot_at(const DeltaFrame& f, double cond_tol = kDefaultCondTol) {
    if (tangent_sin2(f.d1r, f.d2r) < cond_tol) return std::nullopt;
    const Vec3 c = cross(f.d1r, f.d2r);
    return -(dot(f.d1n, f.d2r) * dot(f.d2n, f.d1r)) / dot(c, c);
}

inline CurvatureMap gauss_curvature_dot(const SurfaceNet& s, double cond_tol = kDefaultCondTol) {
    CurvatureMap out{GridFunction<std::optional<double>>(s.domain_ptr(), std::nullopt)};
    const auto& d = s.domain();
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            const auto k = gauss_curvature_dot_at(delta_frame_at(s, i, j), cond_tol);
            if (k) {
                out.K(i, j) = *k;
                ++out.valid;
            } else {
                ++out.degenerate;
            }
        }
    }
    return out;
}

struct FundamentalData {
    double E = 0, G = 0, F = 0;
    /// Angle between D1 r and D2 r.
    double phi = 0;
    double m12 = 0;  // -D1r . D2n
    double m21 = 0;  // -D2r . D1n
};

inline FundamentalData fundamental_data(const SurfaceNet& s, std::size_t i, std::size_t j) {
    const DeltaFrame f = delta_frame_at(s, i, j);
    return {dot(f.d1r, f.d1r), dot(f.d2r, f.d2r), dot(f.d1r, f.d2r), angle_between(f.d1r, f.d2r),
            -dot(f.d1r, f.d2n), -dot(f.d2r, f.d1n)};
}

struct NetResiduals {
    /// max |D_j n . D_j r| / (|D_j n| |D_j r|).
    double asym1 = 0, asym2 = 0;
    /// max relative deviation of (D1 r)^2 from its t1-row mean (and of (D2 r)^2 from its t2-column mean).
    double cheb1 = 0, cheb2 = 0;
};

inline NetResiduals net_residuals(const SurfaceNet& s) {
    const auto& d = s.domain();
    NetResiduals res;
    auto asym = [](const Vec3& dn, const Vec3& dr) {
        const double l = norm(dn) * norm(dr);
        return l == 0.0 ? 0.0 : std::abs(dot(dn, dr)) / l;
    };
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            if (d.has_successor(1, i, j))
                res.asym1 = std::max(res.asym1, asym(delta_at(s.n, 1, i, j), delta_at(s.r, 1, i, j)));
            if (d.has_successor(2, i, j))
                res.asym2 = std::max(res.asym2, asym(delta_at(s.n, 2, i, j), delta_at(s.r, 2, i, j)));
        }
    }
    // E(t1): fixed i, varying j.
    std::vector<double> row(d.n2());
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const Vec3 t = delta_at(s.r, 1, i, j);
            row[j] = dot(t, t);
            mean += row[j];
        }
        mean /= static_cast<double>(d.n2());
        if (mean == 0.0) continue;
        for (double e : row) res.cheb1 = std::max(res.cheb1, std::abs(e - mean) / mean);
    }
    std::vector<double> col(d.n1());
    for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < d.n1(); ++i) {
            const Vec3 t = delta_at(s.r, 2, i, j);
            col[i] = dot(t, t);
            mean += col[i];
        }
        mean /= static_cast<double>(d.n1());
        if (mean == 0.0) continue;
        for (double g : col) res.cheb2 = std::max(res.cheb2, std::abs(g - mean) / mean);
    }
    return res;
}

struct TetrahedronAngles {
    /// Dihedral angle between planes ABC and ABD.
    double theta1 = 0;
    /// Dihedral angle between planes ABD and ACD.
    double theta2 = 0;
    /// Angle between AB and AD.
    double phi = 0;
};

struct TetCurvature {
    bool degenerate = false;
    double K = 0;
    TetrahedronAngles angles;
    /// sin(theta_j) / (eps_j |Delta_j r|), i.e. sin(theta_1)/|AB| and sin(theta_2)/|AD|.
    double tors1 = 0, tors2 = 0;
};

/// Curvature of the cell with corners A = r(i,j), B = r(i+1,j), D = r(i,j+1), C = r(i+1,j+1):
/// K = -sin(theta1) sin(theta2) / (eps1 eps2 |Delta1 r| |Delta2 r|).
inline TetCurvature gauss_curvature_tet(const SurfaceNet& s, std::size_t i, std::size_t j,
                                        double cond_tol = kDefaultCondTol) {
    const auto& d = s.domain();
    if (i + 1 >= d.n1() || j + 1 >= d.n2()) throw DomainError("cell outside the grid");
    const Vec3& A = s.r(i, j);
    const Vec3& B = s.r(i + 1, j);
    const Vec3& D = s.r(i, j + 1);
    const Vec3& C = s.r(i + 1, j + 1);
    const Vec3 ab = B - A;
    const Vec3 ad = D - A;
    TetCurvature out;
    // Face normals oriented like Delta1 r x Delta2 r at their base vertex.
    const Vec3 n_abd = cross(ab, ad);
    const Vec3 n_abc = cross(ab, C - B);
    const Vec3 n_acd = cross(C - D, ad);
    const double lab = norm(ab);
    const double lad = norm(ad);
    if (tangent_sin2(ab, ad) < cond_tol || norm(n_abc) == 0.0 || norm(n_acd) == 0.0) {
        out.degenerate = true;
        return out;
    }
    out.angles = {angle_between(n_abd, n_abc), angle_between(n_abd, n_acd), angle_between(ab, ad)};
    const double s1 = std::sin(out.angles.theta1);
    const double s2 = std::sin(out.angles.theta2);
    out.tors1 = s1 / lab;
    out.tors2 = s2 / lad;
    out.K = -s1 * s2 / (lab * lad);
    return out;
}

struct TetReport {
    std::size_t valid_cells = 0;
    std::size_t degenerate_cells = 0;
    /// max |K_tet - K_dot| / |K_dot| over cells where both are defined.
    double max_rel_vs_dot = 0;
    /// (max - min) / mean of the two torsion ratios across valid cells.
    double tors1_spread = 0, tors2_spread = 0;
    double tors1_mean = 0, tors2_mean = 0;
};

inline TetReport tetrahedron_report(const SurfaceNet& s, double cond_tol = kDefaultCondTol) {
    const auto& d = s.domain();
    const CurvatureMap dot_k = gauss_curvature_dot(s, cond_tol);
    TetReport rep;
    double lo1 = std::numeric_limits<double>::infinity(), hi1 = 0, lo2 = lo1, hi2 = 0;
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            const TetCurvature t = gauss_curvature_tet(s, i, j, cond_tol);
            if (t.degenerate || !dot_k.K(i, j)) {
                ++rep.degenerate_cells;
                continue;
            }
            ++rep.valid_cells;
            const double kd = *dot_k.K(i, j);
            if (kd != 0.0) rep.max_rel_vs_dot = std::max(rep.max_rel_vs_dot, std::abs(t.K - kd) / std::abs(kd));
            lo1 = std::min(lo1, t.tors1);
            hi1 = std::max(hi1, t.tors1);
            lo2 = std::min(lo2, t.tors2);
            hi2 = std::max(hi2, t.tors2);
            rep.tors1_mean += t.tors1;
            rep.tors2_mean += t.tors2;
        }
    }
    if (rep.valid_cells > 0) {
        rep.tors1_mean /= static_cast<double>(rep.valid_cells);
        rep.tors2_mean /= static_cast<double>(rep.valid_cells);
        if (rep.tors1_mean > 0) rep.tors1_spread = (hi1 - lo1) / rep.tors1_mean;
        if (rep.tors2_mean > 0) rep.tors2_spread = (hi2 - lo2) / rep.tors2_mean;
    }
    return rep;
}

/// Wunderlich's curvature of a discrete Chebyshev net, -sin^2(theta) / (eps^2 cos(theta)).
inline double wunderlich_K(double theta, double eps) {
    if (!(eps > 0.0)) throw DomainError("wunderlich_K: eps must be positive");
    if (theta < 0.0 || theta >= std::numbers::pi / 2) {
        throw DomainError("wunderlich_K: theta must lie in [0, pi/2)");
    }
    const double st = std::sin(theta);
    return -st * st / (eps * eps * std::cos(theta));
}

struct Plane {
    Vec3 point;
    Vec3 normal;
};

inline double signed_distance(const Plane& pl, const Vec3& x) { return dot(x - pl.point, pl.normal); }

/// Plane through r(node) spanned by D1 r and D2 r.
inline Plane tangent_plane(const SurfaceNet& s, std::size_t i, std::size_t j, double cond_tol = kDefaultCondTol) {
    const auto& d = s.domain();
    if (!d.contains(i, j) || !d.has_successor(1, i, j) || !d.has_successor(2, i, j)) {
        throw DomainError("tangent plane needs successors in both directions");
    }
    const Vec3 t1 = delta_at(s.r, 1, i, j);
    const Vec3 t2 = delta_at(s.r, 2, i, j);
    if (tangent_sin2(t1, t2) < cond_tol) throw NumericalError("degenerate node: tangents are parallel");
    return {s.r(i, j), normalized(cross(t1, t2))};
}

struct NormalAlignment {
    /// max over non-degenerate nodes of min |n_cross -+ n|; the orientation of
    /// D1r x D2r reverses across cuspidal edges, so the sign is taken per node.
    double max_deviation = 0;
    std::size_t compared = 0;
    /// Nodes where D1r x D2r points against the spectral normal.
    std::size_t flipped = 0;
};

namespace detail {

template <class Tangent>
NormalAlignment normal_alignment(const SurfaceNet& s, Tangent tangent, double cond_tol) {
    const auto& d = s.domain();
    NormalAlignment out;
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            const Vec3 t1 = tangent(1, i, j);
            const Vec3 t2 = tangent(2, i, j);
            if (tangent_sin2(t1, t2) < cond_tol) continue;
            const Vec3 nc = normalized(cross(t1, t2));
            const bool flip = dot(nc, s.n(i, j)) < 0.0;
            out.flipped += flip;
            out.max_deviation = std::max(out.max_deviation, norm(flip ? nc + s.n(i, j) : nc - s.n(i, j)));
            ++out.compared;
        }
    }
    return out;
}

}  // namespace detail

/// Tangents from forward differences of r; loses accuracy as sin(phi) -> 0.
inline NormalAlignment normal_alignment(const SurfaceNet& s, double cond_tol = kDefaultCondTol) {
    return detail::normal_alignment(
        s, [&](int dir, std::size_t i, std::size_t j) { return delta_at(s.r, dir, i, j); }, cond_tol);
}

/// Normals of sym_surface(wf) against closed-form tangents, free of difference cancellation.
inline NormalAlignment normal_alignment(const WaveField& wf, const CoefficientField& cf,
                                        double cond_tol = kDefaultCondTol) {
    const SurfaceNet s = sym_surface(wf);
    return detail::normal_alignment(
        s, [&](int dir, std::size_t i, std::size_t j) { return closed_form_tangent(wf, cf, dir, i, j); }, cond_tol);
}

/// Coplanarity of Delta_j r, T_j(Delta_1 r), T_j(Delta_2 r): the max normalized triple
/// product over both directions. Zero for an asymptotic net.
inline double asymptotic_coplanarity(const SurfaceNet& s) {
    const auto& d = s.domain();
    auto triple = [](const Vec3& u, const Vec3& v, const Vec3& w) {
        const double l = norm(u) * norm(v) * norm(w);
        return l == 0.0 ? 0.0 : std::abs(dot(u, cross(v, w))) / l;
    };
    double worst = 0.0;
    for (std::size_t i = 0; i + 2 < d.n1(); ++i)
        for (std::size_t j = 0; j + 1 < d.n2(); ++j)
            worst = std::max(worst, triple(delta_at(s.r, 1, i, j), delta_at(s.r, 1, i + 1, j),
                                           delta_at(s.r, 2, i + 1, j)));
    for (std::size_t i = 0; i + 1 < d.n1(); ++i)
        for (std::size_t j = 0; j + 2 < d.n2(); ++j)
            worst = std::max(worst, triple(delta_at(s.r, 2, i, j), delta_at(s.r, 1, i, j + 1),
                                           delta_at(s.r, 2, i, j + 1)));
    return worst;
}

/// Largest gap |Pi((D Phi) Phi^-1) - (geo D Phi) Phi^-1| over all nodes and both directions,
/// where Phi = Psi / |Psi| is the unit-normalized wave function at real lambda. Of order eps^2.
inline double geodesic_chord_gap(const WaveField& wf) {
    detail::real_lambda(wf);
    const auto& d = wf.domain();
    GridFunction<Quat> phi(wf.domain_ptr());
    for (std::size_t i = 0; i < d.n1(); ++i) {
        for (std::size_t j = 0; j < d.n2(); ++j) {
            const CQuat& psi = wf.psi(i, j);
            phi(i, j) = (psi / std::sqrt(psi.norm2())).to_quat(1e-10);
            phi(i, j) /= phi(i, j).norm();
        }
    }
    double worst = 0.0;
    for (int dir = 1; dir <= 2; ++dir) {
        for (std::size_t i = 0; i < d.n1(); ++i) {
            for (std::size_t j = 0; j < d.n2(); ++j) {
                if (!d.has_successor(dir, i, j)) continue;
                const double eps = d.graininess(dir, i, j);
                const Quat& a = phi(i, j);
                const Quat& b = phi.shifted(dir, i, j);
                const Quat inv = a.inverse();
                const Quat chord = im_project(chord_delta(a, b, eps) * inv);
                const Quat geo = geodesic_delta(a, b, eps) * inv;
                worst = std::max(worst, (chord - geo).norm());
            }
        }
    }
    return worst;
}

}  // namespace tsnet
