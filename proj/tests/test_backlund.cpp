#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "tsnet/backlund.hpp"

using namespace tsnet;

namespace {

const cplx I(0.0, 1.0);

/// Wave field equal to the identity at every node, at lambda = i kappa.
WaveField identity_wave(DomainPtr dom, double kappa) {
    return {cplx(0.0, kappa), CQuat::identity(), GridFunction<CQuat>(dom, CQuat::identity()),
            GridFunction<CQuat>(dom, CQuat::zero())};
}

DomainPtr small_domain() { return make_domain(TimeScale::cantor(3, -1.2, 1.2), TimeScale::uniform(-1.0, 0.1, 21)); }

}  // namespace

TEST(Projector, IdentityExample) {
    const ProjectorField pf = build_projector(identity_wave(test::uniform_grid(2, 2), 1.0), {1.0, 0.0, 0.0});
    EXPECT_LE(distance(pf.P(0, 0), CQuat(0.5, -0.5, -0.5, 0.5)), 1e-15);
    EXPECT_NEAR(pf.p(1, 1)[0], -1.0, 1e-15);
    EXPECT_NEAR(pf.p(1, 1)[1], 0.0, 1e-15);
}

TEST(Projector, InvariantsOnSoliton) {
    const auto chain = test::soliton(small_domain(), 1.0, {{1.0, 0.3, 1.1}, {1.7, -0.4, 0.9}});
    const CQuat one = CQuat::identity(), e3 = CQuat::e3();
    for (const auto& pf : chain.projectors) {
        for (std::size_t k = 0; k < pf.P.values().size(); ++k) {
            const CQuat& P = pf.P.values()[k];
            EXPECT_LE(distance(P * P, P), 1e-10);
            EXPECT_LE(distance(P.dagger(), P), 1e-10);
            EXPECT_NEAR(std::abs(P.trace() - 1.0), 0.0, 1e-10);
            EXPECT_LE(distance(e3 * (one - P) * e3.inverse(), P), 1e-10);
            const auto& p = pf.p.values()[k];
            EXPECT_NEAR(std::hypot(p[0], p[1]), 1.0, 1e-10);
        }
    }
}

TEST(Projector, PhaseShiftGaugeIndependence) {
    const CoefficientField cf = test::soliton(small_domain(), 1.0).fields[1];
    const ProjectorField a = build_projector(cf, {1.3, 0.2, 0.9});
    const ProjectorField b = build_projector(cf, {1.3, 0.2 + 0.77, 0.9 + 0.77});
    for (std::size_t k = 0; k < a.P.values().size(); ++k) EXPECT_LE(distance(a.P.values()[k], b.P.values()[k]), 1e-12);
}

TEST(Projector, SystemResidual) {
    for (double kappa : {0.7, 1.0, 1.8}) {
        const auto chain = test::soliton(small_domain(), 1.0, {{kappa, 0.3, 1.1}});
        EXPECT_LE(projector_system_residual(chain.fields[0], chain.projectors[0], kappa), 1e-9);
    }
    const auto two = test::soliton(small_domain(), 1.0, {{1.0, 0.3, 1.1}, {1.7, -0.4, 0.9}});
    EXPECT_LE(projector_system_residual(two.fields[1], two.projectors[1], 1.7), 1e-9);
}

TEST(Projector, PropagateBothMatchesSymmetry) {
    ProjectorOptions opts;
    opts.propagate_both = true;
    const CoefficientField cf = test::soliton(small_domain(), 1.0).fields[1];
    const ProjectorField both = build_projector(cf, {1.4, 0.1, 0.6}, opts);
    const ProjectorField one = build_projector(cf, {1.4, 0.1, 0.6});
    for (std::size_t k = 0; k < one.P.values().size(); ++k) EXPECT_LE(distance(both.P.values()[k], one.P.values()[k]), 1e-10);
}

TEST(Projector, Errors) {
    auto dom = test::uniform_grid(3, 3);
    EXPECT_THROW(build_projector(vacuum(dom), {0.0, 0.0, 0.0}), DomainError);
    EXPECT_THROW(build_projector(identity_wave(dom, 1.0), {2.0, 0.0, 0.0}), DomainError);
    WaveField shifted = identity_wave(dom, 1.0);
    shifted.init = CQuat::embed(exp_pure({0, 0.1, 0, 0}));
    EXPECT_THROW(build_projector(shifted, {1.0, 0.0, 0.0}), NumericalError);
    EXPECT_THROW(build_projector(identity_wave(dom, 1.0), {1.0, 0.0, 0.0}, {.propagate_both = true}, nullptr), DomainError);
}

TEST(DarbouxMatrix, InverseAndUnitarity) {
    const Quat p{0.0, 0.6, -0.8, 0.0};
    for (double kappa : {0.5, 1.0, 3.0}) {
        for (cplx lam : {cplx(0.4), cplx(2.0), cplx(-1.3), cplx(0.3, 0.2)}) {
            const CQuat B = darboux_matrix(lam, kappa, p);
            EXPECT_LE(distance(B * darboux_matrix_inverse(lam, kappa, p), CQuat::identity()), 1e-14);
            if (lam.imag() == 0.0) EXPECT_LE(distance(B.dagger() * B, CQuat::identity()), 1e-14);
        }
    }
}

TEST(DarbouxMatrix, LambdaDerivative) {
    const Quat p{0.0, 0.0, 1.0, 0.0};
    const double h = 1e-6;
    for (cplx lam : {cplx(0.7), cplx(1.5, 0.3)}) {
        const CQuat fd = (darboux_matrix(lam + h, 1.2, p) - darboux_matrix(lam - h, 1.2, p)) / (2 * h);
        EXPECT_LE(distance(fd, darboux_matrix_lambda(lam, 1.2, p)), 1e-8);
    }
}

TEST(DarbouxMatrix, ZeroKappaIsIdentity) {
    EXPECT_LE(distance(darboux_matrix(1.3, 0.0, {0, 1, 0, 0}), CQuat::identity()), 1e-15);
}

TEST(DarbouxMatrix, Errors) {
    EXPECT_THROW(darboux_matrix(I, 1.0, {0, 1, 0, 0}), NumericalError);
    EXPECT_THROW(darboux_matrix_inverse(-I, 1.0, {0, 1, 0, 0}), NumericalError);
    EXPECT_THROW(darboux_matrix(1.0, 1.0, {0, 1, 0, 0.1}), DomainError);
    EXPECT_THROW(darboux_matrix(1.0, 1.0, {0, 2, 0, 0}), DomainError);
}

TEST(TransformSurface, SegmentExample) {
    auto dom = test::uniform_grid(2, 2);
    const ProjectorField pf = build_projector(identity_wave(dom, 1.0), {1.0, 0.0, 0.0});
    WaveField wf{1.0, CQuat::identity(), GridFunction<CQuat>(dom, CQuat::identity()),
                 GridFunction<CQuat>(dom, CQuat::zero())};
    const SurfaceNet s = sym_surface(wf);
    const SurfaceNet t = transform_surface(s, wf, 1.0, pf);
    EXPECT_LE(norm(t.r(0, 0) - Vec3{-0.5, 0, 0}), 1e-15);
    EXPECT_NEAR(segment_report(s, t, 1.0).expected_length, 0.5, 1e-15);
}

TEST(TransformSurface, SegmentsHaveConstantLengthAndAreTangent) {
    for (double lam : {0.5, 1.0, 2.0}) {
        for (double kappa : {0.8, 1.0, 1.6}) {
            const auto chain = test::soliton(small_domain(), lam, {{kappa, 0.3, 1.1}});
            const SegmentReport rep = segment_report(chain.surfaces[0], chain.surfaces[1], kappa);
            EXPECT_NEAR(rep.expected_length, kappa / (lam * lam + kappa * kappa), 1e-15);
            EXPECT_LE(rep.length_spread, 1e-10);
            EXPECT_LE(rep.length_error, 1e-10);
            EXPECT_LE(rep.tangency, 1e-10);
        }
    }
}

TEST(TransformSurface, ComplexLambdaRejected) {
    auto dom = test::uniform_grid(3, 3);
    const ProjectorField pf = build_projector(identity_wave(dom, 1.0), {1.0, 0.0, 0.0});
    const WaveField wf = propagate(vacuum(dom), 1.0);
    WaveField cw = propagate(vacuum(dom), cplx(1.0, 0.5));
    EXPECT_THROW(transform_surface(sym_surface(wf), cw, 1.0, pf), DomainError);
}

TEST(TransformWave, CovariantWithRepropagation) {
    const auto chain = test::soliton(small_domain(), 1.0);
    const WaveField dressed = transform_wave(chain.waves[0], 1.0, chain.projectors[0]);
    const CQuat base = dressed.psi(0, 0);
    for (std::size_t k = 0; k < dressed.psi.values().size(); ++k) {
        const CQuat want = chain.waves[1].psi.values()[k] * base;
        EXPECT_LE(distance(dressed.psi.values()[k], want), 1e-9 * want.op_norm());
    }
}

TEST(TransformWave, SymSurfaceIsRigidMotionOfDressedSurface) {
    const auto chain = test::soliton(small_domain(), 1.5);
    const SurfaceNet repropagated = sym_surface(chain.waves[1]);
    const auto& a = chain.surfaces[1];
    const auto& d = a.domain();
    for (std::size_t i = 0; i + 1 < d.n1(); ++i) {
        for (std::size_t j = 0; j + 1 < d.n2(); ++j) {
            for (int dir = 1; dir <= 2; ++dir) {
                EXPECT_NEAR(norm(delta_at(a.r, dir, i, j)), norm(delta_at(repropagated.r, dir, i, j)), 1e-10);
            }
        }
    }
}

TEST(TransformCoefficients, ConstantProjectorExample) {
    auto dom = test::uniform_grid(4, 4);
    const ProjectorField pf = build_projector(identity_wave(dom, 1.0), {1.0, 0.0, 0.0});
    const CoefficientField cf = vacuum(dom);
    const CoefficientField t = transform_coefficients(cf, 1.0, pf);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const NodeCoefficients k = t.at(i, j);
            EXPECT_EQ(k.a, 1.0);
            EXPECT_EQ(k.b, 0.0);
            EXPECT_NEAR(k.p, 1.0, 1e-15);
            EXPECT_NEAR(k.q, 0.0, 1e-15);
            EXPECT_NEAR(k.c, 0.0, 1e-15);
        }
    }
}

TEST(TransformCoefficients, KeepsU1AndCompatibility) {
    const auto chain = test::soliton(small_domain(), 1.0, {{1.0, 0.3, 1.1}, {1.7, -0.4, 0.9}});
    for (std::size_t s = 1; s < chain.fields.size(); ++s) {
        const auto& before = chain.fields[s - 1];
        const auto& after = chain.fields[s];
        for (std::size_t k = 0; k < before.a.values().size(); ++k) {
            EXPECT_EQ(after.a.values()[k], before.a.values()[k]);
            EXPECT_EQ(after.b.values()[k], before.b.values()[k]);
        }
        EXPECT_LE(compatibility_residual(after, 1.0).max_norm, 1e-9);
    }
}

TEST(Chain, TwoStepsKeepExactCurvature) {
    const auto chain = test::soliton(test::uniform_grid(40, 40), 1.0, {{1.0, 0.3, 1.1}, {1.5, 0.0, 0.5}});
    ASSERT_EQ(chain.surfaces.size(), 3u);
    EXPECT_EQ(chain.projectors.size(), 2u);
    for (std::size_t k = 1; k < 3; ++k) {
        EXPECT_GT(gauss_curvature_dot(chain.surfaces[k]).valid, 0u);
        EXPECT_LE(test::max_rel_curvature_error(chain.surfaces[k]), 1e-8);
    }
}

TEST(Chain, EmptyChainIsSeedOnly) {
    const auto chain = test::soliton(test::uniform_grid(5, 5), 1.0, {});
    EXPECT_EQ(chain.surfaces.size(), 1u);
    EXPECT_EQ(chain.fields.size(), 1u);
    EXPECT_TRUE(chain.projectors.empty());
}

TEST(Chain, Errors) {
    auto dom = test::uniform_grid(5, 5);
    EXPECT_THROW(test::soliton(dom, 1.0, {{1.0, 0, 1}, {1.0, 0.2, 0.4}}), NumericalError);
    EXPECT_THROW(test::soliton(dom, 1.0, {{0.0, 0, 1}}), DomainError);
    EXPECT_THROW(test::soliton(dom, 0.0), DomainError);
}
