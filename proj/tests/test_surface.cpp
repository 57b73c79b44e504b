#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "tsnet/surface.hpp"

using namespace tsnet;

namespace {

DomainPtr cantor_domain() { return make_domain(TimeScale::cantor(4, -1.2, 1.2), TimeScale::uniform(-1.5, 0.1, 31)); }

SurfaceNet planar_net(DomainPtr dom) {
    SurfaceNet s{GridFunction<Vec3>(dom), GridFunction<Vec3>(dom, Vec3{0, 0, 1}), std::nullopt};
    for (std::size_t i = 0; i < dom->n1(); ++i)
        for (std::size_t j = 0; j < dom->n2(); ++j) s.r(i, j) = {dom->t1()[i], dom->t2()[j] + 0.3 * dom->t1()[i], 0.0};
    return s;
}

}  // namespace

TEST(Sym, InitialNode) {
    const auto chain = test::soliton(cantor_domain(), 1.0);
    const SurfaceNet s = sym_surface(chain.waves[0]);
    EXPECT_EQ(norm(s.r(0, 0)), 0.0);
    EXPECT_LE(norm(s.n(0, 0) - Vec3{0, 0, 1}), 1e-15);
}

TEST(Sym, VacuumSingleStep) {
    for (double lam : {0.5, 1.0, 2.0}) {
        for (double eps : {0.1, 0.7}) {
            auto dom = make_domain(TimeScale({0.0, eps}), TimeScale({0.0, 1.0}));
            const SurfaceNet s = sym_surface(propagate(vacuum(dom), lam));
            const Vec3 want{eps / (1 + lam * lam * eps * eps), 0, 0};
            EXPECT_LE(norm(s.r(1, 0) - want), 1e-15);
        }
    }
}

TEST(Sym, UnitNormalsEverywhere) {
    const auto chain = test::soliton(cantor_domain(), 0.5);
    for (const auto& s : chain.surfaces)
        for (const Vec3& n : s.n.values()) EXPECT_NEAR(norm(n), 1.0, 1e-12);
}

TEST(Sym, RejectsComplexLambda) {
    const WaveField wf = propagate(vacuum(test::uniform_grid(3, 3)), cplx(0.0, 0.5));
    EXPECT_THROW(sym_surface(wf), DomainError);
}

TEST(DeltaFrame, ClosedFormMatchesDifferences) {
    for (double lam : {0.5, 1.0, 2.0}) {
        const auto chain = test::soliton(cantor_domain(), lam);
        const SurfaceNet s = sym_surface(chain.waves[1]);
        EXPECT_LE(closed_form_deviation(s, chain.waves[1], chain.fields[1]), 1e-12);
    }
}

TEST(DeltaFrame, ConstantSurface) {
    auto dom = test::uniform_grid(4, 4);
    const SurfaceNet s{GridFunction<Vec3>(dom, Vec3{1, 2, 3}), GridFunction<Vec3>(dom, Vec3{0, 0, 1}), std::nullopt};
    const auto frames = delta_frame(s);
    for (const auto& f : frames.values()) {
        if (!f) continue;
        EXPECT_EQ(norm(f->d1r) + norm(f->d2r) + norm(f->d1n) + norm(f->d2n), 0.0);
    }
    EXPECT_FALSE(frames(3, 0).has_value());
}

TEST(DeltaFrame, VacuumTangentsParallel) {
    const SurfaceNet s = sym_surface(propagate(vacuum(cantor_domain()), 1.0));
    const auto frames = delta_frame(s);
    for (const auto& f : frames.values())
        if (f) EXPECT_LE(tangent_sin2(f->d1r, f->d2r), 1e-20);
}

TEST(Curvature, OneSolitonIsConstant) {
    for (double lam : {0.5, 1.0, 2.0}) {
        const auto chain = test::soliton(cantor_domain(), lam);
        const CurvatureMap km = gauss_curvature_dot(chain.surfaces[1]);
        EXPECT_GT(km.valid, 0u);
        for (const auto& k : km.K.values())
            if (k) EXPECT_NEAR(*k, -4 * lam * lam, 1e-8 * 4 * lam * lam);
    }
}

TEST(Curvature, VacuumIsFullyDegenerate) {
    const CurvatureMap km = gauss_curvature_dot(sym_surface(propagate(vacuum(cantor_domain()), 1.0)));
    EXPECT_EQ(km.valid, 0u);
    EXPECT_EQ(km.degenerate, (cantor_domain()->n1() - 1) * (cantor_domain()->n2() - 1));
}

TEST(FundamentalData, ChebyshevAngle) {
    const auto chain = test::soliton(cantor_domain(), 1.0);
    const FundamentalData f = fundamental_data(chain.surfaces[1], 5, 7);
    EXPECT_GT(f.E, 0);
    EXPECT_GT(f.G, 0);
    EXPECT_NEAR(f.F, std::sqrt(f.E) * std::sqrt(f.G) * std::cos(f.phi), 1e-12);
    EXPECT_GT(f.phi, 0);
    EXPECT_LT(f.phi, std::numbers::pi);
}

TEST(NetResiduals, OneSoliton) {
    for (double lam : {0.5, 1.0, 2.0}) {
        const NetResiduals nr = net_residuals(test::soliton(cantor_domain(), lam).surfaces[1]);
        EXPECT_LE(std::max(nr.asym1, nr.asym2), 1e-9);
        EXPECT_LE(std::max(nr.cheb1, nr.cheb2), 1e-9);
    }
}

TEST(NetResiduals, PerturbedSurfaceDetected) {
    SurfaceNet s = test::soliton(cantor_domain(), 1.0).surfaces[1];
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1e-3);
    for (Vec3& r : s.r.values()) r += Vec3{g(rng), g(rng), g(rng)};
    const NetResiduals nr = net_residuals(s);
    EXPECT_GT(std::max(nr.asym1, nr.asym2), 1e-4);
    EXPECT_GT(std::max(nr.cheb1, nr.cheb2), 1e-4);
}

TEST(Tetrahedron, PlanarCell) {
    const SurfaceNet s = planar_net(test::uniform_grid(3, 3));
    const TetCurvature t = gauss_curvature_tet(s, 0, 0);
    EXPECT_FALSE(t.degenerate);
    EXPECT_NEAR(t.angles.theta1, 0.0, 1e-15);
    EXPECT_NEAR(t.angles.theta2, 0.0, 1e-15);
    EXPECT_NEAR(t.K, 0.0, 1e-15);
}

TEST(Tetrahedron, CollinearCornersFlagged) {
    auto dom = test::uniform_grid(2, 2);
    SurfaceNet s{GridFunction<Vec3>(dom), GridFunction<Vec3>(dom, Vec3{0, 0, 1}), std::nullopt};
    s.r(1, 0) = {1, 0, 0};
    s.r(0, 1) = {2, 0, 0};
    s.r(1, 1) = {1, 1, 0};
    EXPECT_TRUE(gauss_curvature_tet(s, 0, 0).degenerate);
    EXPECT_THROW(gauss_curvature_tet(s, 1, 0), DomainError);
}

TEST(Tetrahedron, MatchesDotFormulaAndTorsIsConstant) {
    for (double lam : {0.5, 1.0, 2.0}) {
        const auto chain = test::soliton(cantor_domain(), lam);
        const SurfaceNet& s = chain.surfaces[1];
        const TetReport rep = tetrahedron_report(s);
        EXPECT_GT(rep.valid_cells, 0u);
        EXPECT_LE(rep.max_rel_vs_dot, 1e-6);
        EXPECT_LE(rep.tors1_spread, 1e-8);
        EXPECT_LE(rep.tors2_spread, 1e-8);
        EXPECT_NEAR(rep.tors1_mean, 2 * lam, 1e-8);
        EXPECT_NEAR(rep.tors2_mean, 2 * lam, 1e-8);
    }
}

TEST(Wunderlich, Examples) {
    EXPECT_EQ(wunderlich_K(0.0, 0.3), 0.0);
    const double theta = 0.01, eps = 0.01;
    const double matched = -std::sin(theta) * std::sin(theta) / (eps * eps);
    const double k = wunderlich_K(theta, eps);
    EXPECT_NEAR(k, matched / std::cos(theta), 1e-15);
    EXPECT_LE(std::abs(k / matched - 1.0), theta * theta);
    EXPECT_THROW(wunderlich_K(std::numbers::pi / 2, 1.0), DomainError);
    EXPECT_THROW(wunderlich_K(0.1, 0.0), DomainError);
}

TEST(Wunderlich, ConvergesWithFixedRatio) {
    double prev = 1.0;
    for (double theta : {0.1, 0.05, 0.025, 0.0125}) {
        const double eps = theta / 0.5;
        const double k = -std::sin(theta) * std::sin(theta) / (eps * eps);
        const double err = std::abs(wunderlich_K(theta, eps) - k);
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(TangentPlane, ContainsForwardNeighbours) {
    const auto chain = test::soliton(cantor_domain(), 1.0);
        const SurfaceNet& s = chain.surfaces[1];
    const auto& d = s.domain();
    for (std::size_t i = 0; i + 1 < d.n1(); i += 3) {
        for (std::size_t j = 0; j + 1 < d.n2(); j += 4) {
            const Plane pl = tangent_plane(s, i, j);
            EXPECT_LE(std::abs(signed_distance(pl, s.r(i + 1, j))), 1e-12);
            EXPECT_LE(std::abs(signed_distance(pl, s.r(i, j + 1))), 1e-12);
        }
    }
    EXPECT_THROW(tangent_plane(s, d.n1() - 1, 0), DomainError);
}

TEST(TangentPlane, PlanarNormalConstant) {
    const SurfaceNet s = planar_net(test::uniform_grid(4, 5));
    for (std::size_t i = 0; i + 1 < 4; ++i)
        for (std::size_t j = 0; j + 1 < 5; ++j) EXPECT_LE(norm(tangent_plane(s, i, j).normal - Vec3{0, 0, 1}), 1e-15);
}

TEST(TangentPlane, DegenerateNodeRejected) {
    const SurfaceNet s = sym_surface(propagate(vacuum(test::uniform_grid(4, 4)), 1.0));
    EXPECT_THROW(tangent_plane(s, 1, 1), NumericalError);
}

TEST(NormalAlignment, SpectralNormalMatchesCrossProduct) {
    for (double lam : {0.5, 1.0, 2.0}) {
        const auto chain = test::soliton(cantor_domain(), lam);
        const NormalAlignment al = normal_alignment(chain.waves[1], chain.fields[1]);
        EXPECT_GT(al.compared, 0u);
        EXPECT_LE(al.max_deviation, 1e-10);
        // The cuspidal edge crosses this domain, so both orientations occur.
        EXPECT_GT(al.flipped, 0u);
        EXPECT_LT(al.flipped, al.compared);
    }
}

TEST(NormalAlignment, DifferenceTangentsAgreeUpToConditioning) {
    const auto chain = test::soliton(test::uniform_grid(51, 51), 1.0);
    const NormalAlignment al = normal_alignment(chain.surfaces[1]);
    EXPECT_EQ(al.compared, normal_alignment(chain.waves[1], chain.fields[1]).compared);
    EXPECT_LE(al.max_deviation, 1e-9);
}

TEST(NormalAlignment, VacuumHasNothingToCompare) {
    EXPECT_EQ(normal_alignment(sym_surface(propagate(vacuum(test::uniform_grid(5, 5)), 1.0))).compared, 0u);
}

TEST(Coplanarity, AsymptoticNet) {
    EXPECT_LE(asymptotic_coplanarity(test::soliton(cantor_domain(), 1.0).surfaces[1]), 1e-9);
}

TEST(GeodesicGap, SecondOrder) {
    double prev = 0.0;
    for (std::size_t n : {25u, 50u, 100u}) {
        auto dom = make_domain(TimeScale::interval(0, 1, n), TimeScale::interval(0, 1, n));
        const double gap = geodesic_chord_gap(test::soliton(dom, 1.0).waves[1]);
        if (prev > 0) EXPECT_GE(std::log2(prev / gap), 1.9);
        prev = gap;
    }
}
