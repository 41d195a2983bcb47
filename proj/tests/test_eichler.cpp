#include <random>

#include <gtest/gtest.h>

#include <w2p/eichler.hpp>
#include <w2p/petersson.hpp>

using namespace w2p;

namespace {

UnitaryRep gamma2_rank2(const GroupPresentation& G) {
    CMatrix t1(2, 2);
    t1 << 0, 1, 1, 0;
    CMatrix t2 = CMatrix::Zero(2, 2);
    t2(0, 0) = std::polar(1.0, 2 * kPi * 0.3);
    t2(1, 1) = std::polar(1.0, 2 * kPi * 0.55);
    return make_rep(G, 2, {{"T1", t1}, {"T2", t2}});
}

CMatrix random_matrix(std::mt19937_64& rng, int r) {
    std::normal_distribution<double> N;
    CMatrix m(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) m(a, b) = {N(rng), N(rng)};
    return m;
}

// z(g) = g X g^* - X
ParabolicCocycle coboundary(const UnitaryRep& rho, const GroupPresentation& G, const CMatrix& X) {
    ParabolicCocycle z;
    z.rank = rho.rank;
    z.rho = rho;
    z.names = G.gen_names;
    for (const auto& g : rho.images) z.values.push_back(act(CocycleAction::Adjoint, g, X) - X);
    return z;
}

ParabolicCocycle combine(cplx a, const ParabolicCocycle& z1, const ParabolicCocycle& z2) {
    ParabolicCocycle z = z1;
    for (std::size_t k = 0; k < z.values.size(); ++k) z.values[k] = a * z1.values[k] + z2.values[k];
    return z;
}

struct EtaSetup {
    GroupPresentation G = builtin_group("gamma0_11");
    UnitaryRep rho = trivial_rep(G);
    MatrixForm f = column_form(eta_form_evaluator());
};

}  // namespace

TEST(EichlerIntegral, ZeroForm) {
    MatrixForm zero = [](const HPoint&) { return CMatrix(CMatrix::Zero(2, 2)); };
    auto r = eichler_integral(zero, HPoint(0.1, 1.0), HPoint(-2.0, 0.3));
    EXPECT_EQ(r.value.norm(), 0.0);
}

TEST(EichlerIntegral, Exponential) {
    MatrixForm e = [](const HPoint& t) { return CMatrix::Constant(1, 1, std::exp(cplx(0, 2 * kPi) * t.z())); };
    HPoint a(0.2, 0.5), b(1.3, 1.7);
    cplx exact = (std::exp(cplx(0, 2 * kPi) * b.z()) - std::exp(cplx(0, 2 * kPi) * a.z())) / cplx(0, 2 * kPi);
    EXPECT_LT(std::abs(eichler_integral(e, a, b).value(0, 0) - exact), 1e-10);
}

TEST(EichlerIntegral, PathIndependence) {
    EtaSetup s;
    HPoint a(0.0, 0.4), b(0.7, 0.9), c(-0.3, 1.5);
    CMatrix direct = eichler_integral(s.f, a, b).value;
    CMatrix via = eichler_integral(s.f, a, c).value + eichler_integral(s.f, c, b).value;
    EXPECT_LT((direct - via).norm(), 1e-10);
}

TEST(EichlerIntegral, DerivativeIsTheForm) {
    EtaSetup s;
    HPoint base(0.0, 1.0), t(0.31, 0.6);
    const double h = 1e-4;
    CMatrix up = eichler_integral(s.f, base, HPoint(t.x + h, t.y)).value;
    CMatrix dn = eichler_integral(s.f, base, HPoint(t.x - h, t.y)).value;
    CMatrix fd = (up - dn) / (2 * h);
    EXPECT_LT((fd - s.f(t)).norm(), 1e-5 * std::max(1.0, s.f(t).norm()));
}

TEST(Cocycle, ZeroForm) {
    EtaSetup s;
    MatrixForm zero = [](const HPoint&) { return CMatrix(CMatrix::Zero(1, 1)); };
    auto res = cocycle_of(zero, s.rho, s.G, {HPoint(0.0, 1.0), HPoint(0.4, 2.0)});
    for (const auto& v : res.cocycle.values) EXPECT_EQ(v.norm(), 0.0);
}

TEST(Cocycle, EtaPeriods) {
    EtaSetup s;
    auto res = cocycle_of(s.f, s.rho, s.G, {HPoint(0.0, 1.0), HPoint(0.5, 2.0), HPoint(-0.2, 0.7)});
    EXPECT_LT(res.probe_deviation, 1e-9);
    EXPECT_LT(cocycle_relation_residual(res.cocycle, s.G), 1e-9);
    // the cocycle does not depend on the base point either
    auto other = cocycle_of(s.f, s.rho, s.G, {HPoint(0.3, 0.8), HPoint(0.0, 1.0)});
    for (int k = 0; k < s.G.num_gens(); ++k) EXPECT_LT((other.cocycle.values[k] - res.cocycle.values[k]).norm(), 1e-9);
    // cusp form: periods along parabolic generators vanish
    for (double r : parabolicity_residual(res.cocycle, s.G)) EXPECT_LT(r, 1e-9);
    // not every period is zero
    double biggest = 0.0;
    for (const auto& v : res.cocycle.values) biggest = std::max(biggest, v.norm());
    EXPECT_GT(biggest, 1e-3);
}

TEST(Cocycle, Additivity) {
    EtaSetup s;
    auto z = cocycle_of(s.f, s.rho, s.G, {HPoint(0.0, 1.0), HPoint(0.5, 2.0)}).cocycle;
    HPoint p(0.0, 1.0);
    for (Word w : {Word{1, 2}, Word{2, -1}, Word{3, 1, -2}}) {
        CMatrix direct = eichler_integral(s.f, p, s.G.eval(w).apply(p)).value;
        EXPECT_LT((direct - cocycle_value(z, w)).norm(), 1e-8);
    }
}

TEST(Cocycle, RejectsNonAutomorphicInput) {
    EtaSetup s;
    MatrixForm bad = [](const HPoint& t) { return CMatrix::Constant(1, 1, t.z() * std::exp(cplx(0, 2 * kPi) * t.z())); };
    EXPECT_THROW(cocycle_of(bad, s.rho, s.G, {HPoint(0.0, 1.0), HPoint(0.5, 2.0)}), ToleranceError);
}

TEST(Cocycle, CoboundaryIsParabolic) {
    GroupPresentation G = builtin_group("gamma2");
    UnitaryRep rho = gamma2_rank2(G);
    std::mt19937_64 rng(31);
    auto z = coboundary(rho, G, random_matrix(rng, 2));
    for (double r : parabolicity_residual(z, G)) EXPECT_LT(r, 1e-10);
    EXPECT_LT(cocycle_relation_residual(z, G), 1e-12);
    // a generic cocycle value is not parabolic
    ParabolicCocycle w = z;
    w.values[0] += random_matrix(rng, 2);
    double worst = 0.0;
    for (double r : parabolicity_residual(w, G)) worst = std::max(worst, r);
    EXPECT_GT(worst, 1e-3);
}

TEST(Shimura, ProjectsToAntiHermitian) {
    GroupPresentation G = builtin_group("gamma2");
    UnitaryRep rho = gamma2_rank2(G);
    std::mt19937_64 rng(32);
    CMatrix A = random_matrix(rng, 2);
    CMatrix anti = A - A.adjoint(), herm = A + A.adjoint();

    auto za = coboundary(rho, G, anti);
    auto sa = shimura_map(za);
    for (std::size_t k = 0; k < za.values.size(); ++k) EXPECT_LT((sa.values[k] - za.values[k]).norm(), 1e-14);

    auto sh = shimura_map(coboundary(rho, G, herm));
    for (const auto& v : sh.values) EXPECT_LT(v.norm(), 1e-14);

    auto sr = shimura_map(coboundary(rho, G, random_matrix(rng, 2)));
    for (const auto& v : sr.values) EXPECT_LT((v + v.adjoint()).norm(), 1e-14);
    // still a cocycle
    EXPECT_LT(cocycle_relation_residual(sr, G), 1e-12);

    ParabolicCocycle left = za;
    left.action = CocycleAction::Left;
    EXPECT_THROW(shimura_map(left), ValidationError);
}

TEST(CupProduct, Basics) {
    GroupPresentation G = builtin_group("gamma2");
    UnitaryRep rho = gamma2_rank2(G);
    std::mt19937_64 rng(33);
    auto z1 = coboundary(rho, G, random_matrix(rng, 2));
    auto z2 = coboundary(rho, G, random_matrix(rng, 2));
    auto z3 = coboundary(rho, G, random_matrix(rng, 2));
    auto zero = combine(0.0, z1, coboundary(rho, G, CMatrix::Zero(2, 2)));
    Word g1{1, -2}, g2{2, 2, 1};
    EXPECT_EQ(std::abs(cup_product(zero, z2, g1, g2)), 0.0);

    const cplx a(0.7, -1.3);
    cplx lhs = cup_product(combine(a, z1, z3), z2, g1, g2);
    cplx rhs = a * cup_product(z1, z2, g1, g2) + cup_product(z3, z2, g1, g2);
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * (1 + std::abs(lhs)));
    lhs = cup_product(z2, combine(a, z1, z3), g1, g2);
    rhs = a * cup_product(z2, z1, g1, g2) + cup_product(z2, z3, g1, g2);
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * (1 + std::abs(lhs)));
}

TEST(CupProduct, RankOne) {
    // trivial rank-1 coefficients: the product is z1(g1) z2(g2)
    EtaSetup s;
    auto z = cocycle_of(s.f, s.rho, s.G, {HPoint(0.0, 1.0), HPoint(0.5, 2.0)}).cocycle;
    Word g1{1}, g2{2, 3};
    cplx want = cocycle_value(z, g1)(0, 0) * cocycle_value(z, g2)(0, 0);
    EXPECT_LT(std::abs(cup_product(z, z, g1, g2) - want), 1e-14 * (1 + std::abs(want)));
}
