#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <w2p/fuchsian.hpp>

using namespace w2p;

namespace {

std::pair<long long, long long> canonical_row(double c, double d) {
    long long ci = std::llround(c), di = std::llround(d);
    if (ci < 0 || (ci == 0 && di < 0)) { ci = -ci; di = -di; }
    return {ci, di};
}

}  // namespace

TEST(Signature, Hyperbolicity) {
    EXPECT_NO_THROW((Signature{0, {2, 3}, 1}.validate()));
    EXPECT_THROW((Signature{0, {}, 2}.validate()), ValidationError);
    EXPECT_THROW((Signature{1, {}, 0}.validate()), ValidationError);
    EXPECT_THROW((Signature{0, {2, 2}, 1}.validate()), ValidationError);
    EXPECT_NEAR((Signature{0, {2, 3}, 1}.euler_area()), 1.0 / 6.0, 1e-15);
}

TEST(BuiltinGroup, Signatures) {
    struct Case {
        const char* name;
        Signature sig;
    };
    for (const auto& c : {Case{"PSL2Z", {0, {2, 3}, 1}}, Case{"Gamma2", {0, {}, 3}}, Case{"Gamma0_4", {0, {}, 3}},
                          Case{"Gamma0_11", {1, {}, 2}}, Case{"Gamma4", {0, {}, 6}}}) {
        GroupPresentation G = builtin_group(c.name);
        EXPECT_EQ(G.signature.g, c.sig.g) << c.name;
        EXPECT_EQ(G.signature.nu, c.sig.nu) << c.name;
        EXPECT_EQ(G.signature.n, c.sig.n) << c.name;
    }
    EXPECT_THROW(builtin_group("gamma7"), ValidationError);
    EXPECT_NO_THROW(builtin_group("gamma0_11"));
}

TEST(BuiltinGroup, PresentationInvariants) {
    for (const auto& name : builtin_group_names()) {
        GroupPresentation G = builtin_group(name);
        EXPECT_TRUE(G.eval(G.long_relation()).approx_equal(Moebius::identity(), 1e-10)) << name;
        for (int j = 0; j < G.signature.m(); ++j) {
            Moebius p = Moebius::identity();
            for (int k = 0; k < G.signature.nu[j]; ++k) p = p * G.gens[G.elliptic_gen(j)];
            EXPECT_TRUE(p.approx_equal(Moebius::identity(), 1e-10)) << name;
            // phi conjugates S to a rotation about i
            Moebius rot = G.elliptic[j].phi.inverse() * G.gens[G.elliptic_gen(j)] * G.elliptic[j].phi;
            EXPECT_LE(std::abs(rot.apply(HPoint(0, 1)).z() - cplx(0, 1)), 1e-12) << name;
        }
        for (int i = 0; i < G.signature.n; ++i) {
            Moebius sg = G.cusps[i].sigma();
            Moebius c = sg.inverse() * G.gens[G.parabolic_gen(i)] * sg;
            EXPECT_TRUE(c.approx_equal(Moebius(1, G.cusps[i].sign, 0, 1), 1e-10)) << name << " cusp " << i;
        }
    }
}

TEST(BuiltinGroup, Gamma2Generators) {
    GroupPresentation G = builtin_group("gamma2");
    auto matches = [](const Moebius& g, const Moebius& want) {
        return g.approx_equal(want) || g.inverse().approx_equal(want);
    };
    EXPECT_TRUE(matches(G.gens[0], Moebius(1, 2, 0, 1)));
    EXPECT_TRUE(matches(G.gens[1], Moebius(1, 0, 2, 1)));
    EXPECT_TRUE(G.cusps[0].at_infinity);
    EXPECT_NEAR(G.cusps[1].point, 0.0, 1e-14);
    // the third cusp sits at -1, which is the cusp 1 up to the translation by 2
    EXPECT_NEAR(G.cusps[2].point, -1.0, 1e-14);
    EXPECT_TRUE(G.contains(Moebius(1, 2, 0, 1)));
}

TEST(BuiltinGroup, PSL2ZStandardGenerators) {
    GroupPresentation G = builtin_group("psl2z");
    Moebius S(0, -1, 1, 0), T(1, 1, 0, 1);
    EXPECT_TRUE((S * S).approx_equal(Moebius::identity()));
    EXPECT_TRUE((S * T * S * T * S * T).approx_equal(Moebius::identity()));
    EXPECT_EQ(G.elliptic[0].order, 2);
    EXPECT_EQ(G.elliptic[1].order, 3);
}

TEST(BuiltinGroup, Membership) {
    GroupPresentation G = builtin_group("gamma0_11");
    EXPECT_TRUE(G.contains(Moebius(1, 0, 11, 1)));
    EXPECT_FALSE(G.contains(Moebius(1, 0, 1, 1)));
    for (const auto& g : G.gens) EXPECT_TRUE(G.contains(g));
    GroupPresentation H = builtin_group("gamma2");
    EXPECT_TRUE(H.contains(Moebius(3, 2, 4, 3)));
    EXPECT_FALSE(H.contains(Moebius(1, 1, 0, 1)));
}

TEST(CosetReps, PSL2ZSmallRadius) {
    GroupPresentation G = builtin_group("psl2z");
    CosetTable T = coset_reps(G, 0, std::sqrt(2.0));
    std::set<std::pair<long long, long long>> rows;
    for (const auto& e : T.entries) rows.insert(canonical_row(e.scaled.c, e.scaled.d));
    std::set<std::pair<long long, long long>> want{{0, 1}, {1, 0}, {1, 1}, {1, -1}};
    EXPECT_EQ(T.size(), 4u);
    EXPECT_EQ(rows, want);
}

TEST(CosetReps, ContainsIdentityCoset) {
    CosetTable P = coset_reps(builtin_group("psl2z"), 0, 1.0);
    ASSERT_GE(P.size(), 1u);
    EXPECT_EQ(P.entries[0].scaled.c, 0.0);
    EXPECT_NEAR(std::abs(P.entries[0].scaled.d), 1.0, 1e-15);
    for (const auto& name : builtin_group_names()) {
        GroupPresentation G = builtin_group(name);
        // cusp 1 is infinity; its scaling map stretches by the width
        ASSERT_TRUE(G.cusps[0].at_infinity);
        CosetTable T = coset_reps(G, 0, std::sqrt(G.cusps[0].width));
        ASSERT_GE(T.size(), 1u) << name;
        EXPECT_EQ(T.entries[0].node, 0) << name;
        EXPECT_NEAR(T.entries[0].scaled.c, 0.0, 1e-15) << name;
        EXPECT_THROW(coset_reps(G, 0, 0.5), ValidationError);
    }
}

TEST(CosetReps, MatchesExactEnumeration) {
    for (const auto& name : builtin_group_names()) {
        GroupPresentation G = builtin_group(name);
        for (int i = 0; i < G.signature.n; ++i) {
            const double R = 30.0;
            CosetTable T = coset_reps(G, i, R);
            std::set<std::pair<long long, long long>> bfs, exact;
            const double sw = std::sqrt(G.cusps[i].width);
            for (const auto& e : T.entries) {
                Moebius b = G.cusps[i].base.inverse() * representative(G, T, e);
                bfs.insert(canonical_row(b.c, b.d));
            }
            for_each_modular_row(G, i, R, [&](double c, double d) { exact.insert(canonical_row(c / sw, d / sw)); });
            EXPECT_EQ(bfs.size(), T.size()) << name << ": duplicate rows";
            EXPECT_EQ(bfs, exact) << name << " cusp " << i;
        }
    }
}

TEST(CosetReps, EntriesAreDistinctCosetsAndInGroup) {
    GroupPresentation G = builtin_group("gamma2");
    CosetTable T = coset_reps(G, 1, 12.0);
    std::vector<Moebius> reps;
    for (const auto& e : T.entries) reps.push_back(representative(G, T, e));
    Moebius si = G.cusps[1].sigma().inverse(), s = G.cusps[1].sigma();
    for (std::size_t a = 0; a < reps.size(); ++a) {
        EXPECT_TRUE(G.contains(reps[a]));
        EXPECT_TRUE(G.eval(node_word(T, T.entries[a].node)).approx_equal(T.nodes[T.entries[a].node].gamma, 1e-8));
        for (std::size_t b = a + 1; b < reps.size(); ++b) {
            Moebius x = si * reps[a] * reps[b].inverse() * s;
            EXPECT_FALSE(std::abs(x.c) < 1e-9 && std::abs(std::abs(x.a) - 1) < 1e-9);
        }
    }
}

TEST(CosetReps, ImaginaryPartFromBottomRow) {
    GroupPresentation G = builtin_group("gamma0_11");
    CosetTable T = coset_reps(G, 1, 25.0);
    HPoint t(0.2, 0.8);
    Moebius si = G.cusps[1].sigma().inverse();
    for (const auto& e : T.entries) {
        Moebius g = si * representative(G, T, e);
        double direct = g.apply(t).y;
        double rowwise = t.y / std::norm(e.scaled.c * t.z() + e.scaled.d);
        EXPECT_NEAR(direct, rowwise, 1e-12 * std::max(1.0, direct));
        EXPECT_NEAR(e.norm2, e.scaled.c * e.scaled.c + e.scaled.d * e.scaled.d, 1e-9 * e.norm2);
    }
}

TEST(CosetReps, QuadraticGrowth) {
    GroupPresentation G = builtin_group("gamma2");
    std::vector<double> lr, lc;
    for (double R : {5.0, 10.0, 20.0, 40.0}) {
        lr.push_back(std::log(R));
        lc.push_back(std::log(static_cast<double>(coset_reps(G, 0, R).size())));
    }
    double n = 4, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 4; ++k) {
        sx += lr[k]; sy += lc[k]; sxx += lr[k] * lr[k]; sxy += lr[k] * lc[k];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(slope, 2.0, 0.15);
}

TEST(CosetReps, ReselectKeepsCosets) {
    GroupPresentation G = builtin_group("gamma2");
    CosetTable T = coset_reps(G, 0, 20.0);
    CosetTable U = reselect(G, T, 99);
    ASSERT_EQ(T.size(), U.size());
    Moebius si = G.cusps[0].sigma().inverse(), s = G.cusps[0].sigma();
    for (std::size_t k = 0; k < T.size(); ++k) {
        Moebius x = si * representative(G, U, U.entries[k]) * representative(G, T, T.entries[k]).inverse() * s;
        EXPECT_NEAR(std::abs(x.c), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(x.b - std::round(x.b)), 0.0, 1e-9);
    }
}

TEST(Tiling, IndexInModularGroup) {
    EXPECT_EQ(tiling(builtin_group("psl2z")).size(), 1u);
    EXPECT_EQ(tiling(builtin_group("gamma2")).size(), 6u);
    EXPECT_EQ(tiling(builtin_group("gamma0_4")).size(), 6u);
    EXPECT_EQ(tiling(builtin_group("gamma0_11")).size(), 12u);
    EXPECT_EQ(tiling(builtin_group("gamma4")).size(), 24u);
}

TEST(Tiling, TranslatesAreInequivalent) {
    GroupPresentation G = builtin_group("gamma0_11");
    auto t = tiling(G);
    for (std::size_t a = 0; a < t.size(); ++a)
        for (std::size_t b = a + 1; b < t.size(); ++b) EXPECT_FALSE(G.contains(t[a] * t[b].inverse()));
    std::set<int> widths;
    for (const auto& g : t) widths.insert(tile_width(G, g));
    EXPECT_EQ(widths, (std::set<int>{1, 11}));
}

TEST(Tiling, NeedsModularGroup) {
    GroupPresentation G = make_group("custom", {0, {}, 3}, {Moebius(1, -2, 0, 1), Moebius(1, 0, 2, 1), Moebius(1, 2, -2, -3)});
    EXPECT_THROW(tiling(G), ValidationError);
    // coset enumeration still works without membership data
    EXPECT_EQ(coset_reps(G, 0, 15.0).size(), coset_reps(builtin_group("gamma2"), 0, 15.0).size());
}
