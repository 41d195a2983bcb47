#ifndef W2P_EICHLER_HPP
#define W2P_EICHLER_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "quadrature.hpp"
#include "repdata.hpp"
#include "series.hpp"

namespace w2p {

using MatrixForm = std::function<CMatrix(const HPoint&)>;

// Reshapes a vector-valued form of length r^2 (column-major) into r x r matrices.
inline MatrixForm matrix_form(VectorForm f, int r) {
    return [f = std::move(f), r](const HPoint& t) {
        CVector v = f(t).value;
        require(v.size() == static_cast<Eigen::Index>(r) * r, "form length is not rank^2");
        return CMatrix(Eigen::Map<const CMatrix>(v.data(), r, r));
    };
}

// Column-vector valued view of a vector form.
inline MatrixForm column_form(VectorForm f) {
    return [f = std::move(f)](const HPoint& t) { return CMatrix(f(t).value); };
}

struct IntegralResult {
    CMatrix value;
    double error = 0.0;
    int panels = 0;
};

// Integral of f along the straight segment [t0, t1], adaptive composite Gauss-Legendre.
inline IntegralResult eichler_integral(const MatrixForm& f, const HPoint& t0, const HPoint& t1, double tol = 1e-11,
                                       int max_panels = 1 << 15) {
    const cplx a = t0.z(), dz = t1.z() - t0.z();
    constexpr int order = 20;
    const GaussRule& g = gauss_legendre(order);
    auto panel = [&](double lo, double hi) {
        CMatrix acc;
        double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
        for (int k = 0; k < order; ++k) {
            double u = m + h * g.x[k];
            CMatrix v = f(HPoint(a + u * dz)) * (g.w[k] * h);
            if (k == 0) acc = v;
            else acc += v;
        }
        return CMatrix(acc * dz);
    };
    IntegralResult res;
    CMatrix probe = f(t0);
    res.value = CMatrix::Zero(probe.rows(), probe.cols());
    if (std::abs(dz) == 0.0) return res;
    struct Seg {
        double lo, hi;
        CMatrix whole;
    };
    std::vector<Seg> stack{{0.0, 1.0, panel(0.0, 1.0)}};
    int panels = 1;
    std::vector<std::pair<double, CMatrix>> done;   // ordered by lo for deterministic summation
    while (!stack.empty()) {
        Seg s = std::move(stack.back());
        stack.pop_back();
        double mid = 0.5 * (s.lo + s.hi);
        CMatrix left = panel(s.lo, mid), right = panel(mid, s.hi);
        panels += 2;
        double diff = (left + right - s.whole).norm();
        double allowed = tol * (s.hi - s.lo);
        if (diff <= allowed || s.hi - s.lo < 1e-12) {
            done.emplace_back(s.lo, left + right);
            res.error += diff;
            continue;
        }
        if (panels > max_panels) throw ToleranceError("requested integration tolerance unattainable within the panel budget");
        stack.push_back({mid, s.hi, std::move(right)});
        stack.push_back({s.lo, mid, std::move(left)});
    }
    std::sort(done.begin(), done.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [lo, v] : done) res.value += v;
    res.panels = panels;
    return res;
}

// ---------------------------------------------------------------------------

enum class CocycleAction { Adjoint, Left };

struct ParabolicCocycle {
    int rank = 1;
    CocycleAction action = CocycleAction::Adjoint;
    UnitaryRep rho;
    std::vector<std::string> names;
    std::vector<CMatrix> values;    // z(generator k)
};

inline CMatrix act(CocycleAction a, const CMatrix& g, const CMatrix& x) {
    return a == CocycleAction::Adjoint ? CMatrix(g * x * g.adjoint()) : CMatrix(g * x);
}

// z on a word by left-to-right folding of z(xy) = z(x) + g(x) z(y).
inline CMatrix cocycle_value(const ParabolicCocycle& z, const Word& w) {
    const CMatrix& z0 = z.values.at(0);
    CMatrix acc = CMatrix::Zero(z0.rows(), z0.cols());
    CMatrix P = CMatrix::Identity(z.rank, z.rank);
    for (int s : w) {
        int k = std::abs(s) - 1;
        require(k >= 0 && k < static_cast<int>(z.values.size()), "word letter out of range");
        CMatrix zx = s > 0 ? z.values[k] : CMatrix(-act(z.action, z.rho.image(s), z.values[k]));
        acc += act(z.action, P, zx);
        P = P * z.rho.image(s);
    }
    return acc;
}

struct CocycleResult {
    ParabolicCocycle cocycle;
    double probe_deviation = 0.0;   // max over generators and extra probes
    double integration_error = 0.0;
};

// z(g) = E(g p) - g.E(p) with E based at the first probe.
inline CocycleResult cocycle_of(const MatrixForm& f, const UnitaryRep& rho, const GroupPresentation& G,
                                const std::vector<HPoint>& probes, CocycleAction action = CocycleAction::Adjoint,
                                double int_tol = 1e-11, double check_tol = 1e-6) {
    require(!probes.empty(), "need at least one probe point");
    require(static_cast<int>(rho.images.size()) == G.num_gens(), "representation does not match the group");
    CocycleResult out;
    ParabolicCocycle& z = out.cocycle;
    z.rank = rho.rank;
    z.action = action;
    z.rho = rho;
    z.names = G.gen_names;
    const HPoint base = probes[0];
    auto E = [&](const HPoint& t) {
        auto r = eichler_integral(f, base, t, int_tol);
        out.integration_error = std::max(out.integration_error, r.error);
        return r.value;
    };
    std::vector<CMatrix> Ep;
    for (const auto& p : probes) Ep.push_back(E(p));
    for (int k = 0; k < G.num_gens(); ++k) {
        const Moebius& g = G.gens[k];
        const CMatrix& rg = rho.images[k];
        CMatrix z0;
        for (std::size_t q = 0; q < probes.size(); ++q) {
            CMatrix v = E(g.apply(probes[q])) - act(action, rg, Ep[q]);
            if (q == 0) z0 = v;
            else out.probe_deviation = std::max(out.probe_deviation, (v - z0).norm());
        }
        z.values.push_back(z0);
    }
    if (out.probe_deviation > check_tol)
        throw ToleranceError("cocycle depends on the probe point (form not automorphic?)");
    return out;
}

inline double cocycle_relation_residual(const ParabolicCocycle& z, const GroupPresentation& G) {
    double r = 0.0;
    for (const auto& w : G.relations()) r = std::max(r, cocycle_value(z, w).norm());
    return r;
}

inline ParabolicCocycle shimura_map(const ParabolicCocycle& z) {
    require(z.action == CocycleAction::Adjoint, "Shimura map needs an adjoint cocycle");
    ParabolicCocycle out = z;
    for (auto& v : out.values) v = (0.5 * (v - v.adjoint())).eval();
    return out;
}

inline cplx cup_product(const ParabolicCocycle& z1, const ParabolicCocycle& z2, const Word& g1, const Word& g2) {
    require(z1.rank == z2.rank, "cocycles have different ranks");
    require(z1.action == CocycleAction::Adjoint && z2.action == CocycleAction::Adjoint, "cup product needs adjoint cocycles");
    CMatrix a = cocycle_value(z1, g1);
    CMatrix b = cocycle_value(z2, g2);
    CMatrix r1 = z1.rho.eval(g1);
    return (a * act(CocycleAction::Adjoint, r1, b)).trace();
}

// Least-squares residual of z(T_i) = g(T_i) w - w for each cusp.
inline std::vector<double> parabolicity_residual(const ParabolicCocycle& z, const GroupPresentation& G) {
    std::vector<double> out;
    for (int i = 0; i < G.signature.n; ++i) {
        int k = G.parabolic_gen(i);
        const CMatrix& g = z.rho.images[k];
        const CMatrix& v = z.values[k];
        CMatrix A;
        if (z.action == CocycleAction::Adjoint) A = ad_matrix(g) - CMatrix::Identity(g.size(), g.size());
        else A = g - CMatrix::Identity(g.rows(), g.cols());
        CVector rhs = Eigen::Map<const CVector>(v.data(), v.size());
        CVector w = A.completeOrthogonalDecomposition().solve(rhs);
        out.push_back((A * w - rhs).norm());
    }
    return out;
}

}  // namespace w2p

#endif
