#ifndef W2P_PETERSSON_HPP
#define W2P_PETERSSON_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quadrature.hpp"
#include "series.hpp"

namespace w2p {

// ---------------------------------------------------------------------------
// Dedekind eta and the weight-2 newform of level 11

// q^{1/24} prod (1 - q^n), truncated once |q|^n is below tol.
inline cplx eta_product(cplx tau, double tol = 1e-16) {
    require(tau.imag() > 0, "point not in upper half-plane");
    double aq = std::exp(-2.0 * kPi * tau.imag());
    int N = static_cast<int>(std::ceil(std::log(tol * (1.0 - aq)) / std::log(aq)));
    if (!(N >= 1) || N > 200000) throw ValidationError("height too small for requested accuracy");
    cplx q = std::exp(2.0 * kPi * kI * tau);
    cplx p = 1.0, qn = 1.0;
    for (int n = 1; n <= N; ++n) {
        qn *= q;
        p *= 1.0 - qn;
    }
    return std::exp(2.0 * kPi * kI * tau / 24.0) * p;
}

// Reduces tau to the standard domain with eta(tau+1) = e^{pi i/12} eta(tau), eta(-1/tau) = sqrt(-i tau) eta(tau).
inline cplx dedekind_eta(cplx tau) {
    require(tau.imag() > 0, "point not in upper half-plane");
    cplx mult = 1.0;
    for (int it = 0; it < 10000; ++it) {
        double k = std::round(tau.real());
        if (k != 0.0) {
            tau -= k;
            mult *= std::exp(kI * (kPi * std::fmod(k, 24.0) / 12.0));
        }
        if (std::norm(tau) < 1.0 - 1e-14) {
            mult /= std::sqrt(-kI * tau);
            tau = -1.0 / tau;
        } else {
            return mult * eta_product(tau);
        }
    }
    throw ToleranceError("eta reduction did not terminate");
}

inline cplx eta_form_value(cplx tau) {
    cplx a = dedekind_eta(tau), b = dedekind_eta(11.0 * tau);
    return a * a * b * b;
}

// Direct product q prod (1-q^n)^2 (1-q^{11n})^2; fails when the height is too small.
inline cplx eta_form_direct(cplx tau, double tol = 1e-12) {
    return std::pow(eta_product(tau, tol), 2) * std::pow(eta_product(11.0 * tau, tol), 2);
}

inline VectorForm eta_form_evaluator() {
    return [](const HPoint& t) { return FormSample{CVector::Constant(1, eta_form_value(t.z())), 0.0}; };
}

// Integer coefficients of q^{offset} prod_n prod_k (1 - q^{m_k n})^{e_k} up to q^{k_max}.
inline std::vector<long long> eta_quotient_coeffs(const std::vector<std::pair<int, int>>& factors, int offset, int k_max) {
    std::vector<long long> c(k_max + 1, 0);
    if (offset > k_max) return c;
    std::vector<long long> p(k_max + 1, 0);
    p[0] = 1;
    for (auto [m, e] : factors) {
        require(e >= 0, "only nonnegative exponents supported");
        for (int n = 1; m * n <= k_max; ++n)
            for (int rep = 0; rep < e; ++rep)
                for (int k = k_max; k >= m * n; --k) p[k] -= p[k - m * n];
    }
    for (int k = offset; k <= k_max; ++k) c[k] = p[k - offset];
    return c;
}

// ---------------------------------------------------------------------------
// Quadrature over a union of translates of the standard modular domain

struct QuadratureResult {
    cplx value = 0.0;
    double error = 0.0;        // quadrature + cusp tail + propagated evaluation error
};

struct QuadratureOptions {
    double y_cut = 8.0;
    int order = 24;            // Gauss-Legendre points per panel
    int x_panels = 2;
    double prefactor = 1.0;    // measure normalization, see README
    double decay_kappa = 1.0;  // integrand ~ e^{-4 pi kappa y / width} near each cusp
};

namespace detail {

struct QuadPoint {
    int tile;
    HPoint tau;       // in F_std
    double weight;
};

inline std::vector<double> y_breaks(double lo, double ycut) {
    std::vector<double> b{lo};
    for (double v : {1.5, 3.0, 6.0, 12.0, 24.0, 48.0})
        if (v > lo + 1e-9 && v < ycut - 1e-9) b.push_back(v);
    b.push_back(ycut);
    return b;
}

inline std::vector<QuadPoint> fstd_points(int ntiles, const QuadratureOptions& o, int order) {
    std::vector<QuadPoint> pts;
    for (int p = 0; p < o.x_panels; ++p) {
        double xa = -0.5 + static_cast<double>(p) / o.x_panels, xb = -0.5 + static_cast<double>(p + 1) / o.x_panels;
        for (auto [x, wx] : gauss_panel(xa, xb, order)) {
            double lo = std::sqrt(1.0 - x * x);
            auto br = y_breaks(lo, o.y_cut);
            for (std::size_t k = 0; k + 1 < br.size(); ++k)
                for (auto [y, wy] : gauss_panel(br[k], br[k + 1], order))
                    for (int j = 0; j < ntiles; ++j) pts.push_back({j, HPoint(x, y), wx * wy});
        }
    }
    return pts;
}

}  // namespace detail

inline cplx pairing(const CVector& u, const CVector& v) { return (u.transpose() * v.conjugate())(0, 0); }

// Integral of <f1, f2> dx dy over the fundamental region sum_j g_j F_std, cut at height y_cut.
inline QuadratureResult petersson_quadrature(const VectorForm& f1, const VectorForm& f2, const GroupPresentation& G,
                                             const std::vector<Moebius>& tiles, const QuadratureOptions& o = {}) {
    require(G.is_modular() && !tiles.empty(), "no tiling available for this group");
    require(std::isfinite(o.y_cut) && o.y_cut > 1.0, "cusp cut height must be finite and > 1");
    require(o.order >= 4, "quadrature order too small");
    const int nt = static_cast<int>(tiles.size());
    std::vector<int> widths(nt);
    for (int j = 0; j < nt; ++j) widths[j] = tile_width(G, tiles[j]);

    auto integrate = [&](int order, double* prop_err) {
        auto pts = detail::fstd_points(nt, o, order);
        std::vector<cplx> val(pts.size());
        std::vector<double> err(pts.size());
        parallel_for(pts.size(), [&](std::size_t k) {
            const auto& p = pts[k];
            const Moebius& g = tiles[p.tile];
            HPoint w = g.apply(p.tau);
            double jac = std::norm(g.derivative(p.tau.z()));
            FormSample a = f1(w), b = f2(w);
            val[k] = p.weight * jac * pairing(a.value, b.value);
            err[k] = p.weight * jac * (a.error * b.value.norm() + b.error * a.value.norm() + a.error * b.error);
        });
        CompensatedC acc;
        Compensated e;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            acc.add(val[k]);
            e.add(err[k]);
        }
        if (prop_err) *prop_err = e.value();
        return acc.value();
    };
    double prop = 0.0;
    cplx hi = integrate(o.order, &prop);
    cplx lo = integrate(std::max(4, o.order - 6), nullptr);

    // cusp tail beyond y_cut: |integrand| at the cut times width / (4 pi kappa)
    double tail = 0.0;
    for (int j = 0; j < nt; ++j) {
        Compensated t;
        for (auto [x, wx] : gauss_panel(-0.5, 0.5, 16)) {
            HPoint tau(x, o.y_cut);
            HPoint w = tiles[j].apply(tau);
            double jac = std::norm(tiles[j].derivative(tau.z()));
            t.add(wx * jac * std::abs(pairing(f1(w).value, f2(w).value)));
        }
        tail += t.value() * widths[j] / (4.0 * kPi * o.decay_kappa);
    }
    QuadratureResult r;
    r.value = o.prefactor * hi;
    r.error = o.prefactor * (std::abs(hi - lo) + tail + prop);
    return r;
}

// ---------------------------------------------------------------------------
// Unfolding

// s > 0: Gamma(1+s) / (4 pi kappa)^{1+s} conj(a) = <P^s_I, f>;  s = 0: a = <f, P_I>.
inline cplx unfolding_pairing(const MultiIndex& I, const QExpansion& qe, double s) {
    require(s >= 0.0, "s must be nonnegative");
    require(qe.cusp == I.i - 1, "expansion taken at a different cusp");
    require(I.j >= 1 && I.j <= static_cast<int>(qe.W.size()), "coordinate out of range");
    require(std::abs(qe.W[I.j - 1] + I.l - I.kappa) < 1e-9, "expansion weights do not match the multi-index");
    require(I.l < static_cast<int>(qe.coeffs.size()), "expansion too short for the requested order");
    cplx a = qe.coeffs[I.l](I.j - 1);
    if (s == 0.0) return a;
    return std::tgamma(1.0 + s) / std::pow(4.0 * kPi * I.kappa, 1.0 + s) * std::conj(a);
}

// ---------------------------------------------------------------------------
// Gram matrices

struct GramMatrix {
    std::vector<MultiIndex> indices;
    CMatrix G;           // Hermitized
    CMatrix raw;         // before symmetrization
    RMatrix errors;      // per entry, including the asymmetry
    std::string method;
    double asymmetry = 0.0;   // ||raw - raw^*||_F
    double budget = 0.0;      // ||errors||_F

    Eigen::Index size() const { return G.rows(); }
};

struct GramParams {
    std::vector<double> ladder = default_ladder();
    double y0 = 1.0;
    int M = 16;
    QuadratureOptions quad{};
};

inline GramMatrix finish_gram(std::vector<MultiIndex> idx, const CMatrix& raw, const RMatrix& err, std::string method) {
    GramMatrix g;
    g.indices = std::move(idx);
    g.method = std::move(method);
    g.raw = raw;
    g.G = 0.5 * (raw + raw.adjoint());
    const auto n = raw.rows();
    g.errors = RMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            g.errors(a, b) = 0.5 * (err(a, b) + err(b, a)) + 0.5 * std::abs(raw(a, b) - std::conj(raw(b, a)));
    g.asymmetry = (raw - raw.adjoint()).norm();
    g.budget = g.errors.norm();
    return g;
}

inline GramMatrix gram(PoincareEngine& E, const std::vector<MultiIndex>& indices, const std::string& method,
                       const GramParams& p = {}) {
    const auto n = static_cast<Eigen::Index>(indices.size());
    CMatrix raw = CMatrix::Zero(n, n);
    RMatrix err = RMatrix::Zero(n, n);
    if (n == 0) return finish_gram(indices, raw, err, method);
    for (const auto& I : indices) require(I.kappa > 1e-12, "inadmissible multi-index");
    std::vector<std::shared_ptr<const SeriesKernel>> kernels;
    for (const auto& I : indices) kernels.push_back(std::make_shared<SeriesKernel>(E.kernel(I)));

    if (method == "unfolding") {
        std::map<int, int> kmax;   // cusp -> highest order needed
        for (const auto& J : indices) kmax[J.i - 1] = std::max(kmax[J.i - 1], J.l);
        for (Eigen::Index a = 0; a < n; ++a) {
            VectorForm f = limit_form(kernels[a], p.ladder);
            for (auto [cusp, km] : kmax) {
                int M = std::max(p.M, 2 * (km + 1) + 1);
                QExpansion q = qexp_coeffs(f, E.group(), E.weights(), cusp, km, p.y0, M);
                for (Eigen::Index b = 0; b < n; ++b) {
                    const MultiIndex& J = indices[b];
                    if (J.i - 1 != cusp) continue;
                    raw(a, b) = q.coeffs[J.l](J.j - 1);
                    err(a, b) = q.errors[J.l] + q.alias_estimate;
                }
            }
        }
        return finish_gram(indices, raw, err, method);
    }
    if (method == "quadrature") {
        require(E.group().is_modular(), "method unavailable: no tiling for this group");
        auto tiles = tiling(E.group());
        double kmin = 1e300;
        for (const auto& I : indices) kmin = std::min(kmin, I.kappa);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = a; b < n; ++b) {
                QuadratureOptions qo = p.quad;
                qo.decay_kappa = kmin;
                auto r = petersson_quadrature(limit_form(kernels[a], p.ladder), limit_form(kernels[b], p.ladder),
                                              E.group(), tiles, qo);
                raw(a, b) = r.value;
                raw(b, a) = std::conj(r.value);
                err(a, b) = err(b, a) = r.error;
            }
        }
        return finish_gram(indices, raw, err, method);
    }
    throw ValidationError("unknown Gram method '" + method + "'");
}

inline int rank(const GramMatrix& g, double tol = 1e-6) {
    require(tol > 0.0, "rank tolerance must be positive");
    if (g.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(g.G);
    const auto& sv = svd.singularValues();
    double thr = std::max(tol * sv(0), g.budget);
    int r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) r += sv(k) > thr ? 1 : 0;
    return r;
}

inline double smallest_eigenvalue(const GramMatrix& g) {
    if (g.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g.G);
    return es.eigenvalues()(0);
}

struct RelationCheck {
    bool is_relation = false;
    double residual = 0.0;
    double tolerance = 0.0;
};

// sum_I lambda_I P_I = 0 iff sum_I conj(lambda_I) (column I) = 0.
inline RelationCheck linear_relation_check(const GramMatrix& g, const CVector& lambda) {
    require(lambda.size() == g.size(), "coefficient count does not match the index list");
    RelationCheck rc;
    rc.residual = (g.G * lambda.conjugate()).norm();
    rc.tolerance = g.budget * lambda.norm();
    rc.is_relation = rc.residual <= rc.tolerance;
    return rc;
}

}  // namespace w2p

#endif
