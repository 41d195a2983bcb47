#ifndef W2P_SERIES_HPP
#define W2P_SERIES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <memory>
#include <vector>

#include "fuchsian.hpp"
#include "linalg.hpp"
#include "repdata.hpp"
#include "summation.hpp"

namespace w2p {

// Cusp i and coordinate j are 1-based; kappa = alpha_ij + l with alpha from the expansion datum.
struct MultiIndex {
    int i = 1;
    int j = 1;
    int l = 0;
    double kappa = 0.0;
};

inline MultiIndex make_index(const WeightSystem& ws, int i, int j, int l) {
    require(i >= 1 && i <= ws.n_cusps(), "cusp index out of range");
    require(j >= 1 && j <= ws.rank, "coordinate index out of range");
    require(l >= 0, "Fourier order must be nonnegative");
    double alpha = ws.cusp(i - 1).expansion.W[j - 1];
    MultiIndex I{i, j, l, alpha + l};
    require(I.kappa > 1e-12, "inadmissible multi-index");
    return I;
}

struct SeriesValue {
    CVector value;
    double s = 0.0;
    double R = 0.0;
    double tail_bound = 0.0;
    double truncation_estimate = 0.0;   // observed |S_R - S_{R/2}|
    std::size_t terms = 0;
};

// Imaginary part of g tau, accurate for any bottom row.
inline double im_after(const Moebius& g, cplx t) { return t.imag() / std::norm(g.c * t + g.d); }

// Smallest eigenvalue of the form (c,d) -> |c tau + d|^2.
inline double form_min_eig(const HPoint& t) {
    double a = t.x * t.x + t.y * t.y, b = t.x, d = 1.0;
    double tr = a + d, det = a * d - b * b;
    return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
}

// Eisenstein majorant tail sum_{norm > R} Im(g tau)^{1+s} ~ (A/s)(y/lambda)^{1+s} R^{-2s}.
inline double eisenstein_tail(double A, const HPoint& t, double s, double R) {
    double lam = form_min_eig(t);
    return (A / s) * std::pow(t.y / lam, 1.0 + s) * std::pow(R, -2.0 * s);
}

// ---------------------------------------------------------------------------

inline SeriesValue eisenstein(const CosetTable& T, const HPoint& t, double s) {
    require(s > 0.0, "inadmissible s (must be > 0)");
    std::vector<Compensated> part((T.size() + kChunk - 1) / kChunk);
    for_each_chunk(T.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
        Compensated acc;
        for (std::size_t k = b; k < e; ++k) acc.add(std::pow(im_after(T.entries[k].scaled, t.z()), 1.0 + s));
        part[c] = acc;
    });
    Compensated tot;
    for (auto& p : part) tot.add(p.value());
    SeriesValue v;
    v.value = CVector::Constant(1, tot.value());
    v.s = s;
    v.R = T.R;
    v.tail_bound = eisenstein_tail(T.count_constant(), t, s, T.R);
    v.terms = T.size();
    return v;
}

// Streaming evaluation over exact coset rows (modular subgroups), so large R needs no table.
inline SeriesValue eisenstein(const GroupPresentation& G, int i, const HPoint& t, double s, double R) {
    require(s > 0.0, "inadmissible s (must be > 0)");
    require(R >= 1.0, "norm bound R must be >= 1");
    if (!(G.is_modular() && G.integral)) return eisenstein(coset_reps(G, i, R), t, s);
    Compensated acc;
    std::size_t n = 0, nh = 0;
    const double h2 = 0.25 * R * R * (1 + 1e-12);
    for_each_modular_row(G, i, R, [&](double c, double d) {
        acc.add(std::pow(t.y / std::norm(c * t.z() + d), 1.0 + s));
        ++n;
        if (c * c + d * d <= h2) ++nh;
    });
    double A = std::max(static_cast<double>(n) / (R * R), static_cast<double>(nh) / (0.25 * R * R));
    SeriesValue v;
    v.value = CVector::Constant(1, acc.value());
    v.s = s;
    v.R = R;
    v.tail_bound = eisenstein_tail(A, t, s, R);
    v.terms = n;
    return v;
}

// ---------------------------------------------------------------------------
// Poincare series engine

// Precomputed terms of P^s_I / Q^s_I for one coset table: sigma_i^-1 gamma and rho(gamma)^-1 U_i e_j.
struct SeriesKernel {
    MultiIndex index;
    int rank = 1;
    double R = 1.0;
    double count_constant = 0.0;
    std::size_t half = 0;
    std::vector<Moebius> g;
    std::vector<double> norm2;
    std::vector<cplx> vec;     // rank entries per term
    std::size_t size() const { return g.size(); }
};

inline SeriesKernel make_kernel(const GroupPresentation& G, const UnitaryRep& rho, const WeightSystem& ws,
                                const MultiIndex& I, const CosetTable& T) {
    require(T.cusp == I.i - 1, "coset table is for a different cusp");
    require(ws.rank == rho.rank, "weight system rank mismatch");
    const int r = rho.rank;
    const PointWeights& pw = ws.cusp(I.i - 1);
    const CVector u = pw.expansion.U.col(I.j - 1);
    const double alpha = pw.expansion.W[I.j - 1];

    // rho(gamma)^-1 u along the BFS tree: gamma = parent * x  =>  rho(gamma)^-1 = rho(x)^-1 rho(parent)^-1
    std::vector<CMatrix> inv_img(2 * G.num_gens() + 1);
    for (int k = 1; k <= G.num_gens(); ++k) {
        inv_img[G.num_gens() + k] = rho.image(k).adjoint();
        inv_img[G.num_gens() - k] = rho.image(-k).adjoint();
    }
    std::vector<cplx> nodev(T.nodes.size() * r);
    for (int c = 0; c < r; ++c) nodev[c] = u(c);
    for (std::size_t k = 1; k < T.nodes.size(); ++k) {
        const CMatrix& m = inv_img[G.num_gens() + T.nodes[k].step];
        const cplx* pv = &nodev[static_cast<std::size_t>(T.nodes[k].parent) * r];
        cplx* out = &nodev[k * r];
        for (int a = 0; a < r; ++a) {
            cplx acc = 0;
            for (int b = 0; b < r; ++b) acc += m(a, b) * pv[b];
            out[a] = acc;
        }
    }
    SeriesKernel K;
    K.index = I;
    K.rank = r;
    K.R = T.R;
    K.count_constant = T.count_constant();
    K.half = T.half;
    K.g.reserve(T.size());
    K.norm2.reserve(T.size());
    K.vec.resize(T.size() * r);
    for (std::size_t t = 0; t < T.size(); ++t) {
        const CosetEntry& e = T.entries[t];
        K.g.push_back(e.scaled);
        K.norm2.push_back(e.norm2);
        // rho(T^k gamma)^-1 u = rho(gamma)^-1 e^{-2 pi i k alpha} u since u is an eigenvector.
        cplx ph = e.lead == 0 ? cplx(1.0) : std::polar(1.0, -2.0 * kPi * e.lead * alpha);
        for (int c = 0; c < r; ++c) K.vec[t * r + c] = ph * nodev[static_cast<std::size_t>(e.node) * r + c];
    }
    return K;
}

enum class SeriesKind { P, Q };

struct LadderSums {
    std::vector<CVector> full;    // per s
    std::vector<CVector> half;    // partial sums over norm <= R/2
    double skipped = 0.0;         // bound on the terms dropped for exponential smallness (at the largest s)
};

inline LadderSums evaluate_ladder(const SeriesKernel& K, const HPoint& tau, const std::vector<double>& s_list,
                                  SeriesKind kind) {
    const std::size_t ns = s_list.size();
    const int r = K.rank;
    const double kappa = K.index.kappa;
    const double skip_im = 50.0 / kappa;
    const cplx t = tau.z();
    const std::size_t nchunks = (K.size() + kChunk - 1) / kChunk;
    struct Part {
        std::vector<CompensatedC> lo, hi;
        double skipped = 0.0;
    };
    std::vector<Part> parts(nchunks);
    for_each_chunk(K.size(), [&](std::size_t ci, std::size_t b, std::size_t e) {
        Part p;
        p.lo.resize(ns * r);
        p.hi.resize(ns * r);
        std::vector<cplx> coef(ns);
        for (std::size_t k = b; k < e; ++k) {
            const Moebius& g = K.g[k];
            cplx den = g.c * t + g.d;
            double aden = std::norm(den);
            double im = tau.y / aden;
            if (im > skip_im) {
                double mx = 0;
                for (double s : s_list) mx = std::max(mx, std::pow(im, s));
                p.skipped += (kind == SeriesKind::P ? 1.0 / aden : 1.0 / (aden * aden * im)) * mx *
                             std::exp(-2.0 * kPi * kappa * im);
                continue;
            }
            cplx w = (g.a * t + g.b) / den;
            cplx phase = std::exp(cplx(-2.0 * kPi * kappa * im, 2.0 * kPi * kappa * w.real()));
            cplx base;
            double lim = std::log(im);
            if (kind == SeriesKind::P) {
                base = phase / (den * den);
            } else {
                base = phase / (aden * aden * im);
            }
            for (std::size_t q = 0; q < ns; ++q) coef[q] = base * std::exp(s_list[q] * lim);
            auto& acc = k < K.half ? p.lo : p.hi;
            const cplx* v = &K.vec[k * r];
            for (std::size_t q = 0; q < ns; ++q)
                for (int c = 0; c < r; ++c) acc[q * r + c].add(coef[q] * v[c]);
        }
        parts[ci] = std::move(p);
    });
    LadderSums out;
    out.full.assign(ns, CVector::Zero(r));
    out.half.assign(ns, CVector::Zero(r));
    std::vector<CompensatedC> lo(ns * r), all(ns * r);
    for (const auto& p : parts) {
        for (std::size_t k = 0; k < ns * static_cast<std::size_t>(r); ++k) {
            lo[k].add(p.lo[k].value());
            all[k].add(p.lo[k].value());
            all[k].add(p.hi[k].value());
        }
        out.skipped += p.skipped;
    }
    for (std::size_t q = 0; q < ns; ++q)
        for (int c = 0; c < r; ++c) {
            out.half[q](c) = lo[q * r + c].value();
            out.full[q](c) = all[q * r + c].value();
        }
    return out;
}

inline double majorant_tail(const SeriesKernel& K, const HPoint& tau, double s, SeriesKind kind) {
    double e = eisenstein_tail(K.count_constant, tau, s, K.R);
    return kind == SeriesKind::P ? e / tau.y : e / (tau.y * tau.y);
}

inline SeriesValue series_s(const SeriesKernel& K, const HPoint& tau, double s, SeriesKind kind) {
    require(s > 0.0, "inadmissible s (must be > 0)");
    LadderSums L = evaluate_ladder(K, tau, {s}, kind);
    SeriesValue v;
    v.value = L.full[0];
    v.s = s;
    v.R = K.R;
    v.tail_bound = majorant_tail(K, tau, s, kind) + L.skipped;
    v.truncation_estimate = (L.full[0] - L.half[0]).norm();
    v.terms = K.size();
    return v;
}

// Convenience engine bundling the group, representation and per-cusp tables.
class PoincareEngine {
public:
    PoincareEngine(GroupPresentation G, UnitaryRep rho, double R, std::optional<double> margin = std::nullopt)
        : G_(std::move(G)), rho_(std::move(rho)), R_(R), margin_(margin) {
        ws_ = weight_system(G_, rho_);
        tables_.resize(G_.signature.n);
    }

    const GroupPresentation& group() const { return G_; }
    const UnitaryRep& rep() const { return rho_; }
    const WeightSystem& weights() const { return ws_; }
    double R() const { return R_; }

    MultiIndex index(int i, int j, int l) const { return make_index(ws_, i, j, l); }

    const CosetTable& table(int cusp) {
        auto& p = tables_.at(cusp);
        if (!p) p = std::make_shared<CosetTable>(coset_reps(G_, cusp, R_, margin_));
        return *p;
    }

    void set_table(int cusp, CosetTable T) { tables_.at(cusp) = std::make_shared<CosetTable>(std::move(T)); }

    SeriesKernel kernel(const MultiIndex& I) { return make_kernel(G_, rho_, ws_, I, table(I.i - 1)); }

private:
    GroupPresentation G_;
    UnitaryRep rho_;
    WeightSystem ws_;
    double R_;
    std::optional<double> margin_;
    std::vector<std::shared_ptr<CosetTable>> tables_;
};

inline SeriesValue poincare_s(const SeriesKernel& K, const HPoint& tau, double s) {
    return series_s(K, tau, s, SeriesKind::P);
}
inline SeriesValue q_series_s(const SeriesKernel& K, const HPoint& tau, double s) {
    return series_s(K, tau, s, SeriesKind::Q);
}

// |dbar P^s + (s / 2i) Q^s| with dbar by central differences.
inline double dbar_residual(const SeriesKernel& K, const HPoint& tau, double s, double h) {
    require(s > 0.0, "inadmissible s (must be > 0)");
    require(h > 0.0 && h < tau.y / 10.0, "finite-difference step too large");
    auto P = [&](double dx, double dy) {
        return evaluate_ladder(K, HPoint(tau.x + dx, tau.y + dy), {s}, SeriesKind::P).full[0];
    };
    CVector dx = (P(h, 0) - P(-h, 0)) / (2.0 * h);
    CVector dy = (P(0, h) - P(0, -h)) / (2.0 * h);
    CVector dbar = 0.5 * (dx + kI * dy);
    CVector q = evaluate_ladder(K, tau, {s}, SeriesKind::Q).full[0];
    return (dbar + (s / (2.0 * kI)) * q).norm();
}

// ---------------------------------------------------------------------------
// s -> 0 extrapolation

inline void validate_ladder(const std::vector<double>& ladder) {
    require(ladder.size() >= 3, "s ladder needs at least 3 values");
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        require(ladder[k] > 0.0, "s ladder values must be positive");
        if (k > 0) require(ladder[k] < ladder[k - 1], "s ladder must be strictly decreasing");
    }
}

// Lagrange weights for evaluating the interpolant through nodes at 0.
inline std::vector<double> extrapolation_weights(const std::vector<double>& nodes) {
    std::vector<double> w(nodes.size(), 1.0);
    for (std::size_t k = 0; k < nodes.size(); ++k)
        for (std::size_t m = 0; m < nodes.size(); ++m)
            if (m != k) w[k] *= (0.0 - nodes[m]) / (nodes[k] - nodes[m]);
    return w;
}

template <class V>
V extrapolate(const std::vector<double>& nodes, const std::vector<V>& vals, std::size_t count) {
    std::vector<double> sub(nodes.begin(), nodes.begin() + static_cast<long>(count));
    auto w = extrapolation_weights(sub);
    V out = w[0] * vals[0];
    for (std::size_t k = 1; k < count; ++k) out = out + w[k] * vals[k];
    return out;
}

// Extrapolants using the first 2, 3, ..., n ladder values.
inline std::vector<CVector> extrapolant_sequence(const std::vector<double>& ladder, const std::vector<CVector>& vals) {
    std::vector<CVector> out;
    for (std::size_t c = 2; c <= ladder.size(); ++c) out.push_back(extrapolate(ladder, vals, c));
    return out;
}

inline const std::vector<double>& default_ladder() {
    static const std::vector<double> l{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
    return l;
}

inline SeriesValue limit_from_ladder(const std::vector<double>& ladder, const LadderSums& L, double kappa,
                                     std::size_t terms, double R) {
    const std::size_t n = ladder.size();
    auto w = extrapolation_weights(ladder);
    CVector tn = extrapolate(ladder, L.full, n);
    CVector tm = extrapolate(ladder, L.full, n - 1);
    double trunc = 0.0;
    for (std::size_t k = 0; k < n; ++k) trunc += std::abs(w[k]) * (L.full[k] - L.half[k]).norm();
    const double norm = 4.0 * kPi * kappa;
    SeriesValue v;
    v.value = norm * tn;
    v.s = 0.0;
    v.R = R;
    v.truncation_estimate = norm * trunc;
    double skipped = 0.0;
    for (double x : w) skipped += std::abs(x);
    v.tail_bound = norm * (trunc + (tn - tm).norm() + skipped * L.skipped);
    v.terms = terms;
    return v;
}

inline SeriesValue poincare_limit(const SeriesKernel& K, const HPoint& tau, const std::vector<double>& ladder) {
    validate_ladder(ladder);
    LadderSums L = evaluate_ladder(K, tau, ladder, SeriesKind::P);
    return limit_from_ladder(ladder, L, K.index.kappa, K.size(), K.R);
}

// ---------------------------------------------------------------------------
// Expansions

struct FormSample {
    CVector value;
    double error = 0.0;
};
using VectorForm = std::function<FormSample(const HPoint&)>;

inline VectorForm limit_form(std::shared_ptr<const SeriesKernel> K, std::vector<double> ladder) {
    validate_ladder(ladder);
    return [K, ladder](const HPoint& t) {
        SeriesValue v = poincare_limit(*K, t, ladder);
        return FormSample{v.value, v.tail_bound};
    };
}

struct QExpansion {
    int cusp = 0;                      // 0-based
    std::vector<CVector> coeffs;       // a(0..k_max)
    std::vector<double> errors;        // propagated evaluation error per k
    double alias_estimate = 0.0;       // largest negative-mode coefficient
    double y0 = 1.0;
    int M = 0;
    std::vector<double> W;
    CMatrix U;
};

inline QExpansion qexp_coeffs(const VectorForm& f, const GroupPresentation& G, const WeightSystem& ws, int cusp,
                              int k_max, double y0, int M) {
    require(cusp >= 0 && cusp < G.signature.n, "cusp index out of range");
    require(k_max >= 0, "k_max must be nonnegative");
    require(M > 2 * (k_max + 1), "sample count M too small (need M > 2(k_max+1))");
    require(y0 >= 1.0 - 1e-12, "sampling height y0 must be >= 1");
    const PointWeights& pw = ws.cusp(cusp);
    const Moebius sigma = G.cusps[cusp].sigma();
    const int r = ws.rank;
    const CMatrix Uinv = pw.expansion.U.adjoint();

    std::vector<FormSample> samples(M);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t t) {
        HPoint tau(static_cast<double>(t) / M, y0);
        FormSample fs = f(sigma.apply(tau));
        cplx d = sigma.derivative(tau.z());
        samples[t] = FormSample{Uinv * (fs.value * d), fs.error * std::abs(d)};
    });
    QExpansion Q;
    Q.cusp = cusp;
    Q.y0 = y0;
    Q.M = M;
    Q.W = pw.expansion.W;
    Q.U = pw.expansion.U;
    double mean_err = 0.0;
    // evaluator error plus roundoff in the samples themselves
    for (const auto& s : samples)
        mean_err += (s.error + 64.0 * std::numeric_limits<double>::epsilon() * s.value.norm()) / M;
    auto mode = [&](int k) {
        CVector a = CVector::Zero(r);
        for (int c = 0; c < r; ++c) {
            CompensatedC acc;
            double ex = pw.expansion.W[c] + k;
            for (int t = 0; t < M; ++t) {
                cplx tau(static_cast<double>(t) / M, y0);
                acc.add(samples[t].value(c) * qpow(tau, -ex));
            }
            a(c) = acc.value() / static_cast<double>(M);
        }
        return a;
    };
    for (int k = 0; k <= k_max; ++k) {
        Q.coeffs.push_back(mode(k));
        double amp = 0.0;
        for (double w : pw.expansion.W) amp = std::max(amp, std::exp(2.0 * kPi * (w + k) * y0));
        Q.errors.push_back(mean_err * amp);
    }
    for (int k = -M / 2; k < 0; ++k) {
        CVector a = mode(k);
        Q.alias_estimate = std::max(Q.alias_estimate, a.norm());
    }
    return Q;
}

// Coefficients b(0..k_max) of the local expansion at elliptic point j (0-based).
inline std::vector<CVector> elliptic_coeffs(const VectorForm& f, const GroupPresentation& G, const WeightSystem& ws,
                                            int j, int k_max, double radius, int M) {
    require(G.signature.m() > 0, "group has no elliptic points");
    require(j >= 0 && j < G.signature.m(), "elliptic index out of range");
    require(radius > 0.0 && radius < 1.0, "radius must lie in (0,1)");
    require(k_max >= 0, "k_max must be nonnegative");
    const PointWeights& pw = ws.points.at(G.signature.n + j);
    const int nu = pw.nu;
    require(M > 2 * nu * (k_max + 1), "sample count M too small");
    const int r = ws.rank;
    const Moebius phi = G.elliptic[j].phi;
    const CMatrix Uinv = pw.expansion.U.adjoint();
    std::vector<int> nW(r);
    for (int c = 0; c < r; ++c) {
        double x = pw.expansion.W[c] * nu;
        nW[c] = static_cast<int>(std::lround(x));
        if (std::abs(x - nW[c]) > 1e-7) throw ToleranceError("elliptic weight is not a multiple of 1/nu");
    }
    std::vector<CVector> g(M);
    std::vector<cplx> zeta(M);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t t) {
        cplx z = std::polar(radius, 2.0 * kPi * static_cast<double>(t) / M);
        HPoint tau = cayley_inverse(z);
        CVector F = f(phi.apply(tau)).value * phi.derivative(tau.z());
        CVector h = Uinv * (F / cayley_derivative(tau));
        for (int c = 0; c < r; ++c) h(c) *= std::pow(z, -(nu - 1 + nW[c]));
        g[t] = h;
        zeta[t] = z;
    });
    std::vector<CVector> b;
    for (int k = 0; k <= k_max; ++k) {
        CVector a = CVector::Zero(r);
        for (int c = 0; c < r; ++c) {
            CompensatedC acc;
            for (int t = 0; t < M; ++t) acc.add(g[t](c) * std::pow(zeta[t], -k * nu));
            a(c) = acc.value() / static_cast<double>(M);
        }
        b.push_back(a);
    }
    return b;
}

}  // namespace w2p

#endif
