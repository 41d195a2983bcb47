#ifndef W2P_REPDATA_HPP
#define W2P_REPDATA_HPP

#include <algorithm>
#include <boost/rational.hpp>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fuchsian.hpp"
#include "linalg.hpp"

namespace w2p {

using Rational = boost::rational<std::int64_t>;

inline Rational frac(const Rational& x) {
    std::int64_t fl = x.numerator() / x.denominator();
    if (x.numerator() < 0 && x.numerator() % x.denominator() != 0) --fl;
    return x - Rational(fl);
}

// "0.75", "-1.5e-1" or "3/4" as an exact rational.
inline Rational parse_rational(const std::string& s_in) {
    std::string s = s_in;
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    require(!s.empty(), "empty number");
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos)
            return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        std::int64_t exp10 = 0;
        auto e = s.find_first_of("eE");
        if (e != std::string::npos) {
            exp10 = std::stoll(s.substr(e + 1));
            s = s.substr(0, e);
        }
        bool neg = !s.empty() && s[0] == '-';
        if (!s.empty() && (s[0] == '-' || s[0] == '+')) s = s.substr(1);
        auto dot = s.find('.');
        std::string digits = s;
        if (dot != std::string::npos) {
            digits = s.substr(0, dot) + s.substr(dot + 1);
            exp10 -= static_cast<std::int64_t>(s.size() - dot - 1);
        }
        require(!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit), "malformed number '" + s_in + "'");
        require(digits.size() <= 17 && std::abs(exp10) <= 17, "number too long for exact rational: '" + s_in + "'");
        std::int64_t num = std::stoll(digits);
        Rational r(num);
        std::int64_t p = 1;
        for (std::int64_t k = 0; k < std::abs(exp10); ++k) p *= 10;
        r = exp10 >= 0 ? r * p : r / p;
        return neg ? -r : r;
    } catch (const std::logic_error& ex) {
        if (dynamic_cast<const ValidationError*>(&ex)) throw;
        throw ValidationError("malformed number '" + s_in + "'");
    }
}

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// ---------------------------------------------------------------------------

struct UnitaryRep {
    int rank = 1;
    std::vector<CMatrix> images;   // one per generator of the presentation

    CMatrix image(int signed_idx) const {
        const CMatrix& m = images[std::abs(signed_idx) - 1];
        return signed_idx > 0 ? m : CMatrix(m.adjoint());
    }

    CMatrix eval(const Word& w) const {
        CMatrix r = CMatrix::Identity(rank, rank);
        for (int s : w) r = r * image(s);
        return r;
    }
};

struct RepCheck {
    double max_unitarity_defect = 0.0;
    double long_relation_residual = 0.0;
    std::vector<double> elliptic_residuals;
    bool ok(double tol = 1e-8) const {
        if (max_unitarity_defect > 1e-10 || long_relation_residual > tol) return false;
        return std::all_of(elliptic_residuals.begin(), elliptic_residuals.end(), [&](double e) { return e <= tol; });
    }
};

inline RepCheck check_rep(const GroupPresentation& G, const UnitaryRep& rho) {
    RepCheck rc;
    CMatrix id = CMatrix::Identity(rho.rank, rho.rank);
    for (const auto& m : rho.images) rc.max_unitarity_defect = std::max(rc.max_unitarity_defect, unitarity_defect(m));
    rc.long_relation_residual = (rho.eval(G.long_relation()) - id).norm();
    auto rel = G.relations();
    for (std::size_t k = 1; k < rel.size(); ++k) rc.elliptic_residuals.push_back((rho.eval(rel[k]) - id).norm());
    return rc;
}

// Builds a representation from named images. The last parabolic generator may be omitted;
// it is then solved from the long relation.
inline UnitaryRep make_rep(const GroupPresentation& G, int rank, const std::map<std::string, CMatrix>& named) {
    require(rank >= 1, "rank must be positive");
    UnitaryRep rho;
    rho.rank = rank;
    rho.images.assign(G.num_gens(), CMatrix::Identity(rank, rank));
    std::vector<bool> given(G.num_gens(), false);
    for (const auto& [nm, m] : named) {
        int k = G.gen_index(nm);
        require(k >= 0, "unknown generator name '" + nm + "'");
        require(m.rows() == rank && m.cols() == rank, "image of " + nm + " has wrong size");
        require(unitarity_defect(m) <= 1e-10, "image of " + nm + " is not unitary");
        rho.images[k] = m;
        given[k] = true;
    }
    const int last = G.parabolic_gen(G.signature.n - 1);
    for (int k = 0; k < G.num_gens(); ++k)
        require(given[k] || k == last, "missing image for generator " + G.gen_names[k]);
    if (!given[last]) {
        Word prefix = G.long_relation();
        prefix.pop_back();
        rho.images[last] = rho.eval(prefix).adjoint();
    }
    RepCheck rc = check_rep(G, rho);
    require(rc.ok(), "representation violates the group relations");
    return rho;
}

// Rank-one character with rho(T_i) = e^{2 pi i a_i}, rho(S_j) = e^{2 pi i b_j}, rho(A_k) = rho(B_k) = 1.
inline UnitaryRep character(const GroupPresentation& G, const std::vector<double>& cusp_weights,
                            const std::vector<double>& elliptic_weights = {}) {
    require(static_cast<int>(cusp_weights.size()) == G.signature.n, "need one weight per cusp");
    require(static_cast<int>(elliptic_weights.size()) == G.signature.m(), "need one weight per elliptic point");
    std::map<std::string, CMatrix> named;
    auto phase = [](double a) { return CMatrix::Constant(1, 1, std::polar(1.0, 2.0 * kPi * a)); };
    for (int k = 0; k < G.signature.g; ++k) {
        named[G.gen_names[G.hyperbolic_index(k, false)]] = CMatrix::Identity(1, 1);
        named[G.gen_names[G.hyperbolic_index(k, true)]] = CMatrix::Identity(1, 1);
    }
    for (int j = 0; j < G.signature.m(); ++j) named[G.gen_names[G.elliptic_gen(j)]] = phase(elliptic_weights[j]);
    for (int i = 0; i < G.signature.n; ++i) named[G.gen_names[G.parabolic_gen(i)]] = phase(cusp_weights[i]);
    UnitaryRep rho;
    rho.rank = 1;
    for (int k = 0; k < G.num_gens(); ++k) rho.images.push_back(named.at(G.gen_names[k]));
    RepCheck rc = check_rep(G, rho);
    require(rc.ok(), "character weights violate the group relations (weights must sum to an integer)");
    return rho;
}

inline UnitaryRep trivial_rep(const GroupPresentation& G, int rank = 1) {
    UnitaryRep rho;
    rho.rank = rank;
    rho.images.assign(G.num_gens(), CMatrix::Identity(rank, rank));
    return rho;
}

// ---------------------------------------------------------------------------

struct SpectralDatum {
    std::vector<double> W;          // ascending in [0,1)
    CMatrix U;                      // columns: eigenvectors in the order of W
    std::vector<int> multiplicities;
    int s = 0;                      // number of zero weights

    int rank() const { return static_cast<int>(W.size()); }

    CMatrix reconstruct() const {
        CVector ph(rank());
        for (int k = 0; k < rank(); ++k) ph(k) = std::polar(1.0, 2.0 * kPi * W[k]);
        return U * ph.asDiagonal() * U.adjoint();
    }
};

inline constexpr double kPhaseCluster = 1e-9;
inline constexpr double kPhaseWrap = 1e-12;

inline std::vector<int> weight_multiplicities(const std::vector<double>& W) {
    std::vector<int> m;
    for (std::size_t k = 0; k < W.size(); ++k) {
        if (k > 0 && W[k] - W[k - 1] <= kPhaseCluster) ++m.back();
        else m.push_back(1);
    }
    return m;
}

inline int zero_weight_count(const std::vector<double>& W) {
    return static_cast<int>(std::count_if(W.begin(), W.end(), [](double w) { return w <= kPhaseCluster; }));
}

inline double phase_weight(cplx lambda) {
    double w = std::arg(lambda) / (2.0 * kPi);
    if (w < 0) w += 1.0;
    if (w >= 1.0 - kPhaseWrap || std::abs(w) < kPhaseWrap) w = 0.0;
    return w;
}

inline SpectralDatum spectral_datum(const CMatrix& M) {
    require(M.rows() == M.cols() && M.rows() > 0, "matrix must be square");
    require(unitarity_defect(M) <= 1e-9, "spectral datum needs a unitary matrix");
    const int r = static_cast<int>(M.rows());
    // Schur form of a normal matrix is diagonal with a unitary similarity.
    Eigen::ComplexSchur<CMatrix> schur(M);
    const CMatrix& Q = schur.matrixU();
    const CMatrix& T = schur.matrixT();
    std::vector<double> w(r);
    for (int k = 0; k < r; ++k) w[k] = phase_weight(T(k, k));
    std::vector<int> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return w[x] < w[y]; });
    SpectralDatum d;
    d.U.resize(r, r);
    for (int k = 0; k < r; ++k) {
        d.W.push_back(w[order[k]]);
        d.U.col(k) = Q.col(order[k]);
    }
    d.multiplicities = weight_multiplicities(d.W);
    d.s = zero_weight_count(d.W);
    return d;
}

// Weights of the dual representation at the same point.
inline std::vector<double> dual_weights(const std::vector<double>& W) {
    const int r = static_cast<int>(W.size());
    const int s = zero_weight_count(W);
    std::vector<double> out(r, 0.0);
    for (int j = s; j < r; ++j) out[j] = 1.0 - W[r + s - 1 - j];
    return out;
}
inline std::vector<double> dual_weights(const SpectralDatum& d) { return dual_weights(d.W); }

inline std::vector<double> ad_weights(const std::vector<double>& W) {
    std::vector<double> th;
    for (double a : W)
        for (double b : W) {
            double t = a - b;
            if (std::abs(t) <= kPhaseCluster) t = 0.0;
            t -= std::floor(t);
            th.push_back(t);
        }
    return th;
}

inline std::vector<Rational> ad_weights(const std::vector<Rational>& W) {
    std::vector<Rational> th;
    for (const auto& a : W)
        for (const auto& b : W) th.push_back(frac(a - b));
    return th;
}

struct FlagDim {
    int complex_dim = 0;
    int real_dim = 0;
};

inline FlagDim flag_dim_from_multiplicities(int r, const std::vector<int>& mult) {
    int sq = 0;
    for (int m : mult) sq += m * m;
    FlagDim f;
    f.complex_dim = (r * r - sq) / 2;
    f.real_dim = 2 * f.complex_dim;
    return f;
}

inline FlagDim flag_dim(const std::vector<double>& W) {
    return flag_dim_from_multiplicities(static_cast<int>(W.size()), weight_multiplicities(W));
}

inline FlagDim flag_dim(std::vector<Rational> W) {
    std::sort(W.begin(), W.end());
    std::vector<int> mult;
    for (std::size_t k = 0; k < W.size(); ++k) {
        if (k > 0 && W[k] == W[k - 1]) ++mult.back();
        else mult.push_back(1);
    }
    return flag_dim_from_multiplicities(static_cast<int>(W.size()), mult);
}

inline int commutant_dim(const UnitaryRep& rho, double tol = 1e-8) {
    const int r = rho.rank;
    const int r2 = r * r;
    if (rho.images.empty()) return r2;
    CMatrix sys(static_cast<Eigen::Index>(rho.images.size()) * r2, r2);
    CMatrix id = CMatrix::Identity(r, r);
    for (std::size_t k = 0; k < rho.images.size(); ++k) {
        const CMatrix& m = rho.images[k];
        sys.block(static_cast<Eigen::Index>(k) * r2, 0, r2, r2) = kron(m.transpose(), id) - kron(id, m);
    }
    Eigen::JacobiSVD<CMatrix> svd(sys);
    const auto& sv = svd.singularValues();
    int zero = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) zero += sv(k) < tol ? 1 : 0;
    return zero + static_cast<int>(r2 - sv.size());
}

inline bool is_irreducible(const UnitaryRep& rho) { return commutant_dim(rho) == 1; }

// X -> M X M^-1 on column-major vec(X).
inline CMatrix ad_matrix(const CMatrix& m) { return kron(m.conjugate(), m); }

inline UnitaryRep ad_rep(const UnitaryRep& rho) {
    UnitaryRep ad;
    ad.rank = rho.rank * rho.rank;
    for (const auto& m : rho.images) ad.images.push_back(ad_matrix(m));
    return ad;
}

// ---------------------------------------------------------------------------

struct PointWeights {
    bool elliptic = false;
    int nu = 0;                       // elliptic order, 0 at cusps
    int sign = 1;                     // orientation of the generator (translation or rotation direction)
    SpectralDatum datum;              // of rho(generator)
    SpectralDatum expansion;          // of rho(generator)^sign: exponents of the local expansion
    std::optional<std::vector<Rational>> exact;   // exact form of datum.W when known
};

struct WeightSystem {
    int rank = 1;
    std::vector<PointWeights> points;   // cusps 1..n, then elliptic points

    int n_cusps() const {
        return static_cast<int>(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.elliptic; }));
    }
    const PointWeights& cusp(int i) const { return points.at(i); }
};

inline std::vector<Rational> snap_elliptic(const std::vector<double>& W, int nu) {
    std::vector<Rational> out;
    for (double w : W) {
        double k = std::round(w * nu);
        if (std::abs(w * nu - k) > 1e-7) throw ToleranceError("elliptic weight is not a multiple of 1/nu");
        out.push_back(frac(Rational(static_cast<std::int64_t>(k), nu)));
    }
    return out;
}

inline WeightSystem weight_system(const GroupPresentation& G, const UnitaryRep& rho) {
    WeightSystem ws;
    ws.rank = rho.rank;
    for (int i = 0; i < G.signature.n; ++i) {
        PointWeights p;
        p.sign = G.cusps[i].sign;
        const CMatrix& m = rho.images[G.parabolic_gen(i)];
        p.datum = spectral_datum(m);
        p.expansion = p.sign > 0 ? p.datum : spectral_datum(m.adjoint());
        ws.points.push_back(std::move(p));
    }
    for (int j = 0; j < G.signature.m(); ++j) {
        PointWeights p;
        p.elliptic = true;
        p.nu = G.signature.nu[j];
        p.sign = G.elliptic[j].rotation;
        const CMatrix& m = rho.images[G.elliptic_gen(j)];
        p.datum = spectral_datum(m);
        p.expansion = p.sign > 0 ? p.datum : spectral_datum(m.adjoint());
        p.exact = snap_elliptic(p.datum.W, p.nu);
        ws.points.push_back(std::move(p));
    }
    return ws;
}

// Weight data without flags, for counting formulas. Points are given as exact rationals.
inline WeightSystem weight_system_from_weights(int rank, const std::vector<std::vector<Rational>>& cusp_w,
                                               const std::vector<std::vector<Rational>>& elliptic_w = {},
                                               const std::vector<int>& nu = {}) {
    require(elliptic_w.size() == nu.size(), "elliptic weights and orders mismatch");
    WeightSystem ws;
    ws.rank = rank;
    auto make = [&](std::vector<Rational> w, bool ell, int order) {
        require(static_cast<int>(w.size()) == rank, "each point needs rank-many weights");
        for (auto& x : w) {
            require(x >= 0 && x < 1, "weights must lie in [0,1)");
            if (ell) require((x * order).denominator() == 1, "elliptic weights must be multiples of 1/nu");
        }
        std::sort(w.begin(), w.end());
        PointWeights p;
        p.elliptic = ell;
        p.nu = order;
        p.sign = -1;
        for (auto& x : w) p.datum.W.push_back(to_double(x));
        p.datum.U = CMatrix::Identity(rank, rank);
        p.datum.multiplicities = weight_multiplicities(p.datum.W);
        p.datum.s = zero_weight_count(p.datum.W);
        p.expansion = p.datum;
        p.expansion.W = dual_weights(p.datum.W);
        p.expansion.multiplicities = weight_multiplicities(p.expansion.W);
        p.expansion.s = zero_weight_count(p.expansion.W);
        p.exact = w;
        ws.points.push_back(std::move(p));
    };
    for (const auto& w : cusp_w) make(w, false, 0);
    for (std::size_t j = 0; j < elliptic_w.size(); ++j) make(elliptic_w[j], true, nu[j]);
    return ws;
}

}  // namespace w2p

#endif
