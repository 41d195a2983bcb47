#ifndef W2P_DIMENSIONS_HPP
#define W2P_DIMENSIONS_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "repdata.hpp"
#include "series.hpp"

namespace w2p {

struct DimensionReport {
    std::string formula;
    Signature signature;
    int rank = 1;
    int dim = 0;
    long long raw = 0;              // formula value before flooring
    bool floored = false;
    int h0_term = 0;
    bool genericity_assumed = false;   // h0 term defaulted to 0
    bool exact = false;                // evaluated in rational arithmetic
    std::optional<long long> dual_convention;   // same formula with the expansion exponents
    bool discrepancy = false;
    std::string note;
};

namespace detail {

inline bool all_exact(const WeightSystem& ws) {
    for (const auto& p : ws.points)
        if (!p.exact) return false;
    return true;
}

inline long long integral_value(double v, const std::string& what) {
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9) throw ToleranceError(what + " is not an integer (inconsistent weights)");
    return static_cast<long long>(r);
}

inline long long integral_value(const Rational& v, const std::string& what) {
    if (v.denominator() != 1) throw ToleranceError(what + " is not an integer (inconsistent weights)");
    return v.numerator();
}

// Sum of all weights, exact when possible.
struct WeightSum {
    bool exact = false;
    Rational q;
    double d = 0.0;
};

inline WeightSum weight_sum(const WeightSystem& ws) {
    WeightSum s;
    s.exact = all_exact(ws);
    for (const auto& p : ws.points) {
        if (s.exact)
            for (const auto& x : *p.exact) s.q += x;
        for (double x : p.datum.W) s.d += x;
    }
    return s;
}

inline double expansion_sum(const WeightSystem& ws) {
    double s = 0.0;
    for (const auto& p : ws.points)
        for (double x : p.expansion.W) s += x;
    return s;
}

inline void check_points(const Signature& sig, const WeightSystem& ws) {
    require(static_cast<int>(ws.points.size()) == sig.n + sig.m(), "weight system must cover all cusps and elliptic points");
}

}  // namespace detail

inline DimensionReport dim_cusp_ad(const Signature& sig, int r, const WeightSystem& ws, int commutant = 1) {
    sig.validate();
    detail::check_points(sig, ws);
    require(ws.rank == r, "weight system rank mismatch");
    long long v = commutant + static_cast<long long>(r) * r * (sig.g - 1);
    for (const auto& p : ws.points)
        v += p.exact ? flag_dim(*p.exact).complex_dim : flag_dim(p.datum.W).complex_dim;
    DimensionReport rep;
    rep.formula = "ad";
    rep.signature = sig;
    rep.rank = r;
    rep.raw = v;
    rep.floored = v < 0;
    rep.dim = static_cast<int>(std::max(0LL, v));
    rep.exact = true;
    if (commutant != 1) rep.note = "commutant dimension supplied by caller";
    if (rep.floored) rep.note = "negative formula value floored at 0";
    return rep;
}

inline DimensionReport dim_rank1_genus0(const Signature& sig, const WeightSystem& ws) {
    sig.validate();
    detail::check_points(sig, ws);
    require(sig.g == 0, "formula needs genus 0");
    require(ws.rank == 1, "formula needs rank 1");
    for (const auto& p : ws.points) require(p.datum.W[0] > 1e-12, "all weights must be nonzero");
    auto s = detail::weight_sum(ws);
    long long sum = s.exact ? detail::integral_value(s.q, "weight sum") : detail::integral_value(s.d, "weight sum");
    long long b = sum - sig.m() - 2;
    DimensionReport rep;
    rep.formula = "rank1-genus0";
    rep.signature = sig;
    rep.rank = 1;
    rep.raw = b;
    rep.dim = b >= 0 ? static_cast<int>(b + 1) : 0;
    rep.exact = s.exact;
    rep.note = "b = " + std::to_string(b);
    return rep;
}

inline DimensionReport dim_regular(const Signature& sig, int r, const WeightSystem& ws, std::optional<int> h0 = std::nullopt) {
    sig.validate();
    detail::check_points(sig, ws);
    require(ws.rank == r, "weight system rank mismatch");
    auto s = detail::weight_sum(ws);
    const int h = h0.value_or(0);
    long long base = h + static_cast<long long>(r) * (sig.g + sig.n - 1);
    long long v = s.exact ? base - detail::integral_value(s.q, "weight sum")
                          : base - detail::integral_value(s.d, "weight sum");
    DimensionReport rep;
    rep.formula = "regular";
    rep.signature = sig;
    rep.rank = r;
    rep.h0_term = h;
    rep.genericity_assumed = !h0.has_value();
    rep.raw = v;
    rep.floored = v < 0;
    rep.dim = static_cast<int>(std::max(0LL, v));
    rep.exact = s.exact;
    double e = detail::expansion_sum(ws);
    if (std::abs(e - std::round(e)) < 1e-9) {
        rep.dual_convention = base - static_cast<long long>(std::round(e));
        rep.discrepancy = *rep.dual_convention != v;
    }
    if (rep.discrepancy) rep.note = "value differs from the expansion-exponent convention; audit against Gram rank";
    return rep;
}

// h0 + r(g - m - 1) + sum of weights; the cusp-form count with nonvanishing elliptic weights.
inline DimensionReport dim_cusp(const Signature& sig, int r, const WeightSystem& ws, std::optional<int> h0 = std::nullopt) {
    sig.validate();
    detail::check_points(sig, ws);
    require(ws.rank == r, "weight system rank mismatch");
    auto s = detail::weight_sum(ws);
    const int h = h0.value_or(0);
    long long base = h + static_cast<long long>(r) * (sig.g - sig.m() - 1);
    long long v = s.exact ? base + detail::integral_value(s.q, "weight sum")
                          : base + detail::integral_value(s.d, "weight sum");
    DimensionReport rep;
    rep.formula = "cusp";
    rep.signature = sig;
    rep.rank = r;
    rep.h0_term = h;
    rep.genericity_assumed = !h0.has_value();
    rep.raw = v;
    rep.floored = v < 0;
    rep.dim = static_cast<int>(std::max(0LL, v));
    rep.exact = s.exact;
    return rep;
}

inline std::vector<MultiIndex> basis_indices(int d, int n, int r, const WeightSystem& ws) {
    require(d >= 0, "dimension must be nonnegative");
    require(ws.rank == r && ws.n_cusps() == n, "weight system does not match (n, r)");
    require(d <= (n - 1) * r, "requested dimension exceeds the available indices (n-1)r");
    std::vector<MultiIndex> out;
    for (int i = 1; i <= n - 1 && static_cast<int>(out.size()) < d; ++i)
        for (int j = 1; j <= r && static_cast<int>(out.size()) < d; ++j) {
            require(ws.cusp(i - 1).datum.W[j - 1] > 1e-12, "basis selection needs nonzero weights");
            out.push_back(make_index(ws, i, j, 0));
        }
    return out;
}

inline long long char_variety_dim(const Signature& sig, int r, const WeightSystem& ws) {
    sig.validate();
    detail::check_points(sig, ws);
    long long v = 2LL * r * r * (sig.g - 1) + 2;
    for (const auto& p : ws.points) v += p.exact ? flag_dim(*p.exact).real_dim : flag_dim(p.datum.W).real_dim;
    return v;
}

// Weight data with prescribed multiplicity pattern at every point (weights k/r are placeholders).
inline WeightSystem weight_system_from_multiplicities(const Signature& sig, int r,
                                                      const std::vector<std::vector<int>>& mult) {
    require(static_cast<int>(mult.size()) == sig.n + sig.m(), "need a multiplicity pattern per point");
    std::vector<std::vector<Rational>> cw, ew;
    for (std::size_t p = 0; p < mult.size(); ++p) {
        std::vector<Rational> w;
        int level = 0, total = 0;
        for (int m : mult[p]) {
            require(m >= 1, "multiplicities must be positive");
            for (int k = 0; k < m; ++k) w.push_back(Rational(level, std::max(r, 1)));
            ++level;
            total += m;
        }
        require(total == r, "multiplicities must sum to the rank");
        (static_cast<int>(p) < sig.n ? cw : ew).push_back(w);
    }
    // elliptic weights as multiples of 1/nu
    for (std::size_t j = 0; j < ew.size(); ++j) {
        int nu = sig.nu[j];
        require(static_cast<int>(mult[sig.n + j].size()) <= nu, "more distinct elliptic weights than the order allows");
        int level = 0;
        std::vector<Rational> w;
        for (int m : mult[sig.n + j]) {
            for (int k = 0; k < m; ++k) w.push_back(Rational(level % nu, nu));
            ++level;
        }
        ew[j] = w;
    }
    return weight_system_from_weights(r, cw, ew, sig.nu);
}

}  // namespace w2p

#endif
