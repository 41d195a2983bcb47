#ifndef W2P_FUCHSIAN_HPP
#define W2P_FUCHSIAN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "halfplane.hpp"

namespace w2p {

struct Signature {
    int g = 0;
    std::vector<int> nu;
    int n = 1;

    int m() const { return static_cast<int>(nu.size()); }

    double euler_area() const {
        double e = 2.0 * g - 2.0 + n;
        for (int v : nu) e += 1.0 - 1.0 / v;
        return e;
    }

    void validate() const {
        require(g >= 0, "genus must be nonnegative");
        require(n > 0, "at least one cusp required");
        for (int v : nu) require(v >= 2, "elliptic orders must be >= 2");
        require(euler_area() > 0.0, "signature violates 2g-2+sum(1-1/nu)+n > 0");
    }
};

// Word in the generators: entry +k / -k is generator k-1 or its inverse.
using Word = std::vector<int>;

enum class ModularKind { None, PSL2Z, Gamma0, Gamma };

struct IntMatrix {
    std::int64_t a, b, c, d;
};

inline std::optional<IntMatrix> to_integral(const Moebius& g, double tol = 1e-9) {
    std::array<double, 4> v{g.a, g.b, g.c, g.d};
    std::array<std::int64_t, 4> r{};
    for (int k = 0; k < 4; ++k) {
        double x = std::round(v[k]);
        if (std::abs(v[k] - x) > tol * std::max(1.0, std::abs(x))) return std::nullopt;
        r[k] = static_cast<std::int64_t>(x);
    }
    if (r[0] * r[3] - r[1] * r[2] != 1) return std::nullopt;
    return IntMatrix{r[0], r[1], r[2], r[3]};
}

inline std::int64_t mod_pos(std::int64_t x, std::int64_t n) {
    std::int64_t r = x % n;
    return r < 0 ? r + n : r;
}

inline bool modular_member(ModularKind kind, int level, const IntMatrix& m) {
    switch (kind) {
        case ModularKind::PSL2Z: return true;
        case ModularKind::Gamma0: return mod_pos(m.c, level) == 0;
        case ModularKind::Gamma: {
            if (mod_pos(m.b, level) != 0 || mod_pos(m.c, level) != 0) return false;
            std::int64_t a = mod_pos(m.a, level), d = mod_pos(m.d, level);
            return (a == 1 % level && d == 1 % level) || (a == level - 1 && d == level - 1);
        }
        case ModularKind::None: break;
    }
    return false;
}

// x, y with a x + b y = gcd(a, b) >= 0.
inline std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
    std::int64_t x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        std::int64_t q = a / b;
        std::int64_t t = a - q * b; a = b; b = t;
        t = x0 - q * x1; x0 = x1; x1 = t;
        t = y0 - q * y1; y0 = y1; y1 = t;
    }
    if (a < 0) { a = -a; x0 = -x0; y0 = -y0; }
    x = x0; y = y0;
    return a;
}

// Integral matrix with bottom row (c, d), gcd(c, d) = 1.
inline IntMatrix complete_bottom_row(std::int64_t c, std::int64_t d) {
    std::int64_t x, y;
    std::int64_t g = ext_gcd(d, c, x, y);  // d x + c y = 1
    require(g == 1, "bottom row not coprime");
    // a d - b c = 1 with a = x, b = -y
    return IntMatrix{x, -y, c, d};
}

struct Cusp {
    bool at_infinity = true;
    double point = 0.0;          // meaningful when !at_infinity
    Moebius base;                // base(infinity) = cusp
    double width = 1.0;          // base^-1 T base = +-(tau -> tau + width)
    int sign = 1;                // sigma^-1 T sigma = tau + sign
    Moebius sigma() const {
        double r = std::sqrt(width);
        Moebius m;
        m.a = r; m.b = 0; m.c = 0; m.d = 1.0 / r;
        return base * m;
    }
};

struct EllipticPoint {
    HPoint point;
    Moebius phi;                 // phi(i) = point
    int order = 2;
    int rotation = 1;            // phi^-1 S phi acts on zeta by e^{rotation 2 pi i / order}
};

struct GroupPresentation {
    std::string name;
    Signature signature;
    std::vector<Moebius> gens;   // A1,B1,...,Ag,Bg, S1..Sm, T1..Tn
    std::vector<std::string> gen_names;
    std::vector<Cusp> cusps;
    std::vector<EllipticPoint> elliptic;
    ModularKind modular = ModularKind::None;
    int level = 1;
    bool integral = false;
    double bfs_margin = 4.0;

    int num_gens() const { return static_cast<int>(gens.size()); }
    int hyperbolic_index(int k, bool is_b) const { return 2 * k + (is_b ? 1 : 0); }
    int elliptic_gen(int j) const { return 2 * signature.g + j; }
    int parabolic_gen(int i) const { return 2 * signature.g + signature.m() + i; }

    int gen_index(const std::string& nm) const {
        for (int k = 0; k < num_gens(); ++k)
            if (gen_names[k] == nm) return k;
        return -1;
    }

    Moebius gen(int signed_idx) const {
        const Moebius& g = gens[std::abs(signed_idx) - 1];
        return signed_idx > 0 ? g : g.inverse();
    }

    Moebius eval(const Word& w) const {
        Moebius r;
        for (int s : w) r = r * gen(s);
        return r;
    }

    Word long_relation() const {
        Word w;
        for (int k = 0; k < signature.g; ++k) {
            int a = hyperbolic_index(k, false) + 1, b = hyperbolic_index(k, true) + 1;
            w.insert(w.end(), {a, b, -a, -b});
        }
        for (int j = 0; j < signature.m(); ++j) w.push_back(elliptic_gen(j) + 1);
        for (int i = 0; i < signature.n; ++i) w.push_back(parabolic_gen(i) + 1);
        return w;
    }

    std::vector<Word> relations() const {
        std::vector<Word> rel{long_relation()};
        for (int j = 0; j < signature.m(); ++j) rel.push_back(Word(signature.nu[j], elliptic_gen(j) + 1));
        return rel;
    }

    // Generator T_i^{sign}, whose sigma-conjugate is tau -> tau + 1.
    Moebius positive_translation(int i) const {
        const Moebius& t = gens[parabolic_gen(i)];
        return cusps[i].sign > 0 ? t : t.inverse();
    }

    bool is_modular() const { return modular != ModularKind::None; }

    bool contains(const Moebius& g) const {
        require(is_modular(), "membership test needs a modular subgroup");
        auto im = to_integral(g);
        return im && modular_member(modular, level, *im);
    }
};

inline std::vector<std::string> default_gen_names(const Signature& s) {
    std::vector<std::string> out;
    for (int k = 1; k <= s.g; ++k) {
        out.push_back("A" + std::to_string(k));
        out.push_back("B" + std::to_string(k));
    }
    for (int j = 1; j <= s.m(); ++j) out.push_back("S" + std::to_string(j));
    for (int i = 1; i <= s.n; ++i) out.push_back("T" + std::to_string(i));
    return out;
}

// Cusp data for a parabolic generator; base is chosen integral when possible.
inline Cusp make_cusp(const Moebius& t, bool integral) {
    require(std::abs(std::abs(t.trace()) - 2.0) < 1e-9, "parabolic generator must have trace +-2");
    require(!(std::abs(t.c) < 1e-14 && std::abs(t.b) < 1e-14), "parabolic generator is the identity");
    Cusp cu;
    if (std::abs(t.c) < 1e-14) {
        cu.at_infinity = true;
        cu.base = Moebius::identity();
    } else {
        cu.at_infinity = false;
        cu.point = (t.a - t.d) / (2.0 * t.c);
        auto im = integral ? to_integral(t) : std::nullopt;
        if (im) {
            std::int64_t num = im->a - im->d, den = 2 * im->c;
            std::int64_t g = std::gcd(num, den);
            num /= g; den /= g;
            if (den < 0) { num = -num; den = -den; }
            std::int64_t x, y;
            ext_gcd(num, den, x, y);  // num x + den y = 1
            cu.base = Moebius(static_cast<double>(num), static_cast<double>(-y), static_cast<double>(den),
                              static_cast<double>(x));
        } else {
            cu.base = Moebius(cu.point, -1.0, 1.0, 0.0);
        }
    }
    Moebius conj = cu.base.inverse() * t * cu.base;
    double tr = conj.b / conj.a;
    require(std::abs(conj.c) < 1e-8 * (1 + std::abs(tr)), "scaling base does not conjugate to a translation");
    cu.width = std::abs(tr);
    cu.sign = tr > 0 ? 1 : -1;
    return cu;
}

inline EllipticPoint make_elliptic(const Moebius& s, int order) {
    double tr = s.trace();
    require(std::abs(tr) < 2.0 - 1e-12, "elliptic generator must have |trace| < 2");
    EllipticPoint e;
    e.order = order;
    double x = (s.a - s.d) / (2.0 * s.c);
    double y = std::sqrt(4.0 - tr * tr) / (2.0 * std::abs(s.c));
    e.point = HPoint(x, y);
    double r = std::sqrt(y);
    e.phi = Moebius(r, x / r, 0.0, 1.0 / r);
    Moebius rot = e.phi.inverse() * s * e.phi;
    cplx lambda = rot.derivative(kI);
    cplx plus = std::polar(1.0, 2.0 * kPi / order);
    if (std::abs(lambda - plus) < 1e-8) {
        e.rotation = 1;
    } else {
        require(std::abs(lambda - std::conj(plus)) < 1e-8, "elliptic generator order does not match its rotation angle");
        e.rotation = -1;
    }
    return e;
}

inline void validate(const GroupPresentation& G, double tol = 1e-10) {
    const Signature& s = G.signature;
    s.validate();
    require(G.num_gens() == 2 * s.g + s.m() + s.n, "generator count does not match signature");
    require(static_cast<int>(G.cusps.size()) == s.n, "cusp data count mismatch");
    require(static_cast<int>(G.elliptic.size()) == s.m(), "elliptic data count mismatch");
    require(G.eval(G.long_relation()).approx_equal(Moebius::identity(), tol * 100), "long relation fails");
    for (int j = 0; j < s.m(); ++j) {
        Moebius p = Moebius::identity();
        for (int k = 0; k < s.nu[j]; ++k) p = p * G.gens[G.elliptic_gen(j)];
        require(p.approx_equal(Moebius::identity(), tol * 100), "elliptic order relation fails");
    }
    for (int i = 0; i < s.n; ++i) {
        Moebius sg = G.cusps[i].sigma();
        Moebius c = sg.inverse() * G.gens[G.parabolic_gen(i)] * sg;
        Moebius expect(1.0, static_cast<double>(G.cusps[i].sign), 0.0, 1.0);
        require(c.approx_equal(expect, 1e-8), "scaling map does not conjugate to a unit translation");
    }
}

// Fills cusp and elliptic data from the generators.
inline GroupPresentation make_group(std::string name, Signature sig, std::vector<Moebius> gens,
                                    ModularKind kind = ModularKind::None, int level = 1) {
    sig.validate();
    GroupPresentation G;
    G.name = std::move(name);
    G.signature = sig;
    G.gens = std::move(gens);
    G.gen_names = default_gen_names(sig);
    require(G.num_gens() == static_cast<int>(G.gen_names.size()), "generator count does not match signature");
    G.modular = kind;
    G.level = level;
    G.integral = std::all_of(G.gens.begin(), G.gens.end(), [](const Moebius& m) { return to_integral(m).has_value(); });
    for (int j = 0; j < sig.m(); ++j) G.elliptic.push_back(make_elliptic(G.gens[G.elliptic_gen(j)], sig.nu[j]));
    for (int i = 0; i < sig.n; ++i) G.cusps.push_back(make_cusp(G.gens[G.parabolic_gen(i)], G.integral));
    validate(G);
    return G;
}

inline std::string lowercase(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline GroupPresentation builtin_group(const std::string& name_in) {
    std::string name = lowercase(name_in);
    auto M = [](double a, double b, double c, double d) { return Moebius(a, b, c, d); };
    GroupPresentation G;
    if (name == "psl2z") {
        G = make_group("PSL2Z", {0, {2, 3}, 1}, {M(0, -1, 1, 0), M(0, 1, -1, -1), M(1, -1, 0, 1)}, ModularKind::PSL2Z, 1);
        G.bfs_margin = 1.0;
    } else if (name == "gamma2") {
        G = make_group("Gamma2", {0, {}, 3}, {M(1, -2, 0, 1), M(1, 0, 2, 1), M(1, 2, -2, -3)}, ModularKind::Gamma, 2);
        G.bfs_margin = 1.0;
    } else if (name == "gamma0_4") {
        G = make_group("Gamma0_4", {0, {}, 3}, {M(1, -1, 0, 1), M(1, 0, 4, 1), M(1, 1, -4, -3)}, ModularKind::Gamma0, 4);
        G.bfs_margin = 1.0;
    } else if (name == "gamma0_11") {
        G = make_group("Gamma0_11", {1, {}, 2},
                       {M(3, 1, 11, 4), M(5, 1, -11, -2), M(1, -1, 0, 1), M(23, -11, 44, -21)}, ModularKind::Gamma0, 11);
        G.bfs_margin = 4.0;
    } else if (name == "gamma4") {
        G = make_group("Gamma4", {0, {}, 6},
                       {M(1, -4, 0, 1), M(5, -4, 4, -3), M(1, 0, 4, 1), M(7, 4, -16, -9), M(3, 4, -4, -5), M(7, 16, -4, -9)},
                       ModularKind::Gamma, 4);
        G.bfs_margin = 2.0;
    } else {
        throw ValidationError("unknown group '" + name_in + "'");
    }
    return G;
}

inline const std::vector<std::string>& builtin_group_names() {
    static const std::vector<std::string> names{"PSL2Z", "Gamma2", "Gamma0_4", "Gamma0_11", "Gamma4"};
    return names;
}

// ---------------------------------------------------------------------------
// Coset enumeration for Gamma_i \ Gamma

struct CosetNode {
    Moebius gamma;
    std::int32_t parent = -1;    // tree parent, -1 for the root
    std::int32_t step = 0;       // signed generator index with gamma = parent * gen(step)
};

struct CosetEntry {
    std::int32_t node = 0;
    std::int32_t lead = 0;       // representative is T_i^{+lead} * nodes[node].gamma
    Moebius scaled;              // sigma_i^-1 * representative
    double norm2 = 0.0;          // c^2 + d^2 of scaled bottom row
};

struct CosetTable {
    int cusp = 0;
    double R = 1.0;
    double margin = 4.0;
    std::vector<CosetNode> nodes;
    std::vector<CosetEntry> entries;   // sorted by norm2, then bottom row
    std::size_t half = 0;              // entries with norm <= R/2 form a prefix

    std::size_t size() const { return entries.size(); }

    // Asymptotic constant A in N(rho) ~ A rho^2.
    double count_constant() const {
        double full = static_cast<double>(entries.size()) / (R * R);
        double h = static_cast<double>(half) / (0.25 * R * R);
        return std::max(full, h);
    }
};

namespace detail {

struct RowKey {
    std::int64_t c, d;
    bool operator==(const RowKey&) const = default;
};
struct RowKeyHash {
    std::size_t operator()(const RowKey& k) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(k.c) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(k.d) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

inline RowKey row_key(double c, double d, bool integral) {
    if (c < 0 || (c == 0 && d < 0)) { c = -c; d = -d; }
    if (std::abs(c) < 1e-12) { c = 0; d = std::abs(d); }
    double scale = integral ? 1.0 : 1e9;
    return {static_cast<std::int64_t>(std::llround(c * scale)), static_cast<std::int64_t>(std::llround(d * scale))};
}

inline bool entry_less(const CosetEntry& x, const CosetEntry& y) {
    if (x.norm2 != y.norm2) return x.norm2 < y.norm2;
    Moebius a = x.scaled.canonical(), b = y.scaled.canonical();
    if (a.c != b.c) return a.c < b.c;
    return a.d < b.d;
}

}  // namespace detail

inline CosetTable coset_reps(const GroupPresentation& G, int i, double R, std::optional<double> margin_opt = std::nullopt) {
    require(i >= 0 && i < G.signature.n, "cusp index out of range");
    require(R >= 1.0, "norm bound R must be >= 1");
    const Cusp& cu = G.cusps[i];
    const double margin = margin_opt.value_or(G.bfs_margin);
    require(margin >= 1.0, "BFS margin must be >= 1");
    const Moebius base_inv = cu.base.inverse();
    const double prune2 = (margin * R) * (margin * R) * (1 + 1e-12);
    const double keep2 = R * R * (1 + 1e-12);

    CosetTable T;
    T.cusp = i;
    T.R = R;
    T.margin = margin;

    std::unordered_map<detail::RowKey, std::int32_t, detail::RowKeyHash> seen;
    T.nodes.push_back({Moebius::identity(), -1, 0});
    {
        Moebius b = base_inv;
        seen.emplace(detail::row_key(b.c, b.d, G.integral), 0);
    }
    const int ng = G.num_gens();
    for (std::size_t head = 0; head < T.nodes.size(); ++head) {
        for (int k = 1; k <= ng; ++k) {
            for (int sgn : {1, -1}) {
                int step = sgn * k;
                if (T.nodes[head].step == -step) continue;
                Moebius g = T.nodes[head].gamma * G.gen(step);
                Moebius b = base_inv * g;
                double n2 = cu.width * (b.c * b.c + b.d * b.d);
                if (n2 > prune2) continue;
                auto key = detail::row_key(b.c, b.d, G.integral);
                if (seen.count(key)) continue;
                if (G.integral) {
                    // keep integer matrices exact
                    auto im = to_integral(g);
                    if (im) g = Moebius(static_cast<double>(im->a), static_cast<double>(im->b),
                                        static_cast<double>(im->c), static_cast<double>(im->d));
                }
                seen.emplace(key, static_cast<std::int32_t>(T.nodes.size()));
                T.nodes.push_back({g, static_cast<std::int32_t>(head), step});
            }
        }
    }
    const Moebius sig_inv = cu.sigma().inverse();
    for (std::size_t k = 0; k < T.nodes.size(); ++k) {
        Moebius b = base_inv * T.nodes[k].gamma;
        double n2 = cu.width * (b.c * b.c + b.d * b.d);
        if (n2 > keep2) continue;
        CosetEntry e;
        e.node = static_cast<std::int32_t>(k);
        e.scaled = sig_inv * T.nodes[k].gamma;
        e.norm2 = n2;
        T.entries.push_back(e);
    }
    std::sort(T.entries.begin(), T.entries.end(), detail::entry_less);
    const double half2 = 0.25 * R * R * (1 + 1e-12);
    T.half = static_cast<std::size_t>(std::partition_point(T.entries.begin(), T.entries.end(),
                                                           [&](const CosetEntry& e) { return e.norm2 <= half2; }) -
                                      T.entries.begin());
    return T;
}

// Same cosets, different representatives: each entry is moved by a random power of T_i.
inline CosetTable reselect(const GroupPresentation& G, const CosetTable& T, std::uint64_t seed, int max_shift = 3) {
    CosetTable out = T;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-max_shift, max_shift);
    const Moebius tp = G.positive_translation(T.cusp);
    const Moebius sig_inv = G.cusps[T.cusp].sigma().inverse();
    for (auto& e : out.entries) {
        int k = dist(rng);
        e.lead = k;
        Moebius p = Moebius::identity();
        Moebius step = k >= 0 ? tp : tp.inverse();
        for (int t = 0; t < std::abs(k); ++t) p = step * p;
        e.scaled = sig_inv * p * T.nodes[e.node].gamma;
    }
    return out;
}

inline Moebius representative(const GroupPresentation& G, const CosetTable& T, const CosetEntry& e) {
    Moebius r = T.nodes[e.node].gamma;
    Moebius tp = G.positive_translation(T.cusp);
    Moebius step = e.lead >= 0 ? tp : tp.inverse();
    for (int t = 0; t < std::abs(e.lead); ++t) r = step * r;
    return r;
}

inline Word node_word(const CosetTable& T, std::int32_t node) {
    Word w;
    for (std::int32_t k = node; T.nodes[k].parent >= 0; k = T.nodes[k].parent) w.push_back(T.nodes[k].step);
    std::reverse(w.begin(), w.end());
    return w;
}

// Streams scaled bottom rows (c, d) of sigma_i^-1 gamma over Gamma_i \ Gamma with c^2+d^2 <= R^2,
// by exact enumeration of coprime pairs. Modular subgroups only; no coset table is stored.
inline void for_each_modular_row(const GroupPresentation& G, int i, double R,
                                 const std::function<void(double c, double d)>& fn) {
    require(G.is_modular() && G.integral, "exact enumeration needs a built-in modular subgroup");
    require(i >= 0 && i < G.signature.n, "cusp index out of range");
    require(R >= 1.0, "norm bound R must be >= 1");
    const Cusp& cu = G.cusps[i];
    auto bi = to_integral(cu.base);
    require(bi.has_value(), "cusp scaling base is not integral");
    const IntMatrix base = *bi;
    const auto h = static_cast<std::int64_t>(std::llround(cu.width));
    const double sw = std::sqrt(cu.width);
    const double lim = R / sw;                    // bound for the unscaled row
    const double lim2 = lim * lim * (1 + 1e-12);
    const auto cmax = static_cast<std::int64_t>(std::floor(lim));
    auto in_group = [&](std::int64_t c, std::int64_t d) {
        IntMatrix m0 = complete_bottom_row(c, d);
        for (std::int64_t k = 0; k < h; ++k) {
            // base * T^k * m0
            std::int64_t a1 = m0.a + k * m0.c, b1 = m0.b + k * m0.d;
            IntMatrix p{base.a * a1 + base.b * m0.c, base.a * b1 + base.b * m0.d,
                        base.c * a1 + base.d * m0.c, base.c * b1 + base.d * m0.d};
            if (modular_member(G.modular, G.level, p)) return true;
        }
        return false;
    };
    if (in_group(0, 1)) fn(0.0, sw);
    for (std::int64_t c = 1; c <= cmax; ++c) {
        double rem = lim2 - static_cast<double>(c) * static_cast<double>(c);
        if (rem < 0) break;
        auto dmax = static_cast<std::int64_t>(std::floor(std::sqrt(rem)));
        for (std::int64_t d = -dmax; d <= dmax; ++d) {
            if (std::gcd(c, d) != 1) continue;
            if (static_cast<double>(c * c + d * d) > lim2) continue;
            if (in_group(c, d)) fn(sw * static_cast<double>(c), sw * static_cast<double>(d));
        }
    }
}

// ---------------------------------------------------------------------------
// Tiling of a fundamental region by translates of the standard modular domain

inline std::vector<Moebius> tiling(const GroupPresentation& G) {
    require(G.is_modular(), "tiling needs a finite-index subgroup of PSL2Z");
    const std::array<Moebius, 3> moves{Moebius(1, 1, 0, 1), Moebius(1, -1, 0, 1), Moebius(0, -1, 1, 0)};
    std::vector<Moebius> reps{Moebius::identity()};
    for (std::size_t head = 0; head < reps.size(); ++head) {
        for (const auto& x : moves) {
            Moebius h = reps[head] * x;
            bool fresh = true;
            for (const auto& r : reps) {
                if (G.contains(h * r.inverse())) { fresh = false; break; }
            }
            if (fresh) reps.push_back(h);
            require(reps.size() <= 100000, "tiling does not terminate (infinite index?)");
        }
    }
    return reps;
}

// Cusp width of the tile g F_std at g(infinity): least k > 0 with g T^k g^-1 in G.
inline int tile_width(const GroupPresentation& G, const Moebius& g) {
    for (int k = 1; k <= 100000; ++k) {
        if (G.contains(g * Moebius(1, k, 0, 1) * g.inverse())) return k;
    }
    throw ToleranceError("tile cusp width not found");
}

}  // namespace w2p

#endif
