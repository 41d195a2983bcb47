#ifndef W2P_IO_HPP
#define W2P_IO_HPP

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dimensions.hpp"
#include "eichler.hpp"
#include "fuchsian.hpp"
#include "petersson.hpp"
#include "repdata.hpp"

namespace w2p::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Output: fixed field order, 17 significant digits.

inline std::string format_double(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e308" : "-1e308";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

inline void dump_to(std::string& out, const json& j, int indent, int depth) {
    auto nl = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(d * indent), ' ');
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) { out += "{}"; return; }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                nl(depth + 1);
                out += json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                dump_to(out, it.value(), indent, depth + 1);
            }
            nl(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) { out += "[]"; return; }
            bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat ? ", " : ",";
                first = false;
                if (!flat) nl(depth + 1);
                dump_to(out, e, indent, depth + 1);
            }
            if (!flat) nl(depth);
            out += ']';
            return;
        }
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

inline std::string dump(const json& j, int indent = 2) {
    std::string s;
    dump_to(s, j, indent, 0);
    return s;
}

inline json cplx_vec(const CVector& v) {
    json re = json::array(), im = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        re.push_back(v(k).real());
        im.push_back(v(k).imag());
    }
    return json{{"re", re}, {"im", im}};
}

inline json cplx_mat(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        json rr = json::array(), ii = json::array();
        for (Eigen::Index b = 0; b < m.cols(); ++b) {
            rr.push_back(m(a, b).real());
            ii.push_back(m(a, b).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return json{{"re", re}, {"im", im}};
}

inline json real_mat(const RMatrix& m) {
    json out = json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
        out.push_back(row);
    }
    return out;
}

inline json moebius_json(const Moebius& g) { return json::array({g.a, g.b, g.c, g.d}); }

inline json index_json(const MultiIndex& I) { return json::array({I.i, I.j, I.l}); }

inline json weights_json(const std::vector<double>& w) {
    json a = json::array();
    for (double x : w) a.push_back(x);
    return a;
}

inline json series_json(const SeriesValue& v) {
    json out;
    json c = cplx_vec(v.value);
    out["value_re"] = c["re"];
    out["value_im"] = c["im"];
    out["s"] = v.s;
    out["R"] = v.R;
    out["tail_bound"] = v.tail_bound;
    out["truncation_estimate"] = v.truncation_estimate;
    out["terms"] = v.terms;
    return out;
}

inline json signature_json(const Signature& s) {
    return json{{"g", s.g}, {"nu", s.nu}, {"n", s.n}};
}

inline json report_json(const DimensionReport& r) {
    json j;
    j["dim"] = r.dim;
    j["formula"] = r.formula;
    j["signature"] = signature_json(r.signature);
    j["rank"] = r.rank;
    j["raw_value"] = r.raw;
    j["floored"] = r.floored;
    j["h0_term"] = r.h0_term;
    j["genericity_assumed"] = r.genericity_assumed;
    j["exact_arithmetic"] = r.exact;
    if (r.dual_convention) j["expansion_convention_value"] = *r.dual_convention;
    j["discrepancy"] = r.discrepancy;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json gram_json(const GramMatrix& g, int rk, double min_eig) {
    json idx = json::array();
    for (const auto& I : g.indices) idx.push_back(index_json(I));
    json c = cplx_mat(g.G);
    json j;
    j["indices"] = idx;
    j["re"] = c["re"];
    j["im"] = c["im"];
    j["errors"] = real_mat(g.errors);
    j["method"] = g.method;
    j["asymmetry"] = g.asymmetry;
    j["error_budget"] = g.budget;
    j["rank"] = rk;
    j["min_eigenvalue"] = min_eig;
    return j;
}

// ---------------------------------------------------------------------------
// Input descriptors

inline double number(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            require(pos == s.size(), "malformed number '" + s + "'");
            return v;
        } catch (const std::logic_error&) {
            throw ValidationError("malformed number '" + s + "'");
        }
    }
    throw ValidationError("expected a number");
}

inline Moebius matrix4(const json& j) {
    require(j.is_array(), "matrix must be an array");
    std::vector<double> v;
    for (const auto& e : j) {
        if (e.is_array())
            for (const auto& x : e) v.push_back(number(x));
        else v.push_back(number(e));
    }
    require(v.size() == 4, "2x2 matrix needs 4 entries");
    return Moebius(v[0], v[1], v[2], v[3]);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("invalid JSON in '" + path + "': " + e.what());
    }
}

inline GroupPresentation group_from_json(const json& j) {
    try {
        if (j.contains("name")) return builtin_group(j.at("name").get<std::string>());
        require(j.contains("generators") && j.contains("signature"), "group descriptor needs name or generators+signature");
        const json& s = j.at("signature");
        Signature sig;
        sig.g = s.value("g", 0);
        sig.nu = s.value("nu", std::vector<int>{});
        sig.n = s.value("n", 1);
        std::vector<Moebius> gens;
        for (const auto& m : j.at("generators")) gens.push_back(matrix4(m));
        GroupPresentation G = make_group(j.value("label", std::string("custom")), sig, gens);
        G.bfs_margin = j.value("bfs_margin", 4.0);
        if (j.contains("sigma")) {
            const json& sg = j.at("sigma");
            require(sg.is_array() && static_cast<int>(sg.size()) == sig.n, "need one scaling map per cusp");
            for (int i = 0; i < sig.n; ++i) {
                Cusp& cu = G.cusps[i];
                cu.base = matrix4(sg[i]);
                cu.width = 1.0;
                Moebius c = cu.base.inverse() * G.gens[G.parabolic_gen(i)] * cu.base;
                require(std::abs(c.c) < 1e-9 && std::abs(std::abs(c.b / c.a) - 1.0) < 1e-9,
                        "scaling map must conjugate T to a unit translation");
                cu.sign = c.b / c.a > 0 ? 1 : -1;
                cu.at_infinity = std::abs(cu.base.c) < 1e-14;
                if (!cu.at_infinity) cu.point = cu.base.a / cu.base.c;
            }
            validate(G);
        }
        return G;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed group descriptor: ") + e.what());
    }
}

// Accepts a built-in name, a path to a JSON descriptor, or inline JSON.
inline GroupPresentation load_group(const std::string& source) {
    require(!source.empty(), "--group is required");
    if (!source.empty() && source[0] == '{') {
        try {
            return group_from_json(json::parse(source));
        } catch (const json::parse_error& e) {
            throw ValidationError(std::string("invalid group JSON: ") + e.what());
        }
    }
    std::ifstream probe(source);
    if (probe) return group_from_json(read_json_file(source));
    return builtin_group(source);
}

inline CMatrix complex_matrix(const json& j, int r) {
    require(j.is_array(), "image must be an array");
    std::vector<cplx> flat;
    auto entry = [](const json& e) {
        if (e.is_array()) {
            require(e.size() == 2, "complex entries are [re, im]");
            return cplx(number(e[0]), number(e[1]));
        }
        return cplx(number(e), 0.0);
    };
    // r*r entries is row-major flat; r rows of r entries is nested (r = 1 always reads as flat)
    bool nested = static_cast<int>(j.size()) == r && static_cast<int>(j.size()) != r * r &&
                  std::all_of(j.begin(), j.end(), [r](const json& row) {
                      return row.is_array() && static_cast<int>(row.size()) == r;
                  });
    if (nested) {
        for (const auto& row : j)
            for (const auto& e : row) flat.push_back(entry(e));
    } else {
        for (const auto& e : j) flat.push_back(entry(e));
    }
    require(static_cast<int>(flat.size()) == r * r, "image must have rank^2 entries");
    CMatrix m(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) m(a, b) = flat[static_cast<std::size_t>(a * r + b)];
    return m;
}

// Raw images without relation checks (for reporting).
inline std::map<std::string, CMatrix> rep_images_from_json(const json& j, int& rank) {
    try {
        rank = j.at("rank").get<int>();
        require(rank >= 1, "rank must be positive");
        std::map<std::string, CMatrix> named;
        for (auto it = j.at("images").begin(); it != j.at("images").end(); ++it)
            named[it.key()] = complex_matrix(it.value(), rank);
        return named;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed representation descriptor: ") + e.what());
    }
}

inline std::vector<double> parse_list(const std::string& s, char sep = ',') {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        if (tok.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            require(tok.find_first_not_of(" \t", pos) == std::string::npos, "malformed number '" + tok + "'");
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const ValidationError*>(&e)) throw;
            throw ValidationError("malformed number '" + tok + "'");
        }
    }
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep))
        if (tok.find_first_not_of(" \t") != std::string::npos) out.push_back(tok);
    return out;
}

inline UnitaryRep rep_from_json(const GroupPresentation& G, const json& j) {
    if (j.contains("weights")) {
        std::vector<double> w;
        for (const auto& x : j.at("weights")) w.push_back(number(x));
        std::vector<double> ew;
        if (j.contains("elliptic_weights"))
            for (const auto& x : j.at("elliptic_weights")) ew.push_back(number(x));
        return character(G, w, ew);
    }
    int r = 1;
    auto named = rep_images_from_json(j, r);
    return make_rep(G, r, named);
}

}  // namespace w2p::io

#endif
