#ifndef W2P_TOOLS_JOBS_HPP
#define W2P_TOOLS_JOBS_HPP

#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <w2p/io.hpp>

namespace w2p::cli {

using io::json;

struct JobConfig {
    std::string command;
    std::string group;
    std::string rep;              // path or inline JSON
    std::string weights;          // rank-1 character shortcut "a,b,c"
    std::string kind = "poincare";
    std::string indices;          // "i,j,l;i,j,l"
    std::string tau;              // "x,y;x,y"
    int random_tau = 0;
    double s = 0.5;
    double R = 60.0;
    std::optional<double> margin;
    std::string ladder;
    double y_cut = 8.0;
    int quad_order = 16;
    double y0 = 1.0;
    int M = 16;
    int k_max = 4;
    int cusp = 1;                 // 1-based
    std::string method = "unfolding";
    std::string formula = "ad";
    int rank = 0;
    std::string flags;            // full | trivial | "1,1;2;..."
    std::optional<int> h0;
    std::optional<int> commutant;
    std::optional<int> dim;
    bool verify = false;
    std::string form = "eta";
    std::string action;
    std::string probes = "0,1;0.5,2";
    double tol = 1e-6;
    int threads = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
};

struct JobResult {
    int exit_code = 0;
    std::string output;       // what was written (or would be written) to the output
    std::string error;        // machine-readable error JSON
};

namespace detail {

inline std::vector<HPoint> parse_points(const std::string& s) {
    std::vector<HPoint> pts;
    for (const auto& tok : io::split(s, ';')) {
        auto v = io::parse_list(tok);
        require(v.size() == 2, "points are given as x,y");
        require(v[1] > 0, "point not in upper half-plane");
        pts.emplace_back(v[0], v[1]);
    }
    return pts;
}

inline std::vector<std::array<int, 3>> parse_indices(const std::string& s) {
    std::vector<std::array<int, 3>> out;
    for (const auto& tok : io::split(s, ';')) {
        auto v = io::parse_list(tok);
        require(v.size() == 3, "multi-indices are given as i,j,l");
        for (double x : v) require(x == std::floor(x), "multi-index entries must be integers");
        out.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])});
    }
    return out;
}

inline std::vector<double> ladder_of(const JobConfig& c) {
    if (c.ladder.empty()) return default_ladder();
    auto l = io::parse_list(c.ladder);
    validate_ladder(l);
    return l;
}

struct Context {
    GroupPresentation G;
    UnitaryRep rho;
    std::optional<std::vector<Rational>> exact_cusp_weights;
};

inline Context load_context(const JobConfig& c, bool need_rep = true) {
    Context ctx{io::load_group(c.group), {}, std::nullopt};
    if (!c.weights.empty()) {
        require(c.rep.empty(), "use either --rep or --weights");
        std::vector<Rational> ex;
        std::vector<double> w;
        for (const auto& tok : io::split(c.weights, ',')) {
            ex.push_back(parse_rational(tok));
            w.push_back(to_double(ex.back()));
        }
        for (const auto& x : ex) require(x >= 0 && x < 1, "weights must lie in [0,1)");
        require(static_cast<int>(w.size()) == ctx.G.signature.n,
                "--weights needs one weight per cusp");
        require(ctx.G.signature.m() == 0, "--weights only covers groups without elliptic points; use --rep");
        ctx.rho = character(ctx.G, w);
        ctx.exact_cusp_weights = ex;
    } else if (!c.rep.empty()) {
        json j = (c.rep[0] == '{') ? json::parse(c.rep) : io::read_json_file(c.rep);
        ctx.rho = io::rep_from_json(ctx.G, j);
    } else {
        require(!need_rep, "a representation is required (--rep or --weights)");
        ctx.rho = trivial_rep(ctx.G);
    }
    return ctx;
}

inline WeightSystem weights_of(const Context& ctx) {
    WeightSystem ws = weight_system(ctx.G, ctx.rho);
    if (ctx.exact_cusp_weights)
        for (std::size_t i = 0; i < ctx.exact_cusp_weights->size(); ++i)
            ws.points[i].exact = std::vector<Rational>{(*ctx.exact_cusp_weights)[i]};
    return ws;
}

inline json point_weights_json(const WeightSystem& ws, const GroupPresentation& G) {
    json a = json::array();
    for (std::size_t p = 0; p < ws.points.size(); ++p) {
        const auto& pw = ws.points[p];
        json e;
        e["point"] = pw.elliptic ? G.gen_names[G.elliptic_gen(static_cast<int>(p) - G.signature.n)]
                                 : G.gen_names[G.parabolic_gen(static_cast<int>(p))];
        e["elliptic"] = pw.elliptic;
        if (pw.elliptic) e["nu"] = pw.nu;
        e["orientation"] = pw.sign;
        e["weights"] = io::weights_json(pw.datum.W);
        e["expansion_exponents"] = io::weights_json(pw.expansion.W);
        e["multiplicities"] = pw.datum.multiplicities;
        e["zero_weights"] = pw.datum.s;
        a.push_back(e);
    }
    return a;
}

inline std::vector<MultiIndex> indices_of(const JobConfig& c, const WeightSystem& ws) {
    std::vector<MultiIndex> out;
    for (auto [i, j, l] : parse_indices(c.indices)) out.push_back(make_index(ws, i, j, l));
    return out;
}

inline WeightSystem flag_weights(const Signature& sig, int r, const std::string& flags) {
    std::vector<std::vector<int>> mult;
    if (flags == "full" || flags == "trivial") {
        for (int p = 0; p < sig.n + sig.m(); ++p) {
            int cap = p < sig.n ? r : std::min(r, sig.nu[p - sig.n]);
            std::vector<int> m;
            if (flags == "trivial") m = {r};
            else {
                // as many distinct weights as the point allows
                for (int k = 0; k < cap; ++k) m.push_back(r / cap + (k < r % cap ? 1 : 0));
            }
            mult.push_back(m);
        }
    } else {
        for (const auto& tok : io::split(flags, ';')) {
            std::vector<int> m;
            for (double x : io::parse_list(tok)) m.push_back(static_cast<int>(x));
            mult.push_back(m);
        }
    }
    return weight_system_from_multiplicities(sig, r, mult);
}

inline std::string csv_gram(const GramMatrix& g) {
    std::ostringstream os;
    os << "row,col,re,im,error\n";
    for (Eigen::Index a = 0; a < g.size(); ++a)
        for (Eigen::Index b = 0; b < g.size(); ++b)
            os << a + 1 << ',' << b + 1 << ',' << io::format_double(g.G(a, b).real()) << ','
               << io::format_double(g.G(a, b).imag()) << ',' << io::format_double(g.errors(a, b)) << '\n';
    return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline json cmd_group_info(const JobConfig& c) {
    GroupPresentation G = io::load_group(c.group);
    json j;
    j["name"] = G.name;
    j["signature"] = io::signature_json(G.signature);
    json gens = json::object();
    for (int k = 0; k < G.num_gens(); ++k) gens[G.gen_names[k]] = io::moebius_json(G.gens[k]);
    j["generators"] = gens;
    json cusps = json::array();
    for (const auto& cu : G.cusps) {
        json e;
        if (cu.at_infinity) e["cusp"] = "infinity";
        else e["cusp"] = cu.point;
        e["width"] = cu.width;
        e["orientation"] = cu.sign;
        e["sigma"] = io::moebius_json(cu.sigma());
        cusps.push_back(e);
    }
    j["cusps"] = cusps;
    json ell = json::array();
    for (const auto& e : G.elliptic) {
        ell.push_back(json{{"point", json::array({e.point.x, e.point.y})},
                           {"order", e.order},
                           {"rotation", e.rotation},
                           {"phi", io::moebius_json(e.phi)}});
    }
    j["elliptic_points"] = ell;
    json rel = json::array();
    for (const auto& w : G.relations()) rel.push_back(G.eval(w).distance(Moebius::identity()));
    j["relation_residuals"] = rel;
    if (G.is_modular()) {
        auto t = tiling(G);
        j["index_in_PSL2Z"] = t.size();
        json tiles = json::array();
        for (const auto& g : t) tiles.push_back(io::moebius_json(g));
        j["tiling"] = tiles;
    }
    return j;
}

inline std::pair<json, int> cmd_rep_check(const JobConfig& c) {
    GroupPresentation G = io::load_group(c.group);
    UnitaryRep rho;
    if (!c.weights.empty()) {
        rho = detail::load_context(c).rho;
    } else {
        require(!c.rep.empty(), "rep-check needs --rep or --weights");
        json jr = (c.rep[0] == '{') ? json::parse(c.rep) : io::read_json_file(c.rep);
        if (jr.contains("weights")) {
            rho = io::rep_from_json(G, jr);
        } else {
            int r = 1;
            auto named = io::rep_images_from_json(jr, r);
            rho.rank = r;
            rho.images.assign(G.num_gens(), CMatrix::Identity(r, r));
            std::vector<bool> given(G.num_gens(), false);
            for (const auto& [nm, m] : named) {
                int k = G.gen_index(nm);
                require(k >= 0, "unknown generator name '" + nm + "'");
                rho.images[k] = m;
                given[k] = true;
            }
            int last = G.parabolic_gen(G.signature.n - 1);
            for (int k = 0; k < G.num_gens(); ++k) require(given[k] || k == last, "missing image for " + G.gen_names[k]);
            if (!given[last]) {
                Word prefix = G.long_relation();
                prefix.pop_back();
                rho.images[last] = rho.eval(prefix).adjoint();
            }
        }
    }
    RepCheck rc = check_rep(G, rho);
    json j;
    j["rank"] = rho.rank;
    j["max_unitarity_defect"] = rc.max_unitarity_defect;
    j["long_relation_residual"] = rc.long_relation_residual;
    j["elliptic_residuals"] = rc.elliptic_residuals;
    bool pass = rc.ok();
    j["pass"] = pass;
    if (pass) {
        j["commutant_dim"] = commutant_dim(rho);
        j["irreducible"] = is_irreducible(rho);
        j["points"] = detail::point_weights_json(weight_system(G, rho), G);
    }
    return {j, pass ? 0 : 3};
}

inline std::pair<json, std::string> cmd_series_eval(const JobConfig& c) {
    auto ctx = detail::load_context(c, c.kind == "eisenstein");
    std::vector<HPoint> pts = c.tau.empty() ? std::vector<HPoint>{} : detail::parse_points(c.tau);
    if (c.random_tau > 0) {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.5, 2.0);
        for (int k = 0; k < c.random_tau; ++k) {
            double x = ux(rng);
            double y = uy(rng);
            pts.emplace_back(x, y);
        }
    }
    require(!pts.empty(), "no evaluation points (--tau or --random-tau)");
    json recs = json::array();
    std::ostringstream csv;
    csv << "index,x,y,coord,re,im,tail_bound\n";
    auto emit = [&](const json& idx, const HPoint& t, const SeriesValue& v) {
        json r;
        r["index"] = idx;
        r["tau"] = json::array({t.x, t.y});
        json sj = io::series_json(v);
        for (auto& [k, val] : sj.items()) r[k] = val;
        recs.push_back(r);
        for (Eigen::Index q = 0; q < v.value.size(); ++q)
            csv << '"' << idx.dump() << "\"," << io::format_double(t.x) << ',' << io::format_double(t.y) << ',' << q + 1 << ','
                << io::format_double(v.value(q).real()) << ',' << io::format_double(v.value(q).imag()) << ','
                << io::format_double(v.tail_bound) << '\n';
    };
    if (c.kind == "eisenstein") {
        int i = c.cusp - 1;
        require(i >= 0 && i < ctx.G.signature.n, "cusp index out of range");
        for (const auto& t : pts) emit(json(c.cusp), t, eisenstein(ctx.G, i, t, c.s, c.R));
    } else {
        require(c.kind == "poincare" || c.kind == "qseries" || c.kind == "limit", "unknown series kind '" + c.kind + "'");
        PoincareEngine E(ctx.G, ctx.rho, c.R, c.margin);
        auto idx = detail::indices_of(c, E.weights());
        require(!idx.empty(), "--indices is required");
        auto ladder = detail::ladder_of(c);
        for (const auto& I : idx) {
            SeriesKernel K = E.kernel(I);
            for (const auto& t : pts) {
                SeriesValue v = c.kind == "poincare" ? poincare_s(K, t, c.s)
                                : c.kind == "qseries" ? q_series_s(K, t, c.s)
                                                      : poincare_limit(K, t, ladder);
                emit(io::index_json(I), t, v);
            }
        }
    }
    json j;
    j["kind"] = c.kind;
    j["group"] = ctx.G.name;
    j["records"] = recs;
    return {j, csv.str()};
}

inline std::pair<json, std::string> cmd_qexp(const JobConfig& c) {
    auto ctx = detail::load_context(c, c.form != "eta");
    WeightSystem ws = detail::weights_of(ctx);
    VectorForm f;
    json src;
    std::shared_ptr<PoincareEngine> E;
    auto form_error = std::make_shared<double>(0.0);
    if (c.form == "eta") {
        require(ctx.G.name == "Gamma0_11", "the eta form lives on Gamma0_11");
        f = eta_form_evaluator();
        src = "eta";
    } else {
        E = std::make_shared<PoincareEngine>(ctx.G, ctx.rho, c.R, c.margin);
        auto idx = detail::indices_of(c, E->weights());
        require(idx.size() == 1, "qexp expands one Poincare series: give exactly one index");
        f = limit_form(std::make_shared<SeriesKernel>(E->kernel(idx[0])), detail::ladder_of(c));
        src = io::index_json(idx[0]);
    }
    QExpansion q = qexp_coeffs(f, ctx.G, ws, c.cusp - 1, c.k_max, c.y0, c.M);
    json j;
    j["form"] = src;
    j["cusp"] = c.cusp;
    j["y0"] = q.y0;
    j["M"] = q.M;
    j["W"] = io::weights_json(q.W);
    j["U"] = io::cplx_mat(q.U);
    json co = json::array();
    std::ostringstream csv;
    csv << "k,coord,re,im,error\n";
    for (std::size_t k = 0; k < q.coeffs.size(); ++k) {
        json e = io::cplx_vec(q.coeffs[k]);
        e["k"] = k;
        e["error"] = q.errors[k];
        co.push_back(e);
        for (Eigen::Index r = 0; r < q.coeffs[k].size(); ++r)
            csv << k << ',' << r + 1 << ',' << io::format_double(q.coeffs[k](r).real()) << ','
                << io::format_double(q.coeffs[k](r).imag()) << ',' << io::format_double(q.errors[k]) << '\n';
    }
    j["coefficients"] = co;
    j["alias_estimate"] = q.alias_estimate;
    return {j, csv.str()};
}

inline std::tuple<json, std::string, int> cmd_gram(const JobConfig& c) {
    auto ctx = detail::load_context(c);
    PoincareEngine E(ctx.G, ctx.rho, c.R, c.margin);
    auto idx = detail::indices_of(c, E.weights());
    GramParams p;
    p.ladder = detail::ladder_of(c);
    p.y0 = c.y0;
    p.M = c.M;
    p.quad.y_cut = c.y_cut;
    p.quad.order = c.quad_order;
    GramMatrix g = gram(E, idx, c.method, p);
    int rk = rank(g, c.tol);
    double me = smallest_eigenvalue(g);
    json j = io::gram_json(g, rk, me);
    bool ok = g.asymmetry <= 2.0 * g.budget + 1e-300 && me >= -g.budget;
    j["consistent"] = ok;
    return {j, detail::csv_gram(g), ok ? 0 : 3};
}

inline json cmd_dim(const JobConfig& c) {
    GroupPresentation G = io::load_group(c.group);
    const Signature& sig = G.signature;
    WeightSystem ws;
    int r = 1;
    int commutant = c.commutant.value_or(1);
    if (!c.flags.empty()) {
        require(c.rank >= 1, "--flags needs --rank");
        require(c.formula == "ad" || c.formula == "charvar", "--flags only determines the ad and charvar formulas");
        r = c.rank;
        ws = detail::flag_weights(sig, r, c.flags);
    } else {
        auto ctx = detail::load_context(c);
        ws = detail::weights_of(ctx);
        r = ctx.rho.rank;
        if (!c.commutant) commutant = commutant_dim(ctx.rho);
    }
    if (c.formula == "ad") return io::report_json(dim_cusp_ad(sig, r, ws, commutant));
    if (c.formula == "rank1-genus0") return io::report_json(dim_rank1_genus0(sig, ws));
    if (c.formula == "regular") return io::report_json(dim_regular(sig, r, ws, c.h0));
    if (c.formula == "cusp") return io::report_json(dim_cusp(sig, r, ws, c.h0));
    if (c.formula == "charvar") {
        json j;
        j["dim"] = char_variety_dim(sig, r, ws);
        j["formula"] = "charvar";
        j["signature"] = io::signature_json(sig);
        j["rank"] = r;
        j["twice_ad"] = 2 * dim_cusp_ad(sig, r, ws, 1).raw;
        return j;
    }
    throw ValidationError("unknown formula '" + c.formula + "'");
}

inline std::pair<json, int> cmd_basis(const JobConfig& c) {
    auto ctx = detail::load_context(c);
    WeightSystem ws = detail::weights_of(ctx);
    const Signature& sig = ctx.G.signature;
    require(sig.g == 0, "basis selection needs genus 0");
    int d;
    json j;
    if (c.dim) {
        d = *c.dim;
    } else {
        require(ctx.rho.rank == 1, "give --dim for rank > 1");
        auto rep = dim_rank1_genus0(sig, ws);
        d = rep.dim;
        j["dimension_report"] = io::report_json(rep);
    }
    auto idx = basis_indices(d, sig.n, ctx.rho.rank, ws);
    json a = json::array();
    for (const auto& I : idx) a.push_back(io::index_json(I));
    j["dim"] = d;
    j["indices"] = a;
    int code = 0;
    if (c.verify && !idx.empty()) {
        PoincareEngine E(ctx.G, ctx.rho, c.R, c.margin);
        GramParams p;
        p.ladder = detail::ladder_of(c);
        p.y0 = c.y0;
        p.M = c.M;
        GramMatrix g = gram(E, idx, "unfolding", p);
        int rk = rank(g, c.tol);
        j["gram"] = io::gram_json(g, rk, smallest_eigenvalue(g));
        j["verified"] = rk == d;
        code = rk == d ? 0 : 3;
    }
    return {j, code};
}

inline json cmd_cocycle(const JobConfig& c) {
    auto ctx = detail::load_context(c, c.form != "eta");
    auto probes = detail::parse_points(c.probes);
    require(probes.size() >= 2, "give at least two probe points");
    UnitaryRep base = ctx.rho;
    CocycleResult res;
    double check = c.tol;
    std::optional<double> change;
    if (c.form == "eta") {
        require(ctx.G.name == "Gamma0_11", "the eta form lives on Gamma0_11");
        require(ctx.rho.rank == 1, "the eta form is scalar");
        require(c.action.empty() || c.action == "adjoint", "the eta cocycle uses the adjoint action");
        res = cocycle_of(column_form(eta_form_evaluator()), base, ctx.G, probes, CocycleAction::Adjoint, 1e-11, c.tol);
    } else if (c.form.rfind("poincare:", 0) == 0) {
        require(c.action.empty() || c.action == "left", "Poincare series cocycles use the left action");
        auto period = [&](double R) {
            PoincareEngine E(ctx.G, ctx.rho, R, c.margin);
            JobConfig ci = c;
            ci.indices = c.form.substr(9);
            auto idx = detail::indices_of(ci, E.weights());
            require(idx.size() == 1, "give one multi-index after poincare:");
            auto vf = limit_form(std::make_shared<SeriesKernel>(E.kernel(idx[0])), detail::ladder_of(c));
            return cocycle_of(column_form(vf), base, ctx.G, probes, CocycleAction::Left, 1e-11,
                              std::numeric_limits<double>::infinity());
        };
        res = period(c.R);
        // a truncated series is automorphic only up to its truncation error: compare with radius R/2
        CocycleResult half = period(0.5 * c.R);
        double d = 0.0;
        for (std::size_t k = 0; k < res.cocycle.values.size(); ++k)
            d = std::max(d, (res.cocycle.values[k] - half.cocycle.values[k]).norm());
        change = d;
        check = std::max(c.tol, 4.0 * d);
        if (res.probe_deviation > check)
            throw ToleranceError("cocycle depends on the probe point beyond the truncation change");
    } else {
        throw ValidationError("unknown form '" + c.form + "' (eta | poincare:i,j,l)");
    }
    const CocycleAction act = res.cocycle.action;
    json vals = json::object();
    for (std::size_t k = 0; k < res.cocycle.values.size(); ++k)
        vals[res.cocycle.names[k]] = io::cplx_mat(res.cocycle.values[k]);
    json j;
    j["form"] = c.form;
    j["action"] = act == CocycleAction::Adjoint ? "adjoint" : "left";
    j["values"] = vals;
    j["probe_deviation"] = res.probe_deviation;
    j["probe_tolerance"] = check;
    if (change) j["truncation_change"] = *change;
    j["integration_error"] = res.integration_error;
    j["relation_residual"] = cocycle_relation_residual(res.cocycle, ctx.G);
    j["parabolicity_residuals"] = parabolicity_residual(res.cocycle, ctx.G);
    if (act == CocycleAction::Adjoint) {
        auto sh = shimura_map(res.cocycle);
        json sv = json::object();
        for (std::size_t k = 0; k < sh.values.size(); ++k) sv[sh.names[k]] = io::cplx_mat(sh.values[k]);
        j["shimura"] = sv;
    }
    return j;
}

inline std::string error_json(const std::string& msg, int code) {
    json j;
    j["error"] = msg;
    j["exit_code"] = code;
    return io::dump(j, -1);
}

inline JobResult run(const JobConfig& c) {
    JobResult res;
    try {
        require(c.format == "json" || c.format == "csv", "--format must be json or csv");
        require(c.threads >= 0, "--threads must be nonnegative");
        set_threads(c.threads);
        json j;
        std::string csv;
        int code = 0;
        if (c.command == "group-info") j = cmd_group_info(c);
        else if (c.command == "rep-check") std::tie(j, code) = cmd_rep_check(c);
        else if (c.command == "series-eval") std::tie(j, csv) = cmd_series_eval(c);
        else if (c.command == "qexp") std::tie(j, csv) = cmd_qexp(c);
        else if (c.command == "gram") std::tie(j, csv, code) = cmd_gram(c);
        else if (c.command == "dim") j = cmd_dim(c);
        else if (c.command == "basis") std::tie(j, code) = cmd_basis(c);
        else if (c.command == "cocycle") j = cmd_cocycle(c);
        else throw ValidationError("unknown command '" + c.command + "'");
        if (c.format == "csv") {
            require(!csv.empty(), "csv output is only available for tables (series-eval, qexp, gram)");
            res.output = csv;
        } else {
            res.output = io::dump(j) + "\n";
        }
        res.exit_code = code;
        if (code == 3) res.error = error_json("numerical consistency check failed", 3);
    } catch (const ValidationError& e) {
        res.exit_code = 2;
        res.error = error_json(e.what(), 2);
    } catch (const json::exception& e) {
        res.exit_code = 2;
        res.error = error_json(std::string("invalid JSON: ") + e.what(), 2);
    } catch (const ToleranceError& e) {
        res.exit_code = 3;
        res.error = error_json(e.what(), 3);
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.error = error_json(std::string("internal error: ") + e.what(), 1);
    }
    return res;
}

}  // namespace w2p::cli

#endif
