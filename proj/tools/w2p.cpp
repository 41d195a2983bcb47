#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "jobs.hpp"

namespace {

void setup_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* lv = std::getenv("W2P_LOG")) spdlog::set_level(spdlog::level::from_str(lv));
    spdlog::set_pattern("[%l] %v");
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    w2p::cli::JobConfig c;
    CLI::App app{"w2p: weight-2 vector-valued Poincare series on Fuchsian groups"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* s) {
        s->add_option("--group", c.group, "builtin name, JSON file or inline JSON")->required();
        s->add_option("--threads", c.threads, "worker threads (0 = hardware)");
        s->add_option("--out", c.out, "write the result to this file");
        s->add_option("--format", c.format, "json or csv");
        s->add_option("--seed", c.seed, "seed for randomized point selection");
    };
    auto rep = [&](CLI::App* s) {
        s->add_option("--rep", c.rep, "representation: JSON file or inline JSON");
        s->add_option("--weights", c.weights, "rank-1 character by cusp weights, e.g. 1/2,3/4,3/4");
    };
    auto series = [&](CLI::App* s) {
        s->add_option("--R", c.R, "coset truncation radius");
        s->add_option("--margin", c.margin, "coset enumeration margin");
        s->add_option("--ladder", c.ladder, "s values for the limit, comma separated");
    };

    auto* gi = app.add_subcommand("group-info", "print generators, cusps and elliptic data");
    common(gi);

    auto* rc = app.add_subcommand("rep-check", "check a unitary representation and report its weights");
    common(rc);
    rep(rc);

    auto* se = app.add_subcommand("series-eval", "evaluate Poincare, q-series or Eisenstein series");
    common(se);
    rep(se);
    series(se);
    se->add_option("--kind", c.kind, "poincare | qseries | limit | eisenstein");
    se->add_option("--indices", c.indices, "multi-indices i,j,l separated by ;");
    se->add_option("--tau", c.tau, "points x,y separated by ;");
    se->add_option("--random-tau", c.random_tau, "add this many seeded random points");
    se->add_option("--s", c.s, "convergence parameter");
    se->add_option("--cusp", c.cusp, "cusp for the Eisenstein series (1-based)");

    auto* qe = app.add_subcommand("qexp", "Fourier coefficients at a cusp");
    common(qe);
    rep(qe);
    series(qe);
    qe->add_option("--form", c.form, "eta | poincare");
    qe->add_option("--indices", c.indices, "multi-index of the Poincare series");
    qe->add_option("--cusp", c.cusp, "cusp (1-based)");
    qe->add_option("--kmax", c.k_max, "highest coefficient");
    qe->add_option("--y0", c.y0, "sampling height");
    qe->add_option("--M", c.M, "number of samples");

    auto* gr = app.add_subcommand("gram", "Petersson Gram matrix of Poincare series");
    common(gr);
    rep(gr);
    series(gr);
    gr->add_option("--indices", c.indices, "multi-indices i,j,l separated by ;")->required();
    gr->add_option("--method", c.method, "unfolding | quadrature");
    gr->add_option("--Ycut", c.y_cut, "quadrature cutoff height");
    gr->add_option("--order", c.quad_order, "Gauss order per panel");
    gr->add_option("--y0", c.y0, "sampling height for unfolding");
    gr->add_option("--M", c.M, "samples for unfolding");
    gr->add_option("--tol", c.tol, "relative rank tolerance");

    auto* dm = app.add_subcommand("dim", "dimension formulas");
    common(dm);
    rep(dm);
    dm->add_option("--formula", c.formula, "ad | rank1-genus0 | regular | cusp | charvar");
    dm->add_option("--rank", c.rank, "rank for --flags");
    dm->add_option("--flags", c.flags, "full | trivial | multiplicities per point, e.g. 1,1;2");
    dm->add_option("--h0", c.h0, "dimension of invariants in weight 0");
    dm->add_option("--commutant", c.commutant, "dimension of the commutant");

    auto* bs = app.add_subcommand("basis", "choose Poincare series indices for a basis");
    common(bs);
    rep(bs);
    series(bs);
    bs->add_option("--dim", c.dim, "target dimension");
    bs->add_flag("--verify", c.verify, "check the rank of the Gram matrix");
    bs->add_option("--tol", c.tol, "relative rank tolerance");

    auto* co = app.add_subcommand("cocycle", "period cocycle of a form");
    common(co);
    rep(co);
    series(co);
    co->add_option("--form", c.form, "eta | poincare:i,j,l");
    co->add_option("--action", c.action, "left for Poincare series");
    co->add_option("--probes", c.probes, "base points x,y separated by ;");
    co->add_option("--tol", c.tol, "probe independence tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << w2p::cli::error_json(e.what(), 2) << "\n";
        return 2;
    }
    c.command = app.get_subcommands().front()->get_name();

    auto t0 = std::chrono::steady_clock::now();
    auto res = w2p::cli::run(c);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("{} finished in {:.3f} s with exit code {}", c.command, secs, res.exit_code);

    if (!res.output.empty()) {
        if (c.out.empty()) {
            std::cout << res.output;
        } else {
            std::ofstream f(c.out);
            if (!f) {
                std::cerr << w2p::cli::error_json("cannot write " + c.out, 2) << "\n";
                return 2;
            }
            f << res.output;
        }
    }
    if (!res.error.empty()) std::cerr << res.error << "\n";
    return res.exit_code;
}
