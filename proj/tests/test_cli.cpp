#include <gtest/gtest.h>

#include "jobs.hpp"

using namespace w2p;
using cli::JobConfig;

namespace {

const std::string kData = W2P_TEST_DATA;

JobConfig job(const std::string& cmd, const std::string& group) {
    JobConfig c;
    c.command = cmd;
    c.group = group;
    return c;
}

io::json parse(const cli::JobResult& r) { return io::json::parse(r.output); }

}  // namespace

TEST(Cli, GroupInfo) {
    auto r = cli::run(job("group-info", "gamma0_11"));
    ASSERT_EQ(r.exit_code, 0) << r.error;
    auto j = parse(r);
    EXPECT_EQ(j["signature"]["g"], 1);
    EXPECT_EQ(j["signature"]["n"], 2);
}

TEST(Cli, UnknownGroup) {
    auto r = cli::run(job("group-info", "gamma7"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(io::json::parse(r.error)["exit_code"], 2);
}

TEST(Cli, DimAd) {
    auto c = job("dim", "gamma2");
    c.formula = "ad";
    c.rank = 2;
    c.flags = "full";
    auto r = cli::run(c);
    ASSERT_EQ(r.exit_code, 0) << r.error;
    EXPECT_EQ(parse(r)["dim"], 0);
    c.format = "csv";
    EXPECT_EQ(cli::run(c).exit_code, 2);
}

TEST(Cli, DimRank1) {
    auto c = job("dim", "gamma2");
    c.formula = "rank1-genus0";
    c.weights = "1/2,3/4,3/4";
    auto r = cli::run(c);
    ASSERT_EQ(r.exit_code, 0) << r.error;
    EXPECT_EQ(parse(r)["dim"], 1);
    // weights that break the group relations
    c.weights = "1/3,1/4,1/4";
    EXPECT_EQ(cli::run(c).exit_code, 2);
}

TEST(Cli, RepCheck) {
    auto c = job("rep-check", "gamma2");
    c.rep = kData + "/gamma2_rank2.json";
    auto r = cli::run(c);
    ASSERT_EQ(r.exit_code, 0) << r.error;
    auto flat = parse(r);
    c.rep = kData + "/gamma2_rank2_nested.json";
    auto nested = cli::run(c);
    ASSERT_EQ(nested.exit_code, 0) << nested.error;
    EXPECT_EQ(parse(nested)["weights"], flat["weights"]);
    c.rep = kData + "/not_unitary.json";
    EXPECT_EQ(cli::run(c).exit_code, 3);
    c.rep = kData + "/missing.json";
    EXPECT_EQ(cli::run(c).exit_code, 2);
    c.rep = "{\"rank\": 2}";
    EXPECT_EQ(cli::run(c).exit_code, 2);
}

TEST(Cli, InadmissibleIndex) {
    auto c = job("series-eval", "gamma0_11");
    c.indices = "1,1,0";
    c.tau = "0.1,1";
    auto r = cli::run(c);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.error.find("inadmissible"), std::string::npos);
}

TEST(Cli, SeriesEvalDeterministic) {
    auto c = job("series-eval", "gamma2");
    c.rep = kData + "/gamma2_rank2.json";
    c.indices = "1,2,0;2,1,0";
    c.random_tau = 3;
    c.seed = 7;
    c.R = 40;
    auto a = cli::run(c);
    ASSERT_EQ(a.exit_code, 0) << a.error;
    EXPECT_EQ(cli::run(c).output, a.output);
    c.threads = 1;
    auto one = cli::run(c);
    c.threads = 4;
    EXPECT_EQ(cli::run(c).output, one.output);
    EXPECT_EQ(one.output, a.output);
    c.format = "csv";
    auto csv = cli::run(c);
    ASSERT_EQ(csv.exit_code, 0) << csv.error;
    EXPECT_NE(csv.output.find("\"[1,2,0]\""), std::string::npos);
}

TEST(Cli, QexpEta) {
    auto c = job("qexp", "gamma0_11");
    c.k_max = 4;
    auto r = cli::run(c);
    ASSERT_EQ(r.exit_code, 0) << r.error;
    auto co = parse(r)["coefficients"];
    ASSERT_GE(co.size(), 5u);
    const double want[] = {0, 1, -2, -1, 2};
    for (int k = 0; k < 5; ++k) {
        EXPECT_EQ(co[k]["k"], k);
        EXPECT_NEAR(co[k]["re"][0].get<double>(), want[k], std::max(1e-12, co[k]["error"].get<double>()));
        EXPECT_LT(co[k]["error"].get<double>(), 1e-4);
    }
}

TEST(Cli, GramAndBasis) {
    auto c = job("gram", "gamma2");
    c.weights = "1/2,3/4,3/4";
    c.indices = "1,1,0;2,1,0";
    c.R = 320;
    auto r = cli::run(c);
    ASSERT_EQ(r.exit_code, 0) << r.error;
    EXPECT_EQ(parse(r)["rank"], 1);

    auto b = job("basis", "gamma2");
    b.weights = "1/2,3/4,3/4";
    b.verify = true;
    b.R = 320;
    auto br = cli::run(b);
    ASSERT_EQ(br.exit_code, 0) << br.error;
    EXPECT_EQ(parse(br)["dim"], 1);
}

TEST(Cli, Cocycle) {
    auto r = cli::run(job("cocycle", "gamma0_11"));
    ASSERT_EQ(r.exit_code, 0) << r.error;
    auto j = parse(r);
    EXPECT_LT(j["probe_deviation"].get<double>(), 1e-8);

    auto c = job("cocycle", "gamma2");
    c.weights = "1/2,3/4,3/4";
    c.form = "poincare:1,1,0";
    c.R = 60;
    auto p = cli::run(c);
    ASSERT_EQ(p.exit_code, 0) << p.error;
    auto pj = parse(p);
    EXPECT_EQ(pj["action"], "left");
    EXPECT_LE(pj["probe_deviation"].get<double>(), pj["probe_tolerance"].get<double>());
    EXPECT_GT(pj["truncation_change"].get<double>(), 0.0);
    c.action = "adjoint";
    EXPECT_EQ(cli::run(c).exit_code, 2);
}

TEST(Cli, BadOptions) {
    auto c = job("dim", "gamma2");
    c.format = "xml";
    EXPECT_EQ(cli::run(c).exit_code, 2);
    c = job("frobnicate", "gamma2");
    EXPECT_EQ(cli::run(c).exit_code, 2);
    c = job("series-eval", "gamma2");
    c.indices = "1,1,0";
    c.tau = "0.1,-1";
    EXPECT_EQ(cli::run(c).exit_code, 2);
}
