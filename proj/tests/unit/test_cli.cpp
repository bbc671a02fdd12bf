#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "explore/json_codec.hpp"
#include "random_tables.hpp"
#include "service_harness.hpp"

using namespace explore;
using harness::Json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "explore");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
    return path.string();
}

}  // namespace

TEST(Cli, SummaryMedian) {
    harness::TempDir dir;
    const auto f = write_file(dir.path() / "f.csv", "x\n1\n2\n3\n4\n5\n");
    const auto r = run({"summary", "--input", f, "--column", "x"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["median"], 3.0);
    EXPECT_TRUE(r.err.empty());
}

TEST(Cli, UnknownSubcommand) {
    const auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, MissingRequiredFlag) {
    const auto r = run({"summary", "--input", "x.csv"});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("forecast"), std::string::npos);
}

TEST(Cli, CoreErrorsCarryCodes) {
    harness::TempDir dir;
    const auto f = write_file(dir.path() / "f.csv", "x,s\n1,a\n");
    auto r = run({"summary", "-i", f, "-c", "s"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("non_numeric_column"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
    r = run({"schema", "-i", (dir.path() / "absent.csv").string()});
    EXPECT_EQ(r.code, 1);
    r = run({"filter", "-i", f, "-p", "{broken"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("not valid JSON"), std::string::npos);
}

TEST(Cli, RandomWalkForecastIsFlat) {
    harness::TempDir dir;
    oracle::Rng rng(801);
    const auto x = oracle::random_walk(rng, 50);
    std::string csv = "year,v\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        csv += std::to_string(1970 + i) + "," + format_real(x[i]) + "\n";
    }
    const auto f = write_file(dir.path() / "rw.csv", csv);
    const auto r = run({"forecast", "--input", f, "--spec", "0,1,0", "--horizon", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    ASSERT_EQ(j["point"].size(), 3u);
    for (const auto& p : j["point"]) {
        EXPECT_EQ(p.get<double>(), x.back());
    }
    EXPECT_EQ(j["times"][0], "2020");
}

TEST(Cli, SvgAndTableOutputs) {
    harness::TempDir dir;
    const auto f = write_file(dir.path() / "f.csv", "x,y,g\n1,2,a\n2,4,b\n3,5,a\n");
    auto r = run({"hist", "-i", f, "-c", "x", "--bins", "3", "-o", "svg"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(oracle::well_formed_xml(r.out));
    EXPECT_EQ(r.out, run({"hist", "-i", f, "-c", "x", "--bins", "3", "-o", "svg"}).out);
    r = run({"plot", "-i", f, "--kind", "line", "--columns", "x,y", "-o", "svg"});
    EXPECT_TRUE(oracle::well_formed_xml(r.out));
    r = run({"counts", "-i", f, "-c", "g", "-o", "svg"});
    EXPECT_TRUE(oracle::well_formed_xml(r.out));
    r = run({"summary", "-i", f, "-c", "x", "-o", "svg"});
    EXPECT_EQ(r.code, 1);
    r = run({"summary", "-i", f, "-c", "y", "-o", "table"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("median"), std::string::npos);
    r = run({"filter", "-i", f, "-p", R"({"column":"g","op":"==","value":"a"})", "-o", "table"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("x"), std::string::npos);
}

TEST(Cli, SpecFromFile) {
    harness::TempDir dir;
    const auto f = write_file(dir.path() / "f.csv", "g,x\na,1\nb,2\na,3\n");
    const auto spec = write_file(dir.path() / "spec.json", R"({"group_keys":["g"],"measures":[{"column":"x","function":"sum"}]})");
    const auto r = run({"aggregate", "-i", f, "-s", "@" + spec});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["rows"], Json::parse(R"([["a",4],["b",2]])"));
}

TEST(CliProperty, JsonOutputEqualsServiceBody) {
    harness::TempDir dir;
    service::Service svc(harness::config_for(dir.path() / "store"));
    oracle::Rng rng(802);

    // Tabular subcommands on random tables.
    for (int i = 0; i < 25; ++i) {
        const auto t = oracle::random_table(rng);
        const auto csv = to_csv(t);
        const auto f = write_file(dir.path() / "t.csv", csv);
        const auto id = harness::body(harness::upload(svc, csv, "t.csv"))["id"].get<std::string>();
        const auto url = [&](const std::string& op) { return "/api/datasets/" + id + "/" + op; };
        auto same = [&](const std::vector<std::string>& args, const harness::Json& service_body) {
            const auto r = run(args);
            ASSERT_EQ(r.code, 0) << r.err;
            EXPECT_EQ(Json::parse(r.out), service_body) << args[0];
        };
        same({"schema", "-i", f}, harness::body(harness::get(svc, url("schema"))));
        const auto p = codec::encode(oracle::random_predicate(rng, t)).dump();
        same({"filter", "-i", f, "-p", p}, harness::body(harness::post(svc, url("filter"), "{\"predicate\":" + p + "}")));
        const auto cols = Json::array({t.columns().front().name()});
        same({"select", "-i", f, "--columns", cols.dump()},
             harness::body(harness::post(svc, url("select"), Json{{"columns", cols}})));
        const auto agg = codec::encode(oracle::random_aggregation(rng, t));
        same({"aggregate", "-i", f, "-s", agg.dump()}, harness::body(harness::post(svc, url("aggregate"), agg)));
        for (const auto& c : t.columns()) {
            same({"counts", "-i", f, "-c", c.name()},
                 harness::body(harness::post(svc, url("value_counts"), Json{{"column", c.name()}})));
            same({"plot", "-i", f, "--kind", "bar", "-c", c.name()},
                 harness::body(harness::post(svc, url("chart"), Json{{"kind", "bar"}, {"columns", {c.name()}}})));
            if (is_numeric(c.dtype())) {
                same({"summary", "-i", f, "-c", c.name()},
                     harness::body(harness::post(svc, url("summary"), Json{{"column", c.name()}})));
                same({"hist", "-i", f, "-c", c.name()},
                     harness::body(harness::post(svc, url("chart"), Json{{"kind", "histogram"}, {"columns", {c.name()}}})));
                same({"plot", "-i", f, "--kind", "scatter", "--columns", c.name() + "," + c.name()},
                     harness::body(harness::post(svc, url("chart"),
                                                 Json{{"kind", "scatter"}, {"columns", {c.name(), c.name()}}})));
            }
        }
    }

    // Series subcommands on a quarterly table.
    const auto x = oracle::simulate_arma(rng, {0.5}, {}, 48);
    std::string csv = "year,quarter,y\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        csv += std::to_string(1990 + i / 4) + "," + std::to_string(i % 4 + 1) + "," + format_real(x[i]) + "\n";
    }
    const auto f = write_file(dir.path() / "q.csv", csv);
    const auto id = harness::body(harness::upload(svc, csv, "q.csv"))["id"].get<std::string>();
    const auto url = [&](const std::string& op) { return "/api/datasets/" + id + "/" + op; };
    auto same = [&](const std::vector<std::string>& args, const harness::Json& service_body) {
        const auto r = run(args);
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(Json::parse(r.out), service_body) << args[0];
    };
    same({"ljungbox", "-i", f, "--max-lag", "6", "--fitdf", "1"},
         harness::body(harness::post(svc, url("ljung_box"), Json{{"max_lag", 6}, {"fitdf", 1}})));
    same({"ljungbox", "-i", f, "-s", "1,0,0"}, harness::body(harness::post(svc, url("ljung_box"), Json{{"spec", "1,0,0"}})));
    same({"ndiffs", "-i", f}, harness::body(harness::post(svc, url("ndiffs"), Json::object())));
    same({"diff", "-i", f, "--lag", "4", "--order", "2"},
         harness::body(harness::post(svc, url("diff"), Json{{"lag", 4}, {"order", 2}})));
    same({"fit", "-i", f, "-s", "1,0,1"}, harness::body(harness::post(svc, url("fit"), Json{{"spec", "1,0,1"}})));
    same({"fit", "-i", f}, harness::body(harness::post(svc, url("fit"), Json::object())));
    same({"forecast", "-i", f, "-s", "0,1,1", "-H", "8", "--levels", "0.5", "0.9"},
         harness::body(harness::post(svc, url("forecast"),
                                     Json{{"spec", "0,1,1"}, {"horizon", 8}, {"levels", {0.5, 0.9}}})));
    const auto spec = Json{{"value_col", "y"}, {"time", {{"start_year", 1}, {"start_period", 1}, {"frequency", 1}}}};
    same({"fit", "-i", f, "--series", spec.dump(), "-s", "1,0,0"},
         harness::body(harness::post(svc, url("fit"), Json{{"value_col", "y"},
                                                           {"time", spec["time"]},
                                                           {"spec", "1,0,0"}})));
}
