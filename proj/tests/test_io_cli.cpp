#include "drmdp/cli.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace drmdp;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("drmdp_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::vector<std::string>& args) {
        out_.str("");
        err_.str("");
        return run_cli(args, out_, err_);
    }

    static std::string read(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

std::string strip_last_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string k, v;
    while (in >> k >> v) kv[k] = v;
    return kv;
}

} // namespace

TEST(Io, FormatNumber) {
    EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_number(kInfinity), "inf");
    EXPECT_EQ(format_number(-kInfinity), "-inf");
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST_F(Cli, ModelRoundTrip) {
    const MdpModel m = counterexample_model();
    save_model(path("m.json"), m, counterexample_true_dist());
    const ModelDocument d = load_model_document(path("m.json"));
    EXPECT_EQ(d.model, m);
    ASSERT_TRUE(d.true_dist.has_value());
    EXPECT_EQ(*d.true_dist, counterexample_true_dist());
    save_model(path("m2.json"), d.model, d.true_dist);
    EXPECT_EQ(read(path("m.json")), read(path("m2.json")));

    std::mt19937_64 gen(61);
    for (int rep = 0; rep < 10; ++rep) {
        const MdpModel r = oracle::random_model(gen, 4, 3, 3, 0.7);
        EXPECT_EQ(parse_model(model_to_json(r).dump()).model, r);
    }
}

TEST(Io, ParseErrors) {
    json doc = model_to_json(counterexample_model());
    auto message = [](const json& j) {
        try {
            parse_model(j.dump());
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    json missing = doc;
    missing.erase("discount");
    EXPECT_NE(message(missing).find("discount"), std::string::npos);

    json negative = doc;
    negative["costs"][0][3] = -1.0;
    EXPECT_NE(message(negative).find("negative"), std::string::npos);

    json out_of_range = doc;
    out_of_range["transitions"][0][3] = 9;
    EXPECT_NE(message(out_of_range).find("transitions[0]"), std::string::npos);

    json duplicate = doc;
    duplicate["costs"].push_back(doc["costs"][0]);
    EXPECT_NE(message(duplicate).find("duplicates"), std::string::npos);

    json gap = doc;
    gap["transitions"].erase(gap["transitions"].begin());
    EXPECT_NE(message(gap).find("missing transition"), std::string::npos);

    json bad_metric = doc;
    bad_metric["w_metric"] = json::array({json::array({0, 1}), json::array({2, 0})});
    EXPECT_NE(message(bad_metric).find("asymmetric"), std::string::npos);

    try {
        parse_model("{\n  \"states\": [\"a\",\n  ]\n}");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_model("/nonexistent/model.json"), ValidationError);
}

TEST_F(Cli, SolveAndRobustSolveAgreeAtZero) {
    ASSERT_EQ(run({"generate-inventory", "--out", path("inv.json"), "--true-dist", "0.2,0.5,0.2,0.1"}), 0);
    ASSERT_EQ(run({"solve", "--model", path("inv.json"), "--tol", "1e-11"}), 0);
    const std::string solve = out_.str();
    for (const char* k : {"tv", "kl", "wasserstein", "prokhorov"}) {
        ASSERT_EQ(run({"robust-solve", "--model", path("inv.json"), "--distance", k, "--epsilon", "0", "--tol", "1e-11"}), 0);
        EXPECT_EQ(out_.str(), solve) << k;
    }
    const MdpModel inv = load_model(path("inv.json"));
    const SolveResult r = value_iterate(inv, Distribution({0.2, 0.5, 0.2, 0.1}), 1e-11);
    EXPECT_NE(solve.find("0," + format_number(r.value[0]) + ","), std::string::npos);
}

TEST_F(Cli, Counterexample) {
    ASSERT_EQ(run({"counterexample", "--max-n", "12", "--enumerate"}), 0);
    std::istringstream in(out_.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "N,numerator,denominator,probability,enumerated");
    for (std::size_t n = 1; n <= 12; ++n) {
        ASSERT_TRUE(std::getline(in, line));
        const Rational r = counterexample_coverage_exact(n);
        EXPECT_EQ(line, std::to_string(n) + "," + std::to_string(r.num) + "," + std::to_string(r.den) + "," +
                            format_number(r.value()) + "," + r.str());
    }
    EXPECT_EQ(run({"counterexample", "--max-n", "61"}), 1);
}

TEST_F(Cli, RadiusAndGuarantees) {
    ASSERT_EQ(run({"radius", "--distance", "wasserstein", "--samples", "100", "--gamma", "0.1", "--dim-m", "3",
                   "--tail-a", "3", "--c1", "2", "--c2", "1"}),
              0);
    EXPECT_EQ(out_.str(), "epsilon 0.310575838246\n");
    ASSERT_EQ(run({"guarantees", "--lc", "1", "--lf", "0.5", "--c-sup", "1", "--alpha", "0.5", "--samples", "100"}), 0);
    const auto kv = key_values(out_.str());
    EXPECT_EQ(kv.at("eps_ub"), "0.075");
    EXPECT_EQ(kv.at("sample_complexity"), "8745");
    EXPECT_EQ(kv.at("window_nonempty"), "0");
    EXPECT_EQ(run({"radius", "--distance", "tv", "--samples", "10"}), 1);
    EXPECT_EQ(run({"radius", "--distance", "tv", "--samples", "10", "--radius-mode", "calibrated", "--true-dist",
                   "0.5,0.5"}),
              1);
    EXPECT_EQ(run({"radius", "--distance", "tv", "--samples", "10", "--radius-mode", "calibrated", "--true-dist",
                   "0.5,0.5", "--seed", "3"}),
              0);
}

TEST_F(Cli, DistanceAndWorstCase) {
    ASSERT_EQ(run({"distance", "--distance", "wasserstein", "--p", "1,0", "--q", "0,1", "--points", "0,2.5"}), 0);
    EXPECT_EQ(out_.str(), "distance 2.5\n");
    ASSERT_EQ(run({"worst-case", "--distance", "tv", "--center", "0.5,0.5", "--payoff", "0,1", "--epsilon", "0.2"}), 0);
    EXPECT_EQ(out_.str(), "value 0.7\nwitness 0.3,0.7\n");
    EXPECT_EQ(run({"worst-case", "--distance", "euclid", "--center", "0.5,0.5", "--payoff", "0,1"}), 1);
    EXPECT_EQ(run({"distance", "--distance", "tv", "--p", "0.5,0.6", "--q", "0,1"}), 1);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run({"solve", "--frobnicate"}), 1);
    EXPECT_FALSE(err_.str().empty());
    EXPECT_EQ(run({}), 1);
    EXPECT_EQ(run({"--help"}), 0);
    EXPECT_EQ(run({"solve", "--model", path("missing.json")}), 1);
    save_model(path("cx.json"), counterexample_model());
    EXPECT_EQ(run({"solve", "--model", path("cx.json")}), 1);
    EXPECT_EQ(run({"solve", "--model", path("cx.json"), "--dist", "0.5,0.5"}), 0);
    EXPECT_EQ(run({"evaluate", "--model", path("cx.json"), "--dist", "0.5,0.5", "--policy", "1,1,1,1,1"}), 0);
    EXPECT_EQ(out_.str(), "state,value\n0,7\n1,0\n2,0\n3,0\n4,0\n");
    EXPECT_EQ(run({"evaluate", "--model", path("cx.json"), "--dist", "0.5,0.5", "--policy", "3,3,1,1,1"}), 1);
    EXPECT_EQ(run({"coverage", "--model", path("cx.json"), "--true-dist", "0.5,0.5"}), 1);
    EXPECT_NE(err_.str().find("--seed"), std::string::npos);
}

TEST_F(Cli, ExperimentReportsReproducible) {
    save_model(path("cx.json"), counterexample_model(), counterexample_true_dist());
    for (const char* sub : {"coverage", "convergence", "rate", "ood"}) {
        std::vector<std::string> args{sub, "--model", path("cx.json"), "--distance", "wasserstein", "--samples", "20",
                                      "--trials", "30", "--calibration-trials", "200", "--seed", "17"};
        if (std::string(sub) == "ood") args.insert(args.end(), {"--true-dist", "0.4,0.6"});
        auto a = args, b = args;
        a.insert(a.end(), {"--out", path(std::string(sub) + "_a")});
        b.insert(b.end(), {"--out", path(std::string(sub) + "_b")});
        ASSERT_EQ(run(a), 0) << err_.str();
        ASSERT_EQ(run(b), 0) << err_.str();
        const std::string ca = read(path(std::string(sub) + "_a.csv")), cb = read(path(std::string(sub) + "_b.csv"));
        ASSERT_FALSE(ca.empty());
        EXPECT_EQ(ca.substr(0, ca.find('\n')), kCsvHeader);
        EXPECT_EQ(strip_last_column(ca), strip_last_column(cb)) << sub;
        const json ja = json::parse(read(path(std::string(sub) + "_a.json")));
        EXPECT_EQ(ja.at("experiment"), sub);
        EXPECT_EQ(ja.at("config").at("seed"), 17);
    }
}
