#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "splinetool/cli/commands.hpp"
#include "support/oracles.hpp"

using namespace splinetool;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::path(::testing::TempDir()) /
               ("splinetool_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = path(name);
        io::write_text_file(p, content);
        return p;
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::vector<std::string>& args) {
        out_.str("");
        err_.str("");
        return cli::run_cli(args, out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

const char* kGradientModel = R"({"bank":{"kernels":[{"rows":1,"cols":2,"taps":[-1,1]},{"rows":2,"cols":1,"taps":[-1,1]}],
  "boundary":"circular"},"profile":PROFILE,"alphas":[1,1],"mode":"MODE"})";

std::string model(const std::string& profile, const std::string& mode) {
    std::string m = kGradientModel;
    m.replace(m.find("PROFILE"), 7, profile);
    m.replace(m.find("MODE"), 4, mode);
    return m;
}

} // namespace

TEST_F(Cli, FitTwoPointFeasible) {
    const std::string p = file("p.json", R"({"data":[[0,0],[1,1]],"lambda":1,"bounds":{"s_min":0,"s_max":2}})");
    ASSERT_EQ(run({"fit", p, "-o", path("r.json")}), 0) << err_.str();
    const io::Json r = io::read_json_file(path("r.json"));
    EXPECT_NEAR(r["objective"].get<double>(), 0.0, 1e-12);
    EXPECT_TRUE(r["converged"].get<bool>());
    (void)io::result_from_json(r);
}

TEST_F(Cli, FitMalformedNamesField) {
    const std::string p = file("p.json", R"({"data":[[0,0],[1,1]],"lambda":"big"})");
    EXPECT_EQ(run({"fit", p}), 2);
    EXPECT_NE(err_.str().find("problem.lambda"), std::string::npos) << err_.str();
    EXPECT_EQ(run({"fit", file("q.json", "{\"data\": [")}), 2);
    EXPECT_EQ(run({"fit", path("missing.json")}), 2);
    EXPECT_EQ(run({"fit"}), 2);
    EXPECT_EQ(run({"nonsense"}), 2);
}

TEST_F(Cli, FitLargeLambdaIsAffineLimit) {
    const std::string p = file("p.json", R"({"data":[[0,0],[1,2],[2,1],[3,3]],"lambda":1e8})");
    ASSERT_EQ(run({"fit", p, "-o", path("r.json"), "--plot-csv", path("plot.csv")}), 0) << err_.str();
    const io::Json r = io::read_json_file(path("r.json"));
    EXPECT_LE(r["reg_term"].get<double>(), 1e-6);
    const std::string csv = io::read_file_bytes(path("plot.csv"));
    EXPECT_EQ(csv.substr(0, 18), "x,fitted,residual\n");
}

TEST_F(Cli, FitFlagOverrides) {
    const std::string p = file("p.json", R"({"data":[[0,0],[1,1],[2,0]],"lambda":0})");
    ASSERT_EQ(run({"fit", p, "-o", path("r.json"), "--smin", "-0.25", "--smax=0.25", "--lambda", "0.5"}), 0) << err_.str();
    const FitResult r = io::result_from_json(io::read_json_file(path("r.json")));
    EXPECT_LE(r.max_slope_violation, 0.0);
    const SlopeVector s = slopes(r.spline);
    for (std::size_t n = 0; n < s.size(); ++n) EXPECT_LE(std::abs(s[n]), 0.25 + 1e-12);
}

TEST_F(Cli, FitNonConvergenceStillWritesResult) {
    const std::string p = file("p.json", R"({"data":[[0,0],[1,2],[2,1],[3,3]],"lambda":0.3,"bounds":{"s_min":0,"s_max":1}})");
    EXPECT_EQ(run({"fit", p, "-o", path("r.json"), "--max-iters", "2"}), 3);
    const FitResult r = io::result_from_json(io::read_json_file(path("r.json")));
    EXPECT_FALSE(r.converged);
    EXPECT_LE(r.max_slope_violation, 1e-12);
}

TEST_F(Cli, ProjectExamples) {
    const std::string s = file("s.json", R"({"t":[0,1,2],"f":[0,2,1]})");
    ASSERT_EQ(run({"project", s, "--smin", "0", "--smax", "1", "-o", path("o.json")}), 0) << err_.str();
    const NodalSpline out = io::spline_from_json(io::read_json_file(path("o.json")));
    EXPECT_NEAR(out.value(0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(out.value(1), 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(out.value(2), 4.0 / 3.0, 1e-15);

    const std::string b = file("b.json", R"({"s_min":-3,"s_max":"+inf"})");
    ASSERT_EQ(run({"project", s, "--bounds", b, "-o", path("same.json")}), 0);
    const NodalSpline same = io::spline_from_json(io::read_json_file(path("same.json")));
    EXPECT_EQ(same, io::spline_from_json(io::read_json_file(s)));

    EXPECT_EQ(run({"project", s, "--smin", "1", "--smax", "1"}), 2);
    EXPECT_EQ(run({"project", s, "--smin", "2", "--smax", "1"}), 2);
    EXPECT_EQ(run({"project", s, "--smin", "abc"}), 2);
}

TEST_F(Cli, PotentialExamples) {
    const std::string id = file("id.json", R"({"t":[-1,1],"f":[-1,1]})");
    ASSERT_EQ(run({"potential", id, "--mode", "derivative", "-o", path("phi.json")}), 0) << err_.str();
    const PwQuadPotential phi = io::potential_from_json(io::read_json_file(path("phi.json")));
    for (double y : {-3.0, -0.5, 0.0, 2.0}) EXPECT_NEAR(phi(y), 0.5 * y * y, 1e-14);

    const std::string soft = file("soft.json", R"({"t":[-2,-1,1,2],"f":[-1,0,0,1]})");
    ASSERT_EQ(run({"potential", soft, "--mode", "prox", "-o", path("abs.json"), "--plot-csv", path("phi.csv")}), 0);
    const PwQuadPotential abs_phi = io::potential_from_json(io::read_json_file(path("abs.json")));
    for (double y : {-3.0, -0.5, 0.0, 2.0}) EXPECT_NEAR(abs_phi(y), std::abs(y), 1e-14);

    const std::string dec = file("dec.json", R"({"t":[0,1],"f":[1,0]})");
    EXPECT_EQ(run({"potential", dec, "--mode", "prox"}), 4);
    EXPECT_EQ(run({"potential", dec, "--mode", "sideways"}), 2);
}

TEST_F(Cli, ProxReweightAndOracle) {
    const std::string soft = file("soft.json", R"({"t":[-2,-1,1,2],"f":[-1,0,0,1]})");
    ASSERT_EQ(run({"prox-reweight", soft, "--lambda", "2", "-o", path("rw.json")}), 0) << err_.str();
    const PwlCurve rw = io::curve_from_json(io::read_json_file(path("rw.json")));
    EXPECT_EQ(rw, PwlCurve::make({{-3, -1}, {-2, 0}, {2, 0}, {3, 1}}));
    EXPECT_EQ(run({"prox-reweight", soft}), 2);
    EXPECT_EQ(run({"prox-reweight", soft, "--lambda", "0"}), 4);

    // slope 2 on the middle segment: lambda must stay below 2
    const std::string steep = file("steep.json", R"({"points":[[-1,-1],[0,0],[1,2],[2,3]]})");
    EXPECT_EQ(run({"prox-reweight", steep, "--lambda", "2"}), 4);

    ASSERT_EQ(run({"potential", soft, "--mode", "prox", "-o", path("abs.json")}), 0);
    ASSERT_EQ(run({"prox-oracle", path("abs.json"), "--x", "-3", "--x", "0.5", "--x", "1.75", "--lambda", "2"}), 0)
        << err_.str();
    const io::Json j = io::Json::parse(out_.str());
    const std::vector<double> z = j["prox"].get<std::vector<double>>();
    ASSERT_EQ(z.size(), 3u);
    EXPECT_NEAR(z[0], -1.0, 2e-4);
    EXPECT_NEAR(z[1], 0.0, 2e-4);
    EXPECT_NEAR(z[2], 0.0, 2e-4);
}

TEST_F(Cli, DenoiseWithZeroProfileIsIdentity) {
    const std::string cfg = file("cfg.json", R"({"model":)" + model(R"({"t":[-1,1],"f":[0,0]})", "derivative") +
                                                 R"(,"iters":20})");
    const std::string y = file("y.csv", "#shape,2,3\n0.1,0.2,0.3\n0.4,0.5,0.6\n");
    ASSERT_EQ(run({"denoise", cfg, y, "-o", path("x.csv")}), 0) << err_.str();
    EXPECT_EQ(io::read_signal(path("x.csv")), io::read_signal(y));

    io::write_text_file(path("y.bin"), io::signal_to_binary(io::read_signal(y)));
    ASSERT_EQ(run({"denoise", cfg, path("y.bin"), "-o", path("x.bin")}), 0) << err_.str();
    EXPECT_EQ(io::read_file_bytes(path("x.bin")), io::read_file_bytes(path("y.bin")));
}

TEST_F(Cli, DenoiseProxModeAndErrors) {
    const std::string soft = R"({"t":[-2,-1,1,2],"f":[-1.9,-0.95,0.95,1.9]})";
    const std::string cfg = file("cfg.json", R"({"model":)" + model(soft, "prox") + R"(,"iters":2000,"tol":1e-9})");
    const std::string y = file("y.csv", "#shape,3,3\n0,0,1\n0,1,1\n1,1,1\n");
    ASSERT_EQ(run({"denoise", cfg, y, "--plot-csv", path("trace.csv")}), 0) << err_.str();
    const recon::Signal x = io::signal_from_csv(out_.str());
    EXPECT_EQ(x.rows, 3u);
    EXPECT_EQ(io::read_file_bytes(path("trace.csv")).substr(0, 16), "iteration,value\n");

    const std::string bad = file("bad.json", R"({"model":)" + model(R"({"t":[0,1],"f":[1,0]})", "prox") + "}");
    EXPECT_EQ(run({"denoise", bad, y}), 4);
    EXPECT_EQ(run({"denoise", cfg, file("z.csv", "#shape,2\n1,2\n")}), 2);
}

TEST_F(Cli, TrainStepZeroKeepsProfile) {
    const std::string profile = R"({"t":[-1,0,1],"f":[-0.5,0.1,0.5]})";
    const std::string cfg = file("cfg.json", R"({"model":)" + model(profile, "derivative") +
                                                 R"(,"data":{"synthetic":{"count":2,"rows":8,"cols":8}},"unroll":2,
                                                 "train":{"step":0,"epochs":2}})");
    ASSERT_EQ(run({"train", cfg, "-o", path("m.json")}), 0) << err_.str();
    const io::ModelBundle m = io::model_from_json(io::read_json_file(path("m.json")));
    EXPECT_EQ(m.profile, io::spline_from_json(io::Json::parse(profile)));
}

TEST_F(Cli, TrainIsDeterministicPerSeed) {
    const std::string cfg = file("cfg.json", R"({"model":)" + model(R"({"t":[-1,0,1],"f":[-0.5,0,0.5]})", "derivative") +
                                                 R"(,"data":{"synthetic":{"count":3,"rows":8,"cols":8}},"unroll":2,
                                                 "train":{"step":0.01,"epochs":2,"learn_alphas":true}})");
    ASSERT_EQ(run({"train", cfg, "--seed", "7", "-o", path("a.json"), "--plot-csv", path("a.csv")}), 0) << err_.str();
    ASSERT_EQ(run({"train", cfg, "--seed", "7", "-o", path("b.json"), "--plot-csv", path("b.csv")}), 0);
    ASSERT_EQ(run({"train", cfg, "--seed", "8", "-o", path("c.json")}), 0);
    EXPECT_EQ(io::read_file_bytes(path("a.json")), io::read_file_bytes(path("b.json")));
    EXPECT_EQ(io::read_file_bytes(path("a.csv")), io::read_file_bytes(path("b.csv")));
    EXPECT_NE(io::read_file_bytes(path("a.json")), io::read_file_bytes(path("c.json")));
}

TEST_F(Cli, TrainScaleLimit) {
    const std::string cfg = file("cfg.json", R"({"model":)" + model(R"({"t":[-1,1],"f":[-1,1]})", "derivative") +
                                                 R"(,"data":{"synthetic":{"count":1,"rows":65,"cols":8}}})");
    EXPECT_EQ(run({"train", cfg}), 5);
}

TEST_F(Cli, EvalTables) {
    file("ref.csv", "#shape,2,2\n0.1,0.2\n0.3,0.4\n");
    file("est.csv", "#shape,2,2\n0.1,0.2\n0.3,0.5\n");
    const std::string cfg = file("cfg.json", R"({"images":[{"name":"same","reference":"ref.csv","input":"ref.csv"},
                                                          {"name":"off","reference":"ref.csv","input":"est.csv"}]})");
    ASSERT_EQ(run({"eval", cfg}), 0) << err_.str();
    const std::string expected_off = io::format_double(10.0 * std::log10(1.0 / (0.01 / 4.0)));
    EXPECT_EQ(out_.str(), "image,psnr_input,psnr_output\nsame,inf,inf\noff," + expected_off + "," + expected_off + "\n");

    const std::string mcfg = file("m.json", R"({"model":)" + model(R"({"t":[-1,1],"f":[-0.2,0.2]})", "derivative") +
                                                R"(,"images":[{"reference":"ref.csv"}],"sigma":0.05,"iters":30})");
    ASSERT_EQ(run({"eval", mcfg, "--seed", "1", "-o", path("t1.csv"), "--plot-csv", path("tr1.csv")}), 0) << err_.str();
    ASSERT_EQ(run({"eval", mcfg, "--seed", "1", "-o", path("t2.csv"), "--plot-csv", path("tr2.csv")}), 0);
    EXPECT_EQ(io::read_file_bytes(path("t1.csv")), io::read_file_bytes(path("t2.csv")));
    EXPECT_EQ(io::read_file_bytes(path("tr1.csv")), io::read_file_bytes(path("tr2.csv")));
    EXPECT_EQ(io::read_file_bytes(path("tr1.csv")).substr(0, 22), "image,iteration,value\n");

    EXPECT_EQ(run({"eval", file("e.json", R"({"images":[]})")}), 2);
}

TEST_F(Cli, InputsAreNotModified) {
    const std::string s = file("s.json", R"({"t":[0,1,2],"f":[0,2,1]})");
    const std::string before = io::read_file_bytes(s);
    ASSERT_EQ(run({"project", s, "--smin", "0", "--smax", "1", "-o", path("o.json")}), 0);
    ASSERT_EQ(run({"potential", s, "-o", path("p.json")}), 0);
    EXPECT_EQ(io::read_file_bytes(s), before);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}), 0); }
