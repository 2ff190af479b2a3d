#include "expect_error.hpp"
#include "oracles.hpp"

#include <chebprop/problem_file.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace chebprop;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("chebprop_test_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    [[nodiscard]] const fs::path &path() const { return path_; }

  private:
    fs::path path_;
};

constexpr const char *qubit_manifest = R"({
  "dim": 2,
  "precision": "fp32",
  "dt": 0.1,
  "drift": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]],
  "controls": [[[0, 1], [1, 0]]],
  "amplitudes": {"pts": 3, "data": [[0.1], [0.2], [-0.3]]}
})";

} // namespace

TEST(Manifest, ParsesInlineData) {
    const Problem p = parse_problem(qubit_manifest);
    EXPECT_EQ(p.system.dim(), 2u);
    EXPECT_EQ(p.system.control_count(), 1u);
    EXPECT_EQ(p.system.drift(), cplx<double>(0.5) * oracle::pauli_z());
    EXPECT_EQ(p.system.controls()[0], oracle::pauli_x());
    EXPECT_EQ(p.amplitudes.pts(), 3u);
    EXPECT_EQ(p.amplitudes(2, 0), -0.3);
    EXPECT_EQ(p.amplitudes.dt(), 0.1);
    ASSERT_TRUE(p.precision);
    EXPECT_EQ(*p.precision, Precision::fp32);
}

TEST(Manifest, DriftOnlyWithoutData) {
    const Problem p = parse_problem(R"({"dim": 1, "dt": 0.5, "drift": [[[2, 0]]], "amplitudes": {"pts": 4}})");
    EXPECT_EQ(p.amplitudes.pts(), 4u);
    EXPECT_EQ(p.amplitudes.controls(), 0u);
    EXPECT_FALSE(p.precision);
}

TEST(Manifest, SchemaErrors) {
    const char *bad[] = {
        "not json",
        "[1, 2]",
        R"({"dt": 0.1, "drift": [[1]], "amplitudes": {"pts": 0}})",
        R"({"dim": 2, "dt": 0.1, "drift": [[1, 0]], "amplitudes": {"pts": 0}})",
        R"({"dim": 1, "dt": 0.1, "drift": [["x"]], "amplitudes": {"pts": 0}})",
        R"({"dim": 1, "dt": 0.1, "drift": [[[1, 2, 3]]], "amplitudes": {"pts": 0}})",
        R"({"dim": 1, "dt": -0.1, "drift": [[1]], "amplitudes": {"pts": 0}})",
        R"({"dim": 1, "drift": [[1]], "amplitudes": {"pts": 0}})",
        R"({"dim": 1, "dt": 0.1, "drift": [[1]], "controls": [[[1]]], "amplitudes": {"pts": 2}})",
        R"({"dim": 1, "dt": 0.1, "drift": [[1]], "controls": [[[1]]], "amplitudes": {"pts": 2, "data": [[0.1]]}})",
        R"({"dim": 1, "dt": 0.1, "drift": [[1]], "controls": [[[1]]], "amplitudes": {"pts": 1, "data": [[0.1, 0.2]]}})",
        R"({"dim": 1, "dt": 0.1, "drift": [[1]], "amplitudes": {"pts": -3}})",
        R"({"dim": 1, "dt": 0.1, "drift": [[1]], "precision": 64, "amplitudes": {"pts": 0}})",
        R"({"dim": 0, "dt": 0.1, "drift": [], "amplitudes": {"pts": 0}})",
    };
    for (const char *text : bad)
        EXPECT_ERROR_CODE(parse_problem(text), ErrorCode::schema) << text;
    EXPECT_ERROR_CODE(parse_problem(R"({"dim": 1, "dt": 0.1, "drift": [[1]], "precision": "fp8", "amplitudes": {"pts": 0}})"),
                      ErrorCode::config);
    EXPECT_ERROR_CODE(parse_problem(R"({"dim": 2, "dt": 0.1, "drift": [[0, 1], [0, 0]], "amplitudes": {"pts": 0}})"),
                      ErrorCode::hermiticity);
}

TEST(Manifest, CsvSidecar) {
    TempDir dir;
    write_text_file(dir.path() / "amps.csv", "c1,c2\n0.1,0.2\n-0.5, 1\n\n0,0\n");
    write_text_file(dir.path() / "m.json", R"({"dim": 1, "dt": 0.2, "drift": [[1]], "controls": [[[1]], [[2]]],
                                              "amplitudes": {"pts": 3, "csv": "amps.csv"}})");
    const Problem p = load_problem(dir.path() / "m.json");
    EXPECT_EQ(p.amplitudes(1, 0), -0.5);
    EXPECT_EQ(p.amplitudes(1, 1), 1.0);
    EXPECT_EQ(p.amplitudes(2, 1), 0.0);

    write_text_file(dir.path() / "short.csv", "0.1,0.2\n");
    EXPECT_ERROR_CODE(read_amplitude_csv(dir.path() / "short.csv", 3, 2), ErrorCode::schema);
    write_text_file(dir.path() / "wide.csv", "0.1,0.2,0.3\n");
    EXPECT_ERROR_CODE(read_amplitude_csv(dir.path() / "wide.csv", 1, 2), ErrorCode::schema);
    write_text_file(dir.path() / "text.csv", "0.1,0.2\nabc,0.1\n");
    EXPECT_ERROR_CODE(read_amplitude_csv(dir.path() / "text.csv", 2, 2), ErrorCode::schema);
    EXPECT_ERROR_CODE(read_amplitude_csv(dir.path() / "missing.csv", 2, 2), ErrorCode::io);
    EXPECT_ERROR_CODE(load_problem(dir.path() / "missing.json"), ErrorCode::io);
}

TEST(Manifest, RoundTrip) {
    const Problem p = parse_problem(qubit_manifest);
    const Problem q = parse_problem(problem_to_json(p));
    EXPECT_EQ(q.system.drift(), p.system.drift());
    EXPECT_EQ(q.system.controls()[0], p.system.controls()[0]);
    EXPECT_EQ(q.amplitudes.values(), p.amplitudes.values());
    EXPECT_EQ(q.precision, p.precision);
}

TEST(PropagatorJson, RoundTripsExactly) {
    std::mt19937_64 rng(71);
    PropagatorResult r;
    r.U           = oracle::random_unitary(3, rng);
    r.slice_count = 7;
    r.plan        = {11, 0.25, 1e-20};
    const std::vector<Matrix<double>> cumulative{r.U, r.U};
    const std::string text = propagator_to_json(r, &cumulative);
    EXPECT_EQ(propagator_from_json(text), r.U);
    EXPECT_NE(text.find("\"cumulative\""), std::string::npos);
    EXPECT_NE(text.find("\"m_max\": 11"), std::string::npos);
    EXPECT_EQ(propagator_to_json(r).find("cumulative"), std::string::npos);
    EXPECT_ERROR_CODE(propagator_from_json("{}"), ErrorCode::schema);
}
