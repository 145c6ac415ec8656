#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef NETGAIN_CLI_PATH
#error "NETGAIN_CLI_PATH must point at the built binary"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

std::string temp_dir() {
    static const std::string dir = [] {
        std::string d = "/tmp/netgain_cli_test_XXXXXX";
        REQUIRE(mkdtemp(d.data()) != nullptr);
        return d;
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const std::string path = temp_dir() + "/" + name;
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    const std::string out_path = temp_dir() + "/stdout.txt";
    const std::string cmd = std::string(NETGAIN_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.output = read_file(out_path);
    return res;
}

const char* kRotationNet = R"({
  "subsystems": [{"gamma": 0.5, "beta": 0.0, "m": 1}, {"gamma": 0.5, "beta": 0.0, "m": 1}],
  "A": [[0, -1], [1, 0]]
})";

}  // namespace

TEST_CASE("check-dtds exit codes", "[cli]") {
    const std::string cert_file = write_file(
        "sign4.mat",
        "4 4\n0 0.23 0.56 0.56\n0.51 0 0.56 0.09\n-0.27 -0.12 0 0.4\n0.51 0.15 0.57 0\n");
    const RunResult certified = run("check-dtds " + cert_file);
    CHECK(certified.exit_code == 0);
    CHECK(certified.output.find("certified") != std::string::npos);

    const std::string bad_file = write_file("expanding.mat", "2 2\n1.1 0\n0 1.1\n");
    CHECK(run("check-dtds " + bad_file).exit_code == 3);

    const std::string malformed = write_file("broken.mat", "2 2\n1 2\n3\n");
    const RunResult parse_fail = run("check-dtds " + malformed);
    CHECK(parse_fail.exit_code == 2);
    CHECK(parse_fail.output.find("line") != std::string::npos);

    const RunResult missing = run("check-dtds " + temp_dir() + "/nonexistent.mat");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("check-dtds oracle cross-check and blocks", "[cli]") {
    const std::string sign2 = write_file("sign2.mat", "2 2\n-0.5 0.5\n-0.5 -0.5\n");
    const RunResult res = run("check-dtds --oracle --json " + sign2);
    CHECK(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(parsed["certified"] == true);
    CHECK(parsed["oracle_certified"] == true);
    CHECK(parsed["margin"].get<double>() < 0.0);

    const std::string four = write_file("blocks.mat",
                                        "4 4\n0 0.2 0 0\n0.2 0 0 0\n0 0 0 0.3\n0 0 0.3 0\n");
    CHECK(run("check-dtds --blocks 2,2 " + four).exit_code == 0);
}

TEST_CASE("check-ctds", "[cli]") {
    const std::string stable = write_file("neg.mat", "2 2\n-1 0\n0 -2\n");
    CHECK(run("check-ctds " + stable).exit_code == 0);
    const std::string unstable = write_file("pos.mat", "1 1\n1\n");
    CHECK(run("check-ctds " + unstable).exit_code == 3);
}

TEST_CASE("check-network reports the bound", "[cli]") {
    const std::string net = write_file("rot.json", kRotationNet);
    const RunResult res = run("check-network --json " + net);
    REQUIRE(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(parsed["certified"] == true);
    const double rho = parsed["rho"].get<double>();
    CHECK(rho > 0.9);
    CHECK(rho < 1.2);
    CHECK(parsed["s"].get<double>() > 0.0);

    const std::string big = write_file("big.json", R"({
      "subsystems": [{"gamma": 2.0}, {"gamma": 2.0}],
      "A": [[0, -1], [1, 0]]
    })");
    CHECK(run("check-network " + big).exit_code == 3);

    const std::string unknown_key = write_file("weird.json", R"({
      "subsystems": [{"gamma": 0.5}], "A": [[0]], "bogus": 1
    })");
    const RunResult rejected = run("check-network " + unknown_key);
    CHECK(rejected.exit_code == 2);
    CHECK(rejected.output.find("bogus") != std::string::npos);
}

TEST_CASE("check-network evaluates a rank-one attachment", "[cli]") {
    const std::string net = write_file("rank1net.json", R"({
      "subsystems": [{"gamma": 1.0}, {"gamma": 1.0}],
      "A": [[0.62, 0.12], [-0.12, -0.62]],
      "rank_one": {"s": [0.5, -0.5], "k": [0.3, -0.3], "g": [0.4, 0.4]}
    })");
    const RunResult res = run("check-network --json " + net);
    REQUIRE(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(parsed["rank_one"] == true);
}

TEST_CASE("checklist subcommand", "[cli]") {
    const std::string net = write_file("tri.json", R"({
      "subsystems": [{"gamma": 0.5}, {"gamma": 0.5}],
      "A": [[0, 1], [0, 0]]
    })");
    const RunResult res = run("checklist --json " + net);
    REQUIRE(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(parsed["nonnegative_and_schur"] == true);
    CHECK(parsed["triangular_schur"] == true);
    CHECK(parsed["any"] == true);
}

TEST_CASE("rank-one subcommand", "[cli]") {
    const std::string accept = write_file("r1yes.json",
                                          R"({"delta": [0.5, -0.5], "u": [0.3, -0.3], "v": [0.4, 0.4]})");
    CHECK(run("rank-one " + accept).exit_code == 0);
    const std::string reject = write_file("r1no.json",
                                          R"({"delta": [0.5, -0.5], "u": [1.0, -1.0], "v": [0.4, 0.4]})");
    CHECK(run("rank-one " + reject).exit_code == 3);
    const std::string invalid = write_file("r1bad.json",
                                           R"({"delta": [1.5], "u": [0.1], "v": [0.1]})");
    CHECK(run("rank-one " + invalid).exit_code == 2);
}

TEST_CASE("region subcommand writes the sweep CSV", "[cli]") {
    const std::string mat = write_file("afedd.mat", "2 2\n-1 -1\n1 -1\n");
    const std::string csv = temp_dir() + "/region.csv";
    const RunResult res = run("region " + mat + " --step 0.5 --out " + csv);
    REQUIRE(res.exit_code == 0);
    const std::string content = read_file(csv);
    CHECK(content.rfind("gamma1,gamma2,standard,dtds\n", 0) == 0);
    CHECK(content == "gamma1,gamma2,standard,dtds\n0.5,0.5,0,1\n0.5,1,0,0\n1,0.5,0,0\n1,1,0,0\n");

    // counts line and the containment claim
    CHECK(res.output.find("standard holds at 0 points") != std::string::npos);
    CHECK(res.output.find("dtds holds at 1 points") != std::string::npos);

    const std::string bad = write_file("three.mat", "3 3\n0 0 0\n0 0 0\n0 0 0\n");
    CHECK(run("region " + bad + " --step 0.5").exit_code == 2);
}

TEST_CASE("region accepts a network JSON as input", "[cli]") {
    const std::string net = write_file("regionnet.json", R"({
      "subsystems": [{"gamma": 0.5}, {"gamma": 0.5}],
      "A": [[-1, -1], [1, -1]]
    })");
    const std::string csv = temp_dir() + "/region_net.csv";
    const RunResult res = run("region " + net + " --step 0.5 --out " + csv);
    REQUIRE(res.exit_code == 0);
    CHECK(read_file(csv).rfind("gamma1,gamma2,standard,dtds\n0.5,0.5,0,1\n", 0) == 0);
}

TEST_CASE("region output is byte-identical across runs", "[cli]") {
    const std::string mat = write_file("afedd2.mat", "2 2\n-1 -1\n1 -1\n");
    const std::string c1 = temp_dir() + "/r1.csv";
    const std::string c2 = temp_dir() + "/r2.csv";
    REQUIRE(run("region " + mat + " --step 0.05 --out " + c1).exit_code == 0);
    REQUIRE(run("region " + mat + " --step 0.05 --out " + c2).exit_code == 0);
    CHECK(read_file(c1) == read_file(c2));
    CHECK(!read_file(c1).empty());
}

TEST_CASE("simulate validates the bound and dumps a trajectory", "[cli]") {
    const std::string net = write_file("simnet.json", kRotationNet);
    const std::string traj = temp_dir() + "/traj.csv";
    const RunResult res = run("simulate " + net + " --horizon 64 --trials 5 --seed 7 --json --out " + traj);
    REQUIRE(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(parsed["violations"] == 0);
    CHECK(parsed["trials"] == 7);  // 5 random plus impulse and worst-direction
    const std::string content = read_file(traj);
    CHECK(content.rfind("k,v_1,v_2,y_1,y_2,norm_v,norm_y\n", 0) == 0);

    // deterministic given (seed, spec)
    const RunResult res2 = run("simulate " + net + " --horizon 64 --trials 5 --seed 7 --json --out " + traj);
    CHECK(res2.output == res.output);

    const std::string loose = write_file("loose.json", R"({
      "subsystems": [{"gamma": 2.0}, {"gamma": 2.0}],
      "A": [[0, -1], [1, 0]]
    })");
    CHECK(run("simulate " + loose + " --horizon 8").exit_code == 3);
}

TEST_CASE("simulate with one-pole realizations", "[cli]") {
    const std::string net = write_file("polenet.json", kRotationNet);
    const RunResult res = run("simulate " + net + " --horizon 128 --trials 3 --seed 1 --pole 0.35 --json");
    REQUIRE(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(parsed["violations"] == 0);
    CHECK(parsed["max_ratio"].get<double>() <= parsed["rho"].get<double>());

    CHECK(run("simulate " + net + " --horizon 8 --pole 1.5").exit_code == 2);
}

TEST_CASE("gain subcommand", "[cli]") {
    const std::string sys = write_file("onepole.json",
                                       R"({"F": [[0.5]], "G": [[0.5]], "H": [[1.0]], "J": [[0.0]]})");
    const RunResult res = run("gain --json " + sys);
    REQUIRE(res.exit_code == 0);
    const auto parsed = nlohmann::json::parse(res.output);
    CHECK(std::fabs(parsed["gamma"].get<double>() - 1.0) < 1e-3);

    const std::string stat = write_file("static.json",
                                        R"({"F": [], "G": [], "H": [], "J": [[0.7]]})");
    const RunResult sres = run("gain --json " + stat);
    REQUIRE(sres.exit_code == 0);
    CHECK(std::fabs(nlohmann::json::parse(sres.output)["gamma"].get<double>() - 0.7) < 1e-12);

    const std::string unstable = write_file("unstable.json",
                                            R"({"F": [[1.5]], "G": [[1.0]], "H": [[1.0]], "J": [[0.0]]})");
    CHECK(run("gain " + unstable).exit_code == 2);
}

TEST_CASE("NETGAIN_TOL loosens the strict comparisons", "[cli]") {
    // 2x2 at the closed-form boundary: |a11 - a22| = 1 - det exactly
    const std::string boundary = write_file("boundary.mat", "2 2\n0.5 0.5\n-0.5 -0.5\n");
    CHECK(run("check-dtds " + boundary).exit_code == 3);
    // a huge slack makes even clearly interior points fail the strict test
    const std::string sign2 = write_file("sign2b.mat", "2 2\n-0.5 0.5\n-0.5 -0.5\n");
    CHECK(run("check-dtds " + sign2).exit_code == 0);
    const std::string cmd_env = "NETGAIN_TOL=0.9 " + std::string(NETGAIN_CLI_PATH) +
                                " check-dtds " + sign2 + " > /dev/null 2>&1";
    const int status = std::system(cmd_env.c_str());
    CHECK(WEXITSTATUS(status) == 3);
}

TEST_CASE("usage errors exit with the input-error code", "[cli]") {
    CHECK(run("").exit_code == 2);
    CHECK(run("check-dtds").exit_code == 2);
    CHECK(run("no-such-command x").exit_code == 2);
}
