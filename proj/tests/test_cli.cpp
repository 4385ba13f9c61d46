#include <doctest.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int status;
    std::string err;
};

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("deflab_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Result deflab(const std::string& args, const fs::path& dir)
{
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(DEFLAB_CLI) + " " + args + " 2> " + err.string() + " > " + (dir / "stdout.txt").string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
}

void write(const fs::path& p, const std::string& s)
{
    std::ofstream(p, std::ios::binary) << s;
}

std::size_t lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string sha256(const std::string& bytes)
{
    unsigned char d[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), d, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(d[i]);
    }
    return os.str();
}

const char* kGapConfig = R"({"d": 2, "N": [1, 2, 3, 4, 5, 6, 7, 8], "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]})";

} // namespace

TEST_CASE("de Finetti gap sweep: rows, exit status and manifest")
{
    const fs::path dir = scratch("gap");
    write(dir / "cfg.json", kGapConfig);
    const Result r = deflab("run definetti-gap --config " + (dir / "cfg.json").string() + " --out " + (dir / "a").string(), dir);
    REQUIRE(r.status == 0);
    const std::string csv = slurp(dir / "a" / "definetti_gap.csv");
    CHECK(lines(csv) == 81);
    CHECK(csv.find(",1\n") == std::string::npos);  // no violated rows

    const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["command"] == "definetti-gap");
    CHECK(manifest["config"]["n"] == json::array({1}));
    CHECK(manifest.contains("version"));
    CHECK(manifest.contains("started"));
    CHECK(manifest.contains("finished"));
    REQUIRE(manifest["outputs"].size() == 2);
    for (const auto& f : manifest["outputs"]) {
        CHECK(f["sha256"] == sha256(slurp(dir / "a" / f["file"].get<std::string>())));
    }

    // rerunning from the manifest's resolved config reproduces the digests
    write(dir / "resolved.json", manifest["config"].dump());
    REQUIRE(deflab("run definetti-gap --config " + (dir / "resolved.json").string() + " --out " + (dir / "b").string(), dir).status == 0);
    CHECK(slurp(dir / "b" / "definetti_gap.csv") == csv);
    const json again = json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(again["outputs"] == manifest["outputs"]);
}

TEST_CASE("results do not depend on the thread count")
{
    const fs::path dir = scratch("threads");
    write(dir / "cfg.json", R"({"d": 3, "N": 2, "rank": 1, "seeds": [0, 1, 2, 3, 4]})");
    const std::string base = "run localize-check --config " + (dir / "cfg.json").string() + " --out ";
    REQUIRE(deflab(base + (dir / "a").string(), dir).status == 0);
    ::setenv("DEFLAB_THREADS", "3", 1);
    REQUIRE(deflab(base + (dir / "b").string(), dir).status == 0);
    ::unsetenv("DEFLAB_THREADS");
    CHECK(slurp(dir / "a" / "localize_check.csv") == slurp(dir / "b" / "localize_check.csv"));
}

TEST_CASE("configuration errors exit with status 2")
{
    const fs::path dir = scratch("errors");
    const std::string out = " --out " + (dir / "o").string();

    write(dir / "neg.json", R"({"d": 2, "N": -1, "seeds": [0]})");
    Result r = deflab("run definetti-gap --config " + (dir / "neg.json").string() + out, dir);
    CHECK(r.status == 2);
    CHECK(r.err.find("'N'") != std::string::npos);

    write(dir / "unknown.json", R"({"d": 2, "N": 2, "seeds": [0], "sede": 1, "colour": 2})");
    r = deflab("run definetti-gap --config " + (dir / "unknown.json").string() + out, dir);
    CHECK(r.status == 2);
    CHECK(r.err.find("'sede'") != std::string::npos);
    CHECK(r.err.find("'colour'") != std::string::npos);

    write(dir / "missing.json", R"({"d": 2})");
    r = deflab("run definetti-gap --config " + (dir / "missing.json").string() + out, dir);
    CHECK(r.status == 2);
    CHECK(r.err.find("'seeds'") != std::string::npos);

    write(dir / "broken.json", "{\"d\": ");
    CHECK(deflab("run definetti-gap --config " + (dir / "broken.json").string() + out, dir).status == 2);

    CHECK(deflab("run no-such-command" + out, dir).status == 2);
    CHECK(deflab("run loggas --n -1" + out, dir).status == 2);
    r = deflab("run loggas --n 2 --steps 100" + out, dir);
    CHECK(r.status == 2);
    CHECK(r.err.find("burn_in") != std::string::npos);
}

TEST_CASE("every command runs on a small configuration")
{
    const fs::path dir = scratch("smoke");
    auto run = [&](const std::string& cmd, const std::string& cfg) {
        write(dir / (cmd + ".json"), cfg);
        return deflab("run " + cmd + " --config " + (dir / (cmd + ".json")).string() + " --out " + (dir / cmd).string(), dir).status;
    };
    CHECK(run("df-classical", R"({"K": 2, "N": [2, 4], "seeds": [0, 1]})") == 0);
    CHECK(run("hartree-sweep",
              R"({"d": 2, "h": {"re": [[0, 0], [0, 1]]}, "w": {"re": [[2, 0, 0], [0, 0, 0], [0, 0, 0]]}, "N": [2, 3, 4]})")
          == 0);
    CHECK(run("gibbs-sweep", R"({"d": 2, "h": {"re": [[0, 0], [0, 1]]}, "N": [4, 8], "t": 1, "samples": 2000})") == 0);
    CHECK(lines(slurp(dir / "gibbs-sweep" / "gibbs_sweep.csv")) == 3);
    CHECK(run("loggas", R"({"N": 3, "burn_in": 500, "sweeps": 2000, "lambda_points": 5, "grid": 64})") == 0);
    const json s = json::parse(slurp(dir / "loggas" / "summary.json"));
    CHECK(s.contains("gelman_rubin"));
    CHECK(s["free_energy"]["error"].get<double>() > 0.0);
    CHECK(s["chains"][0].contains("acceptance"));
}

TEST_CASE("plotdata selection and aggregation")
{
    const fs::path dir = scratch("plot");
    write(dir / "in.csv", "d,N,seed,gap\n2,4,0,0.1\n2,4,1,0.2\n2,4,2,0.6\n3,4,0,1.5\n");

    REQUIRE(deflab("plotdata " + (dir / "in.csv").string() + " --select N,gap --out " + (dir / "sel.csv").string(), dir).status == 0);
    CHECK(slurp(dir / "sel.csv") == "N,gap\n4,0.1\n4,0.2\n4,0.6\n4,1.5\n");

    REQUIRE(deflab("plotdata " + (dir / "in.csv").string() + " --group-by d,N --mean gap --out " + (dir / "agg.csv").string(), dir).status == 0);
    const std::string agg = slurp(dir / "agg.csv");
    CHECK(agg.rfind("d,N,mean_gap,count\n", 0) == 0);
    std::istringstream is(agg);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    // (0.1 + 0.2 + 0.6) / 3
    const double mean = std::stod(line.substr(4, line.rfind(',') - 4));
    CHECK(mean == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(line.substr(line.rfind(',') + 1) == "3");
    std::getline(is, line);
    CHECK(line == "3,4,1.5,1");

    write(dir / "empty.csv", "d,N,seed,gap\n");
    REQUIRE(deflab("plotdata " + (dir / "empty.csv").string() + " --select N,gap --out " + (dir / "e.csv").string(), dir).status == 0);
    CHECK(slurp(dir / "e.csv") == "N,gap\n");
    REQUIRE(deflab("plotdata " + (dir / "empty.csv").string() + " --group-by N --mean gap --out " + (dir / "e2.csv").string(), dir).status == 0);
    CHECK(slurp(dir / "e2.csv") == "N,mean_gap,count\n");

    const Result bad = deflab("plotdata " + (dir / "in.csv").string() + " --select N,nope", dir);
    CHECK(bad.status == 2);
    CHECK(bad.err.find("'nope'") != std::string::npos);
}

TEST_CASE("sha256 helper against a known digest")
{
    CHECK(sha256("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
