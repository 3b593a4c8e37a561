#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "simalign/cli.hpp"
#include "simalign/report.hpp"

namespace fs = std::filesystem;
using namespace simalign;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("simalign_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Result simulate(const fs::path& dir, const std::string& label, int offset, int size = 20) {
    return run({"simulate", "--size", std::to_string(size), "--iters", "50", "--reps", "8", "--offset",
                std::to_string(offset), "--label", label, "--out-dir", dir.string()});
}

}  // namespace

TEST_CASE("simulate writes CSVs and a manifest fragment", "[cli]") {
    TempDir tmp;
    const auto r = simulate(tmp.path / "a", "a", 0);
    REQUIRE(r.code == cli::kExitAligned);
    for (const char* name : {"Ps", "Pw", "Pc", "Es", "Ew", "C"}) {
        const auto m = read_csv_matrix(tmp.path / "a" / (std::string(name) + ".csv"));
        CHECK(m.rows() == 8);
        CHECK(m.cols() == 51);
    }
    CHECK(fs::exists(tmp.path / "a" / "manifest.json"));

    SECTION("reruns are byte-identical") {
        REQUIRE(simulate(tmp.path / "b", "a", 0).code == 0);
        for (const char* name : {"Ps", "Ew", "manifest.json"}) {
            const std::string file = std::string(name).find('.') == std::string::npos ? std::string(name) + ".csv" : name;
            CHECK(slurp(tmp.path / "a" / file) == slurp(tmp.path / "b" / file));
        }
    }
    SECTION("bad flags exit with the usage code") {
        CHECK(run({"simulate", "--reps", "1", "--out-dir", (tmp.path / "c").string()}).code == cli::kExitUsage);
        CHECK(run({"simulate", "--set", "3", "--out-dir", (tmp.path / "c").string()}).code == cli::kExitUsage);
        CHECK(run({"simulate", "--reps", "4"}).code == cli::kExitUsage);
        CHECK(run({"nonsense"}).code == cli::kExitUsage);
        CHECK(run({}).code == cli::kExitUsage);
    }
}

TEST_CASE("compare and fm-compare end to end", "[cli]") {
    TempDir tmp;
    const auto d = tmp.path;
    REQUIRE(simulate(d / "a", "a", 0).code == 0);
    REQUIRE(simulate(d / "a2", "a2", 0).code == 0);
    REQUIRE(simulate(d / "big", "big", 8, 30).code == 0);

    SECTION("identical groups are aligned") {
        REQUIRE(run({"merge", (d / "a" / "manifest.json").string(), (d / "a2" / "manifest.json").string(), "-o",
                     (d / "same.json").string()})
                    .code == 0);
        const auto c = run({"compare", "--manifest", (d / "same.json").string(), "--format", "json"});
        CHECK(c.code == cli::kExitAligned);
        CHECK(parse_comparison_json(c.out).summary.overall == Verdict::aligned);

        const auto f = run({"fm-compare", "--manifest", (d / "same.json").string(), "--truncation", "20",
                            "--report-out", (d / "fm.json").string(), "--fm-out-dir", (d / "fm").string()});
        CHECK(f.code == cli::kExitAligned);
        const auto report = parse_fm_report_json(slurp(d / "fm.json"));
        for (const auto& o : report.outputs) {
            for (const auto& t : o.tests) CHECK_THAT(t.test.p_value, Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
        CHECK(fs::exists(d / "fm" / "Ps_fm.csv"));
        CHECK(f.out.find("Overall: aligned") != std::string::npos);
    }
    SECTION("different model sizes are misaligned, reproducibly") {
        REQUIRE(run({"merge", (d / "a" / "manifest.json").string(), (d / "big" / "manifest.json").string(), "-o",
                     (d / "diff.json").string()})
                    .code == 0);
        const auto args = std::vector<std::string>{"compare",      "--manifest",  (d / "diff.json").string(),
                                                   "--report-out", (d / "r1.json").string(), "--scatter-out",
                                                   (d / "scatter.csv").string()};
        const auto c = run(args);
        CHECK(c.code == cli::kExitMisaligned);
        CHECK(c.out.find("Overall: misaligned") != std::string::npos);
        auto again = args;
        again[4] = (d / "r2.json").string();
        CHECK(run(again).code == cli::kExitMisaligned);
        CHECK(slurp(d / "r1.json") == slurp(d / "r2.json"));
        CHECK(parse_comparison_json(slurp(d / "r1.json")).summary.overall == Verdict::misaligned);
        CHECK(slurp(d / "scatter.csv").rfind("output,group,pc1,pc2\n", 0) == 0);

        CHECK(run({"fm-compare", "--manifest", (d / "diff.json").string(), "--truncation", "20"}).code ==
              cli::kExitMisaligned);
    }
    SECTION("error exit codes") {
        CHECK(run({"compare", "--manifest", (d / "missing.json").string()}).code == cli::kExitIo);
        CHECK(run({"fm-compare", "--manifest", (d / "a" / "manifest.json").string()}).code == cli::kExitUsage);
        // A single-group manifest fails validation.
        CHECK(run({"compare", "--manifest", (d / "a" / "manifest.json").string()}).code == cli::kExitUsage);
        CHECK(run({"compare", "--manifest", (d / "a" / "manifest.json").string(), "--format", "xml"}).code ==
              cli::kExitUsage);
        REQUIRE(run({"merge", (d / "a" / "manifest.json").string(), (d / "a2" / "manifest.json").string(), "-o",
                     (d / "same.json").string()})
                    .code == 0);
        CHECK(run({"fm-compare", "--manifest", (d / "same.json").string(), "--truncation", "49"}).code ==
              cli::kExitUsage);
    }
}

TEST_CASE("the installed binary reports exit codes", "[cli]") {
    TempDir tmp;
    const std::string cmd = std::string(SIMALIGN_CLI_PATH) + " compare --manifest " + (tmp.path / "none.json").string() +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == cli::kExitIo);

    const std::string help = std::string(SIMALIGN_CLI_PATH) + " --help >/dev/null 2>&1";
    const int hs = std::system(help.c_str());
    CHECK(WEXITSTATUS(hs) == 0);
}
