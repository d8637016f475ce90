// Drives the built command-line tool.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(NETREL_CLI) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch() {
    const fs::path d = fs::temp_directory_path() / "netrel_cli_test";
    fs::create_directories(d);
    return d;
}

std::string write(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace

TEST_CASE("gen then estimate") {
    const auto graph = (scratch() / "karate.txt").string();
    REQUIRE(run("gen --type karate --seed 4 --out " + graph).code == 0);
    const auto r = run("estimate --graph " + graph + " --terminals 0,5,16,25,33 --w 40 --s 2000 --seed 7");
    CHECK(r.code == 0);
    CHECK(r.out.find("\"estimate\"") != std::string::npos);
}

TEST_CASE("identical runs print identical JSON") {
    const auto graph = (scratch() / "grid.txt").string();
    REQUIRE(run("gen --type grid --rows 4 --cols 5 --seed 2 --out " + graph).code == 0);
    const std::string args = "estimate --graph " + graph + " --terminals 0,7,19 --w 8 --s 3000 --seed 7 --threads 1";
    const auto a = run(args), b = run(args), c = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(b.out == c.out);
}

TEST_CASE("gen with a fixed seed reproduces the file") {
    CHECK(run("gen --type scale-free --vertices 50 --attach 2 --seed 9").out ==
          run("gen --type scale-free --vertices 50 --attach 2 --seed 9").out);
    CHECK(run("gen --type grid --rows 5 --cols 5").out.size() > 0);
}

TEST_CASE("terminals from a file") {
    const auto graph = write("tri.txt", "0 1 0.5\n1 2 0.5\n0 2 0.5\n");
    const auto terms = write("tri_terms.txt", "0\n1\n2\n");
    const auto r = run("exact --graph " + graph + " --terminals @" + terms + " --format csv");
    CHECK(r.code == 0);
    CHECK(r.out == "reliability,method,edges\n0.5,brute,3\n");
    const auto q = run("exact --graph " + graph + " --terminals 0,1,2 --precision exact --format text");
    CHECK(q.out.find("raw          1/2") != std::string::npos);
}

TEST_CASE("exit codes") {
    const auto graph = write("edge.txt", "0 1 0.7\n");
    const auto bad = write("bad.txt", "0 1 1.2\n");
    CHECK(run("").code == 2);
    CHECK(run("estimate --graph " + graph).code == 2);
    CHECK(run("estimate --graph " + graph + " --terminals 0,1 --s 0").code == 2);
    CHECK(run("estimate --graph " + graph + " --terminals 0,1 --estimator zz").code == 2);
    CHECK(run("estimate --graph " + bad + " --terminals 0,1").code == 3);
    CHECK(run("estimate --graph /nonexistent --terminals 0,1").code == 3);
    CHECK(run("estimate --graph " + graph + " --terminals 0,5").code == 3);
    CHECK(run("estimate --graph " + graph + " --terminals 0,1").code == 0);
    const auto grid = (scratch() / "grid8.txt").string();
    REQUIRE(run("gen --type grid --rows 8 --cols 8 --out " + grid).code == 0);
    CHECK(run("exact --graph " + grid + " --terminals 0,63 --method bdd --width-cap 50").code == 4);
    CHECK(run("exact --graph " + grid + " --terminals 0,63 --method brute").code == 4);
}

TEST_CASE("preprocess subcommand") {
    const auto graph = write("barbell.txt", "0 1 0.5\n0 2 0.5\n0 3 0.5\n1 2 0.5\n1 3 0.5\n2 3 0.5\n3 4 0.6\n4 5 0.5\n4 6 0.5\n4 7 0.5\n5 6 0.5\n5 7 0.5\n6 7 0.5\n");
    const auto dir = (scratch() / "parts").string();
    const auto r = run("preprocess --graph " + graph + " --terminals 0,7 --out " + dir);
    CHECK(r.code == 0);
    CHECK(fs::exists(fs::path(dir) / "manifest.json"));
    CHECK(fs::exists(fs::path(dir) / "part_0.txt"));
    CHECK(fs::exists(fs::path(dir) / "part_1.txt"));
}

TEST_CASE("trace and bench output") {
    const auto graph = (scratch() / "grid3.txt").string();
    REQUIRE(run("gen --type grid --rows 3 --cols 4 --seed 1 --out " + graph).code == 0);
    const auto trace = (scratch() / "trace.csv").string();
    CHECK(run("estimate --graph " + graph + " --terminals 0,11 --w 2 --s 500 --trace " + trace).code == 0);
    std::ifstream in(trace);
    std::string header;
    std::getline(in, header);
    CHECK(header == "part,layer,width,p_c,p_d,deleted_mass,samples_drawn");
    const auto b = run("bench --graph " + graph + " --k 3 --q1 2 --q2 2 --s 200 --w 2 --format csv");
    CHECK(b.code == 0);
    CHECK(b.out.rfind("method,runs,variance,error_rate\n", 0) == 0);
    CHECK(run("estimate --graph " + graph + " --terminals 0,11 --no-bdd --format text").code == 0);
}
