#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_cli;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-shapebo-binary> [doctest args]\n");
        return 2;
    }
    g_cli = argv[1];
    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    return context.run();
}

TEST_CASE("no arguments prints usage and exits with 1") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("no-such-command") == 1);
    CHECK(run_cli("pca-report") == 1); // missing --problem
    CHECK(run_cli("pca-report --problem nope --n 50 --seed 1") == 1);
}

TEST_CASE("pca-report finds one significant eigenvalue for the 1-d circle") {
    const fs::path dir = fs::temp_directory_path() / "shapebo_cli_pca";
    fs::create_directories(dir);
    CHECK(run_cli("pca-report --problem circle1d --mapping contour --n 500 --seed 1 --out " +
                  dir.string()) == 0);

    std::ifstream in(dir / "circle1d_spectrum.csv");
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "j,eigenvalue,cumulative_pct");
    std::vector<double> eigenvalues;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string j, lam;
        std::getline(ls, j, ',');
        std::getline(ls, lam, ',');
        eigenvalues.push_back(std::stod(lam));
    }
    REQUIRE(!eigenvalues.empty());
    int significant = 0;
    for (double v : eigenvalues)
        if (v > 1e-8 * eigenvalues.front()) ++significant;
    CHECK(significant == 1);
}

TEST_CASE("bench-opt is deterministic under a fixed seed") {
    const fs::path dir = fs::temp_directory_path() / "shapebo_cli_bench";
    fs::create_directories(dir);
    const fs::path cfg = dir / "tiny.json";
    {
        std::ofstream out(cfg);
        out << R"({"methods": ["addgp-x-embed"], "targets": [2.0], "runs": 1,
                   "n0": 6, "iterations": 2, "population": 12, "generations": 4,
                   "fit_starts": 2, "seed": 7})";
    }
    const std::string cmd = "bench-opt --problem griewank40 --config " + cfg.string() +
                            " --seed 7 --out ";
    CHECK(run_cli(cmd + (dir / "a").string()) == 0);
    CHECK(run_cli(cmd + (dir / "b").string()) == 0);
    const std::string a = slurp(dir / "a" / "griewank40_opt.csv");
    const std::string b = slurp(dir / "b" / "griewank40_opt.csv");
    REQUIRE(!a.empty());
    CHECK(a == b);
}

TEST_CASE("build-db writes both file formats") {
    const fs::path dir = fs::temp_directory_path() / "shapebo_cli_db";
    fs::create_directories(dir);
    CHECK(run_cli("build-db --problem circle2d --mapping contour --n 20 --seed 2 --csv --out " +
                  dir.string()) == 0);
    CHECK(fs::exists(dir / "circle2d_db.txt"));
    const std::string csv = slurp(dir / "circle2d_db.csv");
    CHECK(csv.rfind("design_0,design_1,phi_0,", 0) == 0);

    // the database file round-trips into pca-report
    CHECK(run_cli("pca-report --problem circle2d --db " + (dir / "circle2d_db.txt").string() +
                  " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "circle2d_spectrum.csv"));
}

TEST_CASE("a config without a seed is rejected") {
    const fs::path dir = fs::temp_directory_path() / "shapebo_cli_seed";
    fs::create_directories(dir);
    const fs::path cfg = dir / "noseed.json";
    {
        std::ofstream out(cfg);
        out << R"({"methods": ["addgp-x-embed"], "runs": 1, "n0": 4, "iterations": 1})";
    }
    CHECK(run_cli("bench-opt --problem griewank40 --config " + cfg.string() + " --out " +
                  dir.string()) == 1);
    // the --seed flag satisfies the requirement
    CHECK(run_cli("bench-opt --problem griewank40 --config " + cfg.string() + " --seed 3 --out " +
                  dir.string()) == 0);
}
