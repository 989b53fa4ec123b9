#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks against the built binary; OMC_CLI_PATH comes from CMake.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("omc_cli_" + std::to_string(counter++));
    const std::string cmd = std::string(OMC_CLI_PATH) + " " + args + " > " +
                            log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(raw);
    std::ifstream in(log);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    fs::remove(log);
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// drop column `at` (0-based) from every CSV line
std::string drop_column(const std::string& csv, int at) {
    std::stringstream out;
    std::istringstream lines(csv);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string field;
        int i = 0;
        bool first = true;
        while (std::getline(fields, field, ',')) {
            if (i++ == at) continue;
            out << (first ? "" : ",") << field;
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("help exits zero, missing subcommand exits one") {
    CHECK(run("--help").exit_code == 0);
    CHECK(run("synth --help").exit_code == 0);
    CHECK(run("").exit_code == 1);
    CHECK(run("--bogus-flag synth").exit_code == 1);
    CHECK(run("online --backend nonsense").exit_code == 1);
}

TEST_CASE("online without input data is a usage error") {
    const RunResult result = run("online");
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("usage error") != std::string::npos);
}

TEST_CASE("missing and malformed data files map to exit code 2") {
    CHECK(run("online --ratings /nonexistent/ratings.csv").exit_code == 2);
    CHECK(run("online --manifest /nonexistent/manifest.json").exit_code == 2);

    const fs::path dir = fresh_dir("omc_cli_bad");
    std::ofstream(dir / "bad.csv") << "1,2,not_a_number,4\n";
    CHECK(run("online --no-scale-check --ratings " + (dir / "bad.csv").string()).exit_code ==
          2);
    std::ofstream(dir / "manifest.json") << "{ not json";
    CHECK(run("online --manifest " + (dir / "manifest.json").string()).exit_code == 2);
}

TEST_CASE("synth writes a loadable manifest and is reproducible") {
    const fs::path a = fresh_dir("omc_cli_synth_a");
    const fs::path b = fresh_dir("omc_cli_synth_b");
    const std::string flags = "--seed 5 synth --scale 0.02 --rank 3 --t 3 --out ";
    CHECK(run(flags + a.string()).exit_code == 0);
    CHECK(run(flags + b.string()).exit_code == 0);
    CHECK(read_file(a / "manifest.json") == read_file(b / "manifest.json"));
    CHECK(read_file(a / "train_01.csv") == read_file(b / "train_01.csv"));
    CHECK(read_file(a / "test_03.csv") == read_file(b / "test_03.csv"));
    CHECK(read_file(a / "train_01.csv").size() > 0);
}

TEST_CASE("online runs end to end on generated data") {
    const fs::path dir = fresh_dir("omc_cli_run");
    REQUIRE(run("--seed 9 synth --scale 0.03 --rank 3 --t 3 --obs-start 0.2 --obs-end 0.3 "
                "--out " +
                dir.string())
                .exit_code == 0);
    const std::string csv = (dir / "out.csv").string();
    const RunResult result =
        run("--seed 9 --threads 1 online --manifest " + (dir / "manifest.json").string() +
            " --k 4 --p 3 --q 1 --out " + csv);
    CHECK(result.exit_code == 0);

    const std::string content = read_file(csv);
    CHECK(content.rfind("label,train_rmse,test_rmse,theta_P,theta_Q,phi_sigma,seconds,rank,"
                        "lambda,iterations\n",
                        0) == 0);
    int lines = 0;
    for (const char c : content)
        if (c == '\n') ++lines;
    CHECK(lines == 4);  // header + one row per matrix
    // the first matrix has no predecessor to drift from
    CHECK(content.find("nan,nan,nan") != std::string::npos);

    const std::string summary = read_file(csv + ".json");
    CHECK(summary.find("\"config_hash\"") != std::string::npos);
    CHECK(summary.find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("reruns are byte-identical apart from the timing column") {
    const fs::path dir = fresh_dir("omc_cli_det");
    REQUIRE(run("--seed 4 synth --scale 0.03 --rank 3 --t 3 --obs-start 0.2 --obs-end 0.3 "
                "--out " +
                dir.string())
                .exit_code == 0);
    const std::string common = "--seed 4 --threads 1 online --manifest " +
                               (dir / "manifest.json").string() + " --k 4 --p 3 --q 1 --out ";
    const std::string csv_a = (dir / "a.csv").string();
    const std::string csv_b = (dir / "b.csv").string();
    REQUIRE(run(common + csv_a).exit_code == 0);
    REQUIRE(run(common + csv_b).exit_code == 0);
    CHECK(drop_column(read_file(csv_a), 6) == drop_column(read_file(csv_b), 6));
}

TEST_CASE("backends and restart modes change the run, flags reach the solver") {
    const fs::path dir = fresh_dir("omc_cli_modes");
    REQUIRE(run("--seed 2 synth --scale 0.03 --rank 3 --t 2 --obs-start 0.25 --obs-end 0.3 "
                "--out " +
                dir.string())
                .exit_code == 0);
    const std::string base = "--seed 2 --threads 1 online --manifest " +
                             (dir / "manifest.json").string() + " --k 4 --p 3 --q 1 ";
    const std::string warm = (dir / "warm.csv").string();
    const std::string cold = (dir / "cold.csv").string();
    REQUIRE(run(base + "--restart warm --out " + warm).exit_code == 0);
    REQUIRE(run(base + "--restart cold --out " + cold).exit_code == 0);
    // same data, different seeding: the drift columns must differ
    CHECK(read_file(warm) != read_file(cold));

    const std::string exact = (dir / "exact.csv").string();
    REQUIRE(run(base + "--backend exact --out " + exact).exit_code == 0);
    CHECK(read_file(exact).find("nan,nan,nan") != std::string::npos);
}

TEST_CASE("config files feed flags with command-line precedence") {
    const fs::path dir = fresh_dir("omc_cli_cfg");
    REQUIRE(run("--seed 6 synth --scale 0.03 --rank 3 --t 2 --obs-start 0.25 --obs-end 0.3 "
                "--out " +
                dir.string())
                .exit_code == 0);
    std::ofstream(dir / "run.cfg") << "seed=6\nthreads=1\n[online]\nk=4\np=3\nq=1\n";

    const std::string flag_csv = (dir / "flags.csv").string();
    const std::string cfg_csv = (dir / "cfg.csv").string();
    const std::string manifest = (dir / "manifest.json").string();
    REQUIRE(run("--seed 6 --threads 1 online --manifest " + manifest +
                " --k 4 --p 3 --q 1 --out " + flag_csv)
                .exit_code == 0);
    REQUIRE(run("--config " + (dir / "run.cfg").string() + " online --manifest " + manifest +
                " --out " + cfg_csv)
                .exit_code == 0);
    CHECK(drop_column(read_file(flag_csv), 6) == drop_column(read_file(cfg_csv), 6));

    // explicit flags win over the config file
    const std::string override_csv = (dir / "override.csv").string();
    REQUIRE(run("--config " + (dir / "run.cfg").string() + " online --manifest " + manifest +
                " --k 2 --out " + override_csv)
                .exit_code == 0);
    CHECK(read_file(override_csv) != read_file(cfg_csv));
}

TEST_CASE("bounds subcommand prints one verdict per bound") {
    const RunResult result = run("--seed 1 bounds --m 60 --n 40 --k 5 --p 5 --q 1 --trials 20");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("spectral_error") != std::string::npos);
    CHECK(result.output.find("projection_residual") != std::string::npos);
    CHECK(result.output.find("objective_gap") != std::string::npos);
    CHECK(result.output.find("PASS") != std::string::npos);
}

TEST_CASE("select-model reports a choice and honors custom grids") {
    const fs::path dir = fresh_dir("omc_cli_sel");
    REQUIRE(run("--seed 8 synth --scale 0.05 --rank 3 --t 2 --obs-start 0.4 --obs-end 0.5 "
                "--out " +
                dir.string())
                .exit_code == 0);
    const RunResult result = run("--seed 8 --threads 2 select-model --manifest " +
                                 (dir / "manifest.json").string() +
                                 " --rhos 0.1 0.3 --ks 3 6 --folds 2 --json " +
                                 (dir / "sel.json").string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("selected rho=") != std::string::npos);
    const std::string json = read_file(dir / "sel.json");
    CHECK(json.find("\"table\"") != std::string::npos);
    CHECK(json.find("\"cv_rmse\"") != std::string::npos);
}
