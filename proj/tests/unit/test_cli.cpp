#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int run_cli(const std::string& args) {
    const std::string command = std::string(SLTGP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kTiny = "--n-train 20 --n-test 20 --restarts 1 --max-evals 20 --seed 3";

}  // namespace

TEST_CASE("cli exit codes") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("run --bogus") == 2);
    CHECK(run_cli("run --dataset moons") == 2);
    CHECK(run_cli("run --dataset latent_gp --repeats 0") == 2);
    CHECK(run_cli("run --dataset latent_gp --methods svm") == 2);
    CHECK(run_cli("bound --dataset latent_gp --sigma0-sq 0.5") == 3);
    CHECK(run_cli("rho-sweep --r-grid 2 " + kTiny) == 3);
    CHECK(run_cli("run --config /nonexistent.cfg") == 2);
    CHECK(run_cli("run --dataset latent_gp --repeats 1 --methods gpc " + kTiny) == 0);
}

TEST_CASE("cli run writes the three tables") {
    const auto dir = std::filesystem::temp_directory_path() / "sltgp_cli_run";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::string prefix = (dir / "latent").string();
    REQUIRE(run_cli("run --dataset latent_gp --repeats 2 --methods gpc,slt_gp --out " + prefix + " " + kTiny) == 0);
    const std::string repeats = slurp(prefix + "_repeats.csv");
    CHECK(repeats.rfind("repeat,seed,method,status,", 0) == 0);
    CHECK(std::count(repeats.begin(), repeats.end(), '\n') == 5);
    CHECK(slurp(prefix + "_summary.csv").rfind("method,n_ok,n_failed,mean_accuracy,std_accuracy,single_sample", 0) ==
          0);
    CHECK(std::filesystem::exists(prefix + "_timing.csv"));

    // A config file supplies defaults that flags override.
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << "dataset = latent_gp\nrepeats = 5\nmethods = gpc\n";
    REQUIRE(run_cli("run --config " + cfg.string() + " --repeats 1 --out " + prefix + " " + kTiny) == 0);
    const std::string one = slurp(prefix + "_repeats.csv");
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
}

TEST_CASE("cli gen writes datasets") {
    const auto dir = std::filesystem::temp_directory_path() / "sltgp_cli_gen";
    std::filesystem::remove_all(dir);
    REQUIRE(run_cli("gen --dataset relevant_feature --n-train 5 --n-test 3 --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "train.csv"));
    CHECK(std::filesystem::exists(dir / "test.csv"));
    CHECK(std::filesystem::exists(dir / "meta.json"));
    const std::string train = slurp(dir / "train.csv");
    CHECK(std::count(train.begin(), train.end(), '\n') == 6);

    REQUIRE(run_cli("gen --dataset latent_gp --repeats 2 --n-train 5 --n-test 3 --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "repeat_1" / "meta.json"));
}

TEST_CASE("cli bound prints one row") {
    const auto out = std::filesystem::temp_directory_path() / "sltgp_cli_bound.csv";
    REQUIRE(run_cli("bound --dataset clean_soft_label --delta 1 --out " + out.string() + " " + kTiny) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("dataset,seed,n,rho,log_conditional_marginal,sigma0_sq,delta,b,c,bound\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
