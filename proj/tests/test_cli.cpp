#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run lab(const std::string& args) {
    const std::string cmd = std::string(SOLITON_LAB) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "soliton_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

// largest |ham_residual| over rows with t <= t_end
double max_ham(const fs::path& csv, double t_end) {
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    double worst = 0.0;
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell;
        double t = 0.0, ham = 0.0;
        for (int col = 0; std::getline(row, cell, ','); ++col) {
            if (col == 0) t = std::stod(cell);
            if (col == 19) ham = std::stod(cell);
        }
        if (t <= t_end) worst = std::max(worst, std::abs(ham));
    }
    return worst;
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
    CHECK(lab("integrate --hbar 1").code == 2);
    CHECK(lab("integrate --preset nosuch --hbar 1").code == 2);
    CHECK(lab("integrate --preset cp2 --hbar -1").code == 2);
    CHECK(lab("scan --preset cp2 --hbar-range 1:0").code == 2);
    CHECK(lab("frobnicate").code == 2);
    CHECK(lab("verify --oracle conical --factors 2,3 --at 0").code == 2);
}

TEST_CASE("presets are listed") {
    const auto r = lab("presets");
    CHECK(r.code == 0);
    for (const char* name : {"cp2", "s5", "s2xs3", "s11", "cap2"}) CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("integrate writes the trajectory, a manifest, and reruns identically") {
    const auto csv = scratch("kc.csv");
    const auto r = lab("integrate --preset cp2 --hbar 0.7319 --ubar -0.5276 --out " + csv.string());
    REQUIRE(r.code == 0);
    const auto text = slurp(csv);
    CHECK(text.substr(0, text.find('\n')) ==
          "t,f,fdot,h,hdot,u,udot,xi,W,E,F,theta,G,Hcal,Q,Lcal,Fcal,S,trL,ham_residual,normal_residual,sol");
    const fs::path manifest = csv.string() + ".manifest.json";
    REQUIRE(fs::exists(manifest));
    const auto j = nlohmann::json::parse(slurp(manifest));
    CHECK(j["command"] == "integrate");
    CHECK(j["outputs"].size() == 1);
    CHECK(lab("rerun --manifest " + manifest.string()).code == 0);

    std::ofstream(csv, std::ios::app) << "tampered\n";
    CHECK(lab("rerun --manifest " + manifest.string() + " --write").code == 0);
    CHECK(slurp(csv) == text);

    auto altered = j;
    altered["outputs"][0]["sha256"] = std::string(64, '0');
    const auto bad = scratch("altered.manifest.json");
    std::ofstream(bad) << altered.dump(2);
    CHECK(lab("rerun --manifest " + bad.string()).code == 1);
}

TEST_CASE("halving the step reduces the constraint drift about sixteenfold") {
    const auto a = scratch("s5_coarse.csv"), b = scratch("s5_fine.csv");
    REQUIRE(lab("integrate --preset s5 --hbar 10 --t0 0.05 --tmax 1 --step 0.005 --out " + a.string()).code == 0);
    REQUIRE(lab("integrate --preset s5 --hbar 10 --t0 0.05 --tmax 1 --step 0.0025 --out " + b.string()).code == 0);
    const double ratio = max_ham(a, 1.0) / max_ham(b, 1.0);
    MESSAGE("ratio " << ratio);
    CHECK(ratio > 10.0);
    CHECK(ratio < 24.0);
}

TEST_CASE("scan with a zero threshold finds no clusters") {
    const auto prefix = scratch("empty").string();
    const auto r = lab("scan --preset cp2 --hbar-range 0.7:0.8:0.05 --ubar-range -0.6:-0.5:0.05 --threshold 0 "
                       "--threads 2 --out-prefix " + prefix);
    REQUIRE(r.code == 0);
    const auto clusters = nlohmann::json::parse(slurp(prefix + ".clusters.json"));
    CHECK(clusters["count"] == 0);
    CHECK(lab("rerun --manifest " + prefix + ".manifest.json").code == 0);
}

TEST_CASE("verify accepts the closed forms") {
    CHECK(lab("verify --oracle cone --factors 2,3 --epsilon -10").code == 0);
    CHECK(lab("verify --oracle gaussian --factors 2,2 --epsilon -8").code == 0);
    const auto one = lab("verify --oracle conical --factors 2,3 --at 0.5");
    CHECK(one.code == 0);
    CHECK(one.out.find("xi") != std::string::npos);
}
