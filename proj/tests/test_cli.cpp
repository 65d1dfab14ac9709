#include <doctest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "priorgan_cli_test";

struct Result {
    int code;
    std::string err;
};

// Runs the CLI with stdout discarded and stderr captured.
Result run(const std::string& args) {
    const std::string err_path = (kRoot / "stderr.txt").string();
    const std::string cmd = std::string(PRIORGAN_CLI) + " " + args + " > /dev/null 2> " + err_path;
    const int status = std::system(cmd.c_str());
    std::ifstream in(err_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string write_config(const std::string& name, const std::string& out, const std::string& train_extra = "",
                         std::size_t iters = 200) {
    const fs::path p = kRoot / name;
    std::ofstream(p) << "{\n"
                     << "  \"real_samples\": 2000,\n"
                     << "  \"prior\": {\"components\": 8, \"seed\": 11},\n"
                     << "  \"train\": {\"total_g_iters\": " << iters
                     << ", \"hidden_width\": 16, \"log_every\": 50, \"eval_samples\": 200,"
                     << " \"final_eval_samples\": 1000, \"gen_sample_count\": 256, \"refresh_every\": 50,"
                     << " \"guidance_warmup\": 0" << train_extra << "},\n"
                     << "  \"seeds\": [1, 2],\n"
                     << "  \"output_dir\": \"" << (kRoot / out).string() << "\"\n"
                     << "}\n";
    return p.string();
}

struct Fixture {
    Fixture() {
        fs::remove_all(kRoot);
        fs::create_directories(kRoot);
    }
};

const Fixture fixture;

std::size_t count_char(const std::string& s, char c) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), c)); }

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").code == 2);
    CHECK(run("bogus-command").code == 2);
    CHECK(run("--help").code == 0);
    CHECK(run("--version").code == 0);
    CHECK(run("train -c x.json").code == 2);  // neither --prior nor --baseline
    CHECK(run("eval -p x.json").code == 2);   // neither --samples nor --checkpoint
    CHECK(run("sweep -c x.json --param gamma --values 1").code == 2);
    CHECK(run("gradfield --source oracle").code == 2);
}

TEST_CASE("configuration errors name the file and line") {
    const fs::path p = kRoot / "bad.json";
    std::ofstream(p) << "{\n  \"seeds\": [1],\n  \"trian\": {}\n}\n";
    const Result r = run("fit-prior -c " + p.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.json:3:") != std::string::npos);
    CHECK(r.err.find("trian") != std::string::npos);
    CHECK(run("fit-prior -c " + (kRoot / "missing.json").string()).code == 2);
}

TEST_CASE("fit-prior is byte-reproducible") {
    const std::string a = write_config("a.json", "fit_a"), b = write_config("b.json", "fit_b");
    REQUIRE(run("fit-prior -c " + a).code == 0);
    REQUIRE(run("fit-prior -c " + b).code == 0);
    const std::string pa = slurp(kRoot / "fit_a" / "prior.json");
    CHECK(!pa.empty());
    CHECK(pa == slurp(kRoot / "fit_b" / "prior.json"));
    CHECK(fs::exists(kRoot / "fit_a" / "em_report.json"));
    CHECK(fs::exists(kRoot / "fit_a" / "resolved_config.json"));
}

TEST_CASE("baseline equals a prior run with zero guidance weights") {
    const std::string zero = write_config("zero.json", "zero", ", \"delta\": 0, \"alpha\": 0");
    const std::string base = write_config("base.json", "base", ", \"delta\": 0, \"alpha\": 0");
    REQUIRE(run("fit-prior -c " + zero).code == 0);
    REQUIRE(run("train -c " + zero + " -p " + (kRoot / "zero" / "prior.json").string()).code == 0);
    REQUIRE(run("train -c " + base + " --baseline").code == 0);
    for (const char* seed : {"seed_1", "seed_2"}) {
        CHECK(slurp(kRoot / "zero" / seed / "checkpoint.json") == slurp(kRoot / "base" / seed / "checkpoint.json"));
        CHECK(slurp(kRoot / "zero" / seed / "metrics.csv") == slurp(kRoot / "base" / seed / "metrics.csv"));
    }
    const std::string summary = slurp(kRoot / "zero" / "summary.csv");
    CHECK(summary.starts_with("run_id,seed,qs,dds,mode_coverage,high_quality_fraction\n"));
    CHECK(count_char(summary, '\n') == 5);  // header, two seeds, mean, std
}

TEST_CASE("guided training, eval and gradient fields") {
    const std::string cfg = write_config("guided.json", "guided");
    REQUIRE(run("fit-prior -c " + cfg).code == 0);
    const std::string prior = (kRoot / "guided" / "prior.json").string();
    REQUIRE(run("train -c " + cfg + " -p " + prior).code == 0);
    const fs::path seed1 = kRoot / "guided" / "seed_1";
    const std::string plans = slurp(seed1 / "plans.csv");
    CHECK(plans.starts_with("iteration,alpha,fr_0,"));
    CHECK(count_char(plans, '\n') == 1 + 1 + 200 / 50);
    const std::string profile = slurp(seed1 / "profile.csv");
    CHECK(profile.starts_with("run_id,iteration,qs,dds,fr_0,"));
    CHECK(count_char(profile, '\n') == 1 + 200 / 50);

    const std::string ckpt = (seed1 / "checkpoint.json").string();
    const std::string report = (kRoot / "eval.json").string();
    CHECK(run("eval -p " + prior + " --checkpoint " + ckpt + " -n 2000 -o " + report).code == 0);
    CHECK(slurp(report).find("\"dds\"") != std::string::npos);

    const fs::path samples = kRoot / "samples.csv";
    std::ofstream(samples) << "x0,x1\n2,0\n0,2\n-2,0\n0.1,0.1\n";
    CHECK(run("eval -p " + prior + " -s " + samples.string()).code == 0);
    CHECK(run("eval -p " + prior + " -s " + (kRoot / "none.csv").string()).code == 2);
    std::ofstream(kRoot / "broken.csv") << "x0,x1\n1,2\n3,zz\n";
    const Result broken = run("eval -p " + prior + " -s " + (kRoot / "broken.csv").string());
    CHECK(broken.code == 2);
    CHECK(broken.err.find(":3") != std::string::npos);

    for (const char* source : {"discriminator", "optimal", "quality"}) {
        const fs::path out = kRoot / (std::string("field_") + source);
        REQUIRE(run(std::string("gradfield --checkpoint ") + ckpt + " -p " + prior + " --source " + source +
                    " --grid 12 --seed 3 -o " + out.string())
                    .code == 0);
        const std::string stem = std::string("gradfield_") + source;
        const std::string csv = slurp(out / (stem + ".csv"));
        const std::string svg = slurp(out / (stem + ".svg"));
        CHECK(count_char(csv, '\n') == 1 + 144);
        CHECK(svg.find("</svg>") != std::string::npos);

        // Replaying the resolved settings regenerates both files bit for bit.
        const fs::path resolved = out / (stem + "_resolved.json");
        fs::remove(out / (stem + ".csv"));
        fs::remove(out / (stem + ".svg"));
        REQUIRE(run("gradfield --replay " + resolved.string()).code == 0);
        CHECK(slurp(out / (stem + ".csv")) == csv);
        CHECK(slurp(out / (stem + ".svg")) == svg);
    }
    // θ at percentile 0 switches the quality loss off entirely.
    const fs::path off = kRoot / "field_off";
    REQUIRE(run("gradfield -p " + prior + " --source quality --grid 5 --theta-percentile 0 -o " + off.string())
                .code == 0);
    const std::string csv = slurp(off / "gradfield_quality.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) CHECK(line.find(",0,0,quality") != std::string::npos);
    CHECK(run("gradfield --source optimal -o " + off.string()).code == 2);
}

TEST_CASE("a killed run leaves only whole CSV lines") {
    const std::string cfg = write_config("long.json", "long", ", \"delta\": 0, \"alpha\": 0", 200000);
    std::fflush(stdout);
    const pid_t pid = fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        std::freopen("/dev/null", "w", stdout);
        execl(PRIORGAN_CLI, PRIORGAN_CLI, "train", "-c", cfg.c_str(), "--baseline", static_cast<char*>(nullptr));
        _exit(127);
    }
    const fs::path metrics = kRoot / "long" / "seed_1" / "metrics.csv";
    for (int i = 0; i < 300; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        if (fs::exists(metrics) && count_char(slurp(metrics), '\n') >= 4) break;
    }
    kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    CHECK(WIFSIGNALED(status));

    for (const char* name : {"metrics.csv", "profile.csv"}) {
        const std::string text = slurp(kRoot / "long" / "seed_1" / name);
        REQUIRE(!text.empty());
        CHECK(text.back() == '\n');
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        const std::size_t commas = count_char(line, ',');
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            CHECK(count_char(line, ',') == commas);
            ++rows;
        }
        CHECK(rows >= 1);
    }
    CHECK(!fs::exists(kRoot / "long" / "seed_1" / "checkpoint.json"));
}

TEST_CASE("sweep writes one row per cell plus a summary per value") {
    const std::string cfg = write_config("sweep.json", "sweep", "", 100);
    REQUIRE(run("sweep -c " + cfg + " --param alpha --values 1,3").code == 0);
    const std::string csv = slurp(kRoot / "sweep" / "sweep_alpha.csv");
    CHECK(csv.starts_with("row,param,value,seed,status,qs,qs_std,dds,dds_std,"));
    CHECK(count_char(csv, '\n') == 1 + 2 * (2 + 1));
    CHECK(fs::exists(kRoot / "sweep" / "sweep_alpha_3" / "seed_2" / "checkpoint.json"));
}
