#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "priorgan/priorgan.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir = fs::temp_directory_path() / "priorgan_capi_test";
    Scratch() {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string write(const std::string& name, const std::string& text) const {
        const auto p = (dir / name).string();
        std::ofstream(p) << text;
        return p;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("version and status helpers") {
    CHECK(std::string(pg_version()) == "1.0.0");
    CHECK(std::string(pg_rng_version()).find("xoshiro256") == 0);
    CHECK(std::string(pg_status_name(PG_OK)) == "Ok");
    CHECK(std::string(pg_status_name(PG_CONFIG_ERROR)) == "ConfigError");
    CHECK(std::string(pg_status_name(PG_INTERNAL_ERROR)) == "InternalError");
    CHECK(std::string(pg_status_name(static_cast<pg_status>(57))) == "Unknown");
    CHECK(pg_exit_code(PG_OK) == 0);
    CHECK(pg_exit_code(PG_CONFIG_ERROR) == 2);
    CHECK(pg_exit_code(PG_INVALID_ARGUMENT) == 2);
    CHECK(pg_exit_code(PG_VERSION_MISMATCH) == 2);
    CHECK(pg_exit_code(PG_NON_FINITE_LOSS) == 1);
    CHECK(pg_exit_code(PG_IO_ERROR) == 1);
    CHECK(pg_exit_code(PG_INTERNAL_ERROR) == 1);
}

TEST_CASE("null handles and arguments are rejected") {
    pg_prior* prior = nullptr;
    CHECK(pg_prior_load(nullptr, &prior) == PG_INVALID_ARGUMENT);
    CHECK(std::string(pg_last_error()).find("NULL") != std::string::npos);
    double out = 0.0;
    const double x[2] = {0.0, 0.0};
    CHECK(pg_prior_log_density(nullptr, x, 2, &out) == PG_INVALID_ARGUMENT);
    CHECK(pg_cmd_fit_prior(nullptr) == PG_INVALID_ARGUMENT);
    pg_prior_free(nullptr);
    pg_config_free(nullptr);
    CHECK(pg_prior_load("/nonexistent/prior.json", &prior) == PG_IO_ERROR);
    CHECK(prior == nullptr);
}

TEST_CASE("config, prior fit and prior queries") {
    Scratch s;
    const std::string cfg_path = s.write("cfg.json", R"({"real_samples": 3000, "prior": {"components": 8, "seed": 4}})");
    pg_config* cfg = nullptr;
    REQUIRE(pg_config_load(cfg_path.c_str(), &cfg) == PG_OK);

    size_t needed = 0;
    REQUIRE(pg_config_resolved_json(cfg, nullptr, 0, &needed) == PG_OK);
    CHECK(needed > 10);
    std::vector<char> buf(needed);
    CHECK(pg_config_resolved_json(cfg, buf.data(), 4, nullptr) == PG_INVALID_ARGUMENT);
    REQUIRE(pg_config_resolved_json(cfg, buf.data(), buf.size(), nullptr) == PG_OK);
    CHECK(std::strlen(buf.data()) + 1 == needed);
    CHECK(std::string(buf.data()).find("\"real_samples\": 3000") != std::string::npos);

    pg_prior* prior = nullptr;
    REQUIRE(pg_prior_fit(cfg, &prior) == PG_OK);
    size_t in_dim = 0, feat_dim = 0, comps = 0;
    REQUIRE(pg_prior_dims(prior, &in_dim, &feat_dim, &comps) == PG_OK);
    CHECK(in_dim == 2);
    CHECK(feat_dim == 2);
    CHECK(comps == 8);

    const double mode[2] = {2.0, 0.0}, origin[2] = {0.0, 0.0};
    double lp_mode = 0.0, lp_origin = 0.0, loss = -1.0;
    REQUIRE(pg_prior_log_density(prior, mode, 2, &lp_mode) == PG_OK);
    REQUIRE(pg_prior_log_density(prior, origin, 2, &lp_origin) == PG_OK);
    CHECK(lp_mode > lp_origin);
    REQUIRE(pg_prior_quality_loss(prior, mode, 2, &loss) == PG_OK);
    CHECK(loss == 0.0);
    REQUIRE(pg_prior_quality_loss(prior, origin, 2, &loss) == PG_OK);
    CHECK(loss == doctest::Approx(-lp_origin));
    CHECK(pg_prior_log_density(prior, mode, 3, &lp_mode) == PG_DIMENSION_MISMATCH);

    size_t comp = 99;
    REQUIRE(pg_prior_assign(prior, mode, 2, &comp) == PG_OK);
    CHECK(comp < 8);
    const double pts[4] = {2.0, 0.0, 0.0, 2.0};
    double qs = -1.0;
    REQUIRE(pg_prior_quality_score(prior, pts, 2, 2, &qs) == PG_OK);
    CHECK(qs > 0.5);
    CHECK(qs <= 1.0);
    CHECK(pg_prior_quality_score(prior, pts, 0, 2, &qs) == PG_EMPTY_SET);

    const std::string p1 = (s.dir / "a.json").string(), p2 = (s.dir / "b.json").string();
    REQUIRE(pg_prior_save(prior, p1.c_str()) == PG_OK);
    pg_prior* loaded = nullptr;
    REQUIRE(pg_prior_load(p1.c_str(), &loaded) == PG_OK);
    REQUIRE(pg_prior_save(loaded, p2.c_str()) == PG_OK);
    CHECK(slurp(p1) == slurp(p2));
    double lp_loaded = 0.0;
    REQUIRE(pg_prior_log_density(loaded, origin, 2, &lp_loaded) == PG_OK);
    CHECK(lp_loaded == lp_origin);

    pg_prior_free(loaded);
    pg_prior_free(prior);
    pg_config_free(cfg);
}

TEST_CASE("config errors surface as ConfigError with location") {
    Scratch s;
    const std::string path = s.write("bad.json", "{\n  \"train\": {\n    \"detla\": 0.1\n  }\n}\n");
    pg_config* cfg = nullptr;
    CHECK(pg_config_load(path.c_str(), &cfg) == PG_CONFIG_ERROR);
    CHECK(cfg == nullptr);
    const std::string msg = pg_last_error();
    CHECK(msg.find("bad.json:3:") != std::string::npos);
    CHECK(msg.find("train.detla") != std::string::npos);
}

TEST_CASE("frequency arithmetic") {
    const double fr[3] = {0.6, 0.3, 0.1}, fg[3] = {0.2, 0.5, 0.3};
    double d[3], dds = 0.0, fnew[3];
    REQUIRE(pg_diversity_distance(fr, fg, 3, d, &dds) == PG_OK);
    CHECK(dds == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(d[0] == doctest::Approx(0.4).epsilon(1e-15));
    REQUIRE(pg_resample_update(fr, fg, 3, 1.0, fnew) == PG_OK);
    CHECK(fnew[0] == doctest::Approx(10.0 / 11).epsilon(1e-14));
    CHECK(fnew[2] == 0.0);
    CHECK(pg_resample_update(fr, fg, 3, 0.0, fnew) == PG_INVALID_ARGUMENT);
    const double zeros[2] = {0.0, 0.0};
    CHECK(pg_resample_update(zeros, zeros, 2, 1.0, fnew) == PG_ALL_CLIPPED_TO_ZERO);
}

TEST_CASE("command entry points validate their inputs") {
    CHECK(pg_cmd_eval("/nonexistent/prior.json", "/nonexistent/s.csv", nullptr, 0, 1, nullptr) ==
          PG_INVALID_ARGUMENT);
    CHECK(pg_cmd_gradfield("", "", "bogus", 10, -1.0, 1, "/tmp") == PG_INVALID_ARGUMENT);
    const double v = 1.0;
    CHECK(pg_cmd_sweep("/nonexistent/cfg.json", "gamma", &v, 1) == PG_INVALID_ARGUMENT);
    CHECK(pg_cmd_gradfield_replay("/nonexistent/r.json") == PG_INVALID_ARGUMENT);
}
