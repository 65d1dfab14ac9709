#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "priorgan/priorgan.h"

namespace {

int finish(pg_status status) {
    if (status != PG_OK) std::fprintf(stderr, "priorgan: %s\n", pg_last_error());
    return pg_exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PriorGAN toolkit: GMM priors, guided GAN training and diagnostics on toy worlds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pg_version()) + " (rng " + pg_rng_version() + ")");

    std::string config;

    auto* fit = app.add_subcommand("fit-prior", "Fit the feature map and GMM prior on the configured real set");
    fit->add_option("-c,--config", config, "Run configuration (JSON)")->required();

    std::string prior;
    bool baseline = false;
    auto* train = app.add_subcommand("train", "Train one GAN per configured seed");
    train->add_option("-c,--config", config, "Run configuration (JSON)")->required();
    auto* train_prior = train->add_option("-p,--prior", prior, "Prior model guiding training");
    auto* train_base = train->add_flag("--baseline", baseline, "Train without the prior");
    train_prior->excludes(train_base);
    train_base->excludes(train_prior);

    std::string samples, checkpoint, report;
    std::size_t eval_n = 50000;
    std::uint64_t seed = 7;
    auto* eval = app.add_subcommand("eval", "Score a sample set or a checkpoint's generator against a prior");
    eval->add_option("-p,--prior", prior, "Prior model")->required();
    auto* eval_samples = eval->add_option("-s,--samples", samples, "Samples CSV with a one-line header");
    auto* eval_ckpt = eval->add_option("--checkpoint", checkpoint, "Checkpoint whose generator is sampled");
    eval_samples->excludes(eval_ckpt);
    eval_ckpt->excludes(eval_samples);
    eval->add_option("-n,--samples-count", eval_n, "Samples drawn from a checkpoint")->check(CLI::PositiveNumber);
    eval->add_option("--seed", seed, "Latent seed for checkpoint sampling");
    eval->add_option("-o,--output", report, "Write the report as JSON");

    std::string source = "discriminator", out_dir = "gradfield_out", replay;
    std::size_t grid = 40;
    double theta_pct = -1.0;
    auto* grad = app.add_subcommand("gradfield", "Export the generator-gradient field as CSV and SVG");
    grad->add_option("--checkpoint", checkpoint, "Checkpoint (discriminator and optimal sources)");
    grad->add_option("-p,--prior", prior, "Prior model (quality source)");
    grad->add_option("--source", source, "discriminator, optimal or quality")
        ->check(CLI::IsMember({"discriminator", "optimal", "quality"}));
    grad->add_option("--grid", grid, "Probes per axis")->check(CLI::Range(2, 1000));
    grad->add_option("--theta-percentile", theta_pct, "Recalibrate the quality threshold; 0 disables it")
        ->check(CLI::Range(0.0, 49.999));
    grad->add_option("--seed", seed, "Seed for scatter points and the generated-density fit");
    grad->add_option("-o,--output", out_dir, "Output directory");
    grad->add_option("--replay", replay, "Re-run from a gradfield_<source>_resolved.json");

    std::string param;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "Run the full pipeline for each value of one parameter");
    sweep->add_option("-c,--config", config, "Base run configuration (JSON)")->required();
    sweep->add_option("--param", param, "M, delta or alpha")->required()->check(CLI::IsMember({"M", "delta", "alpha"}));
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
        if (*train && !*train_prior && !baseline) throw CLI::ValidationError("train: pass --prior or --baseline");
        if (*eval && !*eval_samples && !*eval_ckpt) throw CLI::ValidationError("eval: pass --samples or --checkpoint");
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (*fit) return finish(pg_cmd_fit_prior(config.c_str()));
    if (*train) return finish(pg_cmd_train(config.c_str(), baseline ? nullptr : prior.c_str()));
    if (*eval)
        return finish(pg_cmd_eval(prior.c_str(), *eval_samples ? samples.c_str() : nullptr,
                                  *eval_ckpt ? checkpoint.c_str() : nullptr, eval_n, seed,
                                  report.empty() ? nullptr : report.c_str()));
    if (*grad) {
        if (!replay.empty()) return finish(pg_cmd_gradfield_replay(replay.c_str()));
        return finish(pg_cmd_gradfield(checkpoint.c_str(), prior.c_str(), source.c_str(), grid, theta_pct, seed,
                                       out_dir.c_str()));
    }
    if (*sweep) return finish(pg_cmd_sweep(config.c_str(), param.c_str(), values.data(), values.size()));
    return 2;
}
