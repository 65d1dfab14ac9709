#include "priorgan/commands.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include "json_codec.hpp"
#include "priorgan/io.hpp"

namespace priorgan {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return 0;
        case ErrorCode::InvalidArgument:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::ConfigError:
        case ErrorCode::FormatError:
        case ErrorCode::VersionMismatch: return 2;
        default: return 1;
    }
}

namespace {

void require_file(const std::string& path, const char* what) {
    std::error_code ec;
    require(!path.empty(), ErrorCode::InvalidArgument, std::string(what) + " path is empty");
    require(fs::is_regular_file(path, ec), ErrorCode::InvalidArgument,
            std::string(what) + " '" + path + "' does not exist or is not a file");
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorCode::IoError, "cannot create directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

std::vector<std::string> indexed(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void append(std::vector<std::string>& cells, const Vec& values) {
    for (double v : values) cells.push_back(format_double(v));
}

struct MeanStd {
    double mean = 0.0, std = 0.0;
};

// Sample standard deviation (n − 1); zero for a single value.
MeanStd mean_std(const std::vector<double>& v) {
    MeanStd r;
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return r;
}

PriorModel load_compatible_prior(const std::string& path) {
    require_file(path, "prior model");
    PriorModel prior = load_prior_model(path);
    require(prior.feature_map.input_dim() == 2, ErrorCode::DimensionMismatch,
            "prior '" + path + "' is over " + std::to_string(prior.feature_map.input_dim()) +
                "-dimensional points, toy worlds are 2D");
    return prior;
}

// One training run with its CSV streams; returns the final evaluation.
EvalMetrics run_seed(const ToyWorld& world, const std::vector<Vec>& real, TrainConfig tc, std::uint64_t seed,
                     const PriorModel* guidance, const PriorModel& evaluation, const fs::path& dir, std::ostream& log) {
    tc.seed = seed;
    prepare_dir(dir.string());
    const std::size_t m = evaluation.gmm.components();
    const std::string run_id = "seed_" + std::to_string(seed);

    CsvWriter metrics((dir / "metrics.csv").string(),
                      {"iteration", "d_loss", "g_loss", "qs", "dds", "mode_coverage", "high_quality_fraction"});
    std::vector<std::string> profile_header = {"run_id", "iteration", "qs", "dds"};
    for (auto& h : indexed("fr_", m)) profile_header.push_back(h);
    for (auto& h : indexed("fg_", m)) profile_header.push_back(h);
    CsvWriter profile((dir / "profile.csv").string(), profile_header);
    const std::size_t pm = guidance ? guidance->gmm.components() : m;
    std::vector<std::string> plan_header = {"iteration", "alpha"};
    for (auto& h : indexed("fr_", pm)) plan_header.push_back(h);
    for (auto& h : indexed("fg_", pm)) plan_header.push_back(h);
    for (auto& h : indexed("fnew_", pm)) plan_header.push_back(h);
    CsvWriter plans((dir / "plans.csv").string(), plan_header);

    TrainObserver obs;
    obs.on_metrics = [&](const MetricsRow& r) {
        metrics.write_row({std::to_string(r.iteration), format_double(r.d_loss), format_double(r.g_loss),
                           format_double(r.qs), format_double(r.dds), std::to_string(r.mode_coverage),
                           format_double(r.high_quality_fraction)});
        std::vector<std::string> cells = {run_id, std::to_string(r.iteration), format_double(r.qs),
                                          format_double(r.dds)};
        append(cells, evaluation.real_profile.frequencies);
        append(cells, r.gen_frequencies);
        profile.write_row(cells);
    };
    obs.on_plan = [&](const PlanRow& r) {
        std::vector<std::string> cells = {std::to_string(r.iteration), format_double(r.alpha)};
        append(cells, r.real_frequencies);
        append(cells, r.gen_frequencies);
        append(cells, r.new_frequencies);
        plans.write_row(cells);
    };

    TrainResult result = train(world, tc, guidance, &evaluation, &obs, &real);
    save_checkpoint(Checkpoint{world.spec(), tc, result.model}, (dir / "checkpoint.json").string());
    const EvalMetrics& fm = *result.final_metrics;
    log << run_id << ": qs " << format_double(fm.qs) << " dds " << format_double(fm.dds) << " coverage "
        << fm.coverage.covered << "/" << world.modes() << " high_quality " << format_double(fm.high_quality_fraction)
        << "\n";
    return fm;
}

}  // namespace

std::vector<Vec> real_set_from_config(const RunConfig& cfg) {
    Rng rng(cfg.prior_seed);
    return ToyWorld(cfg.world).sample(rng, cfg.real_samples);
}

PriorFit fit_prior_from_config(const RunConfig& cfg) {
    const ToyWorld world(cfg.world);
    Rng rng(cfg.prior_seed);
    const auto real = world.sample(rng, cfg.real_samples);
    PriorFit fit = fit_prior_model(real, cfg.prior, rng);
    fit.model.meta.world = cfg.world;
    return fit;
}

std::string cmd_fit_prior(const std::string& config_path, std::ostream& log) {
    const RunConfig cfg = load_run_config(config_path);
    const fs::path dir = prepare_dir(effective_output_dir(cfg));
    write_text_file((dir / "resolved_config.json").string(), resolved_config_json(cfg));

    const PriorFit fit = fit_prior_from_config(cfg);
    const std::string prior_path = (dir / "prior.json").string();
    save_prior_model(fit.model, prior_path);
    json report = {{"iterations_run", fit.report.iterations_run},
                   {"converged", fit.report.converged},
                   {"reseeds", fit.report.reseeds},
                   {"nll_trace", fit.report.nll_trace}};
    write_text_file((dir / "em_report.json").string(), report.dump(2) + "\n");
    log << "prior: " << fit.model.gmm.components() << " components, " << fit.report.iterations_run
        << " EM iterations, final NLL " << format_double(fit.model.meta.final_nll)
        << (fit.report.converged ? "" : " (not converged)") << "\n"
        << "wrote " << prior_path << "\n";
    return prior_path;
}

std::vector<SeedOutcome> cmd_train(const TrainCommand& cmd, std::ostream& log) {
    RunConfig cfg = load_run_config(cmd.config_path);
    const bool baseline = !cmd.prior_path;
    PriorModel prior = baseline ? fit_prior_from_config(cfg).model : load_compatible_prior(*cmd.prior_path);
    if (baseline) cfg.train.delta = cfg.train.alpha = 0.0;

    const fs::path dir = prepare_dir(effective_output_dir(cfg));
    write_text_file((dir / "resolved_config.json").string(), resolved_config_json(cfg));
    const ToyWorld world(cfg.world);
    const std::vector<Vec> real = real_set_from_config(cfg);

    std::vector<SeedOutcome> outcomes;
    CsvWriter summary((dir / "summary.csv").string(),
                      {"run_id", "seed", "qs", "dds", "mode_coverage", "high_quality_fraction"});
    std::vector<double> qs, dds, cov, hq;
    for (std::uint64_t seed : cfg.seeds) {
        const fs::path sub = dir / ("seed_" + std::to_string(seed));
        const EvalMetrics m = run_seed(world, real, cfg.train, seed, baseline ? nullptr : &prior, prior, sub, log);
        summary.write_row({"seed_" + std::to_string(seed), std::to_string(seed), format_double(m.qs),
                           format_double(m.dds), std::to_string(m.coverage.covered),
                           format_double(m.high_quality_fraction)});
        qs.push_back(m.qs);
        dds.push_back(m.dds);
        cov.push_back(static_cast<double>(m.coverage.covered));
        hq.push_back(m.high_quality_fraction);
        outcomes.push_back({seed, m});
    }
    const MeanStd a = mean_std(qs), b = mean_std(dds), c = mean_std(cov), d = mean_std(hq);
    summary.write_row({"mean", "", format_double(a.mean), format_double(b.mean), format_double(c.mean),
                       format_double(d.mean)});
    summary.write_row(
        {"std", "", format_double(a.std), format_double(b.std), format_double(c.std), format_double(d.std)});
    return outcomes;
}

EvalReport cmd_eval(const EvalCommand& cmd, std::ostream& log) {
    require(cmd.samples_path.has_value() != cmd.checkpoint_path.has_value(), ErrorCode::InvalidArgument,
            "give exactly one of a samples file or a checkpoint");
    const PriorModel prior = [&] {
        require_file(cmd.prior_path, "prior model");
        return load_prior_model(cmd.prior_path);
    }();
    std::optional<ToyWorld> world;
    double capture_sigmas = TrainConfig{}.capture_sigmas;
    std::vector<Vec> samples;
    if (cmd.samples_path) {
        require_file(*cmd.samples_path, "samples file");
        samples = read_samples_csv(*cmd.samples_path);
        if (prior.meta.world) world.emplace(*prior.meta.world);
    } else {
        require_file(*cmd.checkpoint_path, "checkpoint");
        const Checkpoint ck = load_checkpoint(*cmd.checkpoint_path);
        require(cmd.samples > 0, ErrorCode::InvalidArgument, "sample count must be positive");
        Rng rng(cmd.seed);
        samples = generate(ck.model.generator, cmd.samples, rng);
        world.emplace(ck.world);
        capture_sigmas = ck.config.capture_sigmas;
    }
    require(!samples.empty(), ErrorCode::EmptySet, "no samples to evaluate");
    for (const Vec& s : samples)
        require(s.size() == prior.feature_map.input_dim(), ErrorCode::DimensionMismatch,
                "samples are " + std::to_string(s.size()) + "-dimensional, the prior expects " +
                    std::to_string(prior.feature_map.input_dim()));

    EvalReport r;
    r.sample_count = samples.size();
    const auto feats = prior.features(samples);
    r.qs = quality_score(prior.gmm, prior.qs, feats);
    const FrequencyProfile gen = frequency_profile(prior.gmm, feats);
    r.dds = diversity_distance(prior.real_profile, gen).dds;
    r.real_frequencies = prior.real_profile.frequencies;
    r.gen_frequencies = gen.frequencies;
    if (world && world->modes() > 0 && samples.front().size() == 2) {
        r.mode_coverage = mode_coverage(*world, samples, capture_sigmas * world->sigma()).covered;
        r.high_quality_fraction = high_quality_fraction(*world, samples, world_density_floor(*world));
    }

    json j = {{"sample_count", r.sample_count},
              {"qs", r.qs},
              {"dds", r.dds},
              {"real_frequencies", r.real_frequencies},
              {"gen_frequencies", r.gen_frequencies},
              {"mode_coverage", r.mode_coverage ? json(*r.mode_coverage) : json(nullptr)},
              {"high_quality_fraction", r.high_quality_fraction ? json(*r.high_quality_fraction) : json(nullptr)}};
    if (cmd.output_path) {
        const fs::path parent = fs::path(*cmd.output_path).parent_path();
        if (!parent.empty()) prepare_dir(parent.string());
        write_text_file(*cmd.output_path, j.dump(2) + "\n");
    }
    log << "samples " << r.sample_count << "\nqs " << format_double(r.qs) << "\ndds " << format_double(r.dds) << "\n";
    log << "f_real";
    for (double f : r.real_frequencies) log << " " << format_double(f);
    log << "\nf_gen";
    for (double f : r.gen_frequencies) log << " " << format_double(f);
    log << "\n";
    if (r.mode_coverage)
        log << "mode_coverage " << *r.mode_coverage << "\nhigh_quality_fraction "
            << format_double(*r.high_quality_fraction) << "\n";
    return r;
}

std::string gradfield_command_to_json(const GradfieldCommand& c) {
    json j = {{"checkpoint", c.checkpoint_path},
              {"prior", c.prior_path},
              {"source", to_string(c.source)},
              {"grid", c.grid},
              {"theta_percentile", c.theta_percentile ? json(*c.theta_percentile) : json(nullptr)},
              {"seed", c.seed},
              {"gen_samples", c.gen_samples},
              {"scatter_points", c.scatter_points},
              {"output_dir", c.output_dir}};
    return j.dump(2) + "\n";
}

GradfieldCommand gradfield_command_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("gradfield settings are not valid JSON: ") + e.what());
    }
    try {
        GradfieldCommand c;
        c.checkpoint_path = codec::get<std::string>(j, "checkpoint");
        c.prior_path = codec::get<std::string>(j, "prior");
        c.source = field_source_from_string(codec::get<std::string>(j, "source"));
        c.grid = codec::get<std::size_t>(j, "grid");
        if (!j.at("theta_percentile").is_null()) c.theta_percentile = codec::get<double>(j, "theta_percentile");
        c.seed = codec::get<std::uint64_t>(j, "seed");
        c.gen_samples = codec::get<std::size_t>(j, "gen_samples");
        c.scatter_points = codec::get<std::size_t>(j, "scatter_points");
        c.output_dir = codec::get<std::string>(j, "output_dir");
        return c;
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("gradfield settings: ") + e.what());
    }
}

GradientField cmd_gradfield(const GradfieldCommand& cmd, std::ostream& log) {
    require(cmd.grid >= 2, ErrorCode::InvalidArgument, "grid must be at least 2");
    const bool needs_checkpoint = cmd.source != FieldSource::Quality;
    std::optional<Checkpoint> ck;
    std::optional<PriorModel> prior;
    if (needs_checkpoint || !cmd.checkpoint_path.empty()) {
        require_file(cmd.checkpoint_path, "checkpoint");
        ck = load_checkpoint(cmd.checkpoint_path);
    }
    if (cmd.source == FieldSource::Quality || !cmd.prior_path.empty()) prior = load_compatible_prior(cmd.prior_path);
    if (cmd.theta_percentile)
        require(cmd.source == FieldSource::Quality, ErrorCode::InvalidArgument,
                "a theta percentile only applies to the quality source");

    std::optional<WorldSpec> spec = ck ? std::optional(ck->world) : (prior ? prior->meta.world : std::nullopt);
    require(spec.has_value(), ErrorCode::InvalidArgument, "no world known: pass a checkpoint or a prior with a world");
    const ToyWorld world(*spec);
    const BoundingBox box = world.bounding_box(4.0);
    const Rng root(cmd.seed);

    Rng real_rng = root.derive(1);
    const auto real = world.sample(real_rng, cmd.scatter_points);
    std::vector<Vec> generated;
    if (ck) {
        Rng gen_rng = root.derive(2);
        generated = generate(ck->model.generator, std::max(cmd.gen_samples, cmd.scatter_points), gen_rng);
    }

    GradientField field;
    switch (cmd.source) {
        case FieldSource::Discriminator:
            field = discriminator_field(ck->model.discriminator, ck->model.loss, box, cmd.grid);
            break;
        case FieldSource::Optimal: {
            Rng fit_rng = root.derive(3);
            const GmmPrior gen_density = fit_generated_density(generated, world.modes(), fit_rng);
            field = optimal_field(world, gen_density, box, cmd.grid);
            break;
        }
        case FieldSource::Quality: {
            double log_theta = prior->log_theta;
            if (cmd.theta_percentile) {
                const double pct = *cmd.theta_percentile;
                if (pct == 0.0) {
                    log_theta = -std::numeric_limits<double>::infinity();
                } else {
                    Rng cal_rng = root.derive(4);
                    const auto cal = prior->features(world.sample(cal_rng, 10000));
                    log_theta = calibrate_log_theta(prior->gmm, cal, pct);
                }
            }
            field = quality_field(*prior, log_theta, box, cmd.grid);
            break;
        }
    }

    const fs::path dir = prepare_dir(cmd.output_dir);
    const std::string stem = "gradfield_" + to_string(cmd.source);
    write_text_file((dir / (stem + "_resolved.json")).string(), gradfield_command_to_json(cmd));
    write_field_csv(field, (dir / (stem + ".csv")).string());
    const std::size_t shown = std::min(generated.size(), cmd.scatter_points);
    write_text_file((dir / (stem + ".svg")).string(),
                    field_svg(field, real, std::span<const Vec>(generated.data(), shown)));
    log << "wrote " << (dir / (stem + ".csv")).string() << " and " << (dir / (stem + ".svg")).string() << " ("
        << field.probes.size() << " probes)\n";
    return field;
}

SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "M") return SweepParam::Components;
    if (name == "delta") return SweepParam::Delta;
    if (name == "alpha") return SweepParam::Alpha;
    fail(ErrorCode::InvalidArgument, "unknown sweep parameter '" + name + "' (M, delta, alpha)");
}

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::Components: return "M";
        case SweepParam::Delta: return "delta";
        case SweepParam::Alpha: return "alpha";
    }
    return "?";
}

std::string cmd_sweep(const SweepCommand& cmd, std::ostream& log) {
    require(!cmd.values.empty(), ErrorCode::InvalidArgument, "sweep needs at least one value");
    for (double v : cmd.values) {
        require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument, "sweep values must be finite and >= 0");
        if (cmd.param == SweepParam::Components)
            require(v >= 1.0 && v == std::floor(v), ErrorCode::InvalidArgument, "M values must be positive integers");
    }
    const RunConfig base = load_run_config(cmd.config_path);
    const fs::path dir = prepare_dir(effective_output_dir(base));
    write_text_file((dir / "resolved_config.json").string(), resolved_config_json(base));
    const ToyWorld world(base.world);

    const std::string name = to_string(cmd.param);
    const std::string csv_path = (dir / ("sweep_" + name + ".csv")).string();
    CsvWriter csv(csv_path, {"row", "param", "value", "seed", "status", "qs", "qs_std", "dds", "dds_std",
                             "mode_coverage", "mode_coverage_std", "high_quality_fraction",
                             "high_quality_fraction_std"});
    for (double value : cmd.values) {
        RunConfig cfg = base;
        switch (cmd.param) {
            case SweepParam::Components: cfg.prior.components = static_cast<std::size_t>(value); break;
            case SweepParam::Delta: cfg.train.delta = value; break;
            case SweepParam::Alpha: cfg.train.alpha = value; break;
        }
        const std::string vtext = format_double(value);
        const std::vector<Vec> real = real_set_from_config(cfg);
        std::optional<PriorModel> prior;
        std::string prior_error;
        try {
            prior = fit_prior_from_config(cfg).model;
        } catch (const Error& e) {
            prior_error = error_code_name(e.code());
            log << name << "=" << vtext << ": prior fit failed: " << e.what() << "\n";
        }
        std::vector<double> qs, dds, cov, hq;
        for (std::uint64_t seed : cfg.seeds) {
            std::string status = prior_error;
            EvalMetrics m;
            if (prior) {
                const fs::path sub = dir / ("sweep_" + name + "_" + vtext) / ("seed_" + std::to_string(seed));
                try {
                    m = run_seed(world, real, cfg.train, seed, &*prior, *prior, sub, log);
                    status = "ok";
                } catch (const Error& e) {
                    status = error_code_name(e.code());
                    log << name << "=" << vtext << " seed " << seed << " failed: " << e.what() << "\n";
                }
            }
            if (status == "ok") {
                qs.push_back(m.qs);
                dds.push_back(m.dds);
                cov.push_back(static_cast<double>(m.coverage.covered));
                hq.push_back(m.high_quality_fraction);
                csv.write_row({"cell", name, vtext, std::to_string(seed), status, format_double(m.qs), "",
                               format_double(m.dds), "", std::to_string(m.coverage.covered), "",
                               format_double(m.high_quality_fraction), ""});
            } else {
                csv.write_row({"cell", name, vtext, std::to_string(seed), status, "nan", "", "nan", "", "nan", "",
                               "nan", ""});
            }
        }
        const MeanStd a = mean_std(qs), b = mean_std(dds), c = mean_std(cov), d = mean_std(hq);
        csv.write_row({"summary", name, vtext, "", std::to_string(qs.size()) + "/" + std::to_string(cfg.seeds.size()),
                       format_double(a.mean), format_double(a.std), format_double(b.mean), format_double(b.std),
                       format_double(c.mean), format_double(c.std), format_double(d.mean), format_double(d.std)});
        log << name << "=" << vtext << ": mean qs " << format_double(a.mean) << " mean dds " << format_double(b.mean)
            << "\n";
    }
    log << "wrote " << csv_path << "\n";
    return csv_path;
}

}  // namespace priorgan
