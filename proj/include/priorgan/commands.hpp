#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "priorgan/config.hpp"
#include "priorgan/gradfield.hpp"

namespace priorgan {

/// Maps an error to the process exit status: 2 for usage and validation
/// problems, 1 for runtime and numeric failures.
int exit_code_for(ErrorCode code) noexcept;

/// The training data of a run: `real_samples` world points from `prior_seed`.
std::vector<Vec> real_set_from_config(const RunConfig& cfg);

/// Draws the real set of `cfg` and fits the prior model described there.
PriorFit fit_prior_from_config(const RunConfig& cfg);

/// Writes prior.json, em_report.json and resolved_config.json into the
/// output directory; returns the path of prior.json.
std::string cmd_fit_prior(const std::string& config_path, std::ostream& log);

struct TrainCommand {
    std::string config_path;
    std::optional<std::string> prior_path;  // unset means baseline
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    EvalMetrics final_metrics;
};

/// Per seed: seed_<s>/{metrics.csv, profile.csv, plans.csv, checkpoint.json};
/// plus summary.csv and resolved_config.json.
std::vector<SeedOutcome> cmd_train(const TrainCommand& cmd, std::ostream& log);

struct EvalCommand {
    std::string prior_path;
    std::optional<std::string> samples_path;
    std::optional<std::string> checkpoint_path;
    std::size_t samples = 50000;  // drawn from the checkpoint's generator
    std::uint64_t seed = 7;
    std::optional<std::string> output_path;  // JSON report
};

struct EvalReport {
    std::size_t sample_count = 0;
    double qs = 0.0;
    double dds = 0.0;
    Vec real_frequencies;
    Vec gen_frequencies;
    std::optional<std::size_t> mode_coverage;  // needs a known world
    std::optional<double> high_quality_fraction;
};

EvalReport cmd_eval(const EvalCommand& cmd, std::ostream& log);

struct GradfieldCommand {
    std::string checkpoint_path;  // required for discriminator and optimal
    std::string prior_path;       // required for quality
    FieldSource source = FieldSource::Discriminator;
    std::size_t grid = 40;
    std::optional<double> theta_percentile;  // quality only; 0 disables the loss
    std::uint64_t seed = 7;
    std::size_t gen_samples = 10000;
    std::size_t scatter_points = 500;
    std::string output_dir = "gradfield_out";
};

std::string gradfield_command_to_json(const GradfieldCommand& cmd);
GradfieldCommand gradfield_command_from_json(const std::string& text);

/// Writes gradfield_<source>.csv, .svg and _resolved.json; returns the field.
GradientField cmd_gradfield(const GradfieldCommand& cmd, std::ostream& log);

enum class SweepParam { Components, Delta, Alpha };
SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam p);

struct SweepCommand {
    std::string config_path;
    SweepParam param = SweepParam::Alpha;
    std::vector<double> values;
};

/// One prior fit and one training run per (value, seed) cell; writes
/// sweep_<param>.csv with a row per cell and a summary row per value.
/// Failed cells are recorded and the sweep continues.
std::string cmd_sweep(const SweepCommand& cmd, std::ostream& log);

}  // namespace priorgan
