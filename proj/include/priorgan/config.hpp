#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "priorgan/gan.hpp"
#include "priorgan/prior_model.hpp"
#include "priorgan/toy_world.hpp"

namespace priorgan {

/// Everything a command needs, loaded from one JSON document:
///
///   {
///     "world":        {"kind": "ring", "k": 8, "radius": 2, "sigma": 0.1},
///     "real_samples": 10000,
///     "prior":        {"components": 8, "feature_map": "identity", "variance_keep": 0.98,
///                      "projection_dim": 2, "theta_percentile": 5, "max_iters": 500,
///                      "tol": 1e-6, "ridge_scale": 1e-6, "seed": 1000},
///     "train":        {... every TrainConfig field except "seed" ...},
///     "seeds":        [1, 2, 3, 4, 5],
///     "output_dir":   "runs/ring"
///   }
///
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
    WorldSpec world = WorldSpec::ring(8, 2.0, 0.1);
    std::size_t real_samples = 10000;
    PriorFitSettings prior;
    std::uint64_t prior_seed = 1000;
    TrainConfig train;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string output_dir = "priorgan_out";
};

/// Parse and validate. Problems raise ConfigError whose message starts with
/// `<source>:<line>:`.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);

/// Fully populated document; parsing it yields the same RunConfig.
std::string resolved_config_json(const RunConfig& cfg);

/// `output_dir`, re-rooted under $PRIORGAN_OUTPUT_ROOT when that is set and
/// the configured directory is relative.
std::string effective_output_dir(const RunConfig& cfg);

}  // namespace priorgan
