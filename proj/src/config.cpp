#include "priorgan/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

#include "json_codec.hpp"
#include "priorgan/io.hpp"

namespace priorgan {

using nlohmann::json;

namespace {

enum class Kind { UInt, Number, String, Bool, UIntArray, Object };

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::UInt: return "a non-negative integer";
        case Kind::Number: return "a number";
        case Kind::String: return "a string";
        case Kind::Bool: return "a boolean";
        case Kind::UIntArray: return "an array of non-negative integers";
        case Kind::Object: return "an object";
    }
    return "?";
}

bool matches(const json& v, Kind k) {
    switch (k) {
        case Kind::UInt: return v.is_number_unsigned();
        case Kind::Number: return v.is_number();
        case Kind::String: return v.is_string();
        case Kind::Bool: return v.is_boolean();
        case Kind::UIntArray:
            return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_unsigned(); });
        case Kind::Object: return v.is_object();
    }
    return false;
}

using Schema = std::map<std::string, Kind>;

const Schema kTop = {{"world", Kind::Object}, {"real_samples", Kind::UInt}, {"prior", Kind::Object},
                     {"train", Kind::Object}, {"seeds", Kind::UIntArray}, {"output_dir", Kind::String}};

const Schema kPrior = {{"components", Kind::UInt},     {"feature_map", Kind::String}, {"variance_keep", Kind::Number},
                       {"projection_dim", Kind::UInt}, {"theta_percentile", Kind::Number},
                       {"max_iters", Kind::UInt},      {"tol", Kind::Number},         {"ridge_scale", Kind::Number},
                       {"seed", Kind::UInt}};

const Schema kTrain = {{"latent_dim", Kind::UInt},         {"hidden_width", Kind::UInt},
                       {"batch_size", Kind::UInt},         {"d_steps_per_g_step", Kind::UInt},
                       {"learning_rate", Kind::Number},    {"beta1", Kind::Number},
                       {"beta2", Kind::Number},            {"total_g_iters", Kind::UInt},
                       {"delta", Kind::Number},            {"alpha", Kind::Number},
                       {"refresh_every", Kind::UInt},      {"gen_sample_count", Kind::UInt},
                       {"loss", Kind::String},             {"real_set_size", Kind::UInt},
                       {"log_every", Kind::UInt},          {"eval_samples", Kind::UInt},
                       {"capture_sigmas", Kind::Number},   {"guidance_warmup", Kind::UInt},
                       {"final_eval_samples", Kind::UInt}};

Schema world_schema(WorldKind kind) {
    Schema s = {{"kind", Kind::String}, {"sigma", Kind::Number}};
    switch (kind) {
        case WorldKind::Ring:
            s["k"] = Kind::UInt;
            s["radius"] = Kind::Number;
            break;
        case WorldKind::TwoRegion: s["separation"] = Kind::Number; break;
        case WorldKind::Grid:
            s["rows"] = Kind::UInt;
            s["cols"] = Kind::UInt;
            s["spacing"] = Kind::Number;
            break;
    }
    return s;
}

// Maps key paths back to source lines by scanning for the quoted key after
// its parent's position. Keys are unique within an object, so this is exact
// for well-formed documents that do not repeat a key inside string values.
class Locator {
public:
    Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    std::size_t offset(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        for (const auto& key : path) {
            const std::string quoted = "\"" + key + "\"";
            std::size_t p = pos;
            while ((p = text_.find(quoted, p)) != std::string::npos) {
                std::size_t q = p + quoted.size();
                while (q < text_.size() && std::isspace(static_cast<unsigned char>(text_[q]))) ++q;
                if (q < text_.size() && text_[q] == ':') break;
                p += quoted.size();
            }
            if (p == std::string::npos) return pos;
            pos = p;
        }
        return pos;
    }

    std::size_t line(const std::vector<std::string>& path) const {
        const std::size_t off = offset(path);
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(off), '\n'));
    }

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
        std::string dotted;
        for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
        throw Error(ErrorCode::ConfigError, source_ + ":" + std::to_string(line(path)) + ": " +
                                                (dotted.empty() ? "" : "'" + dotted + "': ") + message);
    }

private:
    const std::string& text_;
    std::string source_;
};

void check_object(const json& obj, const Schema& schema, const std::vector<std::string>& path, const Locator& loc) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        auto sub = path;
        sub.push_back(it.key());
        auto s = schema.find(it.key());
        if (s == schema.end()) {
            std::string allowed;
            for (const auto& [k, _] : schema) allowed += (allowed.empty() ? "" : ", ") + k;
            loc.fail(sub, "unknown key (allowed: " + allowed + ")");
        }
        if (!matches(it.value(), s->second)) loc.fail(sub, std::string("expected ") + kind_name(s->second));
    }
}

// Runs `fn`, re-raising any library validation error as a located ConfigError.
template <typename F>
auto located(const Locator& loc, const std::vector<std::string>& path, F&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        loc.fail(path, e.what());
    }
}

void validate_prior(const PriorFitSettings& s) {
    require(s.components >= 1, ErrorCode::InvalidArgument, "components must be >= 1");
    require(s.variance_keep > 0.0 && s.variance_keep <= 1.0, ErrorCode::InvalidArgument,
            "variance_keep must lie in (0, 1]");
    require(s.projection_dim >= 1, ErrorCode::InvalidArgument, "projection_dim must be >= 1");
    require(s.theta_percentile > 0.0 && s.theta_percentile < 50.0, ErrorCode::InvalidArgument,
            "theta_percentile must lie in (0, 50)");
    require(s.max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be >= 1");
    require(s.tol > 0.0, ErrorCode::InvalidArgument, "tol must be positive");
    require(s.ridge_scale >= 0.0, ErrorCode::InvalidArgument, "ridge_scale must be >= 0");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // The parser reports a byte offset; turn it into a line number.
        const std::size_t off = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(off ? off - 1 : 0), '\n');
        throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    const Locator loc(text, source);
    if (!doc.is_object()) loc.fail({}, "top level must be an object");
    check_object(doc, kTop, {}, loc);

    RunConfig cfg;
    if (doc.contains("world")) {
        const json& w = doc["world"];
        if (!w.contains("kind") || !w["kind"].is_string()) loc.fail({"world"}, "needs a string 'kind'");
        const WorldKind kind =
            located(loc, {"world", "kind"}, [&] { return world_kind_from_string(w["kind"].get<std::string>()); });
        check_object(w, world_schema(kind), {"world"}, loc);
        cfg.world = located(loc, {"world"}, [&] { return codec::world_from_json(w); });
    }
    if (doc.contains("real_samples")) {
        cfg.real_samples = doc["real_samples"].get<std::size_t>();
        if (cfg.real_samples == 0) loc.fail({"real_samples"}, "must be positive");
    }
    if (doc.contains("prior")) {
        const json& p = doc["prior"];
        check_object(p, kPrior, {"prior"}, loc);
        cfg.prior = located(loc, {"prior"}, [&] {
            auto s = codec::prior_settings_from_json(p);
            validate_prior(s);
            return s;
        });
        cfg.prior_seed = p.value("seed", cfg.prior_seed);
    }
    if (doc.contains("train")) {
        const json& t = doc["train"];
        check_object(t, kTrain, {"train"}, loc);
        cfg.train = located(loc, {"train"}, [&] {
            auto c = codec::train_config_from_json(t);
            validate(c);
            return c;
        });
    }
    if (doc.contains("seeds")) {
        cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
        if (cfg.seeds.empty()) loc.fail({"seeds"}, "must list at least one seed");
        if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
            loc.fail({"seeds"}, "seeds must be distinct");
    }
    if (doc.contains("output_dir")) {
        cfg.output_dir = doc["output_dir"].get<std::string>();
        if (cfg.output_dir.empty()) loc.fail({"output_dir"}, "must not be empty");
    }
    cfg.train.seed = cfg.seeds.front();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    return parse_run_config(text, path);
}

std::string resolved_config_json(const RunConfig& cfg) {
    json prior = codec::prior_settings_to_json(cfg.prior);
    prior["seed"] = cfg.prior_seed;
    json train = codec::train_config_to_json(cfg.train);
    train.erase("seed");
    json doc = {{"world", codec::world_to_json(cfg.world)},
                {"real_samples", cfg.real_samples},
                {"prior", prior},
                {"train", train},
                {"seeds", cfg.seeds},
                {"output_dir", cfg.output_dir}};
    return doc.dump(2) + "\n";
}

std::string effective_output_dir(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.output_dir);
    const char* root = std::getenv("PRIORGAN_OUTPUT_ROOT");
    if (root && *root && dir.is_relative()) return (std::filesystem::path(root) / dir).string();
    return dir.string();
}

}  // namespace priorgan
