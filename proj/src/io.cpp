#include "priorgan/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace priorgan {

using nlohmann::json;
using codec::get;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    require(text.size() % 4 == 0, ErrorCode::FormatError, "base64 length is not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int c[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char ch = text[i + k];
            if (ch == '=') {
                require(i + 4 == text.size() && k >= 2, ErrorCode::FormatError, "misplaced base64 padding");
                c[k] = 0;
                ++pad;
            } else {
                require(pad == 0, ErrorCode::FormatError, "misplaced base64 padding");
                c[k] = decode_char(ch);
                require(c[k] >= 0, ErrorCode::FormatError, "invalid base64 character");
            }
        }
        const std::uint32_t v = (c[0] << 18) | (c[1] << 12) | (c[2] << 6) | c[3];
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
    }
    return out;
}

std::vector<double> doubles_field(const json& j, const char* key, std::size_t expected) {
    auto v = decode_doubles(get<std::string>(j, key));
    require(v.size() == expected, ErrorCode::FormatError,
            std::string("field '") + key + "' holds " + std::to_string(v.size()) + " values, expected " +
                std::to_string(expected));
    return v;
}

// Parse "major.minor" and reject majors newer than `supported`.
void check_version(const json& j, const char* format, int supported) {
    require(j.is_object(), ErrorCode::FormatError, "document is not a JSON object");
    const auto fmt = get<std::string>(j, "format");
    require(fmt == format, ErrorCode::FormatError, "unexpected format '" + fmt + "', expected '" + format + "'");
    const auto ver = get<std::string>(j, "version");
    int major = 0, minor = 0;
    require(std::sscanf(ver.c_str(), "%d.%d", &major, &minor) == 2, ErrorCode::FormatError,
            "malformed version '" + ver + "'");
    require(major <= supported, ErrorCode::VersionMismatch,
            "file version " + ver + " is newer than supported major version " + std::to_string(supported));
}

std::string version_string(int major, int minor) { return std::to_string(major) + "." + std::to_string(minor); }

json mlp_to_json(const Mlp& net) {
    return {{"dims", net.dims()},
            {"hidden_activation", to_string(net.hidden_activation())},
            {"output_activation", to_string(net.output_activation())},
            {"parameters", encode_doubles(flatten_parameters(net))}};
}

Mlp mlp_from_json(const json& j) {
    Mlp net(get<std::vector<std::size_t>>(j, "dims"), activation_from_string(get<std::string>(j, "hidden_activation")),
            activation_from_string(get<std::string>(j, "output_activation")));
    assign_parameters(net, doubles_field(j, "parameters", net.parameter_count()));
    return net;
}

MlpGrads grads_from_flat(const Mlp& net, const std::vector<double>& flat) {
    MlpGrads g = MlpGrads::zeros_like(net);
    std::size_t k = 0;
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
        for (double& w : g.weight[l].data()) w = flat[k++];
        for (double& b : g.bias[l]) b = flat[k++];
    }
    return g;
}

json adam_to_json(const AdamState& s) {
    return {{"step", s.step}, {"m", encode_doubles(flatten_grads(s.m))}, {"v", encode_doubles(flatten_grads(s.v))}};
}

AdamState adam_from_json(const json& j, const Mlp& net) {
    AdamState s;
    s.step = get<std::uint64_t>(j, "step");
    s.m = grads_from_flat(net, doubles_field(j, "m", net.parameter_count()));
    s.v = grads_from_flat(net, doubles_field(j, "v", net.parameter_count()));
    return s;
}

}  // namespace

std::string encode_doubles(std::span<const double> values) {
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
    }
    return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
    const auto bytes = base64_decode(text);
    require(bytes.size() % 8 == 0, ErrorCode::FormatError, "encoded array is not a whole number of doubles");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

std::string prior_model_to_json(const PriorModel& model) {
    const auto& fm = model.feature_map;
    const auto& g = model.gmm;
    const std::size_t m = g.components(), d = g.dim();
    std::vector<double> means, covs;
    means.reserve(m * d);
    covs.reserve(m * d * d);
    for (std::size_t i = 0; i < m; ++i) {
        means.insert(means.end(), g.means()[i].begin(), g.means()[i].end());
        covs.insert(covs.end(), g.covariances()[i].data().begin(), g.covariances()[i].data().end());
    }
    json meta = {{"seed", model.meta.seed},
                 {"iterations", model.meta.iterations},
                 {"final_nll", encode_doubles(std::span(&model.meta.final_nll, 1))},
                 {"converged", model.meta.converged},
                 {"real_count", model.meta.real_count},
                 {"ridge", encode_doubles(std::span(&model.meta.ridge, 1))}};
    const double explained = fm.explained_variance_fraction();
    json j = {
        {"format", "priorgan-prior"},
        {"version", version_string(kPriorFormatMajor, kPriorFormatMinor)},
        {"rng_version", model.meta.rng_version},
        {"feature_map",
         {{"kind", to_string(fm.kind())},
          {"input_dim", fm.input_dim()},
          {"output_dim", fm.output_dim()},
          {"projection", encode_doubles(fm.projection().data())},
          {"mean_offset", encode_doubles(fm.mean_offset())},
          {"explained_variance_fraction", encode_doubles(std::span(&explained, 1))}}},
        {"gmm",
         {{"components", m},
          {"dim", d},
          {"weights", encode_doubles(g.weights())},
          {"means", encode_doubles(means)},
          {"covariances", encode_doubles(covs)}}},
        {"qs_calibration",
         {{"log_density_low", encode_doubles(std::span(&model.qs.log_density_low, 1))},
          {"log_density_high", encode_doubles(std::span(&model.qs.log_density_high, 1))}}},
        {"theta",
         {{"log_theta", encode_doubles(std::span(&model.log_theta, 1))},
          {"theta", std::exp(model.log_theta)},
          {"percentile", model.theta_percentile}}},
        {"real_profile", {{"counts", model.real_profile.counts}}},
        {"fit", meta},
        {"world", model.meta.world ? codec::world_to_json(*model.meta.world) : json(nullptr)},
    };
    return j.dump(2) + "\n";
}

PriorModel prior_model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::FormatError, std::string("prior model is not valid JSON: ") + e.what());
    }
    check_version(j, "priorgan-prior", kPriorFormatMajor);
    try {
        const auto rng_version = get<std::string>(j, "rng_version");
        require(rng_version == Rng::kVersion, ErrorCode::VersionMismatch,
                "prior was written with RNG '" + rng_version + "', this build uses '" + Rng::kVersion + "'");

        const json& jf = j.at("feature_map");
        const auto in = get<std::size_t>(jf, "input_dim");
        const auto out = get<std::size_t>(jf, "output_dim");
        const auto kind = feature_kind_from_string(get<std::string>(jf, "kind"));
        const std::size_t proj_len = kind == FeatureKind::Identity ? 0 : in * out;
        const std::size_t offset_len = kind == FeatureKind::Pca ? in : 0;
        auto proj_flat = doubles_field(jf, "projection", proj_len);
        Mat proj = proj_len ? Mat(out, in) : Mat();
        if (proj_len) std::copy(proj_flat.begin(), proj_flat.end(), proj.data().begin());
        auto offset = doubles_field(jf, "mean_offset", offset_len);
        const double explained = doubles_field(jf, "explained_variance_fraction", 1)[0];
        FeatureMap fm = FeatureMap::from_parts(kind, in, out, std::move(proj), std::move(offset), explained);

        const json& jg = j.at("gmm");
        const auto m = get<std::size_t>(jg, "components");
        const auto d = get<std::size_t>(jg, "dim");
        require(m >= 1 && d >= 1, ErrorCode::FormatError, "empty mixture");
        require(d == out, ErrorCode::DimensionMismatch, "mixture dimension differs from the feature map output");
        auto weights = doubles_field(jg, "weights", m);
        auto means_flat = doubles_field(jg, "means", m * d);
        auto covs_flat = doubles_field(jg, "covariances", m * d * d);
        std::vector<Vec> means(m, Vec(d));
        std::vector<Mat> covs(m, Mat(d, d));
        for (std::size_t i = 0; i < m; ++i) {
            std::copy_n(means_flat.begin() + static_cast<std::ptrdiff_t>(i * d), d, means[i].begin());
            std::copy_n(covs_flat.begin() + static_cast<std::ptrdiff_t>(i * d * d), d * d, covs[i].data().begin());
        }

        PriorModel model{std::move(fm), GmmPrior(std::move(weights), std::move(means), std::move(covs)), {}, 0.0,
                         5.0, {}, {}};
        const json& jq = j.at("qs_calibration");
        model.qs.log_density_low = doubles_field(jq, "log_density_low", 1)[0];
        model.qs.log_density_high = doubles_field(jq, "log_density_high", 1)[0];
        const json& jt = j.at("theta");
        model.log_theta = doubles_field(jt, "log_theta", 1)[0];
        model.theta_percentile = get<double>(jt, "percentile");

        auto counts = get<std::vector<std::uint64_t>>(j.at("real_profile"), "counts");
        require(counts.size() == m, ErrorCode::FormatError, "real profile length differs from the component count");
        model.real_profile = FrequencyProfile::from_counts(std::move(counts));

        const json& jm = j.at("fit");
        model.meta.seed = get<std::uint64_t>(jm, "seed");
        model.meta.iterations = get<int>(jm, "iterations");
        model.meta.final_nll = doubles_field(jm, "final_nll", 1)[0];
        model.meta.converged = get<bool>(jm, "converged");
        model.meta.real_count = get<std::size_t>(jm, "real_count");
        model.meta.ridge = doubles_field(jm, "ridge", 1)[0];
        model.meta.rng_version = rng_version;
        if (j.contains("world") && !j.at("world").is_null()) model.meta.world = codec::world_from_json(j.at("world"));
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed prior model: ") + e.what());
    }
}

void save_prior_model(const PriorModel& model, const std::string& path) {
    write_text_file(path, prior_model_to_json(model));
}

PriorModel load_prior_model(const std::string& path) { return prior_model_from_json(read_text_file(path)); }

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    const GanModel& m = ckpt.model;
    json j = {{"format", "priorgan-checkpoint"},
              {"version", version_string(kCheckpointFormatMajor, kCheckpointFormatMinor)},
              {"rng_version", Rng::kVersion},
              {"world", codec::world_to_json(ckpt.world)},
              {"train", codec::train_config_to_json(ckpt.config)},
              {"loss", to_string(m.loss)},
              {"latent_dim", m.latent_dim},
              {"iteration", m.iteration},
              {"generator", mlp_to_json(m.generator)},
              {"discriminator", mlp_to_json(m.discriminator)},
              {"generator_optimizer", adam_to_json(m.g_opt)},
              {"discriminator_optimizer", adam_to_json(m.d_opt)}};
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::FormatError, std::string("checkpoint is not valid JSON: ") + e.what());
    }
    check_version(j, "priorgan-checkpoint", kCheckpointFormatMajor);
    try {
        Checkpoint c;
        c.world = codec::world_from_json(j.at("world"));
        c.config = codec::train_config_from_json(j.at("train"));
        c.model.loss = gan_loss_from_string(get<std::string>(j, "loss"));
        c.model.latent_dim = get<std::size_t>(j, "latent_dim");
        c.model.iteration = get<std::size_t>(j, "iteration");
        c.model.generator = mlp_from_json(j.at("generator"));
        c.model.discriminator = mlp_from_json(j.at("discriminator"));
        c.model.g_opt = adam_from_json(j.at("generator_optimizer"), c.model.generator);
        c.model.d_opt = adam_from_json(j.at("discriminator_optimizer"), c.model.discriminator);
        require(c.model.generator.input_dim() == c.model.latent_dim, ErrorCode::FormatError,
                "generator input width differs from the latent dimension");
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) { write_text_file(path, checkpoint_to_json(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_json(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::IoError, "cannot open '" + tmp + "' for writing");
        out << content;
        out.flush();
        require(static_cast<bool>(out), ErrorCode::IoError, "write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    require(!ec, ErrorCode::IoError, "cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
    require(!header.empty(), ErrorCode::InvalidArgument, "CSV header is empty");
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    require(fd_ >= 0, ErrorCode::IoError, "cannot open '" + path + "': " + std::strerror(errno));
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) line += (i ? "," : "") + header[i];
    write_line(line);
}

CsvWriter::~CsvWriter() {
    if (fd_ >= 0) ::close(fd_);
}

CsvWriter::CsvWriter(CsvWriter&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), path_(std::move(other.path_)), columns_(other.columns_), rows_(other.rows_) {}

CsvWriter& CsvWriter::operator=(CsvWriter&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
        path_ = std::move(other.path_);
        columns_ = other.columns_;
        rows_ = other.rows_;
    }
    return *this;
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
    require(cells.size() == columns_, ErrorCode::DimensionMismatch,
            "CSV row has " + std::to_string(cells.size()) + " cells, header has " + std::to_string(columns_));
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    write_line(line);
    ++rows_;
}

void CsvWriter::write_line(const std::string& line) {
    require(fd_ >= 0, ErrorCode::IoError, "CSV writer is closed");
    const std::string buf = line + "\n";
    // One write call per line; a short write is retried for the remainder only.
    std::size_t done = 0;
    while (done < buf.size()) {
        const ssize_t n = ::write(fd_, buf.data() + done, buf.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::IoError, "write to '" + path_ + "' failed: " + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

std::vector<Vec> read_samples_csv(const std::string& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::FormatError, "'" + path + "' has no header line");
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    require(!names.empty(), ErrorCode::FormatError, "'" + path + "' has an empty header");
    std::vector<Vec> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Vec row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            require(end != cell.c_str() && *end == '\0', ErrorCode::FormatError,
                    path + ":" + std::to_string(line_no) + ": '" + cell + "' is not a number");
            row.push_back(v);
        }
        require(row.size() == names.size(), ErrorCode::FormatError,
                path + ":" + std::to_string(line_no) + ": expected " + std::to_string(names.size()) + " columns");
        rows.push_back(std::move(row));
    }
    if (header) *header = std::move(names);
    return rows;
}

void write_samples_csv(const std::string& path, std::span<const Vec> samples) {
    require(!samples.empty(), ErrorCode::EmptySet, "no samples to write");
    const std::size_t d = samples.front().size();
    std::vector<std::string> header;
    for (std::size_t i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
    CsvWriter csv(path, header);
    std::vector<std::string> cells(d);
    for (const Vec& s : samples) {
        require(s.size() == d, ErrorCode::DimensionMismatch, "samples differ in dimension");
        for (std::size_t i = 0; i < d; ++i) cells[i] = format_double(s[i]);
        csv.write_row(cells);
    }
}

}  // namespace priorgan
