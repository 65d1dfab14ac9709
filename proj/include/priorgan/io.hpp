#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "priorgan/gan.hpp"
#include "priorgan/prior_model.hpp"

namespace priorgan {

/// Base64 (RFC 4648, padded) of the little-endian IEEE-754 bytes.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text);

inline constexpr int kPriorFormatMajor = 1;
inline constexpr int kPriorFormatMinor = 0;
inline constexpr int kCheckpointFormatMajor = 1;
inline constexpr int kCheckpointFormatMinor = 0;

std::string prior_model_to_json(const PriorModel& model);
PriorModel prior_model_from_json(const std::string& text);
void save_prior_model(const PriorModel& model, const std::string& path);
PriorModel load_prior_model(const std::string& path);

struct Checkpoint {
    WorldSpec world;
    TrainConfig config;
    GanModel model;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string read_text_file(const std::string& path);
/// Writes through a temporary file and renames, so readers never see a
/// partially written file.
void write_text_file(const std::string& path, const std::string& content);

/// `%.17g`, which round-trips every finite double.
std::string format_double(double v);

/// Line-buffered CSV sink. Every row reaches the file through a single
/// write(2) call, so a killed process leaves only whole lines behind.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;
    CsvWriter(CsvWriter&& other) noexcept;
    CsvWriter& operator=(CsvWriter&& other) noexcept;

    void write_row(const std::vector<std::string>& cells);
    std::size_t rows_written() const noexcept { return rows_; }

private:
    void write_line(const std::string& line);

    int fd_ = -1;
    std::string path_;
    std::size_t columns_ = 0;
    std::size_t rows_ = 0;
};

/// Numeric CSV with a one-line header; returns the rows.
std::vector<Vec> read_samples_csv(const std::string& path, std::vector<std::string>* header = nullptr);
void write_samples_csv(const std::string& path, std::span<const Vec> samples);

}  // namespace priorgan
