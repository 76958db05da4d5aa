#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ganlab/common.hpp"
#include "ganlab/gan.hpp"
#include "ganlab/matrix.hpp"
#include "ganlab/metrics.hpp"

namespace ganlab {

// Format errors carry the byte offset where the problem was detected.
struct BadMagicError : DataError {
    using DataError::DataError;
};
struct VersionError : DataError {
    using DataError::DataError;
};
struct CrcError : DataError {
    using DataError::DataError;
};
struct TruncationError : DataError {
    using DataError::DataError;
};

std::uint32_t crc32(const void* data, std::size_t len);

// Shortest decimal that round-trips a double (17 significant digits).
std::string format_real(double value);

void ensure_parent_dir(const std::string& path);

// All writers go through a temp file + rename and refuse to replace an
// existing file unless force is set.
void write_bytes_atomic(const std::string& path, const std::string& bytes, bool force);
void write_text_atomic(const std::string& path, const std::string& text, bool force);

// Feature file: "FEAT", version, count, dim (u32 LE), row-major f32 LE
// payload, trailing CRC32 over everything before it.
void write_feature_file(const std::string& path, const Matrix& features, bool force);
Matrix read_feature_file(const std::string& path);

// Checkpoint file: "GANC", version, seed, step, both models (layer table,
// f64 parameter blobs, batch-norm state), both optimizer states, CRC32.
void write_checkpoint_file(const std::string& path, const GanCheckpoint& ckpt, bool force);
GanCheckpoint read_checkpoint_file(const std::string& path);

void write_samples_csv(const std::string& path, const SampleSet& samples, bool force);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Minimal comma-separated reader (no quoting; labels and numbers only).
CsvTable read_csv(const std::string& path);

// Plain-text experiment configuration, `key = value` per line, '#' comments.
// Unknown keys are rejected.
struct RunConfig {
    std::string name = "run";
    std::string out_dir = "runs";
    std::string seeds = "0,1,2";
    std::uint64_t seed = 0;
    int generator_steps = 5000;
    int disc_steps_per_gen = 4;
    int batch_size = 64;
    int latent_dim = 64;
    double lr = 0.0002;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int snapshot_every = 50;
    int finetune_steps = 1000;
    int sweep_checkpoints = 30;
    int metric_samples = 1000;
    int knn_k = 5;
    int projections = 512;
    bool saturating_gen_loss = false;

    static RunConfig parse_text(const std::string& text);
    static RunConfig parse_file(const std::string& path);
    std::string dump() const;
    std::vector<std::uint64_t> seed_list() const;
};

}  // namespace ganlab
