#include "ganlab/io.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

namespace ganlab {

namespace {

constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::uint32_t kCheckpointVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int bit = 0; bit < 8; ++bit) {
            c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
        }
        table[i] = c;
    }
    return table;
}

class ByteWriter {
  public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
        }
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
        }
    }
    void f32(float v) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void magic(const char* m) { bytes_.append(m, 4); }
    void append_crc() {
        const std::uint32_t crc = crc32(bytes_.data(), bytes_.size());
        u32(crc);
    }
    const std::string& bytes() const { return bytes_; }

  private:
    std::string bytes_;
};

class ByteReader {
  public:
    ByteReader(std::string bytes, std::string what)
        : bytes_(std::move(bytes)), what_(std::move(what)) {}

    std::size_t offset() const { return pos_; }
    std::size_t size() const { return bytes_.size(); }

    void need(std::size_t count) const {
        if (pos_ + count > bytes_.size()) {
            throw TruncationError(what_ + ": truncated at offset " + std::to_string(pos_) +
                                  " (need " + std::to_string(count) + " more bytes, have " +
                                  std::to_string(bytes_.size() - pos_) + ")");
        }
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 8;
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v = 0.0f;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v = 0.0;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void expect_magic(const char* m) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, m, 4) != 0) {
            throw BadMagicError(what_ + ": bad magic at offset " + std::to_string(pos_) +
                                " (expected \"" + m + "\")");
        }
        pos_ += 4;
    }
    void expect_version(std::uint32_t supported) {
        const std::size_t at = pos_;
        const std::uint32_t version = u32();
        if (version != supported) {
            throw VersionError(what_ + ": unsupported version " + std::to_string(version) +
                               " at offset " + std::to_string(at) + " (supported: " +
                               std::to_string(supported) + ")");
        }
    }
    // Verifies the trailing CRC over everything parsed so far; call after the
    // payload so a short file surfaces as truncation, not a checksum mismatch.
    void check_crc() {
        if (bytes_.size() - pos_ < 4) {
            throw TruncationError(what_ + ": truncated at offset " + std::to_string(pos_) +
                                  " (no room for checksum)");
        }
        std::uint32_t stored = 0;
        for (int i = 0; i < 4; ++i) {
            stored |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i]))
                      << (8 * i);
        }
        const std::uint32_t computed = crc32(bytes_.data(), pos_);
        if (stored != computed) {
            char msg[128];
            std::snprintf(msg, sizeof(msg),
                          ": checksum mismatch at offset %zu (stored %08" PRIx32
                          ", computed %08" PRIx32 ")",
                          pos_, stored, computed);
            throw CrcError(what_ + msg);
        }
        pos_ += 4;
    }
    void expect_consumed() const {
        if (pos_ != bytes_.size()) {
            throw TruncationError(what_ + ": parsing ended at offset " + std::to_string(pos_) +
                                  " but the file holds " + std::to_string(bytes_.size()) +
                                  " bytes");
        }
    }

  private:
    std::string bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::string read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_matrix_block(ByteWriter& w, const Matrix& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) {
        w.f64(v);
    }
}

Matrix read_matrix_block(ByteReader& r) {
    const int rows = static_cast<int>(r.u32());
    const int cols = static_cast<int>(r.u32());
    if (rows < 0 || cols < 0 || static_cast<std::uint64_t>(rows) * cols > (1ULL << 28)) {
        throw DataError("checkpoint file: implausible matrix shape at offset " +
                        std::to_string(r.offset()));
    }
    // Cheap length check up front so a lying shape cannot force a huge
    // allocation before the truncation is noticed.
    r.need(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8);
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        v = r.f64();
    }
    return m;
}

void write_model_block(ByteWriter& w, const MlpModel& model) {
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const LayerSpec& layer : model.layers) {
        w.u32(static_cast<std::uint32_t>(layer.in_dim));
        w.u32(static_cast<std::uint32_t>(layer.out_dim));
        w.u8(static_cast<std::uint8_t>(layer.activation));
        w.u8(layer.batch_norm ? 1 : 0);
    }
    w.u8(static_cast<std::uint8_t>(model.mode));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        write_matrix_block(w, model.weights[l]);
        write_matrix_block(w, model.biases[l]);
        if (model.layers[l].batch_norm) {
            write_matrix_block(w, model.bn_gamma[l]);
            write_matrix_block(w, model.bn_beta[l]);
            write_matrix_block(w, model.bn_running_mean[l]);
            write_matrix_block(w, model.bn_running_var[l]);
        }
    }
}

MlpModel read_model_block(ByteReader& r) {
    MlpModel model;
    const std::uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 1024) {
        throw DataError("checkpoint file: implausible layer count at offset " +
                        std::to_string(r.offset()));
    }
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        LayerSpec spec;
        spec.in_dim = static_cast<int>(r.u32());
        spec.out_dim = static_cast<int>(r.u32());
        const std::uint8_t activation = r.u8();
        if (activation > 1) {
            throw DataError("checkpoint file: unknown activation code at offset " +
                            std::to_string(r.offset()));
        }
        spec.activation = static_cast<Activation>(activation);
        spec.batch_norm = r.u8() != 0;
        model.layers.push_back(spec);
    }
    const std::uint8_t mode = r.u8();
    if (mode > 1) {
        throw DataError("checkpoint file: unknown mode code at offset " +
                        std::to_string(r.offset()));
    }
    model.mode = static_cast<Mode>(mode);
    for (const LayerSpec& layer : model.layers) {
        model.weights.push_back(read_matrix_block(r));
        model.biases.push_back(read_matrix_block(r));
        if (layer.batch_norm) {
            model.bn_gamma.push_back(read_matrix_block(r));
            model.bn_beta.push_back(read_matrix_block(r));
            model.bn_running_mean.push_back(read_matrix_block(r));
            model.bn_running_var.push_back(read_matrix_block(r));
        } else {
            model.bn_gamma.emplace_back();
            model.bn_beta.emplace_back();
            model.bn_running_mean.emplace_back();
            model.bn_running_var.emplace_back();
        }
    }
    model.validate();
    return model;
}

void write_adam_block(ByteWriter& w, const AdamState& state) {
    w.f64(state.lr);
    w.f64(state.beta1);
    w.f64(state.beta2);
    w.f64(state.eps);
    w.u64(static_cast<std::uint64_t>(state.t));
    w.u32(static_cast<std::uint32_t>(state.m.size()));
    for (std::size_t i = 0; i < state.m.size(); ++i) {
        write_matrix_block(w, state.m[i]);
        write_matrix_block(w, state.v[i]);
    }
}

AdamState read_adam_block(ByteReader& r) {
    AdamState state;
    state.lr = r.f64();
    state.beta1 = r.f64();
    state.beta2 = r.f64();
    state.eps = r.f64();
    state.t = static_cast<std::int64_t>(r.u64());
    const std::uint32_t slots = r.u32();
    if (slots > 4096) {
        throw DataError("checkpoint file: implausible optimizer slot count at offset " +
                        std::to_string(r.offset()));
    }
    for (std::uint32_t i = 0; i < slots; ++i) {
        state.m.push_back(read_matrix_block(r));
        state.v.push_back(read_matrix_block(r));
    }
    return state;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len) {
    static const std::array<std::uint32_t, 256> table = make_crc_table();
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) {
        crc = table[(crc ^ bytes[i]) & 0xFF] ^ (crc >> 8);
    }
    return crc ^ 0xFFFFFFFFu;
}

std::string format_real(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
}

void write_bytes_atomic(const std::string& path, const std::string& bytes, bool force) {
    if (!force && std::filesystem::exists(path)) {
        throw DataError("refusing to overwrite " + path + " (use --force)");
    }
    ensure_parent_dir(path);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp);
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw DataError("write failed for " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::string& path, const std::string& text, bool force) {
    write_bytes_atomic(path, text, force);
}

void write_feature_file(const std::string& path, const Matrix& features, bool force) {
    ByteWriter w;
    w.magic("FEAT");
    w.u32(kFeatureVersion);
    w.u32(static_cast<std::uint32_t>(features.rows()));
    w.u32(static_cast<std::uint32_t>(features.cols()));
    for (double v : features.data()) {
        w.f32(static_cast<float>(v));
    }
    w.append_crc();
    write_bytes_atomic(path, w.bytes(), force);
}

Matrix read_feature_file(const std::string& path) {
    ByteReader r(read_all_bytes(path), "feature file " + path);
    r.expect_magic("FEAT");
    r.expect_version(kFeatureVersion);
    const std::uint32_t count = r.u32();
    const std::uint32_t dim = r.u32();
    if (static_cast<std::uint64_t>(count) * dim > (1ULL << 28)) {
        throw DataError("feature file " + path + ": implausible shape " +
                        std::to_string(count) + "x" + std::to_string(dim));
    }
    // Validate the advertised payload length (plus trailing checksum) before
    // allocating, so short files fail as truncation without a huge allocation.
    r.need(static_cast<std::size_t>(count) * dim * 4 + 4);
    Matrix features(static_cast<int>(count), static_cast<int>(dim));
    for (double& v : features.data()) {
        v = static_cast<double>(r.f32());
    }
    r.check_crc();
    r.expect_consumed();
    return features;
}

void write_checkpoint_file(const std::string& path, const GanCheckpoint& ckpt, bool force) {
    ByteWriter w;
    w.magic("GANC");
    w.u32(kCheckpointVersion);
    w.u64(ckpt.seed);
    w.u64(static_cast<std::uint64_t>(ckpt.step));
    write_model_block(w, ckpt.generator);
    write_model_block(w, ckpt.discriminator);
    write_adam_block(w, ckpt.gen_opt);
    write_adam_block(w, ckpt.disc_opt);
    w.append_crc();
    write_bytes_atomic(path, w.bytes(), force);
}

GanCheckpoint read_checkpoint_file(const std::string& path) {
    ByteReader r(read_all_bytes(path), "checkpoint file " + path);
    r.expect_magic("GANC");
    r.expect_version(kCheckpointVersion);
    GanCheckpoint ckpt;
    ckpt.seed = r.u64();
    ckpt.step = static_cast<std::int64_t>(r.u64());
    ckpt.generator = read_model_block(r);
    ckpt.discriminator = read_model_block(r);
    ckpt.gen_opt = read_adam_block(r);
    ckpt.disc_opt = read_adam_block(r);
    r.check_crc();
    r.expect_consumed();
    return ckpt;
}

void write_samples_csv(const std::string& path, const SampleSet& samples, bool force) {
    std::string text;
    for (int j = 0; j < samples.dim(); ++j) {
        if (j > 0) {
            text += ',';
        }
        text += "x" + std::to_string(j);
    }
    text += '\n';
    for (int i = 0; i < samples.n(); ++i) {
        const auto row = samples.points.row(i);
        for (int j = 0; j < samples.dim(); ++j) {
            if (j > 0) {
                text += ',';
            }
            text += format_real(row[static_cast<std::size_t>(j)]);
        }
        text += '\n';
    }
    write_text_atomic(path, text, force);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(trim(line.substr(start)));
                break;
            }
            fields.push_back(trim(line.substr(start, comma - start)));
            start = comma + 1;
        }
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size()) {
                throw DataError(path + ": row with " + std::to_string(fields.size()) +
                                " fields, header has " + std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) {
        throw DataError(path + ": empty CSV");
    }
    return table;
}

RunConfig RunConfig::parse_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto as_int = [&](const char* name) {
            try {
                return std::stoi(value);
            } catch (const std::exception&) {
                throw ConfigError("config line " + std::to_string(line_no) + ": bad value for " +
                                  std::string(name));
            }
        };
        auto as_real = [&](const char* name) {
            try {
                return std::stod(value);
            } catch (const std::exception&) {
                throw ConfigError("config line " + std::to_string(line_no) + ": bad value for " +
                                  std::string(name));
            }
        };
        auto as_bool = [&](const char* name) {
            if (value == "true" || value == "1") {
                return true;
            }
            if (value == "false" || value == "0") {
                return false;
            }
            throw ConfigError("config line " + std::to_string(line_no) + ": bad value for " +
                              std::string(name) + " (use true/false)");
        };
        if (key == "name") {
            config.name = value;
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else if (key == "seeds") {
            config.seeds = value;
        } else if (key == "seed") {
            try {
                config.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": bad value for seed");
            }
        } else if (key == "generator_steps") {
            config.generator_steps = as_int("generator_steps");
        } else if (key == "disc_steps_per_gen") {
            config.disc_steps_per_gen = as_int("disc_steps_per_gen");
        } else if (key == "batch_size") {
            config.batch_size = as_int("batch_size");
        } else if (key == "latent_dim") {
            config.latent_dim = as_int("latent_dim");
        } else if (key == "lr") {
            config.lr = as_real("lr");
        } else if (key == "beta1") {
            config.beta1 = as_real("beta1");
        } else if (key == "beta2") {
            config.beta2 = as_real("beta2");
        } else if (key == "snapshot_every") {
            config.snapshot_every = as_int("snapshot_every");
        } else if (key == "finetune_steps") {
            config.finetune_steps = as_int("finetune_steps");
        } else if (key == "sweep_checkpoints") {
            config.sweep_checkpoints = as_int("sweep_checkpoints");
        } else if (key == "metric_samples") {
            config.metric_samples = as_int("metric_samples");
        } else if (key == "knn_k") {
            config.knn_k = as_int("knn_k");
        } else if (key == "projections") {
            config.projections = as_int("projections");
        } else if (key == "saturating_gen_loss") {
            config.saturating_gen_loss = as_bool("saturating_gen_loss");
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key \"" +
                              key + "\"");
        }
    }
    return config;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    return parse_text(read_all_bytes(path));
}

std::string RunConfig::dump() const {
    std::string text;
    text += "name = " + name + "\n";
    text += "out_dir = " + out_dir + "\n";
    text += "seeds = " + seeds + "\n";
    text += "seed = " + std::to_string(seed) + "\n";
    text += "generator_steps = " + std::to_string(generator_steps) + "\n";
    text += "disc_steps_per_gen = " + std::to_string(disc_steps_per_gen) + "\n";
    text += "batch_size = " + std::to_string(batch_size) + "\n";
    text += "latent_dim = " + std::to_string(latent_dim) + "\n";
    text += "lr = " + format_real(lr) + "\n";
    text += "beta1 = " + format_real(beta1) + "\n";
    text += "beta2 = " + format_real(beta2) + "\n";
    text += "snapshot_every = " + std::to_string(snapshot_every) + "\n";
    text += "finetune_steps = " + std::to_string(finetune_steps) + "\n";
    text += "sweep_checkpoints = " + std::to_string(sweep_checkpoints) + "\n";
    text += "metric_samples = " + std::to_string(metric_samples) + "\n";
    text += "knn_k = " + std::to_string(knn_k) + "\n";
    text += "projections = " + std::to_string(projections) + "\n";
    text += std::string("saturating_gen_loss = ") + (saturating_gen_loss ? "true" : "false") +
            "\n";
    return text;
}

std::vector<std::uint64_t> RunConfig::seed_list() const {
    std::vector<std::uint64_t> list;
    std::size_t start = 0;
    while (start <= seeds.size()) {
        const std::size_t comma = seeds.find(',', start);
        const std::string piece =
            trim(comma == std::string::npos ? seeds.substr(start)
                                            : seeds.substr(start, comma - start));
        if (!piece.empty()) {
            try {
                list.push_back(std::stoull(piece));
            } catch (const std::exception&) {
                throw ConfigError("bad seed list entry \"" + piece + "\"");
            }
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    if (list.empty()) {
        throw ConfigError("empty seed list");
    }
    return list;
}

}  // namespace ganlab
