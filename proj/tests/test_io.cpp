#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "ganlab/common.hpp"
#include "ganlab/gan.hpp"
#include "ganlab/io.hpp"
#include "ganlab/matrix.hpp"
#include "ganlab/rng.hpp"

using namespace ganlab;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = "scratch_test_io";

struct ScratchDir {
    ScratchDir() {
        fs::remove_all(kScratch);
        fs::create_directories(kScratch);
    }
    std::string operator()(const std::string& name) const { return (kScratch / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Rewrites the trailing CRC so corruption tests reach the field checks that
// sit behind the integrity check.
void refresh_crc(std::string& bytes) {
    REQUIRE(bytes.size() > 4);
    const std::uint32_t crc = crc32(bytes.data(), bytes.size() - 4);
    for (int i = 0; i < 4; ++i)
        bytes[bytes.size() - 4 + static_cast<std::size_t>(i)] =
            static_cast<char>((crc >> (8 * i)) & 0xFF);
}

Matrix demo_matrix() {
    Matrix m(3, 2);
    m(0, 0) = 1.5;
    m(0, 1) = -2.25;
    m(1, 0) = 1.0 / 3.0;
    m(1, 1) = 1e-7;
    m(2, 0) = 12345.678;
    m(2, 1) = 0.0;
    return m;
}

}  // namespace

TEST_CASE("crc32 matches the standard check value") {
    const char* probe = "123456789";
    CHECK(crc32(probe, 9) == 0xCBF43926u);
    CHECK(crc32(probe, 0) == 0u);
}

TEST_CASE("format_real round-trips doubles exactly") {
    const double values[] = {0.0,  1.0,    -1.0,     1.0 / 3.0, 0.1, 1e300,
                             1e-7, 1e-300, 123456.0, -0.125};
    for (double v : values) {
        const std::string text = format_real(v);
        CHECK(std::stod(text) == v);
    }
    CHECK(format_real(2.0) == "2");
}

TEST_CASE("feature files round-trip at float precision") {
    ScratchDir dir;
    const Matrix m = demo_matrix();
    const std::string path = dir("features.feat");
    write_feature_file(path, m, false);

    const Matrix back = read_feature_file(path);
    REQUIRE(back.same_shape(m));
    for (std::size_t i = 0; i < m.data().size(); ++i)
        CHECK(back.data()[i] == static_cast<double>(static_cast<float>(m.data()[i])));
}

TEST_CASE("writers refuse to overwrite unless forced") {
    ScratchDir dir;
    const std::string path = dir("once.feat");
    write_feature_file(path, demo_matrix(), false);
    try {
        write_feature_file(path, demo_matrix(), false);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("refusing to overwrite") != std::string::npos);
        CHECK(std::string(e.what()).find("--force") != std::string::npos);
    }
    CHECK_NOTHROW(write_feature_file(path, demo_matrix(), true));

    // Parent directories are created on demand.
    CHECK_NOTHROW(write_feature_file(dir("nested/deep/file.feat"), demo_matrix(), false));
    CHECK(fs::exists(dir("nested/deep/file.feat")));
}

TEST_CASE("feature file corruption is classified by error type") {
    ScratchDir dir;
    const std::string path = dir("victim.feat");
    write_feature_file(path, demo_matrix(), false);
    const std::string original = slurp(path);

    // A flipped payload byte (payload starts after the 16-byte header) parses
    // fine but breaks the checksum.
    {
        std::string bad = original;
        bad[18] = static_cast<char>(bad[18] ^ 0x40);
        spit(path, bad);
        CHECK_THROWS_AS(read_feature_file(path), CrcError);
    }
    // A corrupted header length field makes the advertised payload overrun
    // the file, which reads as truncation.
    {
        std::string bad = original;
        bad[14] = static_cast<char>(bad[14] ^ 0x40);
        spit(path, bad);
        CHECK_THROWS_AS(read_feature_file(path), TruncationError);
    }
    // Wrong magic, checksum made valid again.
    {
        std::string bad = original;
        bad[0] = 'X';
        refresh_crc(bad);
        spit(path, bad);
        CHECK_THROWS_AS(read_feature_file(path), BadMagicError);
    }
    // Future version, checksum made valid again.
    {
        std::string bad = original;
        bad[4] = static_cast<char>(0x7F);
        refresh_crc(bad);
        spit(path, bad);
        CHECK_THROWS_AS(read_feature_file(path), VersionError);
    }
    // Truncation.
    {
        spit(path, original.substr(0, original.size() / 2));
        CHECK_THROWS_AS(read_feature_file(path), TruncationError);
        spit(path, original.substr(0, 3));
        CHECK_THROWS_AS(read_feature_file(path), TruncationError);
    }
    // Untouched file still loads.
    {
        spit(path, original);
        CHECK_NOTHROW(read_feature_file(path));
    }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    ScratchDir dir;
    TrainConfig cfg;
    cfg.generator_steps = 2;
    cfg.disc_steps_per_gen = 1;
    cfg.batch_size = 4;
    cfg.latent_dim = 6;
    cfg.snapshot_every = 1;
    cfg.seed = 11;
    const TrainResult tr = gan_train(target_spec(), cfg);
    const GanCheckpoint& ckpt = tr.final;

    const std::string path = dir("model.ganc");
    write_checkpoint_file(path, ckpt, false);
    const GanCheckpoint back = read_checkpoint_file(path);

    CHECK(back.step == ckpt.step);
    CHECK(back.seed == ckpt.seed);
    REQUIRE(back.generator.layers == ckpt.generator.layers);
    REQUIRE(back.discriminator.layers == ckpt.discriminator.layers);
    for (std::size_t l = 0; l < ckpt.generator.layers.size(); ++l) {
        CHECK(back.generator.weights[l] == ckpt.generator.weights[l]);
        CHECK(back.generator.biases[l] == ckpt.generator.biases[l]);
        CHECK(back.generator.bn_gamma[l] == ckpt.generator.bn_gamma[l]);
        CHECK(back.generator.bn_beta[l] == ckpt.generator.bn_beta[l]);
        CHECK(back.generator.bn_running_mean[l] == ckpt.generator.bn_running_mean[l]);
        CHECK(back.generator.bn_running_var[l] == ckpt.generator.bn_running_var[l]);
    }
    for (std::size_t l = 0; l < ckpt.discriminator.layers.size(); ++l)
        CHECK(back.discriminator.weights[l] == ckpt.discriminator.weights[l]);

    CHECK(back.gen_opt.t == ckpt.gen_opt.t);
    CHECK(back.gen_opt.lr == ckpt.gen_opt.lr);
    REQUIRE(back.gen_opt.m.size() == ckpt.gen_opt.m.size());
    for (std::size_t i = 0; i < ckpt.gen_opt.m.size(); ++i) {
        CHECK(back.gen_opt.m[i] == ckpt.gen_opt.m[i]);
        CHECK(back.gen_opt.v[i] == ckpt.gen_opt.v[i]);
    }
    CHECK(back.disc_opt.t == ckpt.disc_opt.t);

    // Writing the reread checkpoint reproduces the same bytes.
    const std::string again = dir("model2.ganc");
    write_checkpoint_file(again, back, false);
    CHECK(slurp(again) == slurp(path));
}

TEST_CASE("checkpoint corruption is classified by error type") {
    ScratchDir dir;
    TrainConfig cfg;
    cfg.generator_steps = 1;
    cfg.disc_steps_per_gen = 1;
    cfg.batch_size = 2;
    cfg.latent_dim = 4;
    cfg.snapshot_every = 1;
    const TrainResult tr = gan_train(target_spec(), cfg);

    const std::string path = dir("victim.ganc");
    write_checkpoint_file(path, tr.final, false);
    const std::string original = slurp(path);

    {
        std::string bad = original;
        bad[bad.size() / 2] = static_cast<char>(bad[bad.size() / 2] ^ 0x01);
        spit(path, bad);
        CHECK_THROWS_AS(read_checkpoint_file(path), CrcError);
    }
    {
        std::string bad = original;
        bad[0] = 'B';
        refresh_crc(bad);
        spit(path, bad);
        CHECK_THROWS_AS(read_checkpoint_file(path), BadMagicError);
    }
    {
        std::string bad = original;
        bad[4] = static_cast<char>(0x60);
        refresh_crc(bad);
        spit(path, bad);
        CHECK_THROWS_AS(read_checkpoint_file(path), VersionError);
    }
    {
        spit(path, original.substr(0, original.size() - 10));
        CHECK_THROWS_AS(read_checkpoint_file(path), TruncationError);
    }
}

TEST_CASE("write_samples_csv emits a labelled header and full-precision rows") {
    ScratchDir dir;
    SampleSet s{demo_matrix(), "demo"};
    const std::string path = dir("samples.csv");
    write_samples_csv(path, s, false);
    const std::string text = slurp(path);
    CHECK(text.rfind("x0,x1\n", 0) == 0);

    const CsvTable table = read_csv(path);
    REQUIRE(table.header.size() == 2);
    REQUIRE(table.rows.size() == 3);
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::stod(table.rows[i][j]) ==
                  s.points(static_cast<int>(i), static_cast<int>(j)));
}

TEST_CASE("read_csv handles blank lines, CR endings and malformed rows") {
    ScratchDir dir;
    const std::string path = dir("table.csv");
    spit(path, "a,b\r\n1,2\n\n3,4\r\n");
    const CsvTable table = read_csv(path);
    CHECK(table.header == std::vector<std::string>{"a", "b"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[1] == std::vector<std::string>{"3", "4"});

    spit(path, "a,b\n1\n");
    CHECK_THROWS_AS(read_csv(path), DataError);
    spit(path, "");
    CHECK_THROWS_AS(read_csv(path), DataError);
    CHECK_THROWS_AS(read_csv(dir("missing.csv")), DataError);
}

TEST_CASE("RunConfig defaults, parsing and dumping") {
    const RunConfig defaults;
    CHECK(defaults.generator_steps == 5000);
    CHECK(defaults.disc_steps_per_gen == 4);
    CHECK(defaults.batch_size == 64);
    CHECK(defaults.latent_dim == 64);
    CHECK(defaults.lr == 0.0002);
    CHECK(defaults.beta1 == 0.5);
    CHECK(defaults.beta2 == 0.999);
    CHECK(defaults.snapshot_every == 50);
    CHECK(defaults.finetune_steps == 1000);
    CHECK(defaults.sweep_checkpoints == 30);
    CHECK(defaults.metric_samples == 1000);
    CHECK(defaults.knn_k == 5);
    CHECK(defaults.projections == 512);
    CHECK_FALSE(defaults.saturating_gen_loss);

    // dump -> parse -> dump is a fixed point.
    const std::string text = defaults.dump();
    const RunConfig parsed = RunConfig::parse_text(text);
    CHECK(parsed.dump() == text);

    const RunConfig overridden = RunConfig::parse_text(
        "# comment\n\nbatch_size = 16\nlr = 0.001\nsaturating_gen_loss = true\nseeds = 4,5\n");
    CHECK(overridden.batch_size == 16);
    CHECK(overridden.lr == 0.001);
    CHECK(overridden.saturating_gen_loss);
    CHECK(overridden.seed_list() == std::vector<std::uint64_t>{4, 5});
}

TEST_CASE("RunConfig rejects unknown keys and bad values with a line number") {
    try {
        RunConfig::parse_text("batch_size = 8\nbogus_key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("bogus_key") != std::string::npos);
        CHECK(what.find("2") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::parse_text("batch_size = soup\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_text("seed = frog\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_text("lr 0.1\n"), ConfigError);

    RunConfig empty_seeds;
    empty_seeds.seeds = "";
    CHECK_THROWS_AS(empty_seeds.seed_list(), ConfigError);
    RunConfig bad_seeds;
    bad_seeds.seeds = "1,x,2";
    CHECK_THROWS_AS(bad_seeds.seed_list(), ConfigError);
    RunConfig sparse_seeds;
    sparse_seeds.seeds = "1,,2";  // empty pieces are skipped, not errors
    CHECK(sparse_seeds.seed_list() == std::vector<std::uint64_t>{1, 2});
}
