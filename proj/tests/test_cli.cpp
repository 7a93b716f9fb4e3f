// End-to-end checks of the mldict binary: command wiring, printed
// output, and the exit-code table.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mlbc/binio.hpp"
#include "mlbc/image_io.hpp"
#include "testutil.hpp"

using namespace mlbc;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    std::filesystem::path out_file = scratch / "cli-stdout.txt";
    std::string cmd = std::string(MLDICT_BIN) + " " + args + " > " + out_file.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    result.out = ss.str();
    return result;
}

struct CliFixture {
    mlbc::test::TempDir tmp{"cli"};
    std::filesystem::path corpus;
    std::filesystem::path dicts;

    CliFixture() {
        corpus = tmp.path() / "corpus";
        dicts = tmp.path() / "dicts";
        std::filesystem::create_directories(corpus);
        std::mt19937_64 rng(163);
        for (int i = 0; i < 6; ++i) {
            BinaryImage img = mlbc::test::smooth_binary_image(rng, 96, 80);
            char name[16];
            std::snprintf(name, sizeof(name), "c%02d.pbm", i);
            write_pbm(corpus / name, img);
        }
    }

    std::string train_args(const std::string& dict_dir, int seed = 7) const {
        return "train " + corpus.string() + " --dicts " + dict_dir + " --seed " +
               std::to_string(seed);
    }
};

}  // namespace

TEST_CASE("train writes a loadable dictionary set and is deterministic") {
    CliFixture fx;
    CliResult r1 = run_cli(fx.train_args(fx.dicts.string()), fx.tmp.path());
    CHECK(r1.exit_code == 0);
    CHECK(r1.out.find("6 images used") != std::string::npos);
    CHECK(std::filesystem::exists(fx.dicts / "manifest.json"));
    CHECK(std::filesystem::exists(fx.dicts / "convergence-l2.csv"));

    std::filesystem::path dicts2 = fx.tmp.path() / "dicts2";
    CliResult r2 = run_cli(fx.train_args(dicts2.string()), fx.tmp.path());
    CHECK(r2.exit_code == 0);
    for (const char* name : {"dict-l2.mldict", "dict-l4.mldict", "dict-l8.mldict",
                             "dict-l16.mldict", "manifest.json"})
        CHECK(read_file(fx.dicts / name) == read_file(dicts2 / name));

    // Counts are shuffle-invariant, so a different seed still produces
    // the same dictionary files.
    std::filesystem::path dicts3 = fx.tmp.path() / "dicts3";
    CliResult r3 = run_cli(fx.train_args(dicts3.string(), 8), fx.tmp.path());
    CHECK(r3.exit_code == 0);
    CHECK(read_file(fx.dicts / "dict-l2.mldict") == read_file(dicts3 / "dict-l2.mldict"));
}

TEST_CASE("encode prints the ratio that the file sizes imply; decode restores pixels") {
    CliFixture fx;
    REQUIRE(run_cli(fx.train_args(fx.dicts.string()), fx.tmp.path()).exit_code == 0);

    std::filesystem::path input = fx.corpus / "c00.pbm";
    std::filesystem::path container = fx.tmp.path() / "c00.mlbc";
    CliResult enc = run_cli("encode " + input.string() + " --dicts " + fx.dicts.string() +
                                " --out " + container.string(),
                            fx.tmp.path());
    REQUIRE(enc.exit_code == 0);

    double printed_ratio = -1;
    std::size_t pos = enc.out.find("ratio: ");
    REQUIRE(pos != std::string::npos);
    printed_ratio = std::atof(enc.out.c_str() + pos + 7);
    double recomputed = (96.0 * 80.0) / (8.0 * std::filesystem::file_size(container));
    CHECK(printed_ratio == doctest::Approx(recomputed).epsilon(1e-3));

    std::filesystem::path out_pbm = fx.tmp.path() / "c00.out.pbm";
    CliResult dec = run_cli("decode " + container.string() + " --dicts " + fx.dicts.string() +
                                " --out " + out_pbm.string(),
                            fx.tmp.path());
    REQUIRE(dec.exit_code == 0);
    CHECK(read_file(out_pbm) == read_file(input));  // PBM is canonical: byte-identical

    CliResult ins = run_cli("inspect " + container.string(), fx.tmp.path());
    CHECK(ins.exit_code == 0);
    CHECK(ins.out.find("image: 96x80") != std::string::npos);
}

TEST_CASE("exit codes distinguish the failure classes") {
    CliFixture fx;
    REQUIRE(run_cli(fx.train_args(fx.dicts.string()), fx.tmp.path()).exit_code == 0);
    std::filesystem::path container = fx.tmp.path() / "x.mlbc";
    REQUIRE(run_cli("encode " + (fx.corpus / "c01.pbm").string() + " --dicts " +
                        fx.dicts.string() + " --out " + container.string(),
                    fx.tmp.path())
                .exit_code == 0);

    // Input error: empty corpus.
    std::filesystem::path empty = fx.tmp.path() / "empty";
    std::filesystem::create_directories(empty);
    CHECK(run_cli("train " + empty.string() + " --dicts " + (fx.tmp.path() / "d").string(),
                  fx.tmp.path())
              .exit_code == 2);

    // Format error: decoding a file that is not a container.
    CHECK(run_cli("decode " + (fx.corpus / "c01.pbm").string() + " --dicts " +
                      fx.dicts.string() + " --out " + (fx.tmp.path() / "y.pbm").string(),
                  fx.tmp.path())
              .exit_code == 3);

    // Corruption: flipped payload byte.
    std::vector<std::uint8_t> bytes = read_file(container);
    bytes[bytes.size() - 6] ^= 0x20;
    write_file(fx.tmp.path() / "bad.mlbc", bytes);
    CHECK(run_cli("decode " + (fx.tmp.path() / "bad.mlbc").string() + " --dicts " +
                      fx.dicts.string() + " --out " + (fx.tmp.path() / "z.pbm").string(),
                  fx.tmp.path())
              .exit_code == 4);

    // Wrong dictionary: a set trained on different data.
    std::filesystem::path other_corpus = fx.tmp.path() / "other";
    std::filesystem::create_directories(other_corpus);
    std::mt19937_64 rng(167);
    write_pbm(other_corpus / "o.pbm", mlbc::test::random_binary_image(rng, 64, 64));
    std::filesystem::path other_dicts = fx.tmp.path() / "other-dicts";
    REQUIRE(run_cli("train " + other_corpus.string() + " --dicts " + other_dicts.string(),
                    fx.tmp.path())
                .exit_code == 0);
    CHECK(run_cli("decode " + container.string() + " --dicts " + other_dicts.string() +
                      " --out " + (fx.tmp.path() / "w.pbm").string(),
                  fx.tmp.path())
              .exit_code == 5);

    // Usage errors report as input errors.
    CHECK(run_cli("no-such-command", fx.tmp.path()).exit_code == 2);
    CHECK(run_cli("encode", fx.tmp.path()).exit_code == 2);
}

TEST_CASE("bench table and CSV through the binary") {
    CliFixture fx;
    REQUIRE(run_cli(fx.train_args(fx.dicts.string()), fx.tmp.path()).exit_code == 0);
    std::filesystem::path csv = fx.tmp.path() / "bench.csv";
    CliResult r = run_cli("bench " + fx.corpus.string() + " --dicts " + fx.dicts.string() +
                              " --codec copy=\"cp {in} {out}\" --work-dir " +
                              (fx.tmp.path() / "work").string() + " --out " + csv.string(),
                          fx.tmp.path());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("mean") != std::string::npos);
    std::vector<std::uint8_t> data = read_file(csv);
    std::string text(data.begin(), data.end());
    CHECK(text.starts_with("image,pixels,proposed_bytes,proposed_ratio,copy_bytes,copy_ratio,best"));
    CHECK(text.find("c00.pbm") != std::string::npos);
}

TEST_CASE("config file supplies defaults; flags win") {
    CliFixture fx;
    REQUIRE(run_cli(fx.train_args(fx.dicts.string()), fx.tmp.path()).exit_code == 0);

    std::filesystem::path cfg = fx.tmp.path() / "mldict.cfg";
    std::ofstream(cfg) << "dicts=" << fx.dicts.string() << "\n"
                       << "out=" << (fx.tmp.path() / "from-config.mlbc").string() << "\n";

    CliResult viaconfig = run_cli(
        "encode " + (fx.corpus / "c02.pbm").string() + " --config " + cfg.string(), fx.tmp.path());
    CHECK(viaconfig.exit_code == 0);
    REQUIRE(std::filesystem::exists(fx.tmp.path() / "from-config.mlbc"));
    std::vector<std::uint8_t> container = read_file(fx.tmp.path() / "from-config.mlbc");
    std::filesystem::remove(fx.tmp.path() / "from-config.mlbc");

    CliResult flagwins = run_cli("encode " + (fx.corpus / "c02.pbm").string() + " --config " +
                                     cfg.string() + " --out " +
                                     (fx.tmp.path() / "from-flag.mlbc").string(),
                                 fx.tmp.path());
    CHECK(flagwins.exit_code == 0);
    CHECK(std::filesystem::exists(fx.tmp.path() / "from-flag.mlbc"));
    CHECK_FALSE(std::filesystem::exists(fx.tmp.path() / "from-config.mlbc"));
    CHECK(read_file(fx.tmp.path() / "from-flag.mlbc") == container);
}

TEST_CASE("an all-white corpus trains a single-entry level-2 dictionary") {
    mlbc::test::TempDir tmp("white");
    std::filesystem::path corpus = tmp.path() / "corpus";
    std::filesystem::create_directories(corpus);
    GrayImage white;
    white.width = 32;
    white.height = 32;
    white.pixels.assign(1024, 255);
    write_pgm(corpus / "white.pgm", white);

    std::filesystem::path dicts = tmp.path() / "dicts";
    CliResult r = run_cli("train " + corpus.string() + " --dicts " + dicts.string(), tmp.path());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("level  2:        1 entries") != std::string::npos);

    CliResult ins = run_cli("inspect " + (dicts / "dict-l2.mldict").string(), tmp.path());
    CHECK(ins.exit_code == 0);
    CHECK(ins.out.find("entries: 1") != std::string::npos);
}
