// mldict: train pattern dictionaries, code binary images against them,
// and reproduce the dictionary statistics and benchmark tables.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlbc/analysis.hpp"
#include "mlbc/bench.hpp"
#include "mlbc/binio.hpp"
#include "mlbc/codec.hpp"
#include "mlbc/dictionary.hpp"
#include "mlbc/image_io.hpp"

namespace fs = std::filesystem;
using namespace mlbc;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitFormat = 3;
constexpr int kExitCorruption = 4;
constexpr int kExitWrongDictionary = 5;

struct Options {
    std::string dicts_dir;
    std::uint64_t seed = 0;
    std::size_t chunk_size = 1000;
    double mass_fraction = 0.99;
    std::uint64_t max_entries = 1ull << 20;
    bool prune_l4_units = false;
    double eps_l2 = 1e-5;
    double eps_l4 = 1e-5;
    double eps_l8 = 1e-6;
    double eps_l16 = 1e-6;
    std::string out;
    std::vector<std::string> codec_specs;
    std::string work_dir;
};

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pbm" || ext == ".pnm")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    return files;
}

std::vector<ExternalCodec> parse_codecs(const std::vector<std::string>& specs) {
    std::vector<ExternalCodec> codecs;
    for (const std::string& spec : specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InputError("--codec expects NAME=COMMAND_TEMPLATE, got: " + spec);
        codecs.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
    }
    return codecs;
}

void write_text(const fs::path& path, const std::string& text) {
    write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::size_t level_slot(Level lv) {
    return lv == Level::L2 ? 0 : lv == Level::L4 ? 1 : lv == Level::L8 ? 2 : 3;
}

int cmd_train(const Options& opt, const std::vector<std::string>& corpus_dirs) {
    if (opt.dicts_dir.empty()) throw InputError("train: --dicts is required");

    TrainerConfig cfg;
    cfg.chunk_size = opt.chunk_size;
    cfg.epsilon_level2 = opt.eps_l2;
    cfg.epsilon_level4 = opt.eps_l4;
    cfg.epsilon_level8 = opt.eps_l8;
    cfg.epsilon_level16 = opt.eps_l16;
    TrainerState state(cfg);

    std::size_t used = 0, skipped = 0, flushes = 0;
    for (const std::string& dir : corpus_dirs) {
        state.add_corpus_tag(fs::path(dir).filename().string());
        for (const fs::path& file : list_images(dir)) {
            try {
                state.ingest(load_binary(file));
                ++used;
            } catch (const Error& e) {
                std::fprintf(stderr, "warning: skipping %s: %s\n", file.string().c_str(), e.what());
                ++skipped;
                continue;
            }
            if (used % 32 == 0) state.flush_chunks(opt.seed + ++flushes);
        }
    }
    if (used == 0) throw InputError("train: no usable images in the corpus");
    state.finalize(opt.seed + ++flushes);

    PrunePolicy policy;
    policy.mass_fraction = opt.mass_fraction;
    policy.max_entries = opt.max_entries;
    policy.unit_frequency_level4 = opt.prune_l4_units;

    fs::create_directories(opt.dicts_dir);
    std::array<Dictionary, 4> dicts = {
        prune(state.dictionary(Level::L2), policy), prune(state.dictionary(Level::L4), policy),
        prune(state.dictionary(Level::L8), policy), prune(state.dictionary(Level::L16), policy)};
    save_dictionary_set(opt.dicts_dir, dicts);

    std::printf("corpus: %zu images used, %zu skipped\n", used, skipped);
    for (Level lv : kLevels) {
        const Dictionary& d = dicts[level_slot(lv)];
        const ConvergenceMonitor& mon = state.monitor(lv);
        ConvergenceMonitor::Status st = mon.check();
        const char* conv = st.determinate ? (st.converged ? "yes" : "no") : "undetermined";
        std::printf("level %2d: %8zu entries, total %12llu, top-90%% %zu, converged: %s\n",
                    level_side(lv), d.size(), static_cast<unsigned long long>(d.total()),
                    d.empty() ? 0 : top_k_for_mass(d, 0.90), conv);
        if (mon.chunk_count() > 0)
            export_convergence(mon, fs::path(opt.dicts_dir) /
                                        ("convergence-l" + std::to_string(level_side(lv)) + ".csv"));
    }
    std::printf("dictionaries written to %s\n", opt.dicts_dir.c_str());
    return 0;
}

int cmd_encode(const Options& opt, const std::string& input) {
    if (opt.dicts_dir.empty()) throw InputError("encode: --dicts is required");
    if (opt.out.empty()) throw InputError("encode: --out is required");
    DictionarySet dicts = load_dictionary_set(opt.dicts_dir);
    BinaryImage img = load_binary(input);
    std::vector<std::uint8_t> container = encode(img, dicts);
    write_file(opt.out, container);
    std::printf("container: %zu bytes\n", container.size());
    std::printf("ratio: %.4f\n", compression_ratio(img, container.size()));
    return 0;
}

int cmd_decode(const Options& opt, const std::string& input) {
    if (opt.dicts_dir.empty()) throw InputError("decode: --dicts is required");
    if (opt.out.empty()) throw InputError("decode: --out is required");
    DictionarySet dicts = load_dictionary_set(opt.dicts_dir);
    BinaryImage img = decode(read_file(input), dicts);
    write_pbm(opt.out, img);
    std::printf("decoded %dx%d image to %s\n", img.width, img.height, opt.out.c_str());
    return 0;
}

int cmd_stats(const Options& opt) {
    if (opt.dicts_dir.empty()) throw InputError("stats: --dicts is required");
    DictionarySet dicts = load_dictionary_set(opt.dicts_dir);
    fs::path out_dir = opt.out.empty() ? fs::path(opt.dicts_dir) : fs::path(opt.out);
    fs::create_directories(out_dir);

    for (Level lv : kLevels) {
        const Dictionary& d = dicts.at(lv);
        if (d.empty()) {
            std::printf("level %2d: empty dictionary, skipped\n", level_side(lv));
            continue;
        }
        std::string suffix = "-l" + std::to_string(level_side(lv)) + ".csv";
        write_text(out_dir / ("histogram" + suffix), histogram_csv(log_histogram(d)));
        write_text(out_dir / ("mass" + suffix), mass_curve_csv(mass_curve(d)));
        std::printf("level %2d: %zu entries, top-90%% %zu, top-95%% %zu\n", level_side(lv), d.size(),
                    top_k_for_mass(d, 0.90), top_k_for_mass(d, 0.95));
    }
    std::printf("analysis CSVs written to %s\n", out_dir.string().c_str());
    return 0;
}

int cmd_bench(const Options& opt, const std::string& corpus_dir) {
    if (opt.dicts_dir.empty()) throw InputError("bench: --dicts is required");
    DictionarySet dicts = load_dictionary_set(opt.dicts_dir);
    BenchOptions bopts;
    bopts.codecs = parse_codecs(opt.codec_specs);
    if (!opt.work_dir.empty()) bopts.work_dir = opt.work_dir;
    BenchResult result = run_corpus(corpus_dir, dicts, bopts);

    std::fputs(bench_table(result).c_str(), stdout);
    if (!opt.out.empty()) {
        write_text(opt.out, bench_csv(result));
        std::printf("CSV written to %s\n", opt.out.c_str());
    }
    return 0;
}

int cmd_inspect(const std::string& input) {
    std::vector<std::uint8_t> data = read_file(input);
    if (data.size() >= 4 && std::memcmp(data.data(), "MLBC", 4) == 0) {
        ContainerInfo info = inspect_container(data);
        std::printf("container: %s\n", input.c_str());
        std::printf("  version: %u\n", info.version);
        std::printf("  image: %ux%u\n", info.orig_width, info.orig_height);
        std::printf("  dictionary manifest: %s\n", hex_string(info.manifest_hash).c_str());
        const int sides[4] = {16, 8, 4, 2};
        for (int i = 0; i < 4; ++i)
            std::printf("  level %2d symbols: %u\n", sides[i], info.symbol_counts[i]);
        std::printf("  payload bits: %llu\n", static_cast<unsigned long long>(info.payload_bits));
        std::printf("  file bytes: %zu\n", info.container_bytes);
        return 0;
    }
    if (data.size() >= 6 && std::memcmp(data.data(), "MLDICT", 6) == 0) {
        Dictionary d = deserialize_dictionary(data);
        std::printf("dictionary: %s\n", input.c_str());
        std::printf("  level: %d\n", level_side(d.level()));
        std::printf("  entries: %zu\n", d.size());
        std::printf("  total: %llu\n", static_cast<unsigned long long>(d.total()));
        std::printf("  patches ingested: %llu\n",
                    static_cast<unsigned long long>(d.meta().patches_ingested));
        for (const std::string& tag : d.meta().corpus_tags)
            std::printf("  corpus tag: %s\n", tag.c_str());
        std::size_t shown = 0;
        for (const DictEntry& e : d.canonical_entries()) {
            if (shown == 10) break;
            auto rp = d.rank_and_probability(e.digits);
            std::printf("  #%zu %s count %llu p %.6f\n", shown++,
                        to_string(PatchKey{d.level(), e.digits}).c_str(),
                        static_cast<unsigned long long>(e.count), rp->second);
        }
        return 0;
    }
    throw FormatError("inspect: not a container or dictionary file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-level dictionary codec for binary images"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.set_config("--config", "", "key=value config file mirroring the flags");

    Options opt;
    app.add_option("--dicts", opt.dicts_dir, "dictionary directory");
    app.add_option("--seed", opt.seed, "training shuffle seed");
    app.add_option("--chunk-size", opt.chunk_size, "training chunk size")
        ->check(CLI::PositiveNumber);
    app.add_option("--mass-fraction", opt.mass_fraction,
                   "cumulative mass retained when pruning levels 8/16")
        ->check(CLI::Range(1e-9, 1.0));
    app.add_option("--max-entries", opt.max_entries, "hard entry cap when pruning levels 8/16");
    app.add_flag("--prune-l4-units", opt.prune_l4_units,
                 "drop unit-frequency level-4 patterns as well");
    app.add_option("--eps-l2", opt.eps_l2, "convergence epsilon for 2x2")->check(CLI::PositiveNumber);
    app.add_option("--eps-l4", opt.eps_l4, "convergence epsilon for 4x4")->check(CLI::PositiveNumber);
    app.add_option("--eps-l8", opt.eps_l8, "convergence epsilon for 8x8")->check(CLI::PositiveNumber);
    app.add_option("--eps-l16", opt.eps_l16, "convergence epsilon for 16x16")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", opt.out, "output path");
    app.add_option("--codec", opt.codec_specs,
                   "external codec as NAME=TEMPLATE with {in}/{out} placeholders (repeatable)");
    app.add_option("--work-dir", opt.work_dir, "bench scratch directory");

    std::vector<std::string> corpus_dirs;
    std::string input;
    std::string bench_dir;

    CLI::App* train = app.add_subcommand("train", "learn dictionaries from image directories");
    train->add_option("corpus", corpus_dirs, "corpus directories")->required();

    CLI::App* enc = app.add_subcommand("encode", "compress an image into a container");
    enc->add_option("input", input, "image file (PNG/PNM)")->required();

    CLI::App* dec = app.add_subcommand("decode", "reconstruct the image from a container");
    dec->add_option("input", input, "container file")->required();

    CLI::App* stats = app.add_subcommand("stats", "export dictionary statistics CSVs");

    CLI::App* bench = app.add_subcommand("bench", "compression ratio table over a corpus");
    bench->add_option("corpus", bench_dir, "corpus directory")->required();

    CLI::App* inspect = app.add_subcommand("inspect", "describe a container or dictionary file");
    inspect->add_option("input", input, "file to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (train->parsed()) return cmd_train(opt, corpus_dirs);
        if (enc->parsed()) return cmd_encode(opt, input);
        if (dec->parsed()) return cmd_decode(opt, input);
        if (stats->parsed()) return cmd_stats(opt);
        if (bench->parsed()) return cmd_bench(opt, bench_dir);
        if (inspect->parsed()) return cmd_inspect(input);
    } catch (const WrongDictionaryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitWrongDictionary;
    } catch (const CorruptionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCorruption;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFormat;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
