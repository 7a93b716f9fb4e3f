#include "mlbc/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "mlbc/binio.hpp"
#include "mlbc/image_io.hpp"

namespace mlbc {

namespace {

bool has_image_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pbm" || ext == ".pnm";
}

std::string substitute(std::string tmpl, const std::string& token, const std::string& value) {
    for (std::size_t pos = tmpl.find(token); pos != std::string::npos;
         pos = tmpl.find(token, pos + value.size())) {
        tmpl.replace(pos, token.size(), value);
    }
    return tmpl;
}

std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

BenchResult run_corpus(const std::filesystem::path& dir, const DictionarySet& dicts,
                       const BenchOptions& options) {
    if (!std::filesystem::is_directory(dir))
        throw InputError("run_corpus: not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && has_image_extension(entry.path()))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    if (files.empty()) throw InputError("run_corpus: no images found in " + dir.string());

    std::filesystem::path work =
        options.work_dir.empty() ? std::filesystem::temp_directory_path() : options.work_dir;
    std::filesystem::create_directories(work);

    BenchResult result;
    for (const ExternalCodec& codec : options.codecs) result.codec_names.push_back(codec.name);

    double proposed_sum = 0.0;
    std::vector<double> external_sums(options.codecs.size(), 0.0);
    std::vector<std::size_t> external_counts(options.codecs.size(), 0);

    for (const std::filesystem::path& file : files) {
        BinaryImage img;
        try {
            img = load_binary(file);
        } catch (const Error& e) {
            std::fprintf(stderr, "warning: skipping %s: %s\n", file.string().c_str(), e.what());
            ++result.warnings;
            continue;
        }

        std::vector<std::uint8_t> container = encode(img, dicts);
        if (options.post_encode_hook) options.post_encode_hook(container);

        // Losslessness is non-negotiable: a bad round trip poisons every
        // downstream number, so the whole run stops.
        BinaryImage back;
        bool ok = false;
        try {
            back = decode(container, dicts);
            ok = back == img;
        } catch (const Error&) {
            ok = false;
        }
        if (!ok)
            throw CorruptionError("run_corpus: round-trip verification failed for " +
                                  file.filename().string());

        BenchRow row;
        row.image = file.filename().string();
        row.pixels = static_cast<std::uint64_t>(img.width) * static_cast<std::uint64_t>(img.height);
        row.proposed_bytes = container.size();
        row.proposed_ratio = compression_ratio(img, container.size());
        proposed_sum += row.proposed_ratio;

        std::filesystem::path pbm_path;
        if (!options.codecs.empty()) {
            pbm_path = work / (row.image + ".pbm");
            write_pbm(pbm_path, img);
        }
        for (std::size_t c = 0; c < options.codecs.size(); ++c) {
            std::filesystem::path out_path = work / (row.image + "." + options.codecs[c].name);
            std::filesystem::remove(out_path);
            std::string cmd = substitute(options.codecs[c].command_template, "{in}", pbm_path.string());
            cmd = substitute(cmd, "{out}", out_path.string());
            int rc = std::system(cmd.c_str());
            std::error_code ec;
            std::uint64_t bytes = std::filesystem::file_size(out_path, ec);
            if (rc != 0 || ec || bytes == 0) {
                std::fprintf(stderr, "warning: codec %s failed on %s\n",
                             options.codecs[c].name.c_str(), row.image.c_str());
                ++result.warnings;
                row.external.emplace_back(std::nullopt);
            } else {
                double ratio = static_cast<double>(row.pixels) / (8.0 * static_cast<double>(bytes));
                row.external.emplace_back(CodecCell{bytes, ratio});
                external_sums[c] += ratio;
                ++external_counts[c];
            }
        }

        row.best = "proposed";
        double best_ratio = row.proposed_ratio;
        for (std::size_t c = 0; c < row.external.size(); ++c)
            if (row.external[c] && row.external[c]->ratio > best_ratio) {
                best_ratio = row.external[c]->ratio;
                row.best = result.codec_names[c];
            }
        result.rows.push_back(std::move(row));
    }

    if (result.rows.empty()) throw InputError("run_corpus: no readable images in " + dir.string());
    result.proposed_mean = proposed_sum / static_cast<double>(result.rows.size());
    for (std::size_t c = 0; c < options.codecs.size(); ++c) {
        if (external_counts[c] > 0)
            result.external_means.emplace_back(external_sums[c] /
                                               static_cast<double>(external_counts[c]));
        else
            result.external_means.emplace_back(std::nullopt);
    }
    return result;
}

std::string bench_csv(const BenchResult& result) {
    std::string out = "image,pixels,proposed_bytes,proposed_ratio";
    for (const std::string& name : result.codec_names) out += "," + name + "_bytes," + name + "_ratio";
    out += ",best\n";
    for (const BenchRow& row : result.rows) {
        out += row.image + "," + std::to_string(row.pixels) + "," +
               std::to_string(row.proposed_bytes) + "," + format_ratio(row.proposed_ratio);
        for (const auto& cell : row.external) {
            if (cell)
                out += "," + std::to_string(cell->bytes) + "," + format_ratio(cell->ratio);
            else
                out += ",,";
        }
        out += "," + row.best + "\n";
    }
    return out;
}

std::string bench_table(const BenchResult& result) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header = {"image", "pixels", "proposed"};
    for (const std::string& name : result.codec_names) header.push_back(name);
    header.push_back("best");
    cells.push_back(header);

    for (const BenchRow& row : result.rows) {
        std::vector<std::string> line = {row.image, std::to_string(row.pixels),
                                         format_ratio(row.proposed_ratio)};
        for (const auto& cell : row.external) line.push_back(cell ? format_ratio(cell->ratio) : "-");
        line.push_back(row.best);
        cells.push_back(std::move(line));
    }

    std::vector<std::string> mean_line = {"mean", "", format_ratio(result.proposed_mean)};
    for (const auto& m : result.external_means) mean_line.push_back(m ? format_ratio(*m) : "-");
    mean_line.emplace_back("");
    cells.push_back(std::move(mean_line));

    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());

    std::string out;
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            out += line[i];
            if (i + 1 < line.size()) out += std::string(widths[i] - line[i].size() + 2, ' ');
        }
        out += "\n";
    }
    return out;
}

}  // namespace mlbc
