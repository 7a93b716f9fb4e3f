#include "mlbc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mlbc/binio.hpp"

namespace mlbc {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

HistogramSpec log_histogram(const Dictionary& d, std::size_t bins) {
    if (d.empty()) throw InputError("log_histogram: dictionary is empty");
    if (bins < 1) throw InputError("log_histogram: need at least one bin");

    double total = static_cast<double>(d.total());
    double lo = 1.0 / total;
    if (lo >= 1.0) lo = 0.5;  // single-patch dictionary: keep the range nonempty

    HistogramSpec spec;
    spec.edges.resize(bins + 1);
    double log_lo = std::log(lo);
    double log_hi = 0.0;  // log(1)
    for (std::size_t i = 0; i <= bins; ++i)
        spec.edges[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                              static_cast<double>(bins));
    spec.edges.front() = lo;
    spec.edges.back() = 1.0;

    spec.counts.assign(bins, 0);
    for (const auto& [digits, count] : d.counts()) {
        double f = static_cast<double>(count) / total;
        std::size_t bin;
        if (f <= spec.edges.front()) {
            bin = 0;
        } else if (f >= spec.edges.back()) {
            bin = bins - 1;
        } else {
            auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), f);
            bin = static_cast<std::size_t>(it - spec.edges.begin()) - 1;
        }
        ++spec.counts[bin];
    }
    return spec;
}

MassCurve mass_curve(const Dictionary& d) {
    if (d.empty()) throw InputError("mass_curve: dictionary is empty");
    MassCurve curve;
    curve.cumulative.reserve(d.size());
    std::uint64_t cum = 0;
    double total = static_cast<double>(d.total());
    for (const DictEntry& e : d.canonical_entries()) {
        cum += e.count;
        curve.cumulative.push_back(static_cast<double>(cum) / total);
    }
    return curve;
}

std::size_t top_k_for_mass(const Dictionary& d, double fraction) {
    if (d.empty()) throw InputError("top_k_for_mass: dictionary is empty");
    if (fraction <= 0.0 || fraction > 1.0)
        throw InputError("top_k_for_mass: fraction must lie in (0, 1]");
    long double threshold = static_cast<long double>(fraction) * static_cast<long double>(d.total());
    std::uint64_t cum = 0;
    const auto& entries = d.canonical_entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        cum += entries[i].count;
        if (static_cast<long double>(cum) >= threshold) return i + 1;
    }
    return entries.size();
}

std::string convergence_csv(const ConvergenceMonitor& mon) {
    if (mon.chunk_count() == 0) throw InputError("convergence_csv: monitor has no samples");
    std::string out = "chunk_index";
    for (const auto& [digits, series] : mon.history())
        out += "," + to_string(PatchKey{mon.level(), digits});
    out += "\n";
    for (std::size_t n = 0; n < mon.chunk_count(); ++n) {
        out += std::to_string(n + 1);
        for (const auto& [digits, series] : mon.history()) out += "," + format_double(series[n]);
        out += "\n";
    }
    return out;
}

void export_convergence(const ConvergenceMonitor& mon, const std::filesystem::path& path) {
    std::string csv = convergence_csv(mon);
    write_file(path, {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
}

std::string histogram_csv(const HistogramSpec& hist) {
    std::string out = "bin_low,bin_high,pattern_count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        out += format_double(hist.edges[i]) + "," + format_double(hist.edges[i + 1]) + "," +
               std::to_string(hist.counts[i]) + "\n";
    return out;
}

std::string mass_curve_csv(const MassCurve& curve) {
    std::string out = "rank,cumulative_probability\n";
    for (std::size_t i = 0; i < curve.cumulative.size(); ++i)
        out += std::to_string(i) + "," + format_double(curve.cumulative[i]) + "\n";
    return out;
}

}  // namespace mlbc
