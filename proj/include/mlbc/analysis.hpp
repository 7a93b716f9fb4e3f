#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlbc/dictionary.hpp"

namespace mlbc {

// Histogram of normalized pattern frequencies over log-spaced bins.
struct HistogramSpec {
    std::vector<double> edges;          // bin count + 1, strictly increasing
    std::vector<std::uint64_t> counts;  // per bin; sums to dictionary size
};

// Bins span [1/total, 1]; entries land in the bin containing their
// frequency/total (endpoints clamped inward).
HistogramSpec log_histogram(const Dictionary& d, std::size_t bins = 30);

// cumulative[r] = probability mass of the top r+1 patterns in canonical
// rank order; nondecreasing, last value exactly 1.
struct MassCurve {
    std::vector<double> cumulative;
};

MassCurve mass_curve(const Dictionary& d);

// Smallest k whose top-k patterns reach the given mass fraction.
std::size_t top_k_for_mass(const Dictionary& d, double fraction);

// CSV with header "chunk_index,<key>,<key>,..." (keys in text form,
// lexicographic digit order) and one row per processed chunk.
std::string convergence_csv(const ConvergenceMonitor& mon);
void export_convergence(const ConvergenceMonitor& mon, const std::filesystem::path& path);

std::string histogram_csv(const HistogramSpec& hist);
std::string mass_curve_csv(const MassCurve& curve);

}  // namespace mlbc
