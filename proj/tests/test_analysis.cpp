#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mlbc/analysis.hpp"
#include "mlbc/binio.hpp"
#include "testutil.hpp"

using namespace mlbc;

TEST_CASE("log histogram: degenerate and aggregate properties") {
    Dictionary single(Level::L2);
    single.add("7", 1);
    HistogramSpec h = log_histogram(single);
    CHECK(h.counts.back() == 1);  // lone pattern sits in the bin containing 1.0
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == 1);

    std::mt19937_64 rng(139);
    Dictionary d(Level::L4);
    for (int v = 0; v < 3000; ++v) {
        char buf[5];
        std::snprintf(buf, sizeof(buf), "%04X", v);
        d.add(buf, 1 + rng() % 100000);
    }
    HistogramSpec big = log_histogram(d, 25);
    CHECK(big.edges.size() == 26);
    for (std::size_t i = 0; i + 1 < big.edges.size(); ++i) CHECK(big.edges[i] < big.edges[i + 1]);
    CHECK(big.edges.front() == doctest::Approx(1.0 / static_cast<double>(d.total())));
    CHECK(big.edges.back() == 1.0);
    CHECK(std::accumulate(big.counts.begin(), big.counts.end(), std::uint64_t{0}) == d.size());

    CHECK_THROWS_AS(log_histogram(Dictionary(Level::L2)), InputError);
}

TEST_CASE("dominant solid patterns land in the top occupied bin on smooth corpora") {
    std::mt19937_64 rng(149);
    TrainerState state;
    for (int i = 0; i < 20; ++i) state.ingest(mlbc::test::smooth_binary_image(rng, 96, 96));
    state.finalize(1);
    Dictionary d2 = state.take_dictionary(Level::L2);

    HistogramSpec h = log_histogram(d2);
    std::size_t top_occupied = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        if (h.counts[i] > 0) top_occupied = i;

    for (const auto& [digits, count] : d2.counts()) {
        double f = static_cast<double>(count) / static_cast<double>(d2.total());
        bool in_top = f >= h.edges[top_occupied];
        if (in_top) CHECK((digits == "0" || digits == "F"));
    }
    CHECK(d2.rank_of("0").value() <= 1);
    CHECK(d2.rank_of("F").value() <= 1);
}

TEST_CASE("mass curve and top-k") {
    Dictionary uniform(Level::L2);
    uniform.add("0", 5);
    uniform.add("1", 5);
    uniform.add("2", 5);
    uniform.add("3", 5);
    CHECK(top_k_for_mass(uniform, 0.5) == 2);
    CHECK(top_k_for_mass(uniform, 1.0) == 4);

    MassCurve curve = mass_curve(uniform);
    REQUIRE(curve.cumulative.size() == 4);
    CHECK(curve.cumulative[1] == doctest::Approx(0.5));
    CHECK(curve.cumulative.back() == 1.0);

    CHECK_THROWS_AS(top_k_for_mass(uniform, 0.0), InputError);
    CHECK_THROWS_AS(top_k_for_mass(uniform, 1.5), InputError);
}

TEST_CASE("top-k matches the sort-and-scan oracle on a Zipf dictionary") {
    Dictionary d(Level::L4);
    std::vector<std::uint64_t> counts;
    for (int r = 1; r <= 20000; ++r) {
        auto c = static_cast<std::uint64_t>(std::pow(20000.0 / r, 1.2)) + 1;
        counts.push_back(c);
        char buf[5];
        std::snprintf(buf, sizeof(buf), "%04X", r);
        d.add(buf, c);
    }
    std::sort(counts.begin(), counts.end(), std::greater<>());
    std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});

    for (double fraction : {0.5, 0.9, 0.99}) {
        std::uint64_t cum = 0;
        std::size_t k = 0;
        while (static_cast<long double>(cum) < fraction * static_cast<long double>(total))
            cum += counts[k++];
        CHECK(top_k_for_mass(d, fraction) == k);
    }

    // Monotone in the fraction, nondecreasing curve summing to 1.
    MassCurve curve = mass_curve(d);
    for (std::size_t i = 1; i < curve.cumulative.size(); ++i)
        CHECK(curve.cumulative[i] >= curve.cumulative[i - 1]);
    CHECK(curve.cumulative.back() == doctest::Approx(1.0).epsilon(1e-12));
    std::size_t prev = 0;
    for (double f : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        std::size_t k = top_k_for_mass(d, f);
        CHECK(k >= prev);
        prev = k;
    }
}

TEST_CASE("convergence CSV layout and determinism") {
    Dictionary d(Level::L2);
    ConvergenceMonitor mon(Level::L2, 1e-5);
    for (int i = 0; i < 3; ++i) {
        d.add("0", 600);
        d.add("F", 400);
        mon.note_chunk(d);
    }
    std::string csv = convergence_csv(mon);
    CHECK(csv ==
          "chunk_index,L2:0,L2:F\n"
          "1,0.6,0.4\n"
          "2,0.6,0.4\n"
          "3,0.6,0.4\n");
    CHECK(convergence_csv(mon) == csv);

    mlbc::test::TempDir tmp("csv");
    export_convergence(mon, tmp.path() / "conv.csv");
    export_convergence(mon, tmp.path() / "conv2.csv");
    CHECK(read_file(tmp.path() / "conv.csv") == read_file(tmp.path() / "conv2.csv"));

    ConvergenceMonitor empty(Level::L2, 1e-5);
    CHECK_THROWS_AS(convergence_csv(empty), InputError);
}

TEST_CASE("monitor estimates approach the sampling distribution") {
    // i.i.d. 2x2 patterns: p(0)=0.45, p(F)=0.44, the rest uniform.
    std::mt19937_64 rng(151);
    static const char* hex = "0123456789ABCDEF";
    auto draw = [&]() -> std::string {
        double u = static_cast<double>(rng() >> 11) * 0x1p-53;
        if (u < 0.45) return "0";
        if (u < 0.89) return "F";
        int other = static_cast<int>((u - 0.89) / 0.11 * 14.0);
        if (other > 13) other = 13;
        int v = other + 1;          // 1..14, skipping 0 and F
        return std::string(1, hex[v]);
    };

    Dictionary d(Level::L2);
    ConvergenceMonitor mon(Level::L2, 1e-5);
    for (int chunk = 0; chunk < 3000; ++chunk) {
        for (int i = 0; i < 1000; ++i) d.add(draw());
        mon.note_chunk(d);
    }
    CHECK(std::abs(d.rank_and_probability("0")->second - 0.45) < 2e-3);
    CHECK(std::abs(d.rank_and_probability("F")->second - 0.44) < 2e-3);
    const auto& history = mon.history();
    REQUIRE(history.contains("0"));
    CHECK(history.at("0").size() == 3000);
    CHECK(std::abs(history.at("0").back() - 0.45) < 2e-3);
}
