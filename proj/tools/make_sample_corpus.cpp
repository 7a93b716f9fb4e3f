// Generates the deterministic sample corpus shipped under corpus/sample:
// grayscale fields built from a handful of random cosine waves, so the
// binarized images have the large solid regions and curved boundaries
// typical of binarized photographs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "mlbc/image_io.hpp"

using namespace mlbc;

namespace {

struct Rng {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int range(int lo, int hi) { return lo + static_cast<int>(next() % (hi - lo + 1)); }
};

struct Wave {
    double kx, ky, phase, amplitude;
};

GrayImage wave_image(Rng& rng, int width, int height, int waves, double max_freq,
                     double noise_amp) {
    const double tau = 6.283185307179586;
    double scale = static_cast<double>(std::max(width, height));
    std::vector<Wave> field;
    double amp_sum = 0.0;
    for (int i = 0; i < waves; ++i) {
        double angle = rng.uniform(0.0, tau);
        double freq = rng.uniform(0.35, max_freq);
        double amplitude = 1.0 / (0.5 + freq);
        field.push_back({std::cos(angle) * freq * tau / scale,
                         std::sin(angle) * freq * tau / scale, rng.uniform(0.0, tau), amplitude});
        amp_sum += amplitude;
    }

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double v = 0.0;
            for (const Wave& w : field) v += w.amplitude * std::cos(w.kx * x + w.ky * y + w.phase);
            double gray = 128.0 + 120.0 * v / amp_sum + rng.uniform(-noise_amp, noise_amp);
            long q = std::lround(gray);
            img.pixels[static_cast<std::size_t>(y) * width + x] =
                static_cast<std::uint8_t>(q < 0 ? 0 : q > 255 ? 255 : q);
        }
    return img;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2 || argc > 3) {
        std::fprintf(stderr, "usage: make_sample_corpus OUTPUT_DIR [COUNT]\n");
        return 2;
    }
    std::filesystem::path out_dir = argv[1];
    int count = argc == 3 ? std::atoi(argv[2]) : 52;
    std::filesystem::create_directories(out_dir);

    Rng seeds{0x4D4C4243u};  // fixed: the corpus is part of the artifact
    for (int i = 0; i < count; ++i) {
        Rng rng{seeds.next()};

        // Three quarters lean smooth (few slow waves, large blobs); the
        // rest add busier texture so rarer patterns appear too.
        bool smooth = i % 4 != 3;
        int width = smooth ? rng.range(192, 352) : rng.range(96, 224);
        int height = smooth ? rng.range(176, 320) : rng.range(96, 208);
        int waves = smooth ? rng.range(2, 3) : rng.range(5, 8);
        double max_freq = smooth ? 0.8 : 3.5;
        double noise = smooth ? 1.0 : 5.0;

        GrayImage img = wave_image(rng, width, height, waves, max_freq, noise);
        char name[32];
        std::snprintf(name, sizeof(name), "sample%02d.pgm", i);
        write_pgm(out_dir / name, img);
    }
    std::printf("wrote %d images to %s\n", count, out_dir.string().c_str());
    return 0;
}
