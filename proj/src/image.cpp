#include "mlbc/image.hpp"

#include <cmath>
#include <cstring>

namespace mlbc {

GrayImage to_gray(std::span<const std::uint8_t> rgb, int width, int height) {
    if (width < 1 || height < 1) throw InputError("to_gray: dimensions must be >= 1");
    std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (rgb.size() != 3 * n) throw InputError("to_gray: raster length != 3*width*height");

    GrayImage out;
    out.width = width;
    out.height = height;
    out.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        long v = std::lround(y);
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        out.pixels[i] = static_cast<std::uint8_t>(v);
    }
    return out;
}

Histogram histogram_of(const GrayImage& img) {
    Histogram hist{};
    for (std::uint8_t p : img.pixels) ++hist[p];
    return hist;
}

int otsu_threshold(const Histogram& hist) {
    std::uint64_t total = 0;
    int lo = -1, hi = -1;
    for (int i = 0; i < 256; ++i) {
        if (hist[i] > 0) {
            if (lo < 0) lo = i;
            hi = i;
            total += hist[i];
        }
    }
    if (total == 0) throw InputError("otsu_threshold: empty histogram");
    if (lo == hi) return lo;  // single class

    // sigma_b^2(t) = w0*w1*(mu0-mu1)^2 over the split (<= t) vs (> t),
    // evaluated with exact integer sums.
    std::uint64_t sum_all = 0;
    for (int i = 0; i < 256; ++i) sum_all += hist[i] * static_cast<std::uint64_t>(i);

    int best_t = 0;
    double best_var = -1.0;
    std::uint64_t w0 = 0, sum0 = 0;
    for (int t = 0; t < 256; ++t) {
        w0 += hist[t];
        sum0 += hist[t] * static_cast<std::uint64_t>(t);
        std::uint64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        double mu0 = static_cast<double>(sum0) / static_cast<double>(w0);
        double mu1 = static_cast<double>(sum_all - sum0) / static_cast<double>(w1);
        double d = mu0 - mu1;
        double var = static_cast<double>(w0) * static_cast<double>(w1) * d * d;
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

BinaryImage binarize(const GrayImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
        throw InputError("binarize: invalid GrayImage");
    int t = otsu_threshold(histogram_of(img));
    BinaryImage out;
    out.width = img.width;
    out.height = img.height;
    out.bits.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.bits[i] = img.pixels[i] > t ? 1 : 0;
    return out;
}

static int round_up_16(int v) { return (v + 15) & ~15; }

PaddedImage pad_to_16(const BinaryImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.bits.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
        throw InputError("pad_to_16: invalid BinaryImage");

    PaddedImage out;
    out.orig_width = img.width;
    out.orig_height = img.height;
    out.image.width = round_up_16(img.width);
    out.image.height = round_up_16(img.height);
    out.image.bits.assign(
        static_cast<std::size_t>(out.image.width) * static_cast<std::size_t>(out.image.height), 0);
    for (int y = 0; y < img.height; ++y)
        std::memcpy(out.image.bits.data() + static_cast<std::size_t>(y) * out.image.width,
                    img.bits.data() + static_cast<std::size_t>(y) * img.width,
                    static_cast<std::size_t>(img.width));
    return out;
}

BinaryImage crop(const PaddedImage& padded) {
    if (padded.orig_width > padded.image.width || padded.orig_height > padded.image.height)
        throw CorruptionError("crop: original dimensions exceed padded dimensions");
    if (padded.orig_width < 1 || padded.orig_height < 1)
        throw CorruptionError("crop: original dimensions must be >= 1");

    BinaryImage out;
    out.width = padded.orig_width;
    out.height = padded.orig_height;
    out.bits.resize(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y)
        std::memcpy(out.bits.data() + static_cast<std::size_t>(y) * out.width,
                    padded.image.bits.data() + static_cast<std::size_t>(y) * padded.image.width,
                    static_cast<std::size_t>(out.width));
    return out;
}

}  // namespace mlbc
