#include "dvs/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dvs/rng.hpp"

namespace dvs {

FrameTensor FrameTensor::zeros(int channels, int height, int width, int time_bins,
                               std::int64_t bin_duration_us) {
    if (channels <= 0 || height <= 0 || width <= 0 || time_bins <= 0) {
        throw std::invalid_argument("tensor dimensions must be positive");
    }
    FrameTensor t;
    t.channels = channels;
    t.height = height;
    t.width = width;
    t.time_bins = time_bins;
    t.bin_duration_us = bin_duration_us;
    t.values.assign(static_cast<std::size_t>(channels) * height * width * time_bins, 0.0f);
    return t;
}

bool FrameTensor::same_shape(const FrameTensor& other) const {
    return channels == other.channels && height == other.height && width == other.width &&
           time_bins == other.time_bins;
}

bool FrameTensor::is_binary() const {
    return std::all_of(values.begin(), values.end(),
                       [](float v) { return v == 0.0f || v == 1.0f; });
}

long FrameTensor::nonzero_cells() const {
    return static_cast<long>(std::count_if(values.begin(), values.end(),
                                           [](float v) { return v != 0.0f; }));
}

long count_differing_cells(const FrameTensor& a, const FrameTensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("count_differing_cells: shape mismatch");
    }
    long n = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] != b.values[i]) ++n;
    }
    return n;
}

FrameTensor bin_events(const EventStream& stream, int time_bins) {
    if (time_bins < 1) {
        throw std::invalid_argument("invalid bin count: time_bins must be >= 1");
    }
    require_valid(stream);

    const std::int64_t duration = stream.duration_us;
    std::int64_t bin_duration = (duration + time_bins - 1) / time_bins;
    if (bin_duration < 1) bin_duration = 1;  // zero-duration streams map to bin 0

    FrameTensor tensor = FrameTensor::zeros(2, stream.height, stream.width, time_bins, bin_duration);
    for (const Event& e : stream.events) {
        // t == duration falls exactly on the upper edge; keep it in the last bin.
        int bin = static_cast<int>(std::min<std::int64_t>(e.timestamp_us / bin_duration, time_bins - 1));
        tensor.at(e.polarity, e.y, e.x, bin) = 1.0f;
    }
    return tensor;
}

EventStream tensor_to_events(const FrameTensor& tensor, float threshold) {
    if (!(threshold > 0.0f && threshold < 1.0f)) {
        throw std::invalid_argument("threshold must lie in (0, 1)");
    }
    EventStream stream;
    stream.width = static_cast<std::uint16_t>(tensor.width);
    stream.height = static_cast<std::uint16_t>(tensor.height);
    stream.duration_us = tensor.bin_duration_us * tensor.time_bins;

    for (int t = 0; t < tensor.time_bins; ++t) {
        const std::int64_t stamp = static_cast<std::int64_t>(t) * tensor.bin_duration_us +
                                   tensor.bin_duration_us / 2;
        for (int c = 0; c < tensor.channels; ++c) {
            for (int y = 0; y < tensor.height; ++y) {
                for (int x = 0; x < tensor.width; ++x) {
                    if (tensor.at(c, y, x, t) >= threshold) {
                        stream.events.push_back({static_cast<std::uint16_t>(x),
                                                 static_cast<std::uint16_t>(y),
                                                 static_cast<std::uint8_t>(c), stamp});
                    }
                }
            }
        }
    }
    return stream;
}

FrameTensor inject_gaussian_noise(const FrameTensor& tensor, double magnitude, RngSeed seed) {
    if (magnitude < 0.0) {
        throw std::invalid_argument("negative magnitude");
    }
    if (magnitude == 0.0) {
        return tensor;
    }
    FrameTensor out = tensor;
    const std::int64_t n = static_cast<std::int64_t>(out.values.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t h1 =
            detail::splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(i) + 1)));
        const std::uint64_t h2 = detail::splitmix64(h1 ^ 0xD1B54A32D192ED03ull);
        const double u1 = detail::to_unit_open(h1);
        const double u2 = detail::to_unit(h2);
        const double draw = std::sqrt(-2.0 * std::log(u1)) *
                            std::cos(2.0 * std::numbers::pi * u2);
        const double v = static_cast<double>(out.values[i]) + magnitude * draw;
        out.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

TensorDataset bin_dataset(const StreamDataset& dataset, int time_bins) {
    TensorDataset out;
    out.labels = dataset.labels;
    out.class_count = dataset.class_count;
    out.samples.resize(dataset.streams.size());
    const std::int64_t n = static_cast<std::int64_t>(dataset.streams.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        out.samples[i] = bin_events(dataset.streams[i], time_bins);
    }
    return out;
}

}  // namespace dvs
