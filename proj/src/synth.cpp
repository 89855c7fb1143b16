#include "dvs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "dvs/rng.hpp"

namespace dvs {

namespace {

struct Extents {
    double margin;
    double reach;  // usable radius around the sensor centre
};

Extents extents_for(int n) {
    const double margin = std::max(2.0, n / 8.0);
    return {margin, (n - 1) / 2.0 - margin};
}

double point_segment_distance(double px, double py, const std::array<double, 2>& a,
                              const std::array<double, 2>& b) {
    const double vx = b[0] - a[0];
    const double vy = b[1] - a[1];
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((px - a[0]) * vx + (py - a[1]) * vy) / len2, 0.0, 1.0);
    }
    const double dx = px - (a[0] + t * vx);
    const double dy = py - (a[1] + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

std::vector<std::uint8_t> covered_pixels(const SynthConfig& config, const PatternParams& params,
                                         int step) {
    const int n = config.sensor_size;
    std::vector<std::uint8_t> covered(static_cast<std::size_t>(n) * n, 0);
    const auto [a, b] = pattern_segment(config, params, step);
    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(a[0], b[0]) - params.half_width - 1)));
    const int x_hi = std::min(n - 1, static_cast<int>(std::ceil(std::max(a[0], b[0]) + params.half_width + 1)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(a[1], b[1]) - params.half_width - 1)));
    const int y_hi = std::min(n - 1, static_cast<int>(std::ceil(std::max(a[1], b[1]) + params.half_width + 1)));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            if (point_segment_distance(x, y, a, b) <= params.half_width) {
                covered[static_cast<std::size_t>(y) * n + x] = 1;
            }
        }
    }
    return covered;
}

}  // namespace

PatternParams derive_pattern(const SynthConfig& config, RngSeed seed, int class_index,
                             int sample_index) {
    const Extents ext = extents_for(config.sensor_size);
    PatternParams p;
    p.theta = std::numbers::pi * class_index / config.class_count;
    p.half_length = 0.45 * ext.reach;
    p.amplitude = 0.33 * ext.reach;
    p.half_width = 1.0;
    p.steps = 32;

    std::mt19937_64 rng(detail::derive_seed(seed, static_cast<std::uint64_t>(class_index),
                                            static_cast<std::uint64_t>(sample_index)));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    p.cross_offset = 0.16 * ext.reach * unit(rng);
    p.along_offset = 0.12 * ext.reach * unit(rng);
    return p;
}

std::pair<std::array<double, 2>, std::array<double, 2>> pattern_segment(
    const SynthConfig& config, const PatternParams& params, int step) {
    const double centre = (config.sensor_size - 1) / 2.0;
    const double vx = std::cos(params.theta);
    const double vy = std::sin(params.theta);
    const double ux = -vy;
    const double uy = vx;
    const double s = params.steps > 1 ? static_cast<double>(step) / (params.steps - 1) : 0.0;
    const double travel = (2.0 * s - 1.0) * params.amplitude + params.along_offset;
    const double cx = centre + params.cross_offset * vx + travel * ux;
    const double cy = centre + params.cross_offset * vy + travel * uy;
    return {{cx - params.half_length * vx, cy - params.half_length * vy},
            {cx + params.half_length * vx, cy + params.half_length * vy}};
}

std::int64_t pattern_step_time(const SynthConfig& config, const PatternParams& params, int step) {
    return static_cast<std::int64_t>(step) * config.duration_us / params.steps;
}

StreamDataset synth_dataset(const SynthConfig& config, RngSeed seed) {
    if (config.class_count < 2) {
        throw std::invalid_argument("synth_dataset needs at least 2 classes");
    }
    if (config.samples_per_class < 1 || config.sensor_size < 8 || config.duration_us < 1) {
        throw std::invalid_argument("bad synthetic dataset configuration");
    }

    StreamDataset dataset;
    dataset.class_count = config.class_count;
    const int n = config.sensor_size;

    for (int label = 0; label < config.class_count; ++label) {
        for (int sample = 0; sample < config.samples_per_class; ++sample) {
            const PatternParams params = derive_pattern(config, seed, label, sample);
            EventStream stream;
            stream.width = static_cast<std::uint16_t>(n);
            stream.height = static_cast<std::uint16_t>(n);
            stream.duration_us = config.duration_us;

            std::vector<std::uint8_t> previous(static_cast<std::size_t>(n) * n, 0);
            for (int step = 0; step < params.steps; ++step) {
                const std::vector<std::uint8_t> covered = covered_pixels(config, params, step);
                const std::int64_t t = pattern_step_time(config, params, step);
                for (int y = 0; y < n; ++y) {
                    for (int x = 0; x < n; ++x) {
                        const std::size_t i = static_cast<std::size_t>(y) * n + x;
                        if (covered[i] && !previous[i]) {
                            stream.events.push_back({static_cast<std::uint16_t>(x),
                                                     static_cast<std::uint16_t>(y), 1, t});
                        } else if (!covered[i] && previous[i]) {
                            stream.events.push_back({static_cast<std::uint16_t>(x),
                                                     static_cast<std::uint16_t>(y), 0, t});
                        }
                    }
                }
                previous = covered;
            }

            std::mt19937_64 rng(detail::derive_seed(seed, 0xB0A6'0000ull + label, sample));
            const double expected =
                config.noise_rate * n * n * (static_cast<double>(config.duration_us) / 1e6);
            if (expected > 0.0) {
                std::poisson_distribution<long> count_dist(expected);
                std::uniform_int_distribution<int> coord(0, n - 1);
                std::uniform_int_distribution<std::int64_t> when(0, config.duration_us);
                std::bernoulli_distribution pol(0.5);
                const long count = count_dist(rng);
                for (long i = 0; i < count; ++i) {
                    stream.events.push_back({static_cast<std::uint16_t>(coord(rng)),
                                             static_cast<std::uint16_t>(coord(rng)),
                                             static_cast<std::uint8_t>(pol(rng) ? 1 : 0),
                                             when(rng)});
                }
            }

            std::stable_sort(stream.events.begin(), stream.events.end(),
                             [](const Event& a, const Event& b) {
                                 return a.timestamp_us < b.timestamp_us;
                             });
            dataset.streams.push_back(std::move(stream));
            dataset.labels.push_back(label);
        }
    }
    return dataset;
}

}  // namespace dvs
