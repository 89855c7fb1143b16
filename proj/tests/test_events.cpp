#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <tuple>

#include "dvs/events.hpp"
#include "dvs/rng.hpp"
#include "dvs/synth.hpp"
#include "dvs/tensor.hpp"

using namespace dvs;

namespace {

EventStream make_stream(std::uint16_t n, std::int64_t duration,
                        std::vector<Event> events) {
    EventStream s;
    s.width = n;
    s.height = n;
    s.duration_us = duration;
    s.events = std::move(events);
    return s;
}

EventStream random_stream(std::uint16_t n, std::int64_t duration, std::size_t count,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coord(0, n - 1);
    std::uniform_int_distribution<std::int64_t> when(0, duration);
    std::bernoulli_distribution pol(0.5);
    std::vector<Event> events;
    for (std::size_t i = 0; i < count; ++i) {
        events.push_back({static_cast<std::uint16_t>(coord(rng)),
                          static_cast<std::uint16_t>(coord(rng)),
                          static_cast<std::uint8_t>(pol(rng) ? 1 : 0), when(rng)});
    }
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.timestamp_us < b.timestamp_us; });
    return make_stream(n, duration, std::move(events));
}

}  // namespace

TEST_CASE("empty stream is valid") {
    CHECK(validate_stream(make_stream(8, 1000, {})).ok());
}

TEST_CASE("coordinate on the sensor edge is out of bounds") {
    const auto r = validate_stream(make_stream(8, 1000, {{8, 0, 1, 10}}));
    CHECK(r.fault == StreamFault::OutOfBounds);
    CHECK(r.event_index == 0);
}

TEST_CASE("decreasing timestamps are rejected") {
    const auto r = validate_stream(make_stream(8, 1000, {{0, 0, 1, 10}, {1, 1, 1, 5}}));
    CHECK(r.fault == StreamFault::UnsortedTimestamps);
    CHECK(r.event_index == 1);
}

TEST_CASE("polarity outside {0,1} is rejected") {
    const auto r = validate_stream(make_stream(8, 1000, {{0, 0, 2, 10}}));
    CHECK(r.fault == StreamFault::BadPolarity);
}

TEST_CASE("timestamp beyond the stream duration is out of bounds") {
    const auto r = validate_stream(make_stream(8, 1000, {{0, 0, 1, 1001}}));
    CHECK(r.fault == StreamFault::OutOfBounds);
}

TEST_CASE("binning a single event sets exactly one cell") {
    const auto stream = make_stream(4, 100, {{3, 1, 1, 0}});
    const FrameTensor tensor = bin_events(stream, 2);
    CHECK(tensor.bin_duration_us == 50);
    CHECK(tensor.nonzero_cells() == 1);
    CHECK(tensor.at(1, 1, 3, 0) == 1.0f);
}

TEST_CASE("two events in the same cell saturate at one") {
    const auto stream = make_stream(4, 100, {{2, 2, 0, 10}, {2, 2, 0, 20}});
    const FrameTensor tensor = bin_events(stream, 2);
    CHECK(tensor.nonzero_cells() == 1);
    CHECK(tensor.at(0, 2, 2, 0) == 1.0f);
    CHECK(tensor.is_binary());
}

TEST_CASE("bin count zero is rejected") {
    CHECK_THROWS_AS(bin_events(make_stream(4, 100, {}), 0), std::invalid_argument);
}

TEST_CASE("event at exactly t == duration lands in the last bin") {
    const auto stream = make_stream(4, 100, {{0, 0, 1, 100}});
    const FrameTensor tensor = bin_events(stream, 4);
    CHECK(tensor.at(1, 0, 0, 3) == 1.0f);
}

TEST_CASE("nonzero cells match a brute-force distinct-tuple histogram") {
    const EventStream stream = random_stream(16, 200000, 1000, 77);
    const int time_bins = 8;
    const FrameTensor tensor = bin_events(stream, time_bins);

    std::set<std::tuple<int, int, int, int>> distinct;
    const std::int64_t bin_duration = tensor.bin_duration_us;
    for (const Event& e : stream.events) {
        const int bin = static_cast<int>(std::min<std::int64_t>(e.timestamp_us / bin_duration,
                                                                time_bins - 1));
        distinct.insert({e.polarity, e.y, e.x, bin});
    }
    CHECK(tensor.nonzero_cells() == static_cast<long>(distinct.size()));
    CHECK(tensor.nonzero_cells() <= static_cast<long>(stream.events.size()));
}

TEST_CASE("all-zero tensor converts to an empty stream") {
    const FrameTensor tensor = FrameTensor::zeros(2, 4, 4, 3, 100);
    const EventStream stream = tensor_to_events(tensor);
    CHECK(stream.events.empty());
    CHECK(stream.duration_us == 300);
}

TEST_CASE("binary tensor with k ones yields exactly k events") {
    FrameTensor tensor = FrameTensor::zeros(2, 4, 4, 3, 100);
    tensor.at(0, 1, 2, 0) = 1.0f;
    tensor.at(1, 3, 3, 2) = 1.0f;
    tensor.at(1, 0, 0, 1) = 1.0f;
    const EventStream stream = tensor_to_events(tensor, 0.5f);
    CHECK(stream.events.size() == 3);
    CHECK(validate_stream(stream).ok());
}

TEST_CASE("bin/unbin round-trip is the identity on random binary tensors") {
    std::mt19937_64 rng(123);
    std::bernoulli_distribution bit(0.1);
    for (int trial = 0; trial < 100; ++trial) {
        FrameTensor tensor = FrameTensor::zeros(2, 6, 6, 5, 1000);
        for (float& v : tensor.values) v = bit(rng) ? 1.0f : 0.0f;
        const FrameTensor round = bin_events(tensor_to_events(tensor, 0.5f), tensor.time_bins);
        CHECK(round == tensor);
    }
}

TEST_CASE("tensor_to_events rejects thresholds outside (0,1)") {
    const FrameTensor tensor = FrameTensor::zeros(2, 4, 4, 3, 100);
    CHECK_THROWS_AS(tensor_to_events(tensor, 0.0f), std::invalid_argument);
    CHECK_THROWS_AS(tensor_to_events(tensor, 1.0f), std::invalid_argument);
}

TEST_CASE("noise injection with magnitude zero is the identity") {
    FrameTensor tensor = FrameTensor::zeros(2, 4, 4, 3, 100);
    tensor.at(0, 0, 0, 0) = 1.0f;
    CHECK(inject_gaussian_noise(tensor, 0.0, 42) == tensor);
}

TEST_CASE("noise injection rejects negative magnitudes") {
    const FrameTensor tensor = FrameTensor::zeros(2, 4, 4, 3, 100);
    CHECK_THROWS_AS(inject_gaussian_noise(tensor, -0.1, 42), std::invalid_argument);
}

TEST_CASE("noise injection is a pure function of input and seed") {
    FrameTensor tensor = FrameTensor::zeros(2, 8, 8, 4, 100);
    tensor.at(1, 4, 4, 2) = 1.0f;
    const FrameTensor a = inject_gaussian_noise(tensor, 0.3, 9);
    const FrameTensor b = inject_gaussian_noise(tensor, 0.3, 9);
    const FrameTensor c = inject_gaussian_noise(tensor, 0.3, 10);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("large-magnitude noise on zeros clamps about half the cells to zero") {
    // P(0 + noise < 0) = 1/2, so the zero fraction estimates 0.5.
    const FrameTensor tensor = FrameTensor::zeros(2, 64, 64, 16, 100);  // 131072 cells
    const FrameTensor noisy = inject_gaussian_noise(tensor, 10.0, 2024);
    const double zero_fraction =
        1.0 - static_cast<double>(noisy.nonzero_cells()) / static_cast<double>(noisy.cell_count());
    CHECK(zero_fraction == doctest::Approx(0.5).epsilon(0.04));
    for (float v : noisy.values) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

// ---------------------------------------------------------------------------
// synthetic dataset

namespace {

double point_segment_distance_oracle(double px, double py, const std::array<double, 2>& a,
                                     const std::array<double, 2>& b) {
    const double vx = b[0] - a[0];
    const double vy = b[1] - a[1];
    const double len2 = vx * vx + vy * vy;
    double best = 1e300;
    // Sampled projection rather than the closed form, so this check shares no
    // code path with the generator.
    const int samples = 200;
    for (int i = 0; i <= samples; ++i) {
        const double t = len2 == 0.0 ? 0.0 : static_cast<double>(i) / samples;
        const double dx = px - (a[0] + t * vx);
        const double dy = py - (a[1] + t * vy);
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    return best;
}

}  // namespace

TEST_CASE("noise-free synthetic events all sit on the bar trajectory") {
    SynthConfig config;
    config.class_count = 4;
    config.samples_per_class = 2;
    config.sensor_size = 24;
    config.duration_us = 100000;
    config.noise_rate = 0.0;
    const StreamDataset dataset = synth_dataset(config, 5);

    REQUIRE(dataset.streams.size() == 8);
    for (std::size_t s = 0; s < dataset.streams.size(); ++s) {
        const int label = dataset.labels[s];
        const int sample_index = static_cast<int>(s) % config.samples_per_class;
        const PatternParams params = derive_pattern(config, 5, label, sample_index);
        REQUIRE(validate_stream(dataset.streams[s]).ok());

        std::map<std::int64_t, int> step_of_time;
        for (int i = 0; i < params.steps; ++i) {
            step_of_time[pattern_step_time(config, params, i)] = i;
        }
        for (const Event& e : dataset.streams[s].events) {
            REQUIRE(step_of_time.count(e.timestamp_us) == 1);
            const int step = step_of_time[e.timestamp_us];
            // On-events appear where the bar is now; off-events where it just was.
            const auto [a_now, b_now] = pattern_segment(config, params, step);
            double distance = point_segment_distance_oracle(e.x, e.y, a_now, b_now);
            if (step > 0) {
                const auto [a_prev, b_prev] = pattern_segment(config, params, step - 1);
                distance = std::min(distance,
                                    point_segment_distance_oracle(e.x, e.y, a_prev, b_prev));
            }
            CHECK(distance <= params.half_width + 0.01);
        }
    }
}

TEST_CASE("synthetic generation is deterministic under the seed") {
    SynthConfig config;
    config.class_count = 3;
    config.samples_per_class = 2;
    config.sensor_size = 16;
    config.duration_us = 50000;
    config.noise_rate = 1.0;
    const StreamDataset a = synth_dataset(config, 11);
    const StreamDataset b = synth_dataset(config, 11);
    REQUIRE(a.streams.size() == b.streams.size());
    for (std::size_t i = 0; i < a.streams.size(); ++i) {
        CHECK(a.streams[i] == b.streams[i]);
    }
}

TEST_CASE("synthetic dataset has the requested cardinality and valid streams") {
    SynthConfig config;
    config.class_count = 10;
    config.samples_per_class = 20;
    config.sensor_size = 20;
    config.duration_us = 50000;
    config.noise_rate = 0.5;
    const StreamDataset dataset = synth_dataset(config, 3);
    CHECK(dataset.streams.size() == 200);
    CHECK(dataset.labels.size() == 200);
    CHECK(dataset.class_count == 10);
    for (const EventStream& stream : dataset.streams) {
        CHECK(validate_stream(stream).ok());
    }
}

TEST_CASE("synth_dataset rejects fewer than two classes") {
    SynthConfig config;
    config.class_count = 1;
    CHECK_THROWS_AS(synth_dataset(config, 1), std::invalid_argument);
}
