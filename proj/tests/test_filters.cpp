#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "dvs/filters.hpp"
#include "dvs/reference.hpp"
#include "dvs/tensor.hpp"

using namespace dvs;

namespace {

EventStream random_stream(std::uint16_t n, std::int64_t duration, std::size_t count,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coord(0, n - 1);
    std::uniform_int_distribution<std::int64_t> when(0, duration);
    std::bernoulli_distribution pol(0.5);
    EventStream s;
    s.width = n;
    s.height = n;
    s.duration_us = duration;
    for (std::size_t i = 0; i < count; ++i) {
        s.events.push_back({static_cast<std::uint16_t>(coord(rng)),
                            static_cast<std::uint16_t>(coord(rng)),
                            static_cast<std::uint8_t>(pol(rng) ? 1 : 0), when(rng)});
    }
    std::sort(s.events.begin(), s.events.end(),
              [](const Event& a, const Event& b) { return a.timestamp_us < b.timestamp_us; });
    return s;
}

bool is_subsequence(const EventStream& output, const EventStream& input) {
    std::size_t j = 0;
    for (const Event& e : input.events) {
        if (j < output.events.size() && output.events[j] == e) ++j;
    }
    return j == output.events.size();
}

EventStream single_event_stream(std::uint16_t n, Event e, std::int64_t duration) {
    EventStream s;
    s.width = n;
    s.height = n;
    s.duration_us = duration;
    s.events = {e};
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// background activity filter

TEST_CASE("an isolated event older than T is removed (zero-initialised map)") {
    const auto stream = single_event_stream(16, {5, 5, 1, 100}, 1000);
    const EventStream out = background_activity_filter(stream, {1, 50});
    CHECK(out.events.empty());
}

TEST_CASE("an isolated event within T of time zero survives") {
    const auto stream = single_event_stream(16, {5, 5, 1, 30}, 1000);
    const EventStream out = background_activity_filter(stream, {1, 50});
    CHECK(out.events.size() == 1);
}

TEST_CASE("a neighbour stamp keeps the follow-up event") {
    EventStream stream;
    stream.width = stream.height = 16;
    stream.duration_us = 1000;
    stream.events = {{5, 5, 1, 100}, {6, 5, 1, 120}};
    const EventStream out = background_activity_filter(stream, {1, 50});
    // First event: map is zero, 100 - 0 > 50, removed. Second: its pixel was
    // stamped with 100 by the first, 120 - 100 <= 50, kept.
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0] == stream.events[1]);
}

TEST_CASE("polarity never affects the keep/drop decision") {
    EventStream a = random_stream(16, 100000, 300, 42);
    EventStream b = a;
    for (Event& e : b.events) e.polarity = static_cast<std::uint8_t>(1 - e.polarity);
    const EventStream fa = background_activity_filter(a, {2, 3000});
    const EventStream fb = background_activity_filter(b, {2, 3000});
    REQUIRE(fa.events.size() == fb.events.size());
    for (std::size_t i = 0; i < fa.events.size(); ++i) {
        CHECK(fa.events[i].x == fb.events[i].x);
        CHECK(fa.events[i].timestamp_us == fb.events[i].timestamp_us);
    }
}

TEST_CASE("BAF rejects invalid parameters") {
    const auto stream = random_stream(8, 1000, 10, 1);
    CHECK_THROWS_AS(background_activity_filter(stream, {0, 100}), std::invalid_argument);
    CHECK_THROWS_AS(background_activity_filter(stream, {1, 0}), std::invalid_argument);
}

TEST_CASE("BAF matches the literal re-simulation on random streams") {
    int case_index = 0;
    for (int s : {1, 2, 3}) {
        for (std::int64_t t : {1000, 5000}) {
            for (int trial = 0; trial < 25; ++trial) {
                const EventStream stream = random_stream(24, 200000, 500, 1000 + case_index * 31 + trial);
                const BafParams params{s, t};
                CHECK(background_activity_filter(stream, params) == ref::baf_oracle(stream, params));
            }
            ++case_index;
        }
    }
}

TEST_CASE("BAF keeps fewer or equal events as T shrinks, and max T keeps all") {
    for (int trial = 0; trial < 30; ++trial) {
        const EventStream stream = random_stream(20, 150000, 300, 7000 + trial);
        std::size_t previous = 0;
        for (std::int64_t t : {100, 1000, 10000, 100000}) {
            const std::size_t kept = background_activity_filter(stream, {1, t}).events.size();
            CHECK(kept >= previous);
            previous = kept;
        }
        const EventStream all = background_activity_filter(stream, {1, kBafKeepAll});
        CHECK(all == stream);
    }
}

// ---------------------------------------------------------------------------
// mask filter

TEST_CASE("a pixel with exactly T events survives; one more masks it") {
    EventStream stream;
    stream.width = stream.height = 8;
    stream.duration_us = 1000;
    for (int i = 0; i < 4; ++i) stream.events.push_back({3, 3, 1, 100 * i});

    const MaskFilterResult at_threshold = mask_filter(stream, {4});
    CHECK(at_threshold.stream.events.size() == 4);
    CHECK_FALSE(at_threshold.mask.masked_at(3, 3));
    CHECK(at_threshold.mask.activity_at(3, 3) == 4);

    const MaskFilterResult above = mask_filter(stream, {3});
    CHECK(above.stream.events.empty());
    CHECK(above.mask.masked_at(3, 3));
}

TEST_CASE("mask filter on an empty stream returns an empty stream and mask") {
    EventStream stream;
    stream.width = stream.height = 8;
    stream.duration_us = 100;
    const MaskFilterResult result = mask_filter(stream, {2});
    CHECK(result.stream.events.empty());
    for (int x = 0; x < 8; ++x) {
        for (int y = 0; y < 8; ++y) {
            CHECK_FALSE(result.mask.masked_at(x, y));
        }
    }
}

TEST_CASE("mask filter matches the literal re-simulation on random streams") {
    for (std::int64_t t : {0, 1, 2, 5, 10, 50}) {
        for (int trial = 0; trial < 20; ++trial) {
            const EventStream stream = random_stream(16, 100000, 400, 9000 + t * 97 + trial);
            const MfParams params{t};
            CHECK(mask_filter(stream, params).stream == ref::mf_oracle(stream, params));
        }
    }
}

TEST_CASE("mask filter is idempotent") {
    for (int trial = 0; trial < 25; ++trial) {
        const EventStream stream = random_stream(12, 80000, 300, 1234 + trial);
        const MfParams params{2};
        const EventStream once = mask_filter(stream, params).stream;
        const EventStream twice = mask_filter(once, params).stream;
        CHECK(once == twice);
    }
}

TEST_CASE("mask filter survivors grow with T and T >= |E| keeps everything") {
    for (int trial = 0; trial < 25; ++trial) {
        const EventStream stream = random_stream(10, 50000, 200, 555 + trial);
        std::set<std::size_t> previous_indices;
        std::size_t previous = 0;
        for (std::int64_t t : {0, 1, 2, 4, 8, 1000}) {
            const EventStream kept = mask_filter(stream, {t}).stream;
            CHECK(kept.events.size() >= previous);
            previous = kept.events.size();
        }
        const EventStream all =
            mask_filter(stream, {static_cast<std::int64_t>(stream.events.size())}).stream;
        CHECK(all == stream);
    }
}

TEST_CASE("monotonicity in T is a subset relation, not just a count") {
    for (int trial = 0; trial < 10; ++trial) {
        const EventStream stream = random_stream(10, 50000, 250, 777 + trial);
        const EventStream small = mask_filter(stream, {2}).stream;
        const EventStream large = mask_filter(stream, {5}).stream;
        CHECK(is_subsequence(small, large));
    }
}

TEST_CASE("both filters select subsequences of their input") {
    for (int trial = 0; trial < 20; ++trial) {
        const EventStream stream = random_stream(14, 60000, 300, 31 + trial);
        CHECK(is_subsequence(background_activity_filter(stream, {1, 2000}), stream));
        CHECK(is_subsequence(mask_filter(stream, {3}).stream, stream));
    }
}

// ---------------------------------------------------------------------------
// tensor-level filtering

TEST_CASE("mask filter with T >= channels * bins is the identity on binary tensors") {
    // A pixel collects at most channels * time_bins events after binarisation
    // (the mask filter pools both polarity channels).
    std::mt19937_64 rng(99);
    std::bernoulli_distribution bit(0.3);
    for (int trial = 0; trial < 20; ++trial) {
        FrameTensor tensor = FrameTensor::zeros(2, 6, 6, 5, 1000);
        for (float& v : tensor.values) v = bit(rng) ? 1.0f : 0.0f;
        const FilterSpec spec = FilterSpec::make_mf({2 * 5});
        CHECK(apply_filter_to_tensor(tensor, spec) == tensor);
    }
}

TEST_CASE("any filter maps the all-zero tensor to itself") {
    const FrameTensor zeros = FrameTensor::zeros(2, 6, 6, 4, 500);
    CHECK(apply_filter_to_tensor(zeros, FilterSpec::make_mf({0})) == zeros);
    CHECK(apply_filter_to_tensor(zeros, FilterSpec::make_baf({1, 100})) == zeros);
    CHECK(apply_filter_to_tensor(zeros, FilterSpec::none()) == zeros);
}

TEST_CASE("tensor filtering equals the explicit three-step composition") {
    std::mt19937_64 rng(4321);
    std::bernoulli_distribution bit(0.15);
    for (int trial = 0; trial < 20; ++trial) {
        FrameTensor tensor = FrameTensor::zeros(2, 8, 8, 6, 2000);
        for (float& v : tensor.values) v = bit(rng) ? 1.0f : 0.0f;
        const BafParams params{1, 2500};

        const FrameTensor via_spec = apply_filter_to_tensor(tensor, FilterSpec::make_baf(params));
        const EventStream events = tensor_to_events(tensor, 0.5f);
        const EventStream filtered = background_activity_filter(events, params);
        const FrameTensor via_steps = bin_events(filtered, tensor.time_bins);
        CHECK(via_spec == via_steps);
    }
}

// ---------------------------------------------------------------------------
// spec parsing

TEST_CASE("filter specs parse and label round-trip") {
    const FilterSpec none = FilterSpec::parse("none");
    CHECK(none.kind == FilterSpec::Kind::None);
    CHECK(none.params_label().empty());

    const FilterSpec mf = FilterSpec::parse("mf:T=50");
    CHECK(mf.kind == FilterSpec::Kind::Mf);
    CHECK(mf.mf.activity_threshold == 50);
    CHECK(mf.params_label() == "T=50");

    const FilterSpec baf = FilterSpec::parse("baf:S=2,T=5000");
    CHECK(baf.kind == FilterSpec::Kind::Baf);
    CHECK(baf.baf.spatial_radius == 2);
    CHECK(baf.baf.time_threshold_us == 5000);
    CHECK(baf.params_label() == "S=2,T=5000");
}

TEST_CASE("malformed filter specs are rejected") {
    CHECK_THROWS_AS(FilterSpec::parse("gauss:T=1"), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::parse("mf"), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::parse("mf:T=-3"), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::parse("baf:S=1"), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::parse("baf:T=5,S=1"), std::invalid_argument);
    CHECK_THROWS_AS(FilterSpec::parse("baf:S=0,T=5"), std::invalid_argument);
}
