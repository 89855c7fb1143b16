#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dvs {

/// One sensor event: pixel coordinates, polarity channel and timestamp.
struct Event {
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint8_t polarity = 0;  // 0 = off, 1 = on
    std::int64_t timestamp_us = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Time-ordered recording from a single sensor.
///
/// Invariants: every event lies inside width x height, polarity is 0 or 1,
/// timestamps are non-decreasing and bounded by duration_us.
struct EventStream {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::int64_t duration_us = 0;
    std::vector<Event> events;

    friend bool operator==(const EventStream&, const EventStream&) = default;
};

enum class StreamFault {
    None,
    OutOfBounds,  // coordinate outside the sensor, or timestamp outside [0, duration]
    UnsortedTimestamps,
    BadPolarity,
};

const char* to_string(StreamFault fault);

struct ValidationResult {
    StreamFault fault = StreamFault::None;
    std::size_t event_index = 0;

    bool ok() const { return fault == StreamFault::None; }
};

/// Checks every stream invariant and reports the first violation.
ValidationResult validate_stream(const EventStream& stream);

/// Throws std::invalid_argument when the stream is invalid.
void require_valid(const EventStream& stream);

/// Seed for every stochastic operation. Identical seed and identical inputs
/// yield identical outputs.
using RngSeed = std::uint64_t;

/// Labelled collection of event streams, all from sensors of the same size.
struct StreamDataset {
    std::vector<EventStream> streams;
    std::vector<int> labels;
    int class_count = 0;

    std::size_t size() const { return streams.size(); }
};

}  // namespace dvs
