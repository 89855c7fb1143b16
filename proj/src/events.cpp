#include "dvs/events.hpp"

#include <stdexcept>
#include <string>

namespace dvs {

const char* to_string(StreamFault fault) {
    switch (fault) {
        case StreamFault::None: return "none";
        case StreamFault::OutOfBounds: return "out of bounds";
        case StreamFault::UnsortedTimestamps: return "unsorted timestamps";
        case StreamFault::BadPolarity: return "bad polarity";
    }
    return "unknown";
}

ValidationResult validate_stream(const EventStream& stream) {
    std::int64_t previous = 0;
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
        const Event& e = stream.events[i];
        if (e.x >= stream.width || e.y >= stream.height) {
            return {StreamFault::OutOfBounds, i};
        }
        if (e.timestamp_us < 0 || e.timestamp_us > stream.duration_us) {
            return {StreamFault::OutOfBounds, i};
        }
        if (e.polarity > 1) {
            return {StreamFault::BadPolarity, i};
        }
        if (e.timestamp_us < previous) {
            return {StreamFault::UnsortedTimestamps, i};
        }
        previous = e.timestamp_us;
    }
    return {};
}

void require_valid(const EventStream& stream) {
    ValidationResult result = validate_stream(stream);
    if (!result.ok()) {
        throw std::invalid_argument("invalid event stream: " + std::string(to_string(result.fault)) +
                                    " at event " + std::to_string(result.event_index));
    }
}

}  // namespace dvs
