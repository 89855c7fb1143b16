#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dvs/events.hpp"
#include "dvs/tensor.hpp"

namespace dvs {

/// Background activity filter parameters: spatial radius S in pixels and
/// temporal threshold T in microseconds (same unit as event timestamps).
struct BafParams {
    int spatial_radius = 1;
    std::int64_t time_threshold_us = 5000;
};

/// With the maximum threshold the filter keeps every event.
constexpr std::int64_t kBafKeepAll = std::numeric_limits<std::int64_t>::max();

/// Mask filter parameter: pixels whose total event count exceeds this
/// threshold are masked and all their events removed.
struct MfParams {
    std::int64_t activity_threshold = 50;
};

/// Per-pixel last-neighbour-activity timestamps, indexed (x, y), zero
/// initialised. Entry (x, y) is only ever written with timestamps of events
/// whose neighbourhood contains the pixel, never by the pixel's own events.
struct TimestampMap {
    int width = 0;
    int height = 0;
    std::vector<std::int64_t> stamps;

    TimestampMap(int width, int height)
        : width(width), height(height),
          stamps(static_cast<std::size_t>(width) * height, 0) {}

    std::int64_t& at(int x, int y) { return stamps[static_cast<std::size_t>(x) * height + y]; }
    std::int64_t at(int x, int y) const { return stamps[static_cast<std::size_t>(x) * height + y]; }
};

/// Per-pixel event counts and the resulting mask (true where count > T).
struct ActivityMask {
    int width = 0;
    int height = 0;
    std::vector<std::int64_t> activity;
    std::vector<std::uint8_t> masked;

    std::int64_t activity_at(int x, int y) const {
        return activity[static_cast<std::size_t>(x) * height + y];
    }
    bool masked_at(int x, int y) const {
        return masked[static_cast<std::size_t>(x) * height + y] != 0;
    }
};

/// Drops events without recent activity in their spatial neighbourhood.
///
/// Events are processed oldest to newest. Each event first stamps its
/// timestamp into every map cell within the inclusive radius S around it
/// (clipped to the sensor, excluding its own pixel) and is then dropped iff
/// t - M[x][y] > T. Polarity plays no part in the decision. The output is a
/// subsequence of the input.
EventStream background_activity_filter(const EventStream& stream, const BafParams& params);

struct MaskFilterResult {
    EventStream stream;
    ActivityMask mask;
};

/// Removes all events of pixels whose total activity over the stream exceeds
/// the threshold. Order-preserving; two passes over the events.
MaskFilterResult mask_filter(const EventStream& stream, const MfParams& params);

/// Filter selection as written on the command line: "none", "mf:T=50" or
/// "baf:S=2,T=5000".
struct FilterSpec {
    enum class Kind { None, Baf, Mf };

    Kind kind = Kind::None;
    BafParams baf;
    MfParams mf;

    static FilterSpec none() { return {}; }
    static FilterSpec make_baf(BafParams p) { return {Kind::Baf, p, {}}; }
    static FilterSpec make_mf(MfParams p) { return {Kind::Mf, {}, p}; }
    static FilterSpec parse(const std::string& text);

    std::string name() const;
    std::string params_label() const;
};

/// Applies the selected filter to an event stream ("none" is the identity).
EventStream apply_filter(const EventStream& stream, const FilterSpec& spec);

/// Filters a binary tensor by converting it to events (threshold 0.5),
/// filtering, and re-binning with the tensor's own bin count.
FrameTensor apply_filter_to_tensor(const FrameTensor& tensor, const FilterSpec& spec);

/// apply_filter_to_tensor over every sample of a dataset.
TensorDataset apply_filter_to_dataset(const TensorDataset& dataset, const FilterSpec& spec);

}  // namespace dvs
