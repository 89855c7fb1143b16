#pragma once

#include <cstdint>
#include <vector>

#include "dvs/events.hpp"

namespace dvs {

/// Dense spatio-temporal binning of an event stream.
///
/// Layout is row-major over (channel, y, x, bin). Values live in [0, 1];
/// a binary tensor holds only 0 or 1. Channel 0 carries off-polarity
/// events, channel 1 on-polarity events.
struct FrameTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    int time_bins = 0;
    std::int64_t bin_duration_us = 0;
    std::vector<float> values;

    static FrameTensor zeros(int channels, int height, int width, int time_bins,
                             std::int64_t bin_duration_us);

    std::size_t index(int c, int y, int x, int t) const {
        return ((static_cast<std::size_t>(c) * height + y) * width + x) * time_bins + t;
    }
    float at(int c, int y, int x, int t) const { return values[index(c, y, x, t)]; }
    float& at(int c, int y, int x, int t) { return values[index(c, y, x, t)]; }

    std::size_t cell_count() const { return values.size(); }
    bool same_shape(const FrameTensor& other) const;
    bool is_binary() const;
    long nonzero_cells() const;

    friend bool operator==(const FrameTensor&, const FrameTensor&) = default;
};

/// Number of cells that differ between two same-shaped tensors (the L0
/// distance used in attack reports).
long count_differing_cells(const FrameTensor& a, const FrameTensor& b);

/// Bins a valid stream into a binary tensor with the given number of time
/// bins. bin_duration = ceil(duration / time_bins); each event sets the cell
/// (polarity, y, x, t / bin_duration) to 1. Multiple events in one cell
/// saturate at 1. Events at exactly t == duration land in the last bin.
FrameTensor bin_events(const EventStream& stream, int time_bins);

/// Inverse of binning: one event per cell with value >= threshold, stamped at
/// the centre of its bin, sorted by time. Round-trips exactly with bin_events
/// for binary tensors. threshold must lie in (0, 1).
EventStream tensor_to_events(const FrameTensor& tensor, float threshold = 0.5f);

/// Adds an independent Normal(0, magnitude^2) draw to every cell and clamps
/// the result to [0, 1]. Deterministic under the seed regardless of thread
/// count; magnitude 0 returns the input unchanged.
FrameTensor inject_gaussian_noise(const FrameTensor& tensor, double magnitude, RngSeed seed);

/// Labelled collection of same-shaped tensors.
struct TensorDataset {
    std::vector<FrameTensor> samples;
    std::vector<int> labels;
    int class_count = 0;

    std::size_t size() const { return samples.size(); }
};

/// Bins every stream of a dataset with a common time-bin count.
TensorDataset bin_dataset(const StreamDataset& dataset, int time_bins);

}  // namespace dvs
