#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "dvs/events.hpp"

namespace dvs {

/// Desk-scale synthetic benchmark: each class is an oriented bar translating
/// across the centre of the sensor, emitting on-events along its leading edge
/// and off-events along its trailing edge, plus uniform background noise.
struct SynthConfig {
    int class_count = 10;
    int samples_per_class = 20;
    int sensor_size = 34;
    std::int64_t duration_us = 1'000'000;
    double noise_rate = 0.25;  // background events per pixel per second
};

/// Geometry of one sample's bar. The bar axis points along
/// v = (cos theta, sin theta); the bar translates along the perpendicular
/// direction u = (-sin theta, cos theta). At emission step i of `steps`
/// (progress s = i / (steps - 1)), the bar centre sits at
///   sensor_centre + cross_offset * v + ((2s - 1) * amplitude + along_offset) * u
/// and the bar covers every pixel within half_width of the segment of length
/// 2 * half_length around that centre.
struct PatternParams {
    double theta = 0.0;
    double amplitude = 0.0;
    double cross_offset = 0.0;
    double along_offset = 0.0;
    double half_length = 0.0;
    double half_width = 1.0;
    int steps = 32;
};

/// Deterministic per-sample pattern geometry (class fixes the orientation,
/// the sample index only jitters the path offsets).
PatternParams derive_pattern(const SynthConfig& config, RngSeed seed, int class_index,
                             int sample_index);

/// Endpoints of the bar segment at emission step i.
std::pair<std::array<double, 2>, std::array<double, 2>> pattern_segment(
    const SynthConfig& config, const PatternParams& params, int step);

/// Timestamp of emission step i.
std::int64_t pattern_step_time(const SynthConfig& config, const PatternParams& params, int step);

/// Generates class_count * samples_per_class labelled streams. Deterministic
/// under the seed; with noise_rate 0 every event lies on its sample's bar
/// trajectory.
StreamDataset synth_dataset(const SynthConfig& config, RngSeed seed);

}  // namespace dvs
