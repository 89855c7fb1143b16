#pragma once

#include <vector>

#include "dvs/events.hpp"
#include "dvs/filters.hpp"
#include "dvs/snn.hpp"
#include "dvs/tensor.hpp"

// Serial reference implementations, independent of the production kernels.
// They exist to check the optimized paths (unit tests and the acceptance
// suite compare against them) and to give the benchmark a baseline. Only the
// tests and the benchmark link this library.
namespace dvs::ref {

/// Straight-line interpreter for the spiking forward pass: plain nested
/// loops, no layer abstraction, same accumulation order as the contract in
/// snn.hpp. Returns the per-class output spike counts.
std::vector<int> lif_spike_counts(const SnnModel& model, const FrameTensor& input);

/// Serial, interpreter-backed accuracy computation.
double evaluate_serial(const SnnModel& model, const TensorDataset& dataset);

/// Literal re-simulation of the background activity filter: unclamped
/// neighbourhood loops with an inside bounds test, a removal flag per event.
EventStream baf_oracle(const EventStream& stream, const BafParams& params);

/// Literal re-simulation of the mask filter: per-pixel activity gathered by
/// scanning the whole event list for every pixel.
EventStream mf_oracle(const EventStream& stream, const MfParams& params);

/// Serial loop around the same per-cell draw as inject_gaussian_noise.
FrameTensor inject_gaussian_noise_serial(const FrameTensor& tensor, double magnitude,
                                         RngSeed seed);

}  // namespace dvs::ref
