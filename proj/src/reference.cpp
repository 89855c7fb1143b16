#include "dvs/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dvs/rng.hpp"

namespace dvs::ref {

std::vector<int> lif_spike_counts(const SnnModel& model, const FrameTensor& input) {
    if (input.channels != model.input_shape.channels || input.height != model.input_shape.height ||
        input.width != model.input_shape.width) {
        throw std::invalid_argument("shape mismatch");
    }

    std::vector<std::vector<double>> potential;
    for (const Layer& layer : model.layers) {
        potential.emplace_back(static_cast<std::size_t>(layer.out_size()), 0.0);
    }
    std::vector<int> counts(static_cast<std::size_t>(model.class_count), 0);

    for (int t = 0; t < input.time_bins; ++t) {
        std::vector<double> signal(static_cast<std::size_t>(model.input_shape.size()));
        std::size_t idx = 0;
        for (int c = 0; c < input.channels; ++c) {
            for (int y = 0; y < input.height; ++y) {
                for (int x = 0; x < input.width; ++x) {
                    signal[idx++] = static_cast<double>(input.at(c, y, x, t));
                }
            }
        }

        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            const Layer& layer = model.layers[l];
            std::vector<double> drive(static_cast<std::size_t>(layer.out_size()), 0.0);
            if (layer.kind == Layer::Kind::Dense) {
                for (int o = 0; o < layer.out_size(); ++o) {
                    for (int i = 0; i < layer.in_size(); ++i) {
                        drive[o] += layer.weights[static_cast<std::size_t>(o) * layer.in_size() + i] *
                                    signal[i];
                    }
                }
            } else {
                const Shape3 is = layer.in_shape;
                const Shape3 os = layer.out_shape;
                const int k = layer.kernel;
                for (int oc = 0; oc < os.channels; ++oc) {
                    for (int oy = 0; oy < os.height; ++oy) {
                        for (int ox = 0; ox < os.width; ++ox) {
                            double acc = 0.0;
                            for (int ic = 0; ic < is.channels; ++ic) {
                                for (int ky = 0; ky < k; ++ky) {
                                    for (int kx = 0; kx < k; ++kx) {
                                        const int iy = oy * layer.stride - layer.padding + ky;
                                        const int ix = ox * layer.stride - layer.padding + kx;
                                        if (iy < 0 || iy >= is.height || ix < 0 || ix >= is.width) {
                                            continue;
                                        }
                                        acc += layer.weights[((static_cast<std::size_t>(oc) *
                                                                   is.channels +
                                                               ic) *
                                                                  k +
                                                              ky) *
                                                                 k +
                                                             kx] *
                                               signal[(static_cast<std::size_t>(ic) * is.height +
                                                       iy) *
                                                          is.width +
                                                      ix];
                                    }
                                }
                            }
                            drive[(static_cast<std::size_t>(oc) * os.height + oy) * os.width + ox] =
                                acc;
                        }
                    }
                }
            }

            std::vector<double> emitted(drive.size());
            for (std::size_t nrn = 0; nrn < drive.size(); ++nrn) {
                const double v = layer.neuron.leak * potential[l][nrn] + drive[nrn];
                const double spike = v >= layer.neuron.v_threshold ? 1.0 : 0.0;
                potential[l][nrn] = v - spike * layer.neuron.v_threshold;
                emitted[nrn] = spike;
            }
            signal = std::move(emitted);
        }

        for (int c = 0; c < model.class_count; ++c) {
            counts[c] += signal[c] > 0.0 ? 1 : 0;
        }
    }
    return counts;
}

double evaluate_serial(const SnnModel& model, const TensorDataset& dataset) {
    if (dataset.samples.empty()) throw std::invalid_argument("empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const std::vector<int> counts = lif_spike_counts(model, dataset.samples[i]);
        int best = 0;
        for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
            if (counts[c] > counts[best]) best = c;
        }
        if (best == dataset.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.samples.size());
}

EventStream baf_oracle(const EventStream& stream, const BafParams& params) {
    const int w = stream.width;
    const int h = stream.height;
    std::vector<std::vector<std::int64_t>> map(static_cast<std::size_t>(w),
                                               std::vector<std::int64_t>(static_cast<std::size_t>(h), 0));
    std::vector<char> removed(stream.events.size(), 0);

    for (std::size_t n = 0; n < stream.events.size(); ++n) {
        const Event& e = stream.events[n];
        for (int i = e.x - params.spatial_radius; i <= e.x + params.spatial_radius; ++i) {
            for (int j = e.y - params.spatial_radius; j <= e.y + params.spatial_radius; ++j) {
                if (i == e.x && j == e.y) continue;
                if (i < 0 || i >= w || j < 0 || j >= h) continue;
                map[i][j] = e.timestamp_us;
            }
        }
        if (e.timestamp_us - map[e.x][e.y] > params.time_threshold_us) {
            removed[n] = 1;
        }
    }

    EventStream out;
    out.width = stream.width;
    out.height = stream.height;
    out.duration_us = stream.duration_us;
    for (std::size_t n = 0; n < stream.events.size(); ++n) {
        if (!removed[n]) out.events.push_back(stream.events[n]);
    }
    return out;
}

EventStream mf_oracle(const EventStream& stream, const MfParams& params) {
    const int w = stream.width;
    const int h = stream.height;
    std::vector<std::vector<char>> masked(static_cast<std::size_t>(w),
                                          std::vector<char>(static_cast<std::size_t>(h), 0));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            std::int64_t activity = 0;
            for (const Event& e : stream.events) {
                if (e.x == x && e.y == y) ++activity;
            }
            if (activity > params.activity_threshold) masked[x][y] = 1;
        }
    }

    EventStream out;
    out.width = stream.width;
    out.height = stream.height;
    out.duration_us = stream.duration_us;
    for (const Event& e : stream.events) {
        if (!masked[e.x][e.y]) out.events.push_back(e);
    }
    return out;
}

FrameTensor inject_gaussian_noise_serial(const FrameTensor& tensor, double magnitude,
                                         RngSeed seed) {
    if (magnitude < 0.0) throw std::invalid_argument("negative magnitude");
    if (magnitude == 0.0) return tensor;
    FrameTensor out = tensor;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const std::uint64_t h1 =
            detail::splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(i) + 1)));
        const std::uint64_t h2 = detail::splitmix64(h1 ^ 0xD1B54A32D192ED03ull);
        const double draw = std::sqrt(-2.0 * std::log(detail::to_unit_open(h1))) *
                            std::cos(2.0 * std::numbers::pi * detail::to_unit(h2));
        out.values[i] =
            static_cast<float>(std::clamp(static_cast<double>(out.values[i]) + magnitude * draw, 0.0, 1.0));
    }
    return out;
}

}  // namespace dvs::ref
