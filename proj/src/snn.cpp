#include "dvs/snn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "dvs/io.hpp"
#include "dvs/rng.hpp"

namespace dvs {

namespace {

double surrogate_derivative(double v, double v_threshold, double alpha) {
    const double d = 1.0 + alpha * std::abs(v - v_threshold);
    return 1.0 / (d * d);
}

// Synaptic input for one time step. Accumulation order is part of the layer
// contract: ascending input index (conv: input channel, kernel row, column).
void synaptic_forward(const Layer& layer, const double* in, double* out) {
    if (layer.kind == Layer::Kind::Dense) {
        const int ni = layer.in_size();
        const int no = layer.out_size();
        for (int o = 0; o < no; ++o) {
            const double* w = layer.weights.data() + static_cast<std::size_t>(o) * ni;
            double acc = 0.0;
            for (int i = 0; i < ni; ++i) acc += w[i] * in[i];
            out[o] = acc;
        }
        return;
    }
    const Shape3 is = layer.in_shape;
    const Shape3 os = layer.out_shape;
    const int k = layer.kernel;
    for (int oc = 0; oc < os.channels; ++oc) {
        for (int oy = 0; oy < os.height; ++oy) {
            for (int ox = 0; ox < os.width; ++ox) {
                double acc = 0.0;
                for (int ic = 0; ic < is.channels; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * layer.stride - layer.padding + ky;
                        if (iy < 0 || iy >= is.height) continue;
                        const double* in_row =
                            in + (static_cast<std::size_t>(ic) * is.height + iy) * is.width;
                        const double* w_row =
                            layer.weights.data() +
                            ((static_cast<std::size_t>(oc) * is.channels + ic) * k + ky) * k;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * layer.stride - layer.padding + kx;
                            if (ix < 0 || ix >= is.width) continue;
                            acc += w_row[kx] * in_row[ix];
                        }
                    }
                }
                out[(static_cast<std::size_t>(oc) * os.height + oy) * os.width + ox] = acc;
            }
        }
    }
}

// One step of the adjoint: accumulates weight gradients and writes the
// gradient with respect to the layer input into grad_in (pre-zeroed).
void synaptic_backward(const Layer& layer, const double* in, const double* lam, double* grad_w,
                       double* grad_in) {
    if (layer.kind == Layer::Kind::Dense) {
        const int ni = layer.in_size();
        const int no = layer.out_size();
        for (int o = 0; o < no; ++o) {
            const double l = lam[o];
            if (l == 0.0) continue;
            const double* w = layer.weights.data() + static_cast<std::size_t>(o) * ni;
            double* gw = grad_w + static_cast<std::size_t>(o) * ni;
            for (int i = 0; i < ni; ++i) {
                gw[i] += l * in[i];
                grad_in[i] += w[i] * l;
            }
        }
        return;
    }
    const Shape3 is = layer.in_shape;
    const Shape3 os = layer.out_shape;
    const int k = layer.kernel;
    for (int oc = 0; oc < os.channels; ++oc) {
        for (int oy = 0; oy < os.height; ++oy) {
            for (int ox = 0; ox < os.width; ++ox) {
                const double l =
                    lam[(static_cast<std::size_t>(oc) * os.height + oy) * os.width + ox];
                if (l == 0.0) continue;
                for (int ic = 0; ic < is.channels; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * layer.stride - layer.padding + ky;
                        if (iy < 0 || iy >= is.height) continue;
                        const std::size_t in_row =
                            (static_cast<std::size_t>(ic) * is.height + iy) * is.width;
                        const std::size_t w_row =
                            ((static_cast<std::size_t>(oc) * is.channels + ic) * k + ky) * k;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * layer.stride - layer.padding + kx;
                            if (ix < 0 || ix >= is.width) continue;
                            grad_w[w_row + kx] += l * in[in_row + ix];
                            grad_in[in_row + ix] += layer.weights[w_row + kx] * l;
                        }
                    }
                }
            }
        }
    }
}

// Throwing out of an OpenMP region aborts, so dataset shapes are validated
// before any parallel loop runs.
void require_matching_shapes(const SnnModel& model, const TensorDataset& dataset) {
    for (const FrameTensor& sample : dataset.samples) {
        if (sample.channels != model.input_shape.channels ||
            sample.height != model.input_shape.height ||
            sample.width != model.input_shape.width) {
            throw std::invalid_argument("shape mismatch: dataset sample vs model input shape");
        }
    }
}

std::vector<double> softmax(const std::vector<double>& scores) {
    const double top = *std::max_element(scores.begin(), scores.end());
    std::vector<double> p(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        p[i] = std::exp(scores[i] - top);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

int argmax_lowest(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

void forward_impl(const SnnModel& model, std::span<const double> input, int time_bins, bool soft,
                  ForwardTrace* trace, std::vector<double>& counts) {
    const int in_size = model.input_shape.size();
    if (static_cast<std::size_t>(time_bins) * in_size != input.size()) {
        throw std::invalid_argument("shape mismatch: input buffer size");
    }

    std::size_t max_size = static_cast<std::size_t>(in_size);
    for (const Layer& layer : model.layers) {
        max_size = std::max(max_size, static_cast<std::size_t>(layer.out_size()));
    }
    std::vector<double> prev(max_size), act(max_size);
    std::vector<std::vector<double>> membrane(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        membrane[l].assign(model.layers[l].out_size(), 0.0);
    }

    if (trace) {
        trace->time_bins = time_bins;
        trace->soft = soft;
        trace->input.assign(input.begin(), input.end());
        trace->layers.resize(model.layers.size());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            const std::size_t n = static_cast<std::size_t>(time_bins) * model.layers[l].out_size();
            trace->layers[l].membrane.assign(n, 0.0);
            trace->layers[l].spikes.assign(n, 0.0);
        }
    }

    counts.assign(model.class_count, 0.0);
    const double alpha = model.surrogate.alpha;

    for (int t = 0; t < time_bins; ++t) {
        std::copy_n(input.data() + static_cast<std::size_t>(t) * in_size, in_size, prev.data());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            const Layer& layer = model.layers[l];
            const int size = layer.out_size();
            synaptic_forward(layer, prev.data(), act.data());
            const double vth = layer.neuron.v_threshold;
            const double leak = layer.neuron.leak;
            double* v_state = membrane[l].data();
            for (int n = 0; n < size; ++n) {
                const double v = leak * v_state[n] + act[n];
                double spike;
                if (soft) {
                    const double u = v - vth;
                    spike = u / (1.0 + alpha * std::abs(u));
                } else {
                    spike = v >= vth ? 1.0 : 0.0;
                }
                v_state[n] = v - spike * vth;
                if (trace) {
                    trace->layers[l].membrane[static_cast<std::size_t>(t) * size + n] = v;
                    trace->layers[l].spikes[static_cast<std::size_t>(t) * size + n] = spike;
                }
                prev[n] = spike;
            }
        }
        for (int c = 0; c < model.class_count; ++c) counts[c] += prev[c];
    }
    if (trace) trace->output_counts = counts;
}

void gather_input(const FrameTensor& input, std::vector<double>& out) {
    const int cs = input.channels, hs = input.height, ws = input.width, ts = input.time_bins;
    out.resize(static_cast<std::size_t>(ts) * cs * hs * ws);
    for (int t = 0; t < ts; ++t) {
        double* slice = out.data() + static_cast<std::size_t>(t) * cs * hs * ws;
        for (int c = 0; c < cs; ++c) {
            for (int y = 0; y < hs; ++y) {
                for (int x = 0; x < ws; ++x) {
                    slice[(static_cast<std::size_t>(c) * hs + y) * ws + x] =
                        static_cast<double>(input.at(c, y, x, t));
                }
            }
        }
    }
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

template <typename T>
T get_le(const std::uint8_t* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(p[i]) << (8 * i);
    }
    return value;
}

void put_f32(std::vector<std::uint8_t>& out, float value) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(value));
}

float get_f32(const std::uint8_t* p) {
    return std::bit_cast<float>(get_le<std::uint32_t>(p));
}

constexpr char kCheckpointMagic[8] = {'S', 'N', 'N', 'C', 'K', 'P', 'T', '1'};

}  // namespace

std::size_t Layer::expected_weight_count() const {
    if (kind == Kind::Dense) {
        return static_cast<std::size_t>(in_size()) * out_size();
    }
    return static_cast<std::size_t>(out_shape.channels) * in_shape.channels * kernel * kernel;
}

Layer Layer::dense(int inputs, int outputs, NeuronParams neuron) {
    if (inputs < 1 || outputs < 1) throw std::invalid_argument("dense layer needs positive sizes");
    Layer l;
    l.kind = Kind::Dense;
    l.in_shape = {inputs, 1, 1};
    l.out_shape = {outputs, 1, 1};
    l.neuron = neuron;
    l.weights.assign(l.expected_weight_count(), 0.0);
    return l;
}

Layer Layer::conv2d(Shape3 in, int out_channels, int kernel, int stride, int padding,
                    NeuronParams neuron) {
    if (in.size() < 1 || out_channels < 1 || kernel < 1 || stride < 1 || padding < 0) {
        throw std::invalid_argument("bad convolution geometry");
    }
    const int oh = (in.height + 2 * padding - kernel) / stride + 1;
    const int ow = (in.width + 2 * padding - kernel) / stride + 1;
    if (oh < 1 || ow < 1) throw std::invalid_argument("convolution output collapses to nothing");
    Layer l;
    l.kind = Kind::Conv2d;
    l.in_shape = in;
    l.out_shape = {out_channels, oh, ow};
    l.kernel = kernel;
    l.stride = stride;
    l.padding = padding;
    l.neuron = neuron;
    l.weights.assign(l.expected_weight_count(), 0.0);
    return l;
}

void SnnModel::check_consistent() const {
    if (layers.empty()) throw std::invalid_argument("model has no layers");
    if (class_count < 1) throw std::invalid_argument("model needs a positive class count");
    if (!(surrogate.alpha > 0.0)) throw std::invalid_argument("surrogate alpha must be positive");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        if (!(layer.neuron.v_threshold > 0.0)) {
            throw std::invalid_argument("v_threshold must be positive");
        }
        if (!(layer.neuron.leak > 0.0 && layer.neuron.leak <= 1.0)) {
            throw std::invalid_argument("leak must lie in (0, 1]");
        }
        if (layer.weights.size() != layer.expected_weight_count()) {
            throw std::invalid_argument("layer weight buffer has the wrong size");
        }
        for (double w : layer.weights) {
            if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
        }
        const bool spatial = layer.kind == Layer::Kind::Conv2d;
        if (l == 0) {
            if (spatial ? !(layer.in_shape == input_shape)
                        : layer.in_size() != input_shape.size()) {
                throw std::invalid_argument("first layer does not match the input shape");
            }
        } else {
            const Layer& below = layers[l - 1];
            if (spatial ? !(layer.in_shape == below.out_shape)
                        : layer.in_size() != below.out_size()) {
                throw std::invalid_argument("layer shapes do not chain");
            }
        }
    }
    if (layers.back().out_size() != class_count) {
        throw std::invalid_argument("last layer size must equal class_count");
    }
}

namespace {

void init_weights(Layer& layer, std::mt19937_64& rng, double init_scale) {
    const double fan_in = layer.kind == Layer::Kind::Dense
                              ? layer.in_size()
                              : layer.in_shape.channels * layer.kernel * layer.kernel;
    std::normal_distribution<double> dist(0.0, init_scale / std::sqrt(fan_in));
    for (double& w : layer.weights) w = dist(rng);
}

}  // namespace

SnnModel make_mlp(Shape3 input, const std::vector<int>& hidden, int classes, NeuronParams neuron,
                  SurrogateConfig surrogate, double init_scale, RngSeed seed) {
    SnnModel model;
    model.input_shape = input;
    model.class_count = classes;
    model.surrogate = surrogate;
    std::mt19937_64 rng(seed);
    int in = input.size();
    for (int units : hidden) {
        model.layers.push_back(Layer::dense(in, units, neuron));
        init_weights(model.layers.back(), rng, init_scale);
        in = units;
    }
    model.layers.push_back(Layer::dense(in, classes, neuron));
    init_weights(model.layers.back(), rng, init_scale);
    model.check_consistent();
    return model;
}

SnnModel make_convnet(Shape3 input, int conv_channels, int kernel, int stride, int classes,
                      NeuronParams neuron, SurrogateConfig surrogate, double init_scale,
                      RngSeed seed) {
    SnnModel model;
    model.input_shape = input;
    model.class_count = classes;
    model.surrogate = surrogate;
    std::mt19937_64 rng(seed);
    model.layers.push_back(Layer::conv2d(input, conv_channels, kernel, stride, 0, neuron));
    init_weights(model.layers.back(), rng, init_scale);
    model.layers.push_back(Layer::dense(model.layers[0].out_size(), classes, neuron));
    init_weights(model.layers.back(), rng, init_scale);
    model.check_consistent();
    return model;
}

Prediction lif_forward(const SnnModel& model, const FrameTensor& input, ForwardTrace* trace) {
    if (input.channels != model.input_shape.channels || input.height != model.input_shape.height ||
        input.width != model.input_shape.width) {
        throw std::invalid_argument("shape mismatch: input tensor vs model input shape");
    }
    std::vector<double> gathered;
    gather_input(input, gathered);
    std::vector<double> counts;
    forward_impl(model, gathered, input.time_bins, /*soft=*/false, trace, counts);

    Prediction pred;
    pred.spike_counts.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        pred.spike_counts[i] = static_cast<int>(std::lround(counts[i]));
    }
    pred.probabilities = softmax(counts);
    pred.predicted_class = argmax_lowest(pred.probabilities);
    return pred;
}

void lif_forward_steps(const SnnModel& model, std::span<const double> input, int time_bins,
                       bool soft, ForwardTrace& trace) {
    std::vector<double> counts;
    forward_impl(model, input, time_bins, soft, &trace, counts);
}

double loss_value(const std::vector<double>& counts, int target_class, LossKind kind) {
    const std::vector<double> p = softmax(counts);
    const double pt = p[static_cast<std::size_t>(target_class)];
    if (kind == LossKind::CrossEntropy) {
        return -std::log(std::max(pt, 1e-300));
    }
    return -std::log(std::max(1.0 - pt, 1e-300));
}

std::vector<double> loss_count_gradient(const std::vector<double>& counts, int target_class,
                                        LossKind kind) {
    const std::vector<double> p = softmax(counts);
    const std::size_t target = static_cast<std::size_t>(target_class);
    std::vector<double> grad(p.size());
    if (kind == LossKind::CrossEntropy) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            grad[j] = p[j] - (j == target ? 1.0 : 0.0);
        }
        return grad;
    }
    const double pt = p[target];
    const double denom = std::max(1.0 - pt, 1e-12);
    for (std::size_t j = 0; j < p.size(); ++j) {
        grad[j] = pt * ((j == target ? 1.0 : 0.0) - p[j]) / denom;
    }
    return grad;
}

void backward(const SnnModel& model, const ForwardTrace& trace, std::span<const double> dcounts,
              Gradients& grads) {
    const int time_bins = trace.time_bins;
    const std::size_t layer_count = model.layers.size();
    if (dcounts.size() != static_cast<std::size_t>(model.class_count)) {
        throw std::invalid_argument("dcounts size must equal class_count");
    }

    grads.weights.resize(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) {
        grads.weights[l].assign(model.layers[l].weights.size(), 0.0);
    }
    grads.input.assign(trace.input.size(), 0.0);

    const double alpha = model.surrogate.alpha;
    std::vector<double> ds_current;  // spike gradient arriving from the layer above
    std::vector<double> lam_v, lam_v_post;

    for (std::size_t li = layer_count; li-- > 0;) {
        const Layer& layer = model.layers[li];
        const int size = layer.out_size();
        const int in_size = layer.in_size();
        const bool top = li + 1 == layer_count;
        const double vth = layer.neuron.v_threshold;
        const double leak = layer.neuron.leak;

        std::vector<double> ds_below;
        double* below_base = nullptr;
        if (li > 0) {
            ds_below.assign(static_cast<std::size_t>(time_bins) * in_size, 0.0);
            below_base = ds_below.data();
        } else {
            below_base = grads.input.data();
        }

        lam_v.assign(size, 0.0);
        lam_v_post.assign(size, 0.0);
        const ForwardTrace::LayerTrace& lt = trace.layers[li];

        for (int t = time_bins - 1; t >= 0; --t) {
            const double* v = lt.membrane.data() + static_cast<std::size_t>(t) * size;
            for (int n = 0; n < size; ++n) {
                const double ext =
                    top ? dcounts[n] : ds_current[static_cast<std::size_t>(t) * size + n];
                const double g = surrogate_derivative(v[n], vth, alpha);
                lam_v[n] = lam_v_post[n] + g * (ext - vth * lam_v_post[n]);
            }
            const double* in = li == 0
                                   ? trace.input.data() + static_cast<std::size_t>(t) * in_size
                                   : trace.layers[li - 1].spikes.data() +
                                         static_cast<std::size_t>(t) * in_size;
            synaptic_backward(layer, in, lam_v.data(), grads.weights[li].data(),
                              below_base + static_cast<std::size_t>(t) * in_size);
            for (int n = 0; n < size; ++n) lam_v_post[n] = leak * lam_v[n];
        }
        if (li > 0) ds_current = std::move(ds_below);
    }
}

FrameTensor input_gradient(const SnnModel& model, const FrameTensor& input, int target_class,
                           LossKind kind) {
    if (target_class < 0 || target_class >= model.class_count) {
        throw std::invalid_argument("target class out of range");
    }
    ForwardTrace trace;
    lif_forward(model, input, &trace);
    const std::vector<double> dcounts = loss_count_gradient(trace.output_counts, target_class, kind);
    Gradients grads;
    backward(model, trace, dcounts, grads);

    FrameTensor grad = FrameTensor::zeros(input.channels, input.height, input.width,
                                          input.time_bins, input.bin_duration_us);
    const int hs = input.height, ws = input.width, cs = input.channels;
    for (int t = 0; t < input.time_bins; ++t) {
        const double* slice = grads.input.data() + static_cast<std::size_t>(t) * cs * hs * ws;
        for (int c = 0; c < cs; ++c) {
            for (int y = 0; y < hs; ++y) {
                for (int x = 0; x < ws; ++x) {
                    grad.at(c, y, x, t) = static_cast<float>(
                        slice[(static_cast<std::size_t>(c) * hs + y) * ws + x]);
                }
            }
        }
    }
    return grad;
}

TrainHistory train(SnnModel& model, const TensorDataset& train_set, const TensorDataset* test_set,
                   const TrainConfig& config) {
    if (train_set.samples.empty()) throw std::invalid_argument("empty dataset");
    model.check_consistent();
    if (config.batch_size < 1 || config.epochs < 0 || config.learning_rate < 0.0) {
        throw std::invalid_argument("bad training configuration");
    }
    require_matching_shapes(model, train_set);
    if (test_set != nullptr) require_matching_shapes(model, *test_set);

    const std::size_t n = train_set.samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    const int batch = config.batch_size;
    std::vector<ForwardTrace> traces(batch);
    std::vector<Gradients> slots(batch);
    std::vector<double> losses(batch);
    std::vector<std::uint8_t> hits(batch);

    TrainHistory history;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::mt19937_64 rng(detail::derive_seed(config.seed, 0xE90Cull, epoch));
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const int actual = static_cast<int>(std::min<std::size_t>(batch, n - start));
#pragma omp parallel for schedule(dynamic)
            for (int b = 0; b < actual; ++b) {
                const std::size_t idx = order[start + b];
                const FrameTensor& sample = train_set.samples[idx];
                const int label = train_set.labels[idx];
                Prediction pred = lif_forward(model, sample, &traces[b]);
                hits[b] = pred.predicted_class == label ? 1 : 0;
                losses[b] = loss_value(traces[b].output_counts, label, LossKind::CrossEntropy);
                const std::vector<double> dcounts =
                    loss_count_gradient(traces[b].output_counts, label, LossKind::CrossEntropy);
                backward(model, traces[b], dcounts, slots[b]);
            }
            // Fixed-order reduction keeps updates bit-deterministic.
            const double scale = config.learning_rate / actual;
            for (int b = 0; b < actual; ++b) {
                loss_sum += losses[b];
                correct += hits[b];
                for (std::size_t l = 0; l < model.layers.size(); ++l) {
                    double* w = model.layers[l].weights.data();
                    const double* g = slots[b].weights[l].data();
                    const std::size_t count = model.layers[l].weights.size();
                    for (std::size_t i = 0; i < count; ++i) w[i] -= scale * g[i];
                }
            }
        }

        EpochStats stats;
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        stats.train_loss = loss_sum / static_cast<double>(n);
        if (test_set != nullptr && !test_set->samples.empty()) {
            stats.test_accuracy = evaluate(model, *test_set);
        }
        history.epochs.push_back(stats);
    }
    return history;
}

double evaluate(const SnnModel& model, const TensorDataset& dataset) {
    if (dataset.samples.empty()) throw std::invalid_argument("empty dataset");
    require_matching_shapes(model, dataset);
    const std::int64_t n = static_cast<std::int64_t>(dataset.samples.size());
    std::vector<std::uint8_t> hit(dataset.samples.size(), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        const Prediction pred = lif_forward(model, dataset.samples[i]);
        hit[i] = pred.predicted_class == dataset.labels[i] ? 1 : 0;
    }
    std::size_t correct = 0;
    for (std::uint8_t h : hit) correct += h;
    return static_cast<double>(correct) / static_cast<double>(n);
}

void save_model(const SnnModel& model, const std::filesystem::path& path) {
    model.check_consistent();
    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kCheckpointMagic, kCheckpointMagic + 8);
    put_le<std::uint32_t>(bytes, 1);  // version
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.input_shape.channels));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.input_shape.height));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.input_shape.width));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.class_count));
    put_f32(bytes, static_cast<float>(model.surrogate.alpha));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(model.layers.size()));
    for (const Layer& layer : model.layers) {
        bytes.push_back(layer.kind == Layer::Kind::Dense ? 0 : 1);
        for (int v : {layer.in_shape.channels, layer.in_shape.height, layer.in_shape.width,
                      layer.out_shape.channels, layer.out_shape.height, layer.out_shape.width,
                      layer.kernel, layer.stride, layer.padding}) {
            put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(v));
        }
        put_f32(bytes, static_cast<float>(layer.neuron.v_threshold));
        put_f32(bytes, static_cast<float>(layer.neuron.leak));
        put_le<std::uint64_t>(bytes, layer.weights.size());
        for (double w : layer.weights) put_f32(bytes, static_cast<float>(w));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

SnnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    std::size_t off = 0;
    auto need = [&](std::size_t count) {
        if (bytes.size() - off < count) throw TruncatedFile("checkpoint truncated: " + path.string());
    };
    need(8);
    if (std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
        throw BadMagic("not a model checkpoint: " + path.string());
    }
    off = 8;
    auto read_u32 = [&]() {
        need(4);
        const std::uint32_t v = get_le<std::uint32_t>(bytes.data() + off);
        off += 4;
        return v;
    };
    auto read_f32 = [&]() {
        need(4);
        const float v = get_f32(bytes.data() + off);
        off += 4;
        return v;
    };

    const std::uint32_t version = read_u32();
    if (version != 1) throw BadMagic("unsupported checkpoint version");

    SnnModel model;
    model.input_shape.channels = static_cast<int>(read_u32());
    model.input_shape.height = static_cast<int>(read_u32());
    model.input_shape.width = static_cast<int>(read_u32());
    model.class_count = static_cast<int>(read_u32());
    model.surrogate.alpha = read_f32();
    const std::uint32_t layer_count = read_u32();
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        need(1);
        const std::uint8_t kind = bytes[off++];
        Layer layer;
        layer.kind = kind == 0 ? Layer::Kind::Dense : Layer::Kind::Conv2d;
        layer.in_shape.channels = static_cast<int>(read_u32());
        layer.in_shape.height = static_cast<int>(read_u32());
        layer.in_shape.width = static_cast<int>(read_u32());
        layer.out_shape.channels = static_cast<int>(read_u32());
        layer.out_shape.height = static_cast<int>(read_u32());
        layer.out_shape.width = static_cast<int>(read_u32());
        layer.kernel = static_cast<int>(read_u32());
        layer.stride = static_cast<int>(read_u32());
        layer.padding = static_cast<int>(read_u32());
        layer.neuron.v_threshold = read_f32();
        layer.neuron.leak = read_f32();
        need(8);
        const std::uint64_t count = get_le<std::uint64_t>(bytes.data() + off);
        off += 8;
        if (count != layer.expected_weight_count()) {
            throw TruncatedFile("checkpoint weight count mismatch: " + path.string());
        }
        need(count * 4);
        layer.weights.resize(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            layer.weights[i] = get_f32(bytes.data() + off);
            off += 4;
        }
        model.layers.push_back(std::move(layer));
    }
    model.check_consistent();
    return model;
}

}  // namespace dvs
