#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dvs/events.hpp"
#include "dvs/tensor.hpp"

namespace dvs {

/// Leaky integrate-and-fire dynamics per time step:
///   V <- leak * V + synaptic input;  spike = [V >= v_threshold];
///   V <- V - spike * v_threshold  (reset by subtraction).
struct NeuronParams {
    double v_threshold = 1.0;
    double leak = 0.9;
};

/// Slope of the fast-sigmoid pseudo-derivative used in place of the spike
/// step during backpropagation: d(spike)/dV ~= 1 / (1 + alpha * |V - V_th|)^2.
struct SurrogateConfig {
    double alpha = 5.0;
};

struct Shape3 {
    int channels = 0;
    int height = 0;
    int width = 0;

    int size() const { return channels * height * width; }
    friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// One synaptic layer (dense or 2-D convolution) followed by LIF dynamics.
/// Synaptic sums accumulate over the input index in ascending order (for
/// convolutions: input channel, then kernel row, then kernel column), which
/// pins bit-exact results for any reimplementation.
struct Layer {
    enum class Kind { Dense, Conv2d };

    Kind kind = Kind::Dense;
    Shape3 in_shape{};
    Shape3 out_shape{};
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    NeuronParams neuron{};
    // dense: [out][in] row-major; conv: [out_c][in_c][ky][kx]
    std::vector<double> weights;

    int in_size() const { return in_shape.size(); }
    int out_size() const { return out_shape.size(); }
    std::size_t expected_weight_count() const;

    static Layer dense(int inputs, int outputs, NeuronParams neuron);
    static Layer conv2d(Shape3 in, int out_channels, int kernel, int stride, int padding,
                        NeuronParams neuron);
};

struct SnnModel {
    Shape3 input_shape{};
    int class_count = 0;
    SurrogateConfig surrogate{};
    std::vector<Layer> layers;

    /// Throws std::invalid_argument on shape chain breaks, non-finite
    /// weights, or when the last layer size differs from class_count.
    void check_consistent() const;
};

/// Weights drawn from Normal(0, init_scale / sqrt(fan_in)).
SnnModel make_mlp(Shape3 input, const std::vector<int>& hidden, int classes, NeuronParams neuron,
                  SurrogateConfig surrogate, double init_scale, RngSeed seed);
SnnModel make_convnet(Shape3 input, int conv_channels, int kernel, int stride, int classes,
                      NeuronParams neuron, SurrogateConfig surrogate, double init_scale,
                      RngSeed seed);

struct Prediction {
    std::vector<int> spike_counts;        // per class, accumulated over all bins
    std::vector<double> probabilities;    // softmax over the counts
    int predicted_class = 0;              // ties break to the lowest index
};

/// Everything the backward pass needs: per layer and per step the pre-reset
/// membrane potential and the emitted spikes, plus the gathered input.
/// In soft mode spikes are the fast-sigmoid relaxation of the step function
/// (used by the gradient checker); in hard mode they are 0/1.
struct ForwardTrace {
    int time_bins = 0;
    bool soft = false;
    std::vector<double> input;  // time_bins x input_size, step-major

    struct LayerTrace {
        std::vector<double> membrane;  // time_bins x out_size, step-major
        std::vector<double> spikes;
    };
    std::vector<LayerTrace> layers;
    std::vector<double> output_counts;  // per class (integral in hard mode)
};

/// Runs the spiking forward pass over every time bin of the input tensor.
/// The tensor shape must match the model input shape; values outside [0, 1]
/// are accepted (attack intermediates probe the model with unclipped
/// perturbations). Pass a trace to record state for backpropagation.
Prediction lif_forward(const SnnModel& model, const FrameTensor& input,
                       ForwardTrace* trace = nullptr);

/// Forward pass on a raw step-major input buffer (time_bins x input_size).
/// With soft = true the spike step is replaced by its differentiable
/// fast-sigmoid relaxation, making the whole network smooth.
void lif_forward_steps(const SnnModel& model, std::span<const double> input, int time_bins,
                       bool soft, ForwardTrace& trace);

enum class LossKind {
    CrossEntropy,          // -log(p_target), for training
    NegLogOneMinusProb,    // -log(1 - p_target); lowering it lowers p_target
};

double loss_value(const std::vector<double>& counts, int target_class, LossKind kind);
std::vector<double> loss_count_gradient(const std::vector<double>& counts, int target_class,
                                        LossKind kind);

struct Gradients {
    std::vector<std::vector<double>> weights;  // one buffer per layer
    std::vector<double> input;                 // time_bins x input_size, step-major
};

/// Backpropagates d(loss)/d(counts) through the unrolled time steps, using
/// the surrogate derivative at every spike and reset. Fills weight gradients
/// and the gradient with respect to the gathered input.
void backward(const SnnModel& model, const ForwardTrace& trace, std::span<const double> dcounts,
              Gradients& grads);

/// d(loss)/d(input) as a tensor of the input's shape.
FrameTensor input_gradient(const SnnModel& model, const FrameTensor& input, int target_class,
                           LossKind kind);

struct TrainConfig {
    int epochs = 50;
    double learning_rate = 0.01;
    int batch_size = 4;
    RngSeed seed = 1;
};

struct EpochStats {
    double train_accuracy = 0.0;
    double train_loss = 0.0;
    double test_accuracy = -1.0;  // -1 when no test set was given
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
};

/// Plain SGD on the spike-count softmax cross-entropy. Batch gradients are
/// accumulated in sample order, so results are bit-deterministic under any
/// thread count.
TrainHistory train(SnnModel& model, const TensorDataset& train_set,
                   const TensorDataset* test_set, const TrainConfig& config);

/// Fraction of samples whose predicted class matches the label.
double evaluate(const SnnModel& model, const TensorDataset& dataset);

/// Versioned binary checkpoint with little-endian f32 weights.
void save_model(const SnnModel& model, const std::filesystem::path& path);
SnnModel load_model(const std::filesystem::path& path);

}  // namespace dvs
