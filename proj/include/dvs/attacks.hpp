#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dvs/snn.hpp"
#include "dvs/tensor.hpp"

namespace dvs {

/// Iterative gradient attack restricted to a subset of time bins.
struct SparseConfig {
    std::vector<int> frame_mask;  // bin indices the perturbation may touch
    int max_iterations = 50;
    double eta = 0.1;
    float binarize_threshold = 0.5f;
};

/// Default mask: the first ceil(time_bins / 4) bins.
std::vector<int> default_sparse_mask(int time_bins);

/// Safety bound for the corner/dash sample sweeps: one cycle is a full
/// four-pass corner rotation. Samples still unfooled when the bound hits are
/// reported with fooled = false.
struct SweepConfig {
    int max_cycles = 40;
};

/// Corner geometry. Perturbs row x; on the left side the first y columns,
/// on the right side every column from N-y-1 on. The state advances after
/// each sweep over the remaining samples: row 0 -> row N-1, then the side
/// toggles and y grows by one whenever the toggle lands on the right side.
struct CornerState {
    int x = 0;
    int y = 2;
    bool left = true;

    void advance(int n);
};

/// Dash geometry: exactly two adjacent columns on row x, columns (y-1, y) on
/// the left side or (N-y, N-y+1) on the right. Rows bounce between x_min and
/// N-x_min-1, and x_min moves inward once y passes N/2.
struct DashState {
    int x_min = 0;
    int x = 0;
    int y = 2;
    bool left = true;

    void advance(int n);
};

/// Outer geometry of the mask-filter-aware dash: same corner-style row
/// bounce, with the per-sample sweep start column y0 growing over passes.
struct MfDashState {
    int x = 0;
    int y0 = 2;
    bool left = true;

    void advance(int n);
};

void apply_corner(FrameTensor& sample, const CornerState& state);
void apply_dash(FrameTensor& sample, const DashState& state);

/// Writes the moving dash onto channel 0 only: the dash sits at one column
/// pair for at most budget consecutive bins, then jumps two columns right.
/// No pixel collects more than `budget` perturbed bins.
void apply_mf_dash(FrameTensor& sample, const MfDashState& state, int budget);

struct SampleAttackOutcome {
    int sample_index = 0;
    int label = 0;
    int predicted_class = 0;
    bool fooled = false;
    int passes = 0;          // geometry passes consumed (sweep attacks)
    int iterations = 0;      // gradient iterations performed (sparse)
    long perturbed_cells = 0;  // L0 distance to the clean sample
    bool converged = true;     // sparse: true-class probability never rose
                               // across the first probe iterations
    std::vector<double> prob_trace;  // sparse: p(true class) per iteration
};

struct AttackReport {
    std::string attack;
    std::string params_label;
    std::vector<SampleAttackOutcome> samples;

    int fooled_count() const;
    double fooled_fraction() const;
    double mean_l0() const;
};

std::string attack_report_to_json(const AttackReport& report, int indent = 2);

struct AttackedDataset {
    TensorDataset samples;
    AttackReport report;
};

/// Gradient attack on one sample: per iteration adds the running continuous
/// perturbation to the masked bins, probes the model, and lowers the
/// true-class probability by a plain gradient step of size eta on the loss
/// -log(1 - p_label). The result is clamp(sample + P, 0, 1) binarized at the
/// threshold; unmasked bins are returned bit-identical to the input.
std::pair<FrameTensor, SampleAttackOutcome> sparse_attack(const SnnModel& model,
                                                          const FrameTensor& sample, int label,
                                                          const SparseConfig& config);

/// Sets every border pixel to 1 across all channels and bins. Model-free;
/// throws on sensors smaller than 2x2.
FrameTensor frame_attack(const FrameTensor& sample);

AttackedDataset sparse_attack_dataset(const SnnModel& model, const TensorDataset& dataset,
                                      const SparseConfig& config);
AttackedDataset frame_attack_dataset(const SnnModel& model, const TensorDataset& dataset);
AttackedDataset corner_attack(const SnnModel& model, const TensorDataset& dataset,
                              const SweepConfig& config);
AttackedDataset dash_attack(const SnnModel& model, const TensorDataset& dataset,
                            const SweepConfig& config);
AttackedDataset mf_aware_dash_attack(const SnnModel& model, const TensorDataset& dataset,
                                     int budget, const SweepConfig& config);

}  // namespace dvs
