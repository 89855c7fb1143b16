#include "dvs/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace dvs {

std::vector<int> default_sparse_mask(int time_bins) {
    const int count = (time_bins + 3) / 4;
    std::vector<int> mask(count);
    std::iota(mask.begin(), mask.end(), 0);
    return mask;
}

void CornerState::advance(int n) {
    if (x == 0) {
        x = n - 1;
    } else {
        left = !left;
        x = 0;
        if (!left) y += 1;
    }
}

void DashState::advance(int n) {
    if (x == x_min) {
        x = n - x_min - 1;
    } else {
        left = !left;
        x = x_min;
        if (!left) y += 1;
    }
    if (y > n / 2) x_min += 1;
}

void MfDashState::advance(int n) {
    if (x == 0) {
        x = n - 1;
    } else {
        left = !left;
        x = 0;
        if (!left) y0 += 1;
    }
}

namespace {

void set_column_all_bins(FrameTensor& sample, int row, int col) {
    if (row < 0 || row >= sample.height || col < 0 || col >= sample.width) return;
    for (int c = 0; c < sample.channels; ++c) {
        for (int t = 0; t < sample.time_bins; ++t) {
            sample.at(c, row, col, t) = 1.0f;
        }
    }
}

}  // namespace

void apply_corner(FrameTensor& sample, const CornerState& state) {
    const int n = sample.width;
    if (state.left) {
        for (int j = 0; j < std::min(state.y, n); ++j) set_column_all_bins(sample, state.x, j);
    } else {
        for (int j = std::max(0, n - state.y - 1); j < n; ++j) {
            set_column_all_bins(sample, state.x, j);
        }
    }
}

void apply_dash(FrameTensor& sample, const DashState& state) {
    const int n = sample.width;
    if (state.left) {
        set_column_all_bins(sample, state.x, state.y - 1);
        set_column_all_bins(sample, state.x, state.y);
    } else {
        set_column_all_bins(sample, state.x, n - state.y);
        set_column_all_bins(sample, state.x, n - state.y + 1);
    }
}

void apply_mf_dash(FrameTensor& sample, const MfDashState& state, int budget) {
    if (budget < 1) throw std::invalid_argument("invalid budget: th0 must be >= 1");
    const int n = sample.width;
    int th = budget;
    int y = state.y0;
    for (int t = 0; t < sample.time_bins; ++t) {
        if (t < th) {
            const int cols[2] = {state.left ? y - 1 : n - y, state.left ? y : n - y + 1};
            for (int col : cols) {
                if (state.x >= 0 && state.x < sample.height && col >= 0 && col < n) {
                    sample.at(0, state.x, col, t) = 1.0f;
                }
            }
        }
        if (t == th) {
            th += budget;
            y += 2;
        }
    }
}

int AttackReport::fooled_count() const {
    int n = 0;
    for (const SampleAttackOutcome& s : samples) n += s.fooled ? 1 : 0;
    return n;
}

double AttackReport::fooled_fraction() const {
    return samples.empty() ? 0.0 : static_cast<double>(fooled_count()) / samples.size();
}

double AttackReport::mean_l0() const {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (const SampleAttackOutcome& s : samples) sum += static_cast<double>(s.perturbed_cells);
    return sum / samples.size();
}

std::string attack_report_to_json(const AttackReport& report, int indent) {
    nlohmann::json j;
    j["attack"] = report.attack;
    j["params"] = report.params_label;
    j["fooled_count"] = report.fooled_count();
    j["fooled_fraction"] = report.fooled_fraction();
    j["mean_l0"] = report.mean_l0();
    j["samples"] = nlohmann::json::array();
    for (const SampleAttackOutcome& s : report.samples) {
        nlohmann::json js;
        js["index"] = s.sample_index;
        js["label"] = s.label;
        js["predicted"] = s.predicted_class;
        js["fooled"] = s.fooled;
        js["passes"] = s.passes;
        js["iterations"] = s.iterations;
        js["l0"] = s.perturbed_cells;
        if (!s.prob_trace.empty()) {
            js["converged"] = s.converged;
            js["prob_trace"] = s.prob_trace;
        }
        j["samples"].push_back(std::move(js));
    }
    return j.dump(indent);
}

namespace {

void require_binary_dataset(const TensorDataset& dataset) {
    for (const FrameTensor& sample : dataset.samples) {
        if (!sample.is_binary()) {
            throw std::invalid_argument("attack input must be a binary tensor dataset");
        }
    }
}

// Shared driver for the corner/dash sweeps: one geometry state serves the
// whole sample set, each pass applies the current geometry to a fresh copy
// of every still-unfooled clean sample, and fooled samples leave the set.
template <typename State, typename ApplyFn>
AttackedDataset sweep_attack(const SnnModel& model, const TensorDataset& dataset,
                             std::string name, std::string params_label, State state,
                             ApplyFn&& apply, int max_passes) {
    require_binary_dataset(dataset);

    AttackedDataset out;
    out.samples.samples = dataset.samples;  // overwritten with the last tried candidate
    out.samples.labels = dataset.labels;
    out.samples.class_count = dataset.class_count;
    out.report.attack = std::move(name);
    out.report.params_label = std::move(params_label);
    out.report.samples.resize(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        out.report.samples[i].sample_index = static_cast<int>(i);
        out.report.samples[i].label = dataset.labels[i];
    }
    if (dataset.samples.empty()) return out;

    const int n = dataset.samples[0].width;
    std::vector<std::size_t> remaining(dataset.samples.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    int pass = 0;
    while (!remaining.empty() && pass < max_passes) {
        const std::int64_t count = static_cast<std::int64_t>(remaining.size());
        std::vector<FrameTensor> candidates(remaining.size());
        std::vector<int> predicted(remaining.size());
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t r = 0; r < count; ++r) {
            candidates[r] = dataset.samples[remaining[r]];
            apply(candidates[r], state);
            predicted[r] = lif_forward(model, candidates[r]).predicted_class;
        }
        ++pass;

        std::vector<std::size_t> still_unfooled;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            const std::size_t idx = remaining[r];
            SampleAttackOutcome& outcome = out.report.samples[idx];
            outcome.passes = pass;
            outcome.predicted_class = predicted[r];
            outcome.fooled = predicted[r] != dataset.labels[idx];
            outcome.perturbed_cells = count_differing_cells(candidates[r], dataset.samples[idx]);
            out.samples.samples[idx] = std::move(candidates[r]);
            if (!outcome.fooled) still_unfooled.push_back(idx);
        }
        remaining = std::move(still_unfooled);
        state.advance(n);
    }
    return out;
}

}  // namespace

std::pair<FrameTensor, SampleAttackOutcome> sparse_attack(const SnnModel& model,
                                                          const FrameTensor& sample, int label,
                                                          const SparseConfig& config) {
    if (config.frame_mask.empty()) throw std::invalid_argument("sparse attack mask is empty");
    if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(config.eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(config.binarize_threshold > 0.0f && config.binarize_threshold < 1.0f)) {
        throw std::invalid_argument("binarize threshold must lie in (0, 1)");
    }
    std::vector<std::uint8_t> masked_bin(static_cast<std::size_t>(sample.time_bins), 0);
    for (int bin : config.frame_mask) {
        if (bin < 0 || bin >= sample.time_bins) {
            throw std::invalid_argument("mask bin index outside the tensor");
        }
        masked_bin[static_cast<std::size_t>(bin)] = 1;
    }

    const int cs = sample.channels, hs = sample.height, ws = sample.width, ts = sample.time_bins;
    const std::size_t spatial = static_cast<std::size_t>(cs) * hs * ws;

    std::vector<double> perturbation(sample.values.size(), 0.0);
    FrameTensor work = sample;
    SampleAttackOutcome outcome;
    outcome.label = label;

    ForwardTrace trace;
    Gradients grads;
    for (int it = 0; it < config.max_iterations; ++it) {
        // Perturbation is added unclipped during the search; clamping happens
        // only once, on the final output.
        for (int t = 0; t < ts; ++t) {
            if (!masked_bin[t]) continue;
            for (int c = 0; c < cs; ++c) {
                for (int y = 0; y < hs; ++y) {
                    for (int x = 0; x < ws; ++x) {
                        const std::size_t i = work.index(c, y, x, t);
                        work.values[i] = static_cast<float>(sample.values[i] + perturbation[i]);
                    }
                }
            }
        }
        lif_forward(model, work, &trace);
        const std::vector<double> probs_grad =
            loss_count_gradient(trace.output_counts, label, LossKind::NegLogOneMinusProb);
        {
            // record p(label) before this update
            std::vector<double> counts = trace.output_counts;
            const double top = *std::max_element(counts.begin(), counts.end());
            double sum = 0.0;
            for (double& c : counts) {
                c = std::exp(c - top);
                sum += c;
            }
            outcome.prob_trace.push_back(counts[static_cast<std::size_t>(label)] / sum);
        }
        backward(model, trace, probs_grad, grads);
        for (int t = 0; t < ts; ++t) {
            if (!masked_bin[t]) continue;
            const double* gslice = grads.input.data() + static_cast<std::size_t>(t) * spatial;
            for (int c = 0; c < cs; ++c) {
                for (int y = 0; y < hs; ++y) {
                    for (int x = 0; x < ws; ++x) {
                        const std::size_t i = work.index(c, y, x, t);
                        const std::size_t g = (static_cast<std::size_t>(c) * hs + y) * ws + x;
                        perturbation[i] -= config.eta * gslice[g];
                    }
                }
            }
        }
        outcome.iterations = it + 1;
    }

    FrameTensor result = sample;
    for (int t = 0; t < ts; ++t) {
        if (!masked_bin[t]) continue;  // unmasked bins stay bit-identical
        for (int c = 0; c < cs; ++c) {
            for (int y = 0; y < hs; ++y) {
                for (int x = 0; x < ws; ++x) {
                    const std::size_t i = result.index(c, y, x, t);
                    const double v =
                        std::clamp(static_cast<double>(sample.values[i]) + perturbation[i], 0.0, 1.0);
                    result.values[i] = v >= config.binarize_threshold ? 1.0f : 0.0f;
                }
            }
        }
    }

    const int probe = std::min<int>(3, static_cast<int>(outcome.prob_trace.size()));
    for (int i = 1; i < probe; ++i) {
        if (outcome.prob_trace[i] > outcome.prob_trace[i - 1] + 1e-12) {
            outcome.converged = false;
        }
    }
    outcome.predicted_class = lif_forward(model, result).predicted_class;
    outcome.fooled = outcome.predicted_class != label;
    outcome.perturbed_cells = count_differing_cells(result, sample);
    return {std::move(result), outcome};
}

FrameTensor frame_attack(const FrameTensor& sample) {
    if (sample.width < 2 || sample.height < 2) {
        throw std::invalid_argument("degenerate size: frame attack needs at least a 2x2 sensor");
    }
    FrameTensor out = sample;
    for (int c = 0; c < out.channels; ++c) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                if (x != 0 && x != out.width - 1 && y != 0 && y != out.height - 1) continue;
                for (int t = 0; t < out.time_bins; ++t) {
                    out.at(c, y, x, t) = 1.0f;
                }
            }
        }
    }
    return out;
}

AttackedDataset sparse_attack_dataset(const SnnModel& model, const TensorDataset& dataset,
                                      const SparseConfig& config) {
    require_binary_dataset(dataset);
    AttackedDataset out;
    out.samples.samples.resize(dataset.samples.size());
    out.samples.labels = dataset.labels;
    out.samples.class_count = dataset.class_count;
    out.report.attack = "sparse";
    out.report.params_label = "eta=" + std::to_string(config.eta) +
                              ",max_iter=" + std::to_string(config.max_iterations) +
                              ",mask_bins=" + std::to_string(config.frame_mask.size());
    out.report.samples.resize(dataset.samples.size());

    const std::int64_t n = static_cast<std::int64_t>(dataset.samples.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        auto [tensor, outcome] = sparse_attack(model, dataset.samples[i], dataset.labels[i], config);
        outcome.sample_index = static_cast<int>(i);
        out.samples.samples[i] = std::move(tensor);
        out.report.samples[i] = std::move(outcome);
    }
    return out;
}

AttackedDataset frame_attack_dataset(const SnnModel& model, const TensorDataset& dataset) {
    require_binary_dataset(dataset);
    AttackedDataset out;
    out.samples.samples.resize(dataset.samples.size());
    out.samples.labels = dataset.labels;
    out.samples.class_count = dataset.class_count;
    out.report.attack = "frame";
    out.report.samples.resize(dataset.samples.size());

    const std::int64_t n = static_cast<std::int64_t>(dataset.samples.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        FrameTensor perturbed = frame_attack(dataset.samples[i]);
        SampleAttackOutcome outcome;
        outcome.sample_index = static_cast<int>(i);
        outcome.label = dataset.labels[i];
        outcome.predicted_class = lif_forward(model, perturbed).predicted_class;
        outcome.fooled = outcome.predicted_class != dataset.labels[i];
        outcome.perturbed_cells = count_differing_cells(perturbed, dataset.samples[i]);
        out.samples.samples[i] = std::move(perturbed);
        out.report.samples[i] = outcome;
    }
    return out;
}

AttackedDataset corner_attack(const SnnModel& model, const TensorDataset& dataset,
                              const SweepConfig& config) {
    return sweep_attack(model, dataset, "corner",
                        "max_cycles=" + std::to_string(config.max_cycles), CornerState{},
                        [](FrameTensor& s, const CornerState& st) { apply_corner(s, st); },
                        4 * config.max_cycles);
}

AttackedDataset dash_attack(const SnnModel& model, const TensorDataset& dataset,
                            const SweepConfig& config) {
    return sweep_attack(model, dataset, "dash",
                        "max_cycles=" + std::to_string(config.max_cycles), DashState{},
                        [](FrameTensor& s, const DashState& st) { apply_dash(s, st); },
                        4 * config.max_cycles);
}

AttackedDataset mf_aware_dash_attack(const SnnModel& model, const TensorDataset& dataset,
                                     int budget, const SweepConfig& config) {
    if (budget < 1) throw std::invalid_argument("invalid budget: th0 must be >= 1");
    return sweep_attack(model, dataset, "mfdash",
                        "th0=" + std::to_string(budget) +
                            ",max_cycles=" + std::to_string(config.max_cycles),
                        MfDashState{},
                        [budget](FrameTensor& s, const MfDashState& st) {
                            apply_mf_dash(s, st, budget);
                        },
                        4 * config.max_cycles);
}

}  // namespace dvs
