#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dvs/attacks.hpp"
#include "dvs/filters.hpp"
#include "dvs/snn.hpp"
#include "dvs/tensor.hpp"

namespace dvs {

inline constexpr const char* kVersion = "dvskit 1.0.0";

/// Attack selection as written on the command line, e.g. "clean", "frame",
/// "sparse:eta=0.1,max_iter=50,mask_bins=5", "corner:max_cycles=40",
/// "mfdash:th0=5".
struct AttackSpec {
    enum class Kind { Clean, Sparse, Frame, Corner, Dash, MfDash };

    Kind kind = Kind::Clean;
    double eta = 0.1;
    int max_iterations = 50;
    int mask_bins = -1;  // -1: first ceil(time_bins / 4) bins
    int max_cycles = 40;
    int th0 = 5;

    static AttackSpec parse(const std::string& text);
    std::string name() const;
    std::string params_label() const;
};

struct GridSpec {
    std::vector<AttackSpec> attacks;  // needs at least one entry ("clean" counts)
    std::vector<FilterSpec> filters;  // needs at least one entry ("none" counts)
    RngSeed seed = 1;
};

struct GridCell {
    std::string attack;
    std::string attack_params;
    std::string filter;
    std::string filter_params;
    double accuracy = 0.0;
    int sample_count = 0;
    double mean_l0 = 0.0;
    double wall_ms = 0.0;  // excluded from the CSV so reruns are byte-identical
};

struct EvalReport {
    std::vector<GridCell> cells;
    std::vector<std::pair<std::string, std::string>> metadata;  // ordered key/value
    std::vector<AttackReport> attack_reports;

    const GridCell* find(const std::string& attack, const std::string& filter,
                         const std::string& filter_params) const;
};

/// Runs the attacked dataset for a single attack spec (clean = copy).
AttackedDataset make_attacked(const SnnModel& model, const TensorDataset& dataset,
                              const AttackSpec& spec);

/// Full evaluation grid. Per cell: perturb with the attack, convert the
/// tensors to events, filter, re-bin, evaluate. The attack always runs
/// before the filter. Deterministic for a fixed spec and seed.
EvalReport run_grid(const SnnModel& model, const TensorDataset& test_set, const GridSpec& spec);

/// Gaussian-noise counterpart of the grid: inject at each magnitude, filter,
/// evaluate. Cell seeds derive from the spec seed and the magnitude index.
EvalReport run_noise_study(const SnnModel& model, const TensorDataset& test_set,
                           const std::vector<double>& magnitudes,
                           const std::vector<FilterSpec>& filters, RngSeed seed);

/// Deterministic CSV (no wall-clock column); metadata as leading '#' lines.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

/// Full JSON twin of the CSV including wall times and attack reports.
void write_report_json(const EvalReport& report, const std::filesystem::path& path);

/// One binary 8-bit PGM per time bin: on-polarity pixels white (255),
/// off-polarity grey (128), background black. Cells count as set at >= 0.5.
/// Returns the written file paths in bin order.
std::vector<std::filesystem::path> render_frames(const FrameTensor& tensor,
                                                 const std::filesystem::path& out_dir);

}  // namespace dvs
