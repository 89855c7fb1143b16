#include "dvs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "dvs/rng.hpp"

namespace dvs {

namespace {

std::map<std::string, std::string> parse_kv_list(const std::string& text) {
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string part = text.substr(pos, comma - pos);
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("bad key=value pair '" + part + "'");
        }
        out[part.substr(0, eq)] = part.substr(eq + 1);
        pos = comma + 1;
    }
    return out;
}

double to_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric value '" + s + "'");
    }
}

int to_int(const std::string& s) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad integer value '" + s + "'");
    }
}

}  // namespace

AttackSpec AttackSpec::parse(const std::string& text) {
    AttackSpec spec;
    const std::size_t colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);

    if (head == "clean") {
        spec.kind = Kind::Clean;
    } else if (head == "sparse") {
        spec.kind = Kind::Sparse;
    } else if (head == "frame") {
        spec.kind = Kind::Frame;
    } else if (head == "corner") {
        spec.kind = Kind::Corner;
    } else if (head == "dash") {
        spec.kind = Kind::Dash;
    } else if (head == "mfdash") {
        spec.kind = Kind::MfDash;
    } else {
        throw std::invalid_argument("unknown attack '" + head + "'");
    }

    for (const auto& [key, value] : parse_kv_list(args)) {
        if (key == "eta" && spec.kind == Kind::Sparse) {
            spec.eta = to_double(value);
        } else if (key == "max_iter" && spec.kind == Kind::Sparse) {
            spec.max_iterations = to_int(value);
        } else if (key == "mask_bins" && spec.kind == Kind::Sparse) {
            spec.mask_bins = to_int(value);
        } else if (key == "max_cycles" &&
                   (spec.kind == Kind::Corner || spec.kind == Kind::Dash ||
                    spec.kind == Kind::MfDash)) {
            spec.max_cycles = to_int(value);
        } else if (key == "th0" && spec.kind == Kind::MfDash) {
            spec.th0 = to_int(value);
        } else {
            throw std::invalid_argument("attack '" + head + "' does not take parameter '" + key +
                                        "'");
        }
    }
    return spec;
}

std::string AttackSpec::name() const {
    switch (kind) {
        case Kind::Clean: return "clean";
        case Kind::Sparse: return "sparse";
        case Kind::Frame: return "frame";
        case Kind::Corner: return "corner";
        case Kind::Dash: return "dash";
        case Kind::MfDash: return "mfdash";
    }
    return "clean";
}

std::string AttackSpec::params_label() const {
    char buf[128];
    switch (kind) {
        case Kind::Clean:
        case Kind::Frame:
            return "";
        case Kind::Sparse:
            std::snprintf(buf, sizeof(buf), "eta=%g,max_iter=%d,mask_bins=%d", eta, max_iterations,
                          mask_bins);
            return buf;
        case Kind::Corner:
        case Kind::Dash:
            std::snprintf(buf, sizeof(buf), "max_cycles=%d", max_cycles);
            return buf;
        case Kind::MfDash:
            std::snprintf(buf, sizeof(buf), "th0=%d,max_cycles=%d", th0, max_cycles);
            return buf;
    }
    return "";
}

const GridCell* EvalReport::find(const std::string& attack, const std::string& filter,
                                 const std::string& filter_params) const {
    for (const GridCell& cell : cells) {
        if (cell.attack == attack && cell.filter == filter &&
            cell.filter_params == filter_params) {
            return &cell;
        }
    }
    return nullptr;
}

AttackedDataset make_attacked(const SnnModel& model, const TensorDataset& dataset,
                              const AttackSpec& spec) {
    switch (spec.kind) {
        case AttackSpec::Kind::Clean: {
            AttackedDataset out;
            out.samples = dataset;
            out.report.attack = "clean";
            out.report.samples.resize(dataset.samples.size());
            for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
                out.report.samples[i].sample_index = static_cast<int>(i);
                out.report.samples[i].label = dataset.labels[i];
            }
            return out;
        }
        case AttackSpec::Kind::Sparse: {
            SparseConfig config;
            config.eta = spec.eta;
            config.max_iterations = spec.max_iterations;
            const int time_bins = dataset.samples.empty() ? 1 : dataset.samples[0].time_bins;
            if (spec.mask_bins > 0) {
                config.frame_mask.resize(std::min(spec.mask_bins, time_bins));
                for (std::size_t i = 0; i < config.frame_mask.size(); ++i) {
                    config.frame_mask[i] = static_cast<int>(i);
                }
            } else {
                config.frame_mask = default_sparse_mask(time_bins);
            }
            return sparse_attack_dataset(model, dataset, config);
        }
        case AttackSpec::Kind::Frame:
            return frame_attack_dataset(model, dataset);
        case AttackSpec::Kind::Corner:
            return corner_attack(model, dataset, SweepConfig{spec.max_cycles});
        case AttackSpec::Kind::Dash:
            return dash_attack(model, dataset, SweepConfig{spec.max_cycles});
        case AttackSpec::Kind::MfDash:
            return mf_aware_dash_attack(model, dataset, spec.th0, SweepConfig{spec.max_cycles});
    }
    throw std::invalid_argument("unknown attack kind");
}

namespace {

void append_model_metadata(EvalReport& report, const SnnModel& model, int time_bins,
                           RngSeed seed, std::size_t sample_count) {
    char buf[64];
    report.metadata.emplace_back("version", kVersion);
    report.metadata.emplace_back("seed", std::to_string(seed));
    report.metadata.emplace_back("t_bins", std::to_string(time_bins));
    report.metadata.emplace_back("samples", std::to_string(sample_count));
    std::snprintf(buf, sizeof(buf), "%g", model.layers.front().neuron.v_threshold);
    report.metadata.emplace_back("v_th", buf);
    std::snprintf(buf, sizeof(buf), "%g", model.layers.front().neuron.leak);
    report.metadata.emplace_back("leak", buf);
    std::snprintf(buf, sizeof(buf), "%g", model.surrogate.alpha);
    report.metadata.emplace_back("alpha", buf);
    report.metadata.emplace_back("classes", std::to_string(model.class_count));
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

EvalReport run_grid(const SnnModel& model, const TensorDataset& test_set, const GridSpec& spec) {
    if (spec.attacks.empty()) throw std::invalid_argument("grid needs at least one attack (or clean)");
    if (spec.filters.empty()) throw std::invalid_argument("grid needs at least one filter (or none)");
    if (test_set.samples.empty()) throw std::invalid_argument("empty dataset");
    model.check_consistent();

    EvalReport report;
    const int time_bins = test_set.samples[0].time_bins;
    append_model_metadata(report, model, time_bins, spec.seed, test_set.samples.size());
    {
        std::string attacks_label, filters_label;
        for (const AttackSpec& a : spec.attacks) {
            if (!attacks_label.empty()) attacks_label += ';';
            attacks_label += a.name();
            if (!a.params_label().empty()) attacks_label += ":" + a.params_label();
        }
        for (const FilterSpec& f : spec.filters) {
            if (!filters_label.empty()) filters_label += ';';
            filters_label += f.name();
            if (!f.params_label().empty()) filters_label += ":" + f.params_label();
        }
        report.metadata.emplace_back("attacks", attacks_label);
        report.metadata.emplace_back("filters", filters_label);
    }

    for (const AttackSpec& attack : spec.attacks) {
        const AttackedDataset attacked = make_attacked(model, test_set, attack);
        report.attack_reports.push_back(attacked.report);
        const double mean_l0 = attacked.report.mean_l0();

        for (const FilterSpec& filter : spec.filters) {
            const auto start = std::chrono::steady_clock::now();
            const TensorDataset filtered = apply_filter_to_dataset(attacked.samples, filter);
            GridCell cell;
            cell.attack = attack.name();
            cell.attack_params = attack.params_label();
            cell.filter = filter.name();
            cell.filter_params = filter.params_label();
            cell.accuracy = evaluate(model, filtered);
            cell.sample_count = static_cast<int>(filtered.samples.size());
            cell.mean_l0 = mean_l0;
            cell.wall_ms = elapsed_ms(start);
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

EvalReport run_noise_study(const SnnModel& model, const TensorDataset& test_set,
                           const std::vector<double>& magnitudes,
                           const std::vector<FilterSpec>& filters, RngSeed seed) {
    if (magnitudes.empty()) throw std::invalid_argument("noise study needs at least one magnitude");
    if (filters.empty()) throw std::invalid_argument("noise study needs at least one filter");
    if (test_set.samples.empty()) throw std::invalid_argument("empty dataset");
    model.check_consistent();

    EvalReport report;
    const int time_bins = test_set.samples[0].time_bins;
    append_model_metadata(report, model, time_bins, seed, test_set.samples.size());

    for (std::size_t m = 0; m < magnitudes.size(); ++m) {
        const double magnitude = magnitudes[m];
        TensorDataset noisy;
        noisy.labels = test_set.labels;
        noisy.class_count = test_set.class_count;
        noisy.samples.resize(test_set.samples.size());
        const std::int64_t n = static_cast<std::int64_t>(test_set.samples.size());
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i) {
            noisy.samples[i] = inject_gaussian_noise(test_set.samples[i], magnitude,
                                                     detail::derive_seed(seed, m, i));
        }
        double mean_l0 = 0.0;
        for (std::size_t i = 0; i < noisy.samples.size(); ++i) {
            mean_l0 += static_cast<double>(count_differing_cells(noisy.samples[i], test_set.samples[i]));
        }
        mean_l0 /= static_cast<double>(noisy.samples.size());

        char label[48];
        std::snprintf(label, sizeof(label), "magnitude=%g", magnitude);
        for (const FilterSpec& filter : filters) {
            const auto start = std::chrono::steady_clock::now();
            const TensorDataset filtered = apply_filter_to_dataset(noisy, filter);
            GridCell cell;
            cell.attack = "noise";
            cell.attack_params = label;
            cell.filter = filter.name();
            cell.filter_params = filter.params_label();
            cell.accuracy = evaluate(model, filtered);
            cell.sample_count = static_cast<int>(filtered.samples.size());
            cell.mean_l0 = mean_l0;
            cell.wall_ms = elapsed_ms(start);
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# dvskit grid report v1\n";
    for (const auto& [key, value] : report.metadata) {
        out << "# " << key << "=" << value << "\n";
    }
    out << "attack,attack_params,filter,filter_params,accuracy,sample_count,mean_l0\n";
    char buf[64];
    for (const GridCell& cell : report.cells) {
        std::snprintf(buf, sizeof(buf), "%.6f", cell.accuracy);
        out << cell.attack << ",\"" << cell.attack_params << "\"," << cell.filter << ",\""
            << cell.filter_params << "\"," << buf << "," << cell.sample_count << ",";
        std::snprintf(buf, sizeof(buf), "%.3f", cell.mean_l0);
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error("short write to " + path.string());
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::json j;
    j["schema"] = "dvskit grid report v1";
    for (const auto& [key, value] : report.metadata) {
        j["metadata"][key] = value;
    }
    j["cells"] = nlohmann::json::array();
    for (const GridCell& cell : report.cells) {
        nlohmann::json jc;
        jc["attack"] = cell.attack;
        jc["attack_params"] = cell.attack_params;
        jc["filter"] = cell.filter;
        jc["filter_params"] = cell.filter_params;
        jc["accuracy"] = cell.accuracy;
        jc["sample_count"] = cell.sample_count;
        jc["mean_l0"] = cell.mean_l0;
        jc["wall_ms"] = cell.wall_ms;
        j["cells"].push_back(std::move(jc));
    }
    j["attacks"] = nlohmann::json::array();
    for (const AttackReport& ar : report.attack_reports) {
        j["attacks"].push_back(nlohmann::json::parse(attack_report_to_json(ar)));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

std::vector<std::filesystem::path> render_frames(const FrameTensor& tensor,
                                                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (int t = 0; t < tensor.time_bins; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03d.pgm", t);
        const std::filesystem::path path = out_dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        out << "P5\n" << tensor.width << " " << tensor.height << "\n255\n";
        std::vector<std::uint8_t> row(static_cast<std::size_t>(tensor.width));
        for (int y = 0; y < tensor.height; ++y) {
            for (int x = 0; x < tensor.width; ++x) {
                const bool on = tensor.channels > 1 && tensor.at(1, y, x, t) >= 0.5f;
                const bool off = tensor.at(0, y, x, t) >= 0.5f;
                row[x] = on ? 255 : (off ? 128 : 0);
            }
            out.write(reinterpret_cast<const char*>(row.data()), tensor.width);
        }
        if (!out) throw std::runtime_error("short write to " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace dvs
