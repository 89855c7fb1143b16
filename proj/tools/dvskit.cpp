// Command-line front end: dataset synthesis, training, evaluation, attacks,
// filtering, the attack x filter grid, the noise study, and frame rendering.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvs/attacks.hpp"
#include "dvs/events.hpp"
#include "dvs/filters.hpp"
#include "dvs/harness.hpp"
#include "dvs/io.hpp"
#include "dvs/snn.hpp"
#include "dvs/synth.hpp"
#include "dvs/tensor.hpp"

namespace {

dvs::TensorDataset load_tensors(const std::string& dir, int time_bins) {
    const dvs::StreamDataset streams = dvs::load_dataset_dir(dir);
    if (streams.streams.empty()) {
        throw std::runtime_error("dataset at '" + dir + "' is empty");
    }
    return dvs::bin_dataset(streams, time_bins);
}

dvs::StreamDataset tensors_to_streams(const dvs::TensorDataset& dataset) {
    dvs::StreamDataset out;
    out.labels = dataset.labels;
    out.class_count = dataset.class_count;
    out.streams.reserve(dataset.samples.size());
    for (const dvs::FrameTensor& sample : dataset.samples) {
        out.streams.push_back(dvs::tensor_to_events(sample, 0.5f));
    }
    return out;
}

std::vector<dvs::FilterSpec> parse_filters(const std::vector<std::string>& texts) {
    std::vector<dvs::FilterSpec> filters;
    for (const std::string& text : texts) filters.push_back(dvs::FilterSpec::parse(text));
    return filters;
}

void print_report(const dvs::EvalReport& report) {
    for (const dvs::GridCell& cell : report.cells) {
        std::string attack = cell.attack;
        if (!cell.attack_params.empty()) attack += ":" + cell.attack_params;
        std::string filter = cell.filter;
        if (!cell.filter_params.empty()) filter += ":" + cell.filter_params;
        std::printf("%-40s %-22s accuracy %.4f  mean_l0 %.1f\n", attack.c_str(), filter.c_str(),
                    cell.accuracy, cell.mean_l0);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera attack/defense benchmark toolkit"};
    app.set_config("--config", "", "Key-value config file mirroring the flags");
    app.require_subcommand(1);

    // --- synth ---------------------------------------------------------
    struct {
        std::string out_dir;
        int classes = 10;
        int per_class = 20;
        int size = 34;
        std::int64_t duration_us = 1'000'000;
        double noise_rate = 0.25;
        std::uint64_t seed = 1;
    } sy;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled event dataset");
    synth->add_option("--out-dir", sy.out_dir, "Output dataset directory")->required();
    synth->add_option("--classes", sy.classes)->capture_default_str();
    synth->add_option("--per-class", sy.per_class)->capture_default_str();
    synth->add_option("--size", sy.size, "Sensor resolution N")->capture_default_str();
    synth->add_option("--duration-us", sy.duration_us)->capture_default_str();
    synth->add_option("--noise-rate", sy.noise_rate, "Background events per pixel per second")
        ->capture_default_str();
    synth->add_option("--seed", sy.seed)->capture_default_str();
    synth->callback([&] {
        dvs::SynthConfig config;
        config.class_count = sy.classes;
        config.samples_per_class = sy.per_class;
        config.sensor_size = sy.size;
        config.duration_us = sy.duration_us;
        config.noise_rate = sy.noise_rate;
        const dvs::StreamDataset dataset = dvs::synth_dataset(config, sy.seed);
        dvs::save_dataset_dir(dataset, sy.out_dir);
        std::printf("wrote %zu samples (%d classes) to %s\n", dataset.streams.size(),
                    dataset.class_count, sy.out_dir.c_str());
    });

    // --- train ---------------------------------------------------------
    struct {
        std::string train_dir, test_dir, model_out, history_out;
        int t_bins = 20;
        int epochs = 50;
        double lr = 0.01;
        int batch = 4;
        std::uint64_t seed = 1;
        std::string arch = "conv";
        int conv_channels = 8;
        int kernel = 5;
        int stride = 2;
        std::vector<int> hidden{64};
        double v_th = 1.0;
        double leak = 0.9;
        double alpha = 5.0;
        double init_scale = 3.0;
    } tr;
    auto* train_cmd = app.add_subcommand("train", "Train the spiking classifier");
    train_cmd->add_option("--train-dir", tr.train_dir)->required();
    train_cmd->add_option("--test-dir", tr.test_dir, "Optional held-out dataset");
    train_cmd->add_option("--model-out", tr.model_out)->required();
    train_cmd->add_option("--history-out", tr.history_out, "Per-epoch JSON history");
    train_cmd->add_option("--t-bins", tr.t_bins)->capture_default_str();
    train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
    train_cmd->add_option("--lr", tr.lr)->capture_default_str();
    train_cmd->add_option("--batch", tr.batch)->capture_default_str();
    train_cmd->add_option("--seed", tr.seed)->capture_default_str();
    train_cmd->add_option("--arch", tr.arch, "conv or mlp")->capture_default_str();
    train_cmd->add_option("--conv-channels", tr.conv_channels)->capture_default_str();
    train_cmd->add_option("--kernel", tr.kernel)->capture_default_str();
    train_cmd->add_option("--stride", tr.stride)->capture_default_str();
    train_cmd->add_option("--hidden", tr.hidden, "MLP hidden layer sizes")
        ->delimiter(',')
        ->capture_default_str();
    train_cmd->add_option("--v-th", tr.v_th)->capture_default_str();
    train_cmd->add_option("--leak", tr.leak)->capture_default_str();
    train_cmd->add_option("--alpha", tr.alpha)->capture_default_str();
    train_cmd->add_option("--init-scale", tr.init_scale)->capture_default_str();
    train_cmd->callback([&] {
        const dvs::TensorDataset train_set = load_tensors(tr.train_dir, tr.t_bins);
        dvs::TensorDataset test_set;
        if (!tr.test_dir.empty()) test_set = load_tensors(tr.test_dir, tr.t_bins);

        const dvs::FrameTensor& first = train_set.samples.front();
        const dvs::Shape3 input{first.channels, first.height, first.width};
        const dvs::NeuronParams neuron{tr.v_th, tr.leak};
        const dvs::SurrogateConfig surrogate{tr.alpha};
        dvs::SnnModel model;
        if (tr.arch == "conv") {
            model = dvs::make_convnet(input, tr.conv_channels, tr.kernel, tr.stride,
                                      train_set.class_count, neuron, surrogate, tr.init_scale,
                                      tr.seed);
        } else if (tr.arch == "mlp") {
            model = dvs::make_mlp(input, tr.hidden, train_set.class_count, neuron, surrogate,
                                  tr.init_scale, tr.seed);
        } else {
            throw std::invalid_argument("unknown architecture '" + tr.arch + "'");
        }

        dvs::TrainConfig config;
        config.epochs = tr.epochs;
        config.learning_rate = tr.lr;
        config.batch_size = tr.batch;
        config.seed = tr.seed;
        const dvs::TrainHistory history =
            dvs::train(model, train_set, test_set.samples.empty() ? nullptr : &test_set, config);
        for (std::size_t e = 0; e < history.epochs.size(); ++e) {
            const dvs::EpochStats& s = history.epochs[e];
            std::printf("epoch %3zu  train_acc %.4f  train_loss %.4f", e + 1, s.train_accuracy,
                        s.train_loss);
            if (s.test_accuracy >= 0.0) std::printf("  test_acc %.4f", s.test_accuracy);
            std::printf("\n");
            std::fflush(stdout);
        }
        dvs::save_model(model, tr.model_out);
        std::printf("saved model to %s\n", tr.model_out.c_str());

        if (!tr.history_out.empty()) {
            nlohmann::json j;
            j["epochs"] = nlohmann::json::array();
            for (const dvs::EpochStats& s : history.epochs) {
                j["epochs"].push_back({{"train_accuracy", s.train_accuracy},
                                       {"train_loss", s.train_loss},
                                       {"test_accuracy", s.test_accuracy}});
            }
            std::ofstream out(tr.history_out, std::ios::trunc);
            out << j.dump(2) << "\n";
        }
    });

    // --- eval ----------------------------------------------------------
    struct {
        std::string model, data, filter = "none", json_out;
        int t_bins = 20;
    } ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
    eval_cmd->add_option("--model", ev.model)->required();
    eval_cmd->add_option("--data", ev.data)->required();
    eval_cmd->add_option("--t-bins", ev.t_bins)->capture_default_str();
    eval_cmd->add_option("--filter", ev.filter, "none, mf:T=<n> or baf:S=<n>,T=<n>")
        ->capture_default_str();
    eval_cmd->add_option("--json-out", ev.json_out);
    eval_cmd->callback([&] {
        const dvs::SnnModel model = dvs::load_model(ev.model);
        dvs::TensorDataset dataset = load_tensors(ev.data, ev.t_bins);
        const dvs::FilterSpec filter = dvs::FilterSpec::parse(ev.filter);
        if (filter.kind != dvs::FilterSpec::Kind::None) {
            dataset = dvs::apply_filter_to_dataset(dataset, filter);
        }
        const double accuracy = dvs::evaluate(model, dataset);
        std::printf("accuracy %.4f over %zu samples\n", accuracy, dataset.samples.size());
        if (!ev.json_out.empty()) {
            nlohmann::json j{{"accuracy", accuracy},
                             {"samples", dataset.samples.size()},
                             {"filter", ev.filter}};
            std::ofstream out(ev.json_out, std::ios::trunc);
            out << j.dump(2) << "\n";
        }
    });

    // --- attack --------------------------------------------------------
    struct {
        std::string model, data, out_dir, attack = "frame";
        int t_bins = 20;
        int th0 = 5;
        int max_iter = 50;
        double eta = 0.1;
        int mask_bins = -1;
        int max_cycles = 40;
    } at;
    auto* attack_cmd = app.add_subcommand("attack", "Perturb a dataset with one attack");
    attack_cmd->add_option("--model", at.model)->required();
    attack_cmd->add_option("--data", at.data)->required();
    attack_cmd->add_option("--out-dir", at.out_dir, "Perturbed dataset directory")->required();
    attack_cmd->add_option("--attack", at.attack, "sparse|frame|corner|dash|mfdash")
        ->capture_default_str();
    attack_cmd->add_option("--t-bins", at.t_bins)->capture_default_str();
    attack_cmd->add_option("--th0", at.th0, "mfdash per-pixel frame budget")->capture_default_str();
    attack_cmd->add_option("--max-iter", at.max_iter, "sparse iterations")->capture_default_str();
    attack_cmd->add_option("--eta", at.eta, "sparse step size")->capture_default_str();
    attack_cmd->add_option("--mask-bins", at.mask_bins, "sparse mask size (-1: first quarter)")
        ->capture_default_str();
    attack_cmd->add_option("--max-cycles", at.max_cycles)->capture_default_str();
    attack_cmd->callback([&] {
        const dvs::SnnModel model = dvs::load_model(at.model);
        const dvs::TensorDataset dataset = load_tensors(at.data, at.t_bins);

        dvs::AttackSpec spec;
        if (at.attack.find(':') != std::string::npos) {
            spec = dvs::AttackSpec::parse(at.attack);
        } else {
            spec = dvs::AttackSpec::parse(at.attack);
            spec.eta = at.eta;
            spec.max_iterations = at.max_iter;
            spec.mask_bins = at.mask_bins;
            spec.max_cycles = at.max_cycles;
            spec.th0 = at.th0;
        }
        const dvs::AttackedDataset attacked = dvs::make_attacked(model, dataset, spec);
        dvs::save_dataset_dir(tensors_to_streams(attacked.samples), at.out_dir);
        std::ofstream report(std::filesystem::path(at.out_dir) / "attack_report.json",
                             std::ios::trunc);
        report << dvs::attack_report_to_json(attacked.report) << "\n";
        std::printf("%s: fooled %d/%zu samples, mean L0 %.1f, wrote %s\n",
                    attacked.report.attack.c_str(), attacked.report.fooled_count(),
                    attacked.report.samples.size(), attacked.report.mean_l0(),
                    at.out_dir.c_str());
    });

    // --- filter --------------------------------------------------------
    struct {
        std::string data, out_dir, filter = "none";
    } fi;
    auto* filter_cmd = app.add_subcommand("filter", "Filter every stream of a dataset");
    filter_cmd->add_option("--data", fi.data)->required();
    filter_cmd->add_option("--out-dir", fi.out_dir)->required();
    filter_cmd->add_option("--filter", fi.filter)->capture_default_str();
    filter_cmd->callback([&] {
        const dvs::StreamDataset dataset = dvs::load_dataset_dir(fi.data);
        const dvs::FilterSpec filter = dvs::FilterSpec::parse(fi.filter);
        dvs::StreamDataset filtered;
        filtered.labels = dataset.labels;
        filtered.class_count = dataset.class_count;
        std::size_t kept = 0, total = 0;
        for (const dvs::EventStream& stream : dataset.streams) {
            filtered.streams.push_back(dvs::apply_filter(stream, filter));
            kept += filtered.streams.back().events.size();
            total += stream.events.size();
        }
        dvs::save_dataset_dir(filtered, fi.out_dir);
        std::printf("kept %zu of %zu events, wrote %s\n", kept, total, fi.out_dir.c_str());
    });

    // --- grid ----------------------------------------------------------
    struct {
        std::string model, data, out_dir;
        std::vector<std::string> attacks{"clean", "frame", "corner", "dash", "mfdash:th0=5",
                                         "sparse"};
        std::vector<std::string> filters{"none", "mf:T=2",          "mf:T=5",
                                         "mf:T=12", "mf:T=25",      "baf:S=1,T=1000",
                                         "baf:S=1,T=5000", "baf:S=2,T=5000", "baf:S=3,T=50000"};
        int t_bins = 20;
        std::uint64_t seed = 1;
    } gr;
    auto* grid_cmd = app.add_subcommand("grid", "Run the attack x filter evaluation grid");
    grid_cmd->add_option("--model", gr.model)->required();
    grid_cmd->add_option("--data", gr.data)->required();
    grid_cmd->add_option("--out-dir", gr.out_dir)->required();
    grid_cmd->add_option("--attacks", gr.attacks, "Semicolon-separated attack specs")
        ->delimiter(';')
        ->capture_default_str();
    grid_cmd->add_option("--filters", gr.filters, "Semicolon-separated filter specs")
        ->delimiter(';')
        ->capture_default_str();
    grid_cmd->add_option("--t-bins", gr.t_bins)->capture_default_str();
    grid_cmd->add_option("--seed", gr.seed)->capture_default_str();
    grid_cmd->callback([&] {
        const dvs::SnnModel model = dvs::load_model(gr.model);
        const dvs::TensorDataset dataset = load_tensors(gr.data, gr.t_bins);
        dvs::GridSpec spec;
        for (const std::string& text : gr.attacks) spec.attacks.push_back(dvs::AttackSpec::parse(text));
        spec.filters = parse_filters(gr.filters);
        spec.seed = gr.seed;
        const dvs::EvalReport report = dvs::run_grid(model, dataset, spec);
        std::filesystem::create_directories(gr.out_dir);
        dvs::write_report_csv(report, std::filesystem::path(gr.out_dir) / "grid.csv");
        dvs::write_report_json(report, std::filesystem::path(gr.out_dir) / "grid.json");
        print_report(report);
        std::printf("wrote %s/grid.csv and grid.json\n", gr.out_dir.c_str());
    });

    // --- noise-study ---------------------------------------------------
    struct {
        std::string model, data, out_dir;
        std::vector<double> magnitudes{0.0, 0.25, 0.55, 1.0};
        std::vector<std::string> filters{"none",           "mf:T=12",       "mf:T=25",
                                         "baf:S=1,T=1000", "baf:S=1,T=5000", "baf:S=2,T=5000"};
        int t_bins = 20;
        std::uint64_t seed = 1;
    } no;
    auto* noise_cmd = app.add_subcommand("noise-study", "Gaussian-noise robustness grid");
    noise_cmd->add_option("--model", no.model)->required();
    noise_cmd->add_option("--data", no.data)->required();
    noise_cmd->add_option("--out-dir", no.out_dir)->required();
    noise_cmd->add_option("--magnitudes", no.magnitudes)->delimiter(',')->capture_default_str();
    noise_cmd->add_option("--filters", no.filters)->delimiter(';')->capture_default_str();
    noise_cmd->add_option("--t-bins", no.t_bins)->capture_default_str();
    noise_cmd->add_option("--seed", no.seed)->capture_default_str();
    noise_cmd->callback([&] {
        const dvs::SnnModel model = dvs::load_model(no.model);
        const dvs::TensorDataset dataset = load_tensors(no.data, no.t_bins);
        const dvs::EvalReport report =
            dvs::run_noise_study(model, dataset, no.magnitudes, parse_filters(no.filters), no.seed);
        std::filesystem::create_directories(no.out_dir);
        dvs::write_report_csv(report, std::filesystem::path(no.out_dir) / "noise.csv");
        dvs::write_report_json(report, std::filesystem::path(no.out_dir) / "noise.json");
        print_report(report);
        std::printf("wrote %s/noise.csv and noise.json\n", no.out_dir.c_str());
    });

    // --- render --------------------------------------------------------
    struct {
        std::string input, out_dir;
        int t_bins = 20;
    } re;
    auto* render_cmd = app.add_subcommand("render", "Render an EVT1 stream as PGM frames");
    render_cmd->add_option("--input", re.input, "EVT1 file")->required();
    render_cmd->add_option("--out-dir", re.out_dir)->required();
    render_cmd->add_option("--t-bins", re.t_bins)->capture_default_str();
    render_cmd->callback([&] {
        const dvs::EventStream stream = dvs::read_evt(re.input);
        const dvs::FrameTensor tensor = dvs::bin_events(stream, re.t_bins);
        const auto files = dvs::render_frames(tensor, re.out_dir);
        std::printf("wrote %zu frames to %s\n", files.size(), re.out_dir.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
