#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdet/dataset.hpp"
#include "fdet/detector.hpp"
#include "fdet/errors.hpp"
#include "fdet/metrics.hpp"
#include "fdet/model_io.hpp"
#include "fdet/pca.hpp"
#include "fdet/reports.hpp"
#include "fdet/signal.hpp"
#include "fdet/training.hpp"

namespace fdet::cli {

namespace detail {

struct SchemaFlags {
    DatasetSchema schema;
    bool no_labels = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--schema-ia", schema.current_columns[0], "Phase A current column");
        cmd->add_option("--schema-ib", schema.current_columns[1], "Phase B current column");
        cmd->add_option("--schema-ic", schema.current_columns[2], "Phase C current column");
        cmd->add_option("--schema-va", schema.voltage_columns[0], "Phase A voltage column");
        cmd->add_option("--schema-vb", schema.voltage_columns[1], "Phase B voltage column");
        cmd->add_option("--schema-vc", schema.voltage_columns[2], "Phase C voltage column");
        cmd->add_option("--schema-label", schema.label_column,
                        "Binary fault label column (default 'fault')");
        cmd->add_option("--schema-flags", schema.flag_columns,
                        "Fault flag columns ORed into the label")
            ->delimiter(',');
        cmd->add_flag("--schema-no-header", "Input has no header row; fixed column order");
        cmd->add_flag("--schema-no-labels", no_labels, "Input carries no fault labels");
        cmd->add_option("--schema-sample-interval", schema.sample_interval,
                        "Nominal sample interval in seconds");
        header_flag_ = cmd->get_option("--schema-no-header");
    }

    DatasetSchema resolve() const {
        DatasetSchema s = schema;
        if (header_flag_ && header_flag_->count() > 0)
            s.has_header = false;
        if (!schema.flag_columns.empty())
            s.label_mode = DatasetSchema::LabelMode::FlagColumns;
        if (no_labels)
            s.label_mode = DatasetSchema::LabelMode::None;
        return s;
    }

private:
    CLI::Option* header_flag_ = nullptr;
};

inline std::filesystem::path ensure_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

inline const char* phase_name(Phase p) {
    return p == Phase::A ? "A" : (p == Phase::B ? "B" : "C");
}

inline std::vector<std::uint8_t> read_points_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("'" + path + "' is empty; expected an index,label header");
    std::vector<std::uint8_t> labels;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        const auto cells = fdet::detail::split_row(line);
        if (cells.size() == 1 && cells[0].empty())
            continue;
        ++row;
        if (cells.size() < 2)
            throw ParseError("row " + std::to_string(row) + " of '" + path +
                             "' has no label cell");
        labels.push_back(fdet::detail::parse_cell(cells[1], row, "label") != 0.0 ? 1 : 0);
    }
    return labels;
}

inline void write_detection_exports(const std::filesystem::path& dir, const PhaseDetection& d) {
    for (Phase p : {Phase::A, Phase::B, Phase::C}) {
        const DetectionResult& r = d.phase(p);
        const std::string stem = std::string("phase_") + phase_name(p);
        write_window_errors_csv((dir / (stem + "_window_errors.csv")).string(), r);
        write_points_csv((dir / (stem + "_points.csv")).string(), r.point_labels);
        write_segments_json((dir / (stem + "_segments.json")).string(), r.segments);
        write_histogram_csv((dir / (stem + "_histogram.csv")).string(), r.window_errors);
    }
    write_points_csv((dir / "merged_points.csv").string(), d.merged_labels);
    write_segments_json((dir / "merged_segments.json").string(), d.merged_segments);
}

inline void write_metrics_outputs(const std::filesystem::path& dir, const ConfusionCounts& counts,
                                  const Scores& s) {
    {
        auto os = fdet::detail::open_out((dir / "metrics.json").string());
        os << metrics_json(counts, s).dump(2) << '\n';
    }
    write_confusion_csv((dir / "confusion.csv").string(), counts);
    std::cout << metrics_table(counts, s);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    SimConfig sim;
    std::string out;
    std::string scenario = "default";
};

inline void cmd_simulate(const SimulateArgs& args) {
    std::vector<FaultSpec> specs;
    if (args.scenario == "default")
        specs = default_fault_scenario(args.sim.total_samples());
    else if (args.scenario != "clean")
        throw ConfigError("unknown scenario '" + args.scenario + "' (use default or clean)");
    const ThreePhaseSignal sig = generate_dataset(args.sim, specs);
    export_signal_csv(args.out, sig);
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string input;
    std::string model_out;
    DatasetSchema schema;
    WindowConfig window{320, 1};
    TrainConfig train;
    std::string loss = "mae";
};

inline void cmd_train(const TrainArgs& args) {
    TrainConfig tc = args.train;
    if (args.loss == "mae")
        tc.loss = LossKind::MAE;
    else if (args.loss == "mse")
        tc.loss = LossKind::MSE;
    else
        throw ConfigError("unknown loss '" + args.loss + "' (use mae or mse)");

    const ThreePhaseSignal signal = load_csv(args.input, args.schema);
    const NormalSplit split = split_normal(signal, args.window.window_len);
    const Standardizer standardizer = fit_standardizer(split.train.ia);
    const WindowSet windows = make_windows(split.train.ia, standardizer, args.window);

    AutoencoderModel model = AutoencoderModel::standard(args.window.window_len);
    model.init_weights(tc.rng_seed);
    const auto history = train(model, windows, tc);
    for (std::size_t e = 0; e < history.size(); ++e)
        std::cerr << "epoch " << e + 1 << " train_loss " << history[e].train_loss
                  << " val_loss " << history[e].val_loss << '\n';

    const Threshold threshold = calibrate(model, windows, tc.loss);
    std::cerr << "calibrated alpha " << threshold.alpha << " over "
              << threshold.calibration_size << " windows\n";
    save_model(args.model_out, ModelBundle{std::move(model), standardizer, threshold});
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
    std::string model_path;
    std::string input;
    std::string out_dir;
    DatasetSchema schema;
    double theta = 0.5;
    std::size_t stride = 1;
    std::optional<std::size_t> window_len;  // must match the model when given
};

inline PhaseDetection run_detection(const DetectArgs& args, const ModelBundle& bundle,
                                    const ThreePhaseSignal& signal) {
    if (!bundle.threshold)
        throw FormatError("model file carries no calibrated threshold; run train first");
    if (args.window_len && *args.window_len != bundle.model.input_len())
        throw ShapeError("requested window length " + std::to_string(*args.window_len) +
                         " does not match the model input length " +
                         std::to_string(bundle.model.input_len()));
    const WindowConfig wc{bundle.model.input_len(), args.stride};
    return detect_all_phases(bundle.model, *bundle.threshold, signal, bundle.standardizer, wc,
                             args.theta);
}

inline void cmd_detect(const DetectArgs& args) {
    const ModelBundle bundle = load_model(args.model_path);
    DatasetSchema schema = args.schema;
    schema.label_mode = DatasetSchema::LabelMode::None;  // labels are not needed to detect
    const ThreePhaseSignal signal = load_csv(args.input, schema);
    const PhaseDetection d = run_detection(args, bundle, signal);
    detail::write_detection_exports(detail::ensure_dir(args.out_dir), d);
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string pred;
    std::string truth;
    std::string out_dir;
    DatasetSchema schema;
    std::string truth_format = "signal";  // signal | points
};

inline void cmd_eval(const EvalArgs& args) {
    const std::vector<std::uint8_t> pred = detail::read_points_csv(args.pred);
    std::vector<std::uint8_t> truth;
    if (args.truth_format == "signal")
        truth = load_csv(args.truth, args.schema).fault_mask;
    else if (args.truth_format == "points")
        truth = detail::read_points_csv(args.truth);
    else
        throw ConfigError("unknown truth format '" + args.truth_format + "'");

    const ConfusionCounts counts = confusion(pred, truth);
    detail::write_metrics_outputs(detail::ensure_dir(args.out_dir), counts, scores(counts));
}

// ---------------------------------------------------------------------------
// report = detect + eval

struct ReportArgs {
    DetectArgs detect;
    DatasetSchema schema;  // with labels, for the truth mask
};

inline void cmd_report(const ReportArgs& args) {
    const ModelBundle bundle = load_model(args.detect.model_path);
    const ThreePhaseSignal signal = load_csv(args.detect.input, args.schema);
    const PhaseDetection d = run_detection(args.detect, bundle, signal);
    const auto dir = detail::ensure_dir(args.detect.out_dir);
    detail::write_detection_exports(dir, d);
    const ConfusionCounts counts = confusion(d.merged_labels, signal.fault_mask);
    detail::write_metrics_outputs(dir, counts, scores(counts));
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Three-phase fault detection with a convolutional autoencoder"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI-style key=value file");
    app.get_config_formatter_base()->arrayDelimiter(',');

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic three-phase CSV");
    c_sim->add_option("--out", sim.out, "Output CSV path")->required();
    c_sim->add_option("--duration", sim.sim.duration, "Signal duration in seconds");
    c_sim->add_option("--seed", sim.sim.rng_seed, "RNG seed");
    c_sim->add_option("--noise", sim.sim.noise_std, "Gaussian noise as a fraction of amplitude");
    c_sim->add_option("--amp-current", sim.sim.current_amplitude, "Peak phase current (A)");
    c_sim->add_option("--amp-voltage", sim.sim.voltage_amplitude, "Peak phase voltage (V)");
    c_sim->add_option("--frequency", sim.sim.system_frequency, "System frequency (Hz)");
    c_sim->add_option("--sample-interval", sim.sim.sample_interval, "Sample interval (s)");
    c_sim->add_option("--scenario", sim.scenario, "'default' four-fault scenario or 'clean'");

    TrainArgs tr;
    detail::SchemaFlags tr_schema;
    CLI::App* c_tr = app.add_subcommand("train", "Train and calibrate a detector model");
    c_tr->add_option("--input", tr.input, "Training CSV (clean or labeled)")->required();
    c_tr->add_option("--model", tr.model_out, "Output model file")->required();
    c_tr->add_option("--window-len", tr.window.window_len, "Window length T");
    c_tr->add_option("--train-stride", tr.window.stride, "Stride for training windows");
    c_tr->add_option("--epochs", tr.train.epochs, "Training epochs");
    c_tr->add_option("--lr", tr.train.learning_rate, "Adam learning rate");
    c_tr->add_option("--batch", tr.train.batch_size, "Minibatch size");
    c_tr->add_option("--loss", tr.loss, "Training loss: mae or mse");
    c_tr->add_option("--seed", tr.train.rng_seed, "RNG seed (init and shuffling)");
    c_tr->add_option("--patience", tr.train.early_stop_patience, "Early stopping patience");
    c_tr->add_option("--val-fraction", tr.train.validation_fraction, "Validation fraction");
    tr_schema.attach(c_tr);

    DetectArgs de;
    detail::SchemaFlags de_schema;
    std::size_t de_window_len = 0;
    CLI::App* c_de = app.add_subcommand("detect", "Score a CSV with a trained model");
    c_de->add_option("--model", de.model_path, "Model file from train")->required();
    c_de->add_option("--input", de.input, "Input CSV")->required();
    c_de->add_option("--out-dir", de.out_dir, "Directory for detection exports")->required();
    c_de->add_option("--theta", de.theta, "Covering-fraction rule for point labels");
    c_de->add_option("--stride", de.stride, "Detection window stride");
    CLI::Option* de_wl =
        c_de->add_option("--window-len", de_window_len, "Must match the model input length");
    de_schema.attach(c_de);

    EvalArgs ev;
    detail::SchemaFlags ev_schema;
    CLI::App* c_ev = app.add_subcommand("eval", "Compare point labels against ground truth");
    c_ev->add_option("--pred", ev.pred, "Predicted points CSV (from detect)")->required();
    c_ev->add_option("--truth", ev.truth, "Ground truth (signal CSV or points CSV)")->required();
    c_ev->add_option("--out-dir", ev.out_dir, "Directory for metrics outputs")->required();
    c_ev->add_option("--truth-format", ev.truth_format, "'signal' or 'points'");
    ev_schema.attach(c_ev);

    ReportArgs re;
    detail::SchemaFlags re_schema;
    CLI::App* c_re = app.add_subcommand("report", "Detect and evaluate in one go");
    c_re->add_option("--model", re.detect.model_path, "Model file from train")->required();
    c_re->add_option("--input", re.detect.input, "Labeled input CSV")->required();
    c_re->add_option("--out-dir", re.detect.out_dir, "Directory for all outputs")->required();
    c_re->add_option("--theta", re.detect.theta, "Covering-fraction rule for point labels");
    c_re->add_option("--stride", re.detect.stride, "Detection window stride");
    re_schema.attach(c_re);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (c_sim->parsed()) {
            cmd_simulate(sim);
        } else if (c_tr->parsed()) {
            tr.schema = tr_schema.resolve();
            cmd_train(tr);
        } else if (c_de->parsed()) {
            de.schema = de_schema.resolve();
            if (de_wl->count() > 0)
                de.window_len = de_window_len;
            cmd_detect(de);
        } else if (c_ev->parsed()) {
            ev.schema = ev_schema.resolve();
            cmd_eval(ev);
        } else if (c_re->parsed()) {
            re.schema = re_schema.resolve();
            re.detect.schema = re.schema;
            cmd_report(re);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace fdet::cli
