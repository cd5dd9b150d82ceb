#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "config_binder.hpp"
#include "flowgest/net/checkpoint.hpp"
#include "flowgest/net/init.hpp"
#include "flowgest/parallel.hpp"
#include "flowgest/run/run.hpp"
#include "flowgest/synth.hpp"

namespace fs = std::filesystem;
using namespace flowgest;

namespace {

constexpr const char* kVersion = "flowgest 1.0.0";

void apply_threads(int threads) {
    set_threads(threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency()));
}

struct SynthCmd {
    std::string out;
    int per_class = 40, size = 256, frames = 30, threads = 0;
    uint64_t seed = 7;

    void run(cli::ConfigBinder& binder) {
        apply_threads(threads);
        synth::write_corpus(out, per_class, size, frames, seed);
        binder.write_echo(out);
        std::cout << "wrote " << per_class * synth::kNumMotionClasses << " clips to " << out
                  << "\n";
    }
};

struct FlowCmd {
    std::string in, out, format = "png";
    run::FlowOptions options;
    int threads = 0;

    void run(cli::ConfigBinder& binder) {
        apply_threads(threads);
        if (format == "png")
            options.format = encode::PlaneFormat::Png;
        else if (format == "jpeg" || format == "jpg")
            options.format = encode::PlaneFormat::Jpeg;
        else
            fail("--format must be png or jpeg");
        compute_flow_corpus(in, out, options, nullptr);
        binder.write_echo(out);
        std::cout << "flow planes written to " << out << "\n";
    }
};

struct PreprocessCmd {
    std::string frames_dir, transcripts, out;
    int threads = 0;

    void run(cli::ConfigBinder& binder) {
        apply_threads(threads);
        run::preprocess_corpus(frames_dir, transcripts, out, &std::cout);
        binder.write_echo(out);
    }
};

struct InitWeightsCmd {
    std::string rgb, out;
    int channels = 20;

    void run(cli::ConfigBinder&) {
        const net::TensorF src = net::read_tensor(rgb);
        net::write_tensor(net::cross_modality_init(src, channels), out);
        std::cout << "wrote [" << src.n << "," << channels << "," << src.h << "," << src.w
                  << "] kernel to " << out << "\n";
    }
};

struct TrainCmd {
    std::string flow_dir, out, task, preset = "small", block, first_layer_init;
    std::vector<int> stages, folds;
    int width = 0, classes = 0, threads = 0;
    double dropout = -1;
    net::TrainConfig train;
    int epochs = 0;

    void run(cli::ConfigBinder& binder) {
        apply_threads(threads);
        run::TrainOptions options;
        options.net = net::NetConfig::preset(preset);
        if (!stages.empty()) options.net.stage_blocks = stages;
        if (width > 0) options.net.base_width = width;
        if (classes > 0) options.net.num_classes = classes;
        if (dropout >= 0) options.net.dropout_p = static_cast<float>(dropout);
        if (!block.empty()) {
            if (block == "basic")
                options.net.block = net::BlockType::Basic;
            else if (block == "bottleneck")
                options.net.block = net::BlockType::Bottleneck;
            else
                fail("--block must be basic or bottleneck");
        }
        options.train = train;
        if (epochs > 0) options.train.max_epochs = epochs;
        options.first_layer_init = first_layer_init;
        options.folds = folds;
        options.task = task;
        run::train_folds(flow_dir, out, options, &std::cout);
        binder.write_echo(out);
    }
};

struct EvaluateCmd {
    std::string manifest, checkpoints, task, out;
    std::vector<int> folds;
    uint64_t seed = 7;
    int threads = 0;

    void run(cli::ConfigBinder& binder) {
        apply_threads(threads);
        run::EvaluateOptions options;
        options.seed = seed;
        options.folds = folds;
        options.task = task;
        const eval::TaskReport report =
            run::evaluate_folds(manifest, checkpoints, out, options, &std::cout);
        if (!out.empty()) binder.write_echo(out);
        std::cout << eval::emit_report_text({report});
    }
};

struct ReportCmd {
    std::vector<std::string> inputs;
    std::string out;
    bool no_published = false;

    void run(cli::ConfigBinder&) {
        std::vector<eval::TaskReport> reports;
        if (!no_published) {
            auto base = eval::published_baseline();
            reports.insert(reports.end(), base.begin(), base.end());
        }
        for (const auto& path : inputs) {
            std::ifstream in(path);
            if (!in) fail("cannot open report '" + path + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            auto parsed = eval::parse_report_csv(buf.str());
            reports.insert(reports.end(), parsed.begin(), parsed.end());
        }
        if (reports.empty()) fail("nothing to report");
        const std::string table = eval::emit_report_text(reports);
        if (out.empty()) {
            std::cout << table;
        } else {
            std::ofstream o(out);
            if (!o) fail("cannot write '" + out + "'");
            o << table;
        }
    }
};

struct LrShowCmd {
    int epochs = 30;
    net::TrainConfig train;

    void run(cli::ConfigBinder&) {
        int start = 0;
        double current = net::lr_at(0, train);
        for (int e = 1; e <= epochs; ++e) {
            const double lr = e < epochs ? net::lr_at(e, train) : -1;
            if (lr != current) {
                std::cout << "epochs " << start << "-" << (e - 1) << ": " << current << "\n";
                start = e;
                current = lr;
            }
        }
    }
};

void bind_train_config(cli::ConfigBinder& b, net::TrainConfig& t) {
    b.bind("--lr", "lr", t.lr_base, "base learning rate");
    b.bind("--step-size", "step_size", t.step_size, "epochs per learning-rate step");
    b.bind("--gamma", "gamma", t.gamma, "step decay factor");
    b.bind("--momentum", "momentum", t.momentum, "SGD momentum");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motion-only surgical gesture recognition pipeline"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::function<void()> action;

    // synth
    auto synth_cmd = std::make_shared<SynthCmd>();
    {
        CLI::App* c = app.add_subcommand("synth", "generate a synthetic motion corpus");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind_string("--out", "out", synth_cmd->out, "output corpus directory")->required();
        binder->bind("--per-class", "per_class", synth_cmd->per_class, "clips per motion class");
        binder->bind("--size", "size", synth_cmd->size, "frame size in px");
        binder->bind("--frames", "frames", synth_cmd->frames, "frames per clip");
        binder->bind("--seed", "seed", synth_cmd->seed, "corpus seed");
        binder->bind("--threads", "threads", synth_cmd->threads, "worker threads (0 = all)");
        c->callback([binder, synth_cmd, &action] {
            binder->apply_file();
            action = [binder, synth_cmd] { synth_cmd->run(*binder); };
        });
    }

    // flow
    auto flow_cmd = std::make_shared<FlowCmd>();
    {
        CLI::App* c = app.add_subcommand("flow", "compute dense optical flow for a corpus");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind_string("--in", "in", flow_cmd->in, "corpus directory with manifest.csv")
            ->required();
        binder->bind_string("--out", "out", flow_cmd->out, "output flow directory")->required();
        binder->bind("--scale", "scale", flow_cmd->options.params.pyramid_scale, "pyramid scale");
        binder->bind("--levels", "levels", flow_cmd->options.params.levels, "pyramid levels");
        binder->bind("--win", "win", flow_cmd->options.params.window_size, "averaging window");
        binder->bind("--iters", "iters", flow_cmd->options.params.iterations,
                     "iterations per level");
        binder->bind("--poly-n", "poly_n", flow_cmd->options.params.poly_n,
                     "expansion neighborhood");
        binder->bind("--poly-sigma", "poly_sigma", flow_cmd->options.params.poly_sigma,
                     "expansion Gaussian std");
        binder->bind_string("--format", "format", flow_cmd->format, "plane format: png or jpeg");
        binder->bind("--mag-cap", "mag_cap", flow_cmd->options.mag_cap,
                     "magnitude quantization cap (px)");
        binder->bind("--jpeg-quality", "jpeg_quality", flow_cmd->options.jpeg_quality,
                     "JPEG quality 1..100");
        binder->bind_flag("--raw", "raw", flow_cmd->options.dump_raw, "also dump raw float fields");
        binder->bind("--threads", "threads", flow_cmd->threads, "worker threads (0 = all)");
        c->callback([binder, flow_cmd, &action] {
            binder->apply_file();
            action = [binder, flow_cmd] { flow_cmd->run(*binder); };
        });
    }

    // preprocess
    auto pre_cmd = std::make_shared<PreprocessCmd>();
    {
        CLI::App* c = app.add_subcommand("preprocess", "segment trial videos into gesture clips");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind_string("--frames-dir", "frames_dir", pre_cmd->frames_dir,
                            "per-trial frame directories")
            ->required();
        binder->bind_string("--transcripts", "transcripts", pre_cmd->transcripts,
                            "gesture transcript directory")
            ->required();
        binder->bind_string("--out", "out", pre_cmd->out, "output clip directory")->required();
        binder->bind("--threads", "threads", pre_cmd->threads, "worker threads (0 = all)");
        c->callback([binder, pre_cmd, &action] {
            binder->apply_file();
            action = [binder, pre_cmd] { pre_cmd->run(*binder); };
        });
    }

    // init-weights
    auto init_cmd = std::make_shared<InitWeightsCmd>();
    {
        CLI::App* c = app.add_subcommand(
            "init-weights", "cross-modality first-layer kernel from a pretrained RGB kernel");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind_string("--rgb", "rgb", init_cmd->rgb, "RGB kernel tensor file [out,3,k,k]")
            ->required();
        binder->bind_string("--out", "out", init_cmd->out, "output tensor file")->required();
        binder->bind("--channels", "channels", init_cmd->channels, "target input channels");
        c->callback([binder, init_cmd, &action] {
            binder->apply_file();
            action = [binder, init_cmd] { init_cmd->run(*binder); };
        });
    }

    // train
    auto train_cmd = std::make_shared<TrainCmd>();
    {
        CLI::App* c = app.add_subcommand("train", "train LOSO fold checkpoints");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind_string("--flow-dir", "flow_dir", train_cmd->flow_dir,
                            "flow directory with manifest.csv")
            ->required();
        binder->bind_string("--out", "out", train_cmd->out, "output checkpoint directory")
            ->required();
        binder->bind_string("--task", "task", train_cmd->task, "task to train on");
        binder->bind_string("--preset", "preset", train_cmd->preset,
                            "network preset: small or bn-resnet101");
        binder->bind_int_list("--stages", "stages", train_cmd->stages, "residual blocks per stage");
        binder->bind("--width", "width", train_cmd->width, "base channel width");
        binder->bind_string("--block", "block", train_cmd->block, "block type: basic or bottleneck");
        binder->bind("--classes", "classes", train_cmd->classes, "number of classes");
        binder->bind("--dropout", "dropout", train_cmd->dropout, "dropout after pooling");
        bind_train_config(*binder, train_cmd->train);
        binder->bind("--batch", "batch", train_cmd->train.batch_size, "mini-batch size");
        binder->bind("--epochs", "epochs", train_cmd->epochs, "training epochs");
        binder->bind("--weight-decay", "weight_decay", train_cmd->train.weight_decay,
                     "L2 weight decay");
        binder->bind("--crops", "crops", train_cmd->train.crops_per_clip,
                     "random crops per sampled stack");
        binder->bind_flag("--flip", "flip", train_cmd->train.flip_augment,
                          "horizontal flip augmentation");
        binder->bind("--seed", "seed", train_cmd->train.seed, "training seed");
        binder->bind_string("--first-layer-init", "first_layer_init", train_cmd->first_layer_init,
                            "tensor file for the first convolution");
        binder->bind_int_list("--folds", "folds", train_cmd->folds, "fold indices (empty = all)");
        binder->bind("--threads", "threads", train_cmd->threads, "worker threads (0 = all)");
        c->callback([binder, train_cmd, &action] {
            binder->apply_file();
            action = [binder, train_cmd] { train_cmd->run(*binder); };
        });
    }

    // evaluate
    auto eval_cmd = std::make_shared<EvaluateCmd>();
    {
        CLI::App* c = app.add_subcommand("evaluate", "20-chunk voting over LOSO test splits");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind_string("--manifest", "manifest", eval_cmd->manifest,
                            "manifest.csv inside the flow directory")
            ->required();
        binder->bind_string("--checkpoints", "checkpoints", eval_cmd->checkpoints,
                            "directory with fold_<i>/checkpoint.bin")
            ->required();
        binder->bind_string("--task", "task", eval_cmd->task, "task to evaluate");
        binder->bind("--seed", "seed", eval_cmd->seed, "fold seed (must match training)");
        binder->bind_string("--out", "out", eval_cmd->out, "report output directory");
        binder->bind_int_list("--folds", "folds", eval_cmd->folds, "fold indices (empty = all)");
        binder->bind("--threads", "threads", eval_cmd->threads, "worker threads (0 = all)");
        c->callback([binder, eval_cmd, &action] {
            binder->apply_file();
            action = [binder, eval_cmd] { eval_cmd->run(*binder); };
        });
    }

    // report
    auto report_cmd = std::make_shared<ReportCmd>();
    {
        CLI::App* c = app.add_subcommand("report", "merge evaluation CSVs into one table");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        c->add_option("--in", report_cmd->inputs, "report.csv files")->expected(-1);
        binder->bind_string("--out", "out", report_cmd->out, "output text file (default stdout)");
        binder->bind_flag("--no-published", "no_published", report_cmd->no_published,
                          "omit the published baseline row");
        c->callback([binder, report_cmd, &action] {
            binder->apply_file();
            action = [binder, report_cmd] { report_cmd->run(*binder); };
        });
    }

    // lr-show
    auto lr_cmd = std::make_shared<LrShowCmd>();
    {
        CLI::App* c = app.add_subcommand("lr-show", "print the step learning-rate schedule");
        auto binder = std::make_shared<cli::ConfigBinder>(c);
        binder->bind("--epochs", "epochs", lr_cmd->epochs, "epochs to cover");
        bind_train_config(*binder, lr_cmd->train);
        c->callback([binder, lr_cmd, &action] {
            binder->apply_file();
            action = [binder, lr_cmd] { lr_cmd->run(*binder); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;  // configuration problems are usage errors
    }

    try {
        if (action) action();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
