// Command-line front end: runs one experiment family from a JSON config and
// writes report.json + curves.csv into the output directory.

#include "ggsp/errors.hpp"
#include "ggsp/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CliArgs {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
};

int run(ggsp::ExperimentKind kind, const CliArgs& args) {
    ggsp::ExperimentConfig cfg = ggsp::load_config_file(args.config);
    if (cfg.kind != kind)
        throw ggsp::ConfigError("config experiment kind does not match the subcommand");
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.seed_set = true;
    }
    if (!cfg.seed_set)
        throw ggsp::ConfigError("seed must be given in the config or with --seed");
    ggsp::run_experiment_to_dir(cfg, args.out);
    std::cout << "wrote " << args.out << "/report.json and " << args.out << "/curves.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized graph signal processing experiments"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "experiment config (JSON)")->required();
        sub->add_option("--seed", args.seed, "master seed (overrides the config)");
        sub->add_option("--out", args.out, "output directory");
    };
    CLI::App* denoise = app.add_subcommand("denoise", "Wiener denoising SNR curves");
    CLI::App* complete = app.add_subcommand("complete", "masked completion error curves");
    CLI::App* continuous = app.add_subcommand("continuous", "continuous-time recovery errors");
    add_common(denoise);
    add_common(complete);
    add_common(continuous);

    CLI11_PARSE(app, argc, argv);

    ggsp::ExperimentKind kind = ggsp::ExperimentKind::Denoise;
    if (complete->parsed()) kind = ggsp::ExperimentKind::Complete;
    if (continuous->parsed()) kind = ggsp::ExperimentKind::Continuous;

    try {
        return run(kind, args);
    } catch (const ggsp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ggsp::ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const ggsp::InconsistentDimensions& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const ggsp::MissingValues& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const ggsp::ZeroSignal& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const ggsp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
