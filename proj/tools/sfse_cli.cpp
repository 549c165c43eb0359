// Command-line front end: spectra, mean positions, validity reports and
// localization classes for 1D lattices with boundary impurities.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 prediction refused outside the validity disk (see --force).

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "sfse/error.hpp"
#include "sfse/experiment.hpp"

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string format;
    bool force = false;
    int workers = 0;
};

void add_common(CLI::App* cmd, Flags& flags, bool needs_config) {
    auto* opt = cmd->add_option("--config", flags.config, "experiment config (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "output directory (overrides config)");
    cmd->add_option("--format", flags.format, "csv or json (overrides config)");
    cmd->add_flag("--force", flags.force, "write predictions outside the validity disk as 'extrapolated'");
    cmd->add_option("--workers", flags.workers, "parallel (L, parameter) runs")->check(CLI::PositiveNumber);
}

sfse::RunOptions options_for(const Flags& flags, const sfse::ExperimentConfig& config) {
    sfse::RunOptions options;
    options.out = flags.out.empty() ? config.output : std::filesystem::path(flags.out);
    options.format = flags.format.empty() ? config.format : sfse::parse_format(flags.format);
    options.force = flags.force;
    const unsigned hw = std::thread::hardware_concurrency();
    options.workers = flags.workers > 0 ? flags.workers : static_cast<int>(hw == 0 ? 1 : hw);
    return options;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scale-free skin effect toolkit"};
    app.require_subcommand(1);

    Flags flags;
    auto* spectrum = app.add_subcommand("spectrum", "PBC, GBC and first-order spectra per size");
    auto* mean_positions = app.add_subcommand("mean-positions", "mean positions of GBC eigenstates with theory curve");
    auto* validity = app.add_subcommand("validity", "per-k |A + iB| and validity verdict");
    auto* classify = app.add_subcommand("classify", "extended / scale-free / skin classification across sizes");
    auto* fig1 = app.add_subcommand("reproduce-fig1", "Hatano-Nelson boundary-coupling preset");
    auto* fig2 = app.add_subcommand("reproduce-fig2", "Hatano-Nelson onsite-impurity preset");
    for (auto* cmd : {spectrum, mean_positions, validity, classify}) add_common(cmd, flags, true);
    for (auto* cmd : {fig1, fig2}) add_common(cmd, flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::vector<std::filesystem::path> written;
        if (fig1->parsed() || fig2->parsed()) {
            auto preset = fig1->parsed() ? sfse::fig1_config() : sfse::fig2_config();
            if (!flags.config.empty()) preset = sfse::load_experiment_config(flags.config);
            auto options = options_for(flags, preset);
            options.force = true;
            written = sfse::cmd_reproduce(preset, fig1->parsed() ? "fig1" : "fig2", options);
        } else {
            const auto config = sfse::load_experiment_config(flags.config);
            const auto options = options_for(flags, config);
            if (spectrum->parsed()) written = sfse::cmd_spectrum(config, options);
            if (mean_positions->parsed()) written = sfse::cmd_mean_positions(config, options);
            if (validity->parsed()) written = sfse::cmd_validity(config, options);
            if (classify->parsed()) written = sfse::cmd_classify(config, options);
        }
        for (const auto& path : written) std::cout << path.string() << '\n';
        return 0;
    } catch (const sfse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const sfse::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const sfse::ValidityError& e) {
        std::cerr << "validity refused: " << e.what() << '\n';
        return 4;
    } catch (const sfse::NumericalError& e) {
        std::cerr << "numerical failure (" << sfse::to_string(e.failure()) << "): " << e.what() << '\n';
        return 3;
    }
}
