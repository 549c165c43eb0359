#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sfse/model_io.hpp"
#include "sfse/observables.hpp"
#include "sfse/perturbation.hpp"
#include "sfse/spectra.hpp"
#include "sfse/table.hpp"

namespace sfse {

struct Sweep {
    std::string parameter;  // "mu", "mu_r", "mu_l" or "V"
    std::vector<double> values;
};

// Experiment configuration document:
//   {"model": {...}, "sizes": [75, 100, 125],
//    "sweep": {"parameter": "mu", "values": [-0.25, 0.25]},
//    "output": "out", "format": "csv"}
// Only "model" and "sizes" are required.
struct ExperimentConfig {
    ModelDocument model;
    std::vector<int> sizes;
    std::optional<Sweep> sweep;
    std::filesystem::path output = "out";
    OutputFormat format = OutputFormat::csv;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// One model instance of a sweep. `tag` is appended to file names.
struct Scenario {
    ModelDocument model;
    std::string label;  // e.g. "mu=0.25", empty without a sweep
    std::string tag;    // e.g. "_mu0.25"
};

std::vector<Scenario> expand_sweep(const ExperimentConfig& config);

// Everything derived from one (model, L): exact GBC spectrum, PBC band
// structure, first-order predictions and the exact-to-predicted pairing.
struct SizeAnalysis {
    int L = 0;
    int orbitals = 0;
    EigenSolution exact;                  // right vectors of H_PBC + H_imp
    std::vector<cplx> pbc;                // unperturbed band energies, point order
    std::vector<FirstOrderPoint> points;  // first-order data, point order
    std::vector<cplx> predicted;          // E + C / L, point order
    ValiditySummary validity;
    Pairing pairing;                      // exact eigenvalue index -> point index
    std::vector<double> mean_positions;   // per real-part-sorted exact state
    std::vector<double> theory;           // scale_free_limit(A) per real-part-sorted prediction
    std::vector<Index> predicted_order;   // real-part order of `predicted`
};

SizeAnalysis analyze_size(const ModelDocument& model, int L);

// Cross-size classification of the largest-size states.
struct ClassifiedState {
    int index = 0;  // real-part-sorted position at the reference size
    cplx energy;
    int band = 0;
    double k = 0.0;
    double predicted_A = 0.0;  // NaN at band extrema
    ExponentFit fit;
    LocalizationReport report;
};

std::vector<ClassifiedState> classify_states(const std::vector<SizeAnalysis>& runs);

struct RunOptions {
    std::filesystem::path out = "out";
    OutputFormat format = OutputFormat::csv;
    bool force = false;
    int workers = 1;
};

// Tables behind each subcommand. `force` labels out-of-disk predictions
// "extrapolated"; without it they raise ValidityError.
Table spectrum_table(const SizeAnalysis& run, bool force);
Table mean_position_table(const SizeAnalysis& run, bool force);
Table validity_table(const SizeAnalysis& run);
Table validity_summary_table(const ModelDocument& model, const std::vector<SizeAnalysis>& runs);
Table classify_table(const std::vector<SizeAnalysis>& runs, const std::vector<ClassifiedState>& states);

// Closed-form bound for the named impurity on a single-band chain with
// real positive hoppings; empty otherwise.
std::optional<double> closed_form_bound(const ModelDocument& model);
// |parameter| of the named impurity compared against closed_form_bound.
std::optional<double> impurity_strength(const ModelDocument& model);

// Subcommands. Each writes its files under options.out and returns the
// paths written.
std::vector<std::filesystem::path> cmd_spectrum(const ExperimentConfig& config, const RunOptions& options);
std::vector<std::filesystem::path> cmd_mean_positions(const ExperimentConfig& config, const RunOptions& options);
std::vector<std::filesystem::path> cmd_validity(const ExperimentConfig& config, const RunOptions& options);
std::vector<std::filesystem::path> cmd_classify(const ExperimentConfig& config, const RunOptions& options);

// Built-in figure presets: Hatano-Nelson t_r = 2, t_l = 1, L in {75, 100, 125};
// boundary coupling mu in {0, -1, -1/4, 1/4, -1/2, 1/2}, resp. onsite
// V in {-1/2, 1}. Out-of-disk panels are written as "extrapolated".
ExperimentConfig fig1_config();
ExperimentConfig fig2_config();
std::vector<std::filesystem::path> cmd_reproduce(const ExperimentConfig& preset, const std::string& name,
                                                 const RunOptions& options);

// Runs analyze_size for every (scenario, size) on a bounded worker pool.
std::vector<std::vector<SizeAnalysis>> analyze_all(const std::vector<Scenario>& scenarios,
                                                   const std::vector<int>& sizes, int workers);

}  // namespace sfse
