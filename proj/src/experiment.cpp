#include "sfse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "sfse/error.hpp"
#include "sfse/model_json.hpp"

namespace sfse {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* prediction_label(const SizeAnalysis& run) {
    return run.validity.all_valid ? "first-order" : "extrapolated";
}

void require_predictions(const SizeAnalysis& run, bool force) {
    if (run.validity.all_valid || force) return;
    std::string why = fmt::format("max |A + iB| = {}", run.validity.max_modulus);
    if (run.validity.singular_points > 0)
        why += fmt::format(", {} band-extremum points", run.validity.singular_points);
    throw ValidityError(fmt::format(
        "L = {}: first-order predictions lie outside the validity disk ({}); pass --force to "
        "write them as extrapolated",
        run.L, why));
}

double circular_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

void apply_parameter(ModelDocument& model, const std::string& parameter, double value) {
    if (model.custom) throw ConfigError("cannot sweep '" + parameter + "' over a custom impurity");
    if (parameter == "V") {
        if (model.named && !std::holds_alternative<Onsite>(*model.named))
            throw ConfigError("sweep parameter V needs an onsite impurity");
        model.named = Onsite{value};
        return;
    }
    if (parameter != "mu" && parameter != "mu_r" && parameter != "mu_l")
        throw ConfigError("unknown sweep parameter '" + parameter + "' (expected mu, mu_r, mu_l or V)");
    if (model.named && !std::holds_alternative<BoundaryCoupling>(*model.named))
        throw ConfigError("sweep parameter " + parameter + " needs a boundary-coupling impurity");
    BoundaryCoupling c = model.named ? std::get<BoundaryCoupling>(*model.named) : BoundaryCoupling{};
    if (parameter != "mu_l") c.mu_r = value;
    if (parameter != "mu_r") c.mu_l = value;
    model.named = c;
}

std::filesystem::path prepare_output(const RunOptions& options) {
    std::error_code ec;
    std::filesystem::create_directories(options.out, ec);
    if (ec || !std::filesystem::is_directory(options.out))
        throw ConfigError("cannot create output directory " + options.out.string());
    return options.out;
}

std::filesystem::path emit(const RunOptions& options, const std::string& stem, const Table& table) {
    const auto base = options.out / stem;
    write_table(base, table, options.format);
    auto path = base;
    path += extension(options.format);
    return path;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (!std::set<std::string>{"model", "sizes", "sweep", "output", "format"}.contains(key))
            throw ConfigError("unknown key '" + key + "' in experiment config");
    if (!doc.contains("model")) throw ConfigError("experiment config needs a 'model'");
    if (!doc.contains("sizes") || !doc["sizes"].is_array() || doc["sizes"].empty())
        throw ConfigError("experiment config needs a nonempty 'sizes' list");

    ExperimentConfig config{model_from_json(doc["model"]), {}, std::nullopt, "out", OutputFormat::csv};
    for (const json& size : doc["sizes"]) {
        if (!size.is_number_integer() || size.get<int>() < 3)
            throw ConfigError("every size must be an integer >= 3");
        config.sizes.push_back(size.get<int>());
    }
    if (doc.contains("sweep")) {
        const json& sweep = doc["sweep"];
        if (!sweep.is_object() || !sweep.contains("parameter") || !sweep["parameter"].is_string() ||
            !sweep.contains("values") || !sweep["values"].is_array() || sweep["values"].empty())
            throw ConfigError("sweep needs a string 'parameter' and a nonempty 'values' list");
        for (const auto& [key, value] : sweep.items())
            if (key != "parameter" && key != "values") throw ConfigError("unknown key '" + key + "' in sweep");
        Sweep s{sweep["parameter"].get<std::string>(), {}};
        for (const json& v : sweep["values"]) {
            if (!v.is_number() || !std::isfinite(v.get<double>()))
                throw ConfigError("sweep values must be finite numbers");
            s.values.push_back(v.get<double>());
        }
        config.sweep = std::move(s);
    }
    if (doc.contains("output")) {
        if (!doc["output"].is_string()) throw ConfigError("'output' must be a path string");
        config.output = doc["output"].get<std::string>();
    }
    if (doc.contains("format")) {
        if (!doc["format"].is_string()) throw ConfigError("'format' must be csv or json");
        config.format = parse_format(doc["format"].get<std::string>());
    }
    // Validate the sweep against the model up front.
    expand_sweep(config);
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_text_file(path));
}

std::vector<Scenario> expand_sweep(const ExperimentConfig& config) {
    if (!config.sweep) return {Scenario{config.model, "", ""}};
    std::vector<Scenario> scenarios;
    for (double value : config.sweep->values) {
        Scenario s{config.model, fmt::format("{}={}", config.sweep->parameter, value),
                   fmt::format("_{}{}", config.sweep->parameter, value)};
        apply_parameter(s.model, config.sweep->parameter, value);
        scenarios.push_back(std::move(s));
    }
    return scenarios;
}

SizeAnalysis analyze_size(const ModelDocument& model, int L) {
    const HoppingSet& h = model.hopping;
    const ImpuritySpec spec = model.impurity_spec();

    SizeAnalysis run;
    run.L = L;
    run.orbitals = h.orbitals();
    run.exact = eig_right(assemble_gbc(h, L, spec));

    const BandStructure bands = band_structure(h, L);
    run.points = first_order_table(bands, spec, h);
    for (const auto& point : run.points) {
        run.pbc.push_back(point.state.energy);
        run.predicted.push_back(point.shifted_energy(L));
    }
    run.validity = summarize_validity(run.points);
    run.pairing = match_predictions(run.exact, run.predicted);

    for (Index n = 0; n < run.exact.size(); ++n)
        run.mean_positions.push_back(mean_position(run.exact.sorted_right(n), run.orbitals, L));

    run.predicted_order = real_part_order(run.predicted);
    for (Index i : run.predicted_order) {
        const auto& point = run.points[static_cast<std::size_t>(i)];
        run.theory.push_back(point.result ? scale_free_limit(point.result->A) : kNaN);
    }
    return run;
}

std::vector<ClassifiedState> classify_states(const std::vector<SizeAnalysis>& runs) {
    if (runs.size() < 2) throw DomainError("classification needs at least two system sizes");
    std::vector<const SizeAnalysis*> by_size;
    for (const auto& run : runs) by_size.push_back(&run);
    std::sort(by_size.begin(), by_size.end(), [](auto* a, auto* b) { return a->L < b->L; });
    const SizeAnalysis& ref = *by_size.back();

    auto point_of = [](const SizeAnalysis& run, Index eigen_index) -> const FirstOrderPoint& {
        return run.points[static_cast<std::size_t>(run.pairing.prediction_of[static_cast<std::size_t>(eigen_index)])];
    };

    std::vector<ClassifiedState> states;
    for (Index n = 0; n < ref.exact.size(); ++n) {
        const Index e = ref.exact.order[static_cast<std::size_t>(n)];
        const FirstOrderPoint& point = point_of(ref, e);

        std::map<int, Vector> matched;
        for (const SizeAnalysis* run : by_size) {
            if (run == &ref) {
                matched[run->L] = ref.exact.right.col(e);
                continue;
            }
            Index best = -1;
            double best_distance = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < run->exact.size(); ++j) {
                const FirstOrderPoint& other = point_of(*run, j);
                if (other.state.band != point.state.band) continue;
                const double d = circular_distance(other.state.momentum.k, point.state.momentum.k);
                if (d < best_distance) {
                    best_distance = d;
                    best = j;
                }
            }
            matched[run->L] = run->exact.right.col(best);
        }

        ClassifiedState state;
        state.index = static_cast<int>(n);
        state.energy = ref.exact.eigenvalues(e);
        state.band = point.state.band;
        state.k = point.state.momentum.k;
        state.predicted_A = point.result ? point.result->A : kNaN;
        state.fit = fit_exponent(matched, ref.orbitals);
        state.report = classify(state.index, ref.mean_positions[static_cast<std::size_t>(n)], state.fit);
        states.push_back(std::move(state));
    }
    return states;
}

Table spectrum_table(const SizeAnalysis& run, bool force) {
    require_predictions(run, force);
    Table table{{"index", "pbc_re", "pbc_im", "gbc_re", "gbc_im", "pred_re", "pred_im", "prediction"}, {}};
    // Rows follow the exact spectrum; PBC and prediction columns come from the paired band point.
    for (Index n = 0; n < run.exact.size(); ++n) {
        const Index e = run.exact.order[static_cast<std::size_t>(n)];
        const auto j = static_cast<std::size_t>(run.pairing.prediction_of[static_cast<std::size_t>(e)]);
        const cplx gbc = run.exact.eigenvalues(e);
        table.add_row({static_cast<long long>(n), run.pbc[j].real(), run.pbc[j].imag(), gbc.real(), gbc.imag(),
                       run.predicted[j].real(), run.predicted[j].imag(), std::string(prediction_label(run))});
    }
    return table;
}

Table mean_position_table(const SizeAnalysis& run, bool force) {
    require_predictions(run, force);
    Table table{{"n", "mean_position", "theory", "k", "A", "gbc_re", "gbc_im", "prediction"}, {}};
    for (Index n = 0; n < run.exact.size(); ++n) {
        const auto i = static_cast<std::size_t>(n);
        const auto& point = run.points[static_cast<std::size_t>(run.predicted_order[i])];
        const cplx gbc = run.exact.sorted_value(n);
        table.add_row({static_cast<long long>(n + 1), run.mean_positions[i], run.theory[i],
                       point.state.momentum.k, point.result ? point.result->A : kNaN, gbc.real(), gbc.imag(),
                       std::string(prediction_label(run))});
    }
    return table;
}

Table validity_table(const SizeAnalysis& run) {
    Table table{{"band", "m", "k", "A", "B", "modulus", "valid", "status"}, {}};
    for (const auto& point : run.points) {
        const auto& s = point.state;
        if (!point.result) {
            table.add_row({static_cast<long long>(s.band), static_cast<long long>(s.momentum.m), s.momentum.k,
                           kNaN, kNaN, kNaN, 0LL, std::string("singular")});
            continue;
        }
        const auto& r = *point.result;
        const double modulus = r.modulus();
        const char* status = r.marginal ? "marginal" : (r.valid ? "inside" : "outside");
        table.add_row({static_cast<long long>(s.band), static_cast<long long>(s.momentum.m), s.momentum.k, r.A,
                       r.B, modulus, r.valid ? 1LL : 0LL, std::string(status)});
    }
    return table;
}

std::optional<double> closed_form_bound(const ModelDocument& model) {
    const HoppingSet& h = model.hopping;
    if (!model.named || h.orbitals() != 1) return std::nullopt;
    const cplx t_r = h.h1()(0, 0), t_l = h.hm1()(0, 0);
    if (t_r.imag() != 0.0 || t_l.imag() != 0.0 || !(t_r.real() > 0.0) || !(t_l.real() > 0.0))
        return std::nullopt;
    if (const auto* c = std::get_if<BoundaryCoupling>(&*model.named)) {
        if (c->mu_r != c->mu_l) return std::nullopt;
        return hn_coupling_bound(t_r.real() / t_l.real());
    }
    return hn_onsite_bound(t_l.real(), t_r.real());
}

std::optional<double> impurity_strength(const ModelDocument& model) {
    if (!model.named) return std::nullopt;
    if (const auto* c = std::get_if<BoundaryCoupling>(&*model.named)) {
        if (c->mu_r != c->mu_l) return std::nullopt;
        return std::abs(c->mu_r);
    }
    return std::abs(std::get<Onsite>(*model.named).V);
}

Table validity_summary_table(const ModelDocument& model, const std::vector<SizeAnalysis>& runs) {
    Table table{{"L", "max_modulus", "singular_points", "all_valid", "verdict", "bound", "strength", "within_bound"},
                {}};
    const auto bound = closed_form_bound(model);
    const auto strength = impurity_strength(model);
    for (const auto& run : runs) {
        const auto& v = run.validity;
        std::string within = "n/a";
        if (bound && strength) within = *strength < *bound ? "yes" : "no";
        table.add_row({static_cast<long long>(run.L), v.max_modulus, static_cast<long long>(v.singular_points),
                       v.all_valid ? 1LL : 0LL, std::string(to_string(v.verdict)), bound.value_or(kNaN),
                       strength.value_or(kNaN), within});
    }
    return table;
}

Table classify_table(const std::vector<SizeAnalysis>& runs, const std::vector<ClassifiedState>& states) {
    std::vector<int> sizes;
    for (const auto& run : runs) sizes.push_back(run.L);
    std::sort(sizes.begin(), sizes.end());
    Table table{{"index", "gbc_re", "gbc_im", "band", "k", "predicted_A", "mean_position"}, {}};
    for (int L : sizes) table.columns.push_back(fmt::format("A_hat_L{}", L));
    for (const char* c : {"A_hat_mean", "spread", "per_cell_spread", "class"}) table.columns.emplace_back(c);

    for (const auto& s : states) {
        std::vector<Cell> row{static_cast<long long>(s.index), s.energy.real(), s.energy.imag(),
                              static_cast<long long>(s.band), s.k, s.predicted_A,
                              s.report.mean_position_fraction};
        for (double a : s.fit.exponents) row.emplace_back(a);
        row.emplace_back(s.fit.mean_exponent);
        row.emplace_back(s.fit.spread);
        row.emplace_back(s.fit.per_cell_spread);
        row.emplace_back(std::string(to_string(s.report.cls)));
        table.add_row(std::move(row));
    }
    return table;
}

std::vector<std::vector<SizeAnalysis>> analyze_all(const std::vector<Scenario>& scenarios,
                                                   const std::vector<int>& sizes, int workers) {
    const std::size_t per = sizes.size();
    const std::size_t jobs = scenarios.size() * per;
    std::vector<std::vector<SizeAnalysis>> results(scenarios.size(), std::vector<SizeAnalysis>(per));
    std::vector<std::exception_ptr> errors(jobs);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            try {
                results[job / per][job % per] = analyze_size(scenarios[job / per].model, sizes[job % per]);
            } catch (...) {
                errors[job] = std::current_exception();
            }
        }
    };
    const auto count = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(jobs, 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 1; i < count; ++i) pool.emplace_back(work);
        work();
    }
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);
    return results;
}

std::vector<std::filesystem::path> cmd_spectrum(const ExperimentConfig& config, const RunOptions& options) {
    const auto scenarios = expand_sweep(config);
    const auto runs = analyze_all(scenarios, config.sizes, options.workers);
    std::vector<std::vector<Table>> tables(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (const auto& run : runs[s]) tables[s].push_back(spectrum_table(run, options.force));

    prepare_output(options);
    std::vector<std::filesystem::path> written;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (std::size_t i = 0; i < runs[s].size(); ++i)
            written.push_back(emit(options, fmt::format("spectrum_L{}{}", runs[s][i].L, scenarios[s].tag), tables[s][i]));
    return written;
}

std::vector<std::filesystem::path> cmd_mean_positions(const ExperimentConfig& config, const RunOptions& options) {
    const auto scenarios = expand_sweep(config);
    const auto runs = analyze_all(scenarios, config.sizes, options.workers);
    std::vector<std::vector<Table>> tables(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (const auto& run : runs[s]) tables[s].push_back(mean_position_table(run, options.force));

    prepare_output(options);
    std::vector<std::filesystem::path> written;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (std::size_t i = 0; i < runs[s].size(); ++i)
            written.push_back(
                emit(options, fmt::format("mean_positions_L{}{}", runs[s][i].L, scenarios[s].tag), tables[s][i]));
    return written;
}

std::vector<std::filesystem::path> cmd_validity(const ExperimentConfig& config, const RunOptions& options) {
    const auto scenarios = expand_sweep(config);
    const auto runs = analyze_all(scenarios, config.sizes, options.workers);
    prepare_output(options);
    std::vector<std::filesystem::path> written;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        for (const auto& run : runs[s])
            written.push_back(emit(options, fmt::format("validity_L{}{}", run.L, scenarios[s].tag), validity_table(run)));
        written.push_back(emit(options, fmt::format("validity_summary{}", scenarios[s].tag),
                               validity_summary_table(scenarios[s].model, runs[s])));
    }
    return written;
}

std::vector<std::filesystem::path> cmd_classify(const ExperimentConfig& config, const RunOptions& options) {
    const auto scenarios = expand_sweep(config);
    const auto runs = analyze_all(scenarios, config.sizes, options.workers);
    std::vector<Table> tables;
    for (std::size_t s = 0; s < scenarios.size(); ++s) tables.push_back(classify_table(runs[s], classify_states(runs[s])));
    prepare_output(options);
    std::vector<std::filesystem::path> written;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        written.push_back(emit(options, fmt::format("classify{}", scenarios[s].tag), tables[s]));
    return written;
}

namespace {

ExperimentConfig hn_preset(const std::string& parameter, std::vector<double> values) {
    ModelDocument model{HoppingSet::hatano_nelson(2.0, 1.0), std::nullopt, std::nullopt};
    if (parameter == "V")
        model.named = Onsite{0.0};
    else
        model.named = BoundaryCoupling{};
    return ExperimentConfig{std::move(model), {75, 100, 125}, Sweep{parameter, std::move(values)}, "out",
                            OutputFormat::csv};
}

}  // namespace

ExperimentConfig fig1_config() { return hn_preset("mu", {0.0, -1.0, -0.25, 0.25, -0.5, 0.5}); }
ExperimentConfig fig2_config() { return hn_preset("V", {-0.5, 1.0}); }

std::vector<std::filesystem::path> cmd_reproduce(const ExperimentConfig& preset, const std::string& name,
                                                 const RunOptions& options) {
    const auto scenarios = expand_sweep(preset);
    const auto runs = analyze_all(scenarios, preset.sizes, options.workers);
    prepare_output(options);

    std::vector<std::filesystem::path> written;
    Table summary{{"scenario", "L", "max_theory_deviation", "fraction_over_0.05", "collapse_deviation",
                   "max_modulus", "verdict", "prediction", "scale_free_fraction"},
                  {}};
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        std::map<int, std::vector<double>> curves;
        for (const auto& run : runs[s]) {
            curves[run.L] = run.mean_positions;
            written.push_back(emit(options, fmt::format("mean_positions_L{}{}", run.L, scenarios[s].tag),
                                   mean_position_table(run, true)));
        }
        const auto states = classify_states(runs[s]);
        written.push_back(emit(options, fmt::format("classify{}", scenarios[s].tag), classify_table(runs[s], states)));
        const double scale_free =
            static_cast<double>(std::count_if(states.begin(), states.end(), [](const ClassifiedState& c) {
                return c.report.cls == LocalizationClass::scale_free_left ||
                       c.report.cls == LocalizationClass::scale_free_right;
            })) /
            static_cast<double>(states.size());
        const double collapse = curve_collapse_deviation(curves);
        for (const auto& run : runs[s]) {
            double worst = 0.0;
            std::size_t over = 0;
            for (std::size_t n = 0; n < run.mean_positions.size(); ++n) {
                const double d = std::abs(run.mean_positions[n] - run.theory[n]);
                worst = std::max(worst, d);
                if (d > 0.05) ++over;
            }
            summary.add_row({scenarios[s].label, static_cast<long long>(run.L), worst,
                             static_cast<double>(over) / static_cast<double>(run.mean_positions.size()), collapse,
                             run.validity.max_modulus, std::string(to_string(run.validity.verdict)),
                             std::string(prediction_label(run)), scale_free});
        }
    }
    written.push_back(emit(options, name + "_summary", summary));
    return written;
}

}  // namespace sfse
