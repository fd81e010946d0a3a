#include "nkg/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <vector>

#include "CLI11.hpp"

namespace nkg {

namespace {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) fail(key, "not a number: '" + value + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "not a number: '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const int x = std::stoi(value, &used);
        if (used != value.size()) fail(key, "not an integer: '" + value + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "not an integer: '" + value + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(key, "empty list entry");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

ProblemKind parse_kind(const std::string& key, const std::string& value) {
    if (value == "real-weak") return ProblemKind::RealWeak;
    if (value == "complex-oscillatory") return ProblemKind::ComplexOscillatory;
    fail(key, "expected real-weak or complex-oscillatory, got '" + value + "'");
}

PresetTag parse_preset(const std::string& key, const std::string& value) {
    if (value == "trig") return PresetTag::Trig;
    if (value == "gaussian") return PresetTag::Gaussian;
    if (value == "plane-wave") return PresetTag::PlaneWave;
    if (value == "single-mode") return PresetTag::SingleMode;
    if (value == "zero") return PresetTag::Zero;
    fail(key, "unknown preset '" + value + "'");
}

Composition parse_composition(const std::string& key, const std::string& value) {
    if (value == "tvt") return Composition::TVT;
    if (value == "vtv") return Composition::VTV;
    fail(key, "expected tvt or vtv, got '" + value + "'");
}

Formulation parse_formulation(const std::string& key, const std::string& value) {
    if (value == "uv") return Formulation::UV;
    if (value == "psi") return Formulation::Psi;
    fail(key, "expected uv or psi, got '" + value + "'");
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::map<std::string, std::string> entries;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                              ": expected key = value");
        }
        entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return entries;
}

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& overrides, Command command) {
    std::map<std::string, std::string> entries;
    if (file) entries = read_config_file(*file);
    for (const auto& [key, value] : overrides) entries[key] = value;

    RunConfig config;
    config.command = command;
    bool domain_a_set = false;
    bool domain_b_set = false;
    bool reference_h_set = false;
    bool reference_dt_set = false;

    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        std::string value = it->second;
        entries.erase(it);
        return value;
    };

    if (auto v = take("problem.kind")) config.problem.kind = parse_kind("problem.kind", *v);
    if (auto v = take("problem.p")) {
        config.problem.p = parse_int("problem.p", *v);
        if (config.problem.p < 1) fail("problem.p", "must be >= 1");
    }
    if (auto v = take("problem.epsilon")) {
        config.problem.epsilon = parse_double("problem.epsilon", *v);
        if (!(config.problem.epsilon > 0.0) || config.problem.epsilon > 1.0) {
            fail("problem.epsilon", "must lie in (0, 1]");
        }
    }
    if (auto v = take("problem.beta")) config.problem.beta = parse_double("problem.beta", *v);
    if (config.problem.beta < 0.0 || config.problem.beta > config.problem.p) {
        fail("problem.beta", "must lie in [0, problem.p]");
    }
    if (auto v = take("problem.preset")) {
        config.problem.initial.tag = parse_preset("problem.preset", *v);
    }
    if (auto v = take("preset.amplitude")) {
        config.problem.initial.amplitude = parse_double("preset.amplitude", *v);
        if (config.problem.initial.amplitude < 0.0) fail("preset.amplitude", "must be >= 0");
    }
    if (auto v = take("preset.mode")) config.problem.initial.mode = parse_int("preset.mode", *v);
    if (auto v = take("domain.a")) {
        config.problem.a = parse_double("domain.a", *v);
        domain_a_set = true;
    }
    if (auto v = take("domain.b")) {
        config.problem.b = parse_double("domain.b", *v);
        domain_b_set = true;
    }
    if (domain_a_set != domain_b_set) {
        fail(domain_a_set ? "domain.b" : "domain.a", "domain.a and domain.b go together");
    }
    if (!domain_a_set) {
        if (config.problem.kind == ProblemKind::ComplexOscillatory &&
            config.problem.initial.tag == PresetTag::Gaussian) {
            const auto [a, b] = oscillatory_domain(config.problem.beta, config.problem.epsilon);
            config.problem.a = a;
            config.problem.b = b;
        } else {
            config.problem.a = 0.0;
            config.problem.b = 2.0 * std::numbers::pi;
        }
    } else if (!(config.problem.b > config.problem.a)) {
        fail("domain.b", "must exceed domain.a");
    }
    if (auto v = take("grid.n")) {
        config.grid_n = parse_int("grid.n", *v);
        if (config.grid_n < 4 || config.grid_n % 2 != 0) fail("grid.n", "must be even and >= 4");
    }
    if (auto v = take("time.dt")) {
        config.stepper.dt = parse_double("time.dt", *v);
        if (!(config.stepper.dt > 0.0)) fail("time.dt", "must be > 0");
    }
    if (auto v = take("time.t0")) {
        config.problem.t0 = parse_double("time.t0", *v);
        if (config.problem.t0 < 0.0) fail("time.t0", "must be >= 0");
    }
    if (auto v = take("splitting.composition")) {
        config.stepper.composition = parse_composition("splitting.composition", *v);
    }
    if (auto v = take("splitting.formulation")) {
        config.stepper.formulation = parse_formulation("splitting.formulation", *v);
    }
    if (auto v = take("sweep.epsilons")) {
        config.sweep_epsilons = parse_list("sweep.epsilons", *v);
        for (double eps : config.sweep_epsilons) {
            if (!(eps > 0.0) || eps > 1.0) fail("sweep.epsilons", "entries must lie in (0, 1]");
        }
    }
    if (auto v = take("sweep.values")) {
        config.sweep_values = parse_list("sweep.values", *v);
        for (size_t j = 1; j < config.sweep_values.size(); ++j) {
            if (!(config.sweep_values[j] < config.sweep_values[j - 1])) {
                fail("sweep.values", "must be strictly decreasing");
            }
        }
    }
    if (auto v = take("sweep.sigma")) {
        config.sigma = parse_double("sweep.sigma", *v);
        if (config.sigma < 0.0) fail("sweep.sigma", "must be >= 0");
    }
    if (auto v = take("reference.h")) {
        config.reference.h_ref = parse_double("reference.h", *v);
        if (!(config.reference.h_ref > 0.0)) fail("reference.h", "must be > 0");
        reference_h_set = true;
    }
    if (auto v = take("reference.dt")) {
        config.reference.dt_ref = parse_double("reference.dt", *v);
        if (!(config.reference.dt_ref > 0.0)) fail("reference.dt", "must be > 0");
        reference_dt_set = true;
    }
    if (auto v = take("output.path")) config.out = *v;

    if (!entries.empty()) {
        fail(entries.begin()->first, "unknown key");
    }
    if (!reference_h_set) {
        config.reference.h_ref = config.problem.kind == ProblemKind::RealWeak
                                     ? (config.problem.b - config.problem.a) / 128.0
                                     : 1.0 / 16.0;
    }
    if (!reference_dt_set) config.reference.dt_ref = 1e-5;

    config.problem.validate();
    config.stepper.validate(config.problem);
    return config;
}

namespace {

void write_field_snapshot(const std::filesystem::path& path, const Field& field) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const auto& x = field.grid->nodes();
    for (size_t j = 0; j < field.values.size(); ++j) {
        out << fmt("%.17g", x[j]) << ' ' << fmt("%.17g", field.values[j].real()) << ' '
            << fmt("%.17g", field.values[j].imag()) << '\n';
    }
}

int run_simulate(const RunConfig& config) {
    const GridPtr grid = make_grid(config.problem.a, config.problem.b, config.grid_n);
    std::filesystem::create_directories(config.out);
    std::ofstream log(config.out / "energy.csv", std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write energy log");
    log << "step,time,energy,max_abs_u\n";

    const double horizon = config.problem.horizon();
    const long total = std::max<long>(1, std::llround(horizon / config.stepper.dt));
    EvolveOptions options;
    options.observe_every = total <= 10000 ? 1 : (total + 9999) / 10000;
    options.observer = [&](long step, const StatePair& state) {
        log << step << ',' << fmt("%.17g", state.time) << ','
            << fmt("%.17g", energy(config.problem, state)) << ','
            << fmt("%.17g", max_abs(state.u)) << '\n';
    };

    const StatePair final_state = evolve(config.problem, grid, config.stepper, options);
    write_field_snapshot(config.out / "u.txt", final_state.u);
    write_field_snapshot(config.out / "v.txt", final_state.v);
    write_reference_file(
        config.out / "final.ref",
        ReferenceEntry{forward(final_state.u), forward(final_state.v), final_state.time});
    std::cout << "final time " << final_state.time << ", energy "
              << energy(config.problem, final_state) << "\n";
    return 0;
}

int run_sweep(const RunConfig& config, SweepAxis axis) {
    if (config.sweep_values.empty()) fail("sweep.values", "required for sweep commands");
    SweepSpec spec;
    spec.base = config.problem;
    spec.axis = axis;
    spec.epsilons = config.sweep_epsilons;
    spec.values = config.sweep_values;
    spec.reference = config.reference;
    spec.sigma = config.sigma;
    spec.composition = config.stepper.composition;
    spec.formulation = config.stepper.formulation;
    spec.domain_tracks_epsilon = config.problem.kind == ProblemKind::ComplexOscillatory &&
                                 config.problem.initial.tag == PresetTag::Gaussian;

    std::filesystem::create_directories(config.out);
    ReferenceCache cache(config.out / "cache");
    const SweepResult result = sweep(spec, &cache);
    write_csv(result, config.out / "sweep.csv");
    write_json(result, config.out / "sweep.json");

    bool all_ok = true;
    for (const auto& row : result.cells) {
        for (const auto& cell : row) all_ok = all_ok && cell.ok();
    }
    std::cout << "wrote " << (config.out / "sweep.csv").string() << " ("
              << result.cells.size() * config.sweep_values.size() << " cells, "
              << (all_ok ? "all ok" : "some failed") << ")\n";
    return all_ok ? 0 : 1;
}

int run_dispersion_check(const RunConfig& config) {
    if (config.problem.kind != ProblemKind::ComplexOscillatory ||
        config.problem.initial.tag != PresetTag::PlaneWave) {
        throw ConfigError(
            "dispersion-check requires problem.kind = complex-oscillatory and "
            "problem.preset = plane-wave");
    }
    const GridPtr grid = make_grid(config.problem.a, config.problem.b, config.grid_n);
    const StatePair final_state = evolve(config.problem, grid, config.stepper);

    const int mode = config.problem.initial.mode;
    const double amp = config.problem.initial.amplitude;
    const double mu = 2.0 * std::numbers::pi * mode / grid->length();
    const double omega = dispersion(config.problem, mu, amp).omega;
    const double horizon = config.problem.horizon();

    ReferenceEntry exact{make_spectrum(grid), make_spectrum(grid), horizon};
    const Complex coeff = amp * std::polar(1.0, -omega * horizon);
    exact.u_hat.coeff(mode) = coeff;
    exact.v_hat.coeff(mode) = Complex(0.0, -omega) * coeff;

    const ErrorReport report = measure_error(final_state, exact, config.sigma);
    const Complex measured = forward(final_state.u).coeff(mode);
    const double phase_error = std::abs(std::arg(measured / coeff));
    std::cout << "k=" << config.stepper.dt << " h" << config.sigma
              << "_error=" << fmt("%.6e", report.error_u)
              << " phase_error=" << fmt("%.6e", phase_error) << "\n";
    return 0;
}

int run_energy_drift(const RunConfig& config) {
    const GridPtr grid = make_grid(config.problem.a, config.problem.b, config.grid_n);
    const double drift = energy_drift(config.problem, grid, config.stepper);
    std::cout << "max_relative_energy_drift=" << fmt("%.6e", drift) << "\n";
    return 0;
}

}  // namespace

int run(const RunConfig& config) {
    switch (config.command) {
        case Command::Simulate: return run_simulate(config);
        case Command::SweepSpace: return run_sweep(config, SweepAxis::Spatial);
        case Command::SweepTime: return run_sweep(config, SweepAxis::Temporal);
        case Command::DispersionCheck: return run_dispersion_check(config);
        case Command::EnergyDrift: return run_energy_drift(config);
    }
    return 2;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Time-splitting Fourier pseudospectral solver for weakly nonlinear "
                 "Klein-Gordon dynamics"};
    app.require_subcommand(1);

    struct SubcommandState {
        Command command;
        CLI::App* sub;
        std::map<std::string, std::string> overrides;
        std::string config_file;
    };
    std::vector<std::unique_ptr<SubcommandState>> states;

    const std::tuple<const char*, const char*, Command> commands[] = {
        {"simulate", "evolve one configuration and write snapshots plus an energy log",
         Command::Simulate},
        {"sweep-space", "mesh-refinement error sweep against a fine reference",
         Command::SweepSpace},
        {"sweep-time", "time-step refinement error sweep against a fine reference",
         Command::SweepTime},
        {"dispersion-check", "plane-wave exactness test against the dispersion relation",
         Command::DispersionCheck},
        {"energy-drift", "max relative energy drift over the run horizon",
         Command::EnergyDrift},
    };

    for (const auto& [name, description, command] : commands) {
        auto state = std::make_unique<SubcommandState>();
        state->command = command;
        state->sub = app.add_subcommand(name, description);
        CLI::App* sub = state->sub;
        auto* raw = state.get();
        sub->add_option("--config", raw->config_file, "flat key = value config file");
        auto bind = [raw, sub](const char* flag, const char* key) {
            sub->add_option_function<std::string>(
                flag, [raw, key](const std::string& value) { raw->overrides[key] = value; });
        };
        bind("--out", "output.path");
        bind("--epsilon", "problem.epsilon");
        bind("--beta", "problem.beta");
        bind("--p", "problem.p");
        bind("--n", "grid.n");
        bind("--dt", "time.dt");
        bind("--t0", "time.t0");
        bind("--composition", "splitting.composition");
        bind("--formulation", "splitting.formulation");
        states.push_back(std::move(state));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (const auto& state : states) {
        if (!state->sub->parsed()) continue;
        try {
            std::optional<std::filesystem::path> file;
            if (!state->config_file.empty()) file = state->config_file;
            const RunConfig config = parse_config(file, state->overrides, state->command);
            return run(config);
        } catch (const BlowupError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 2;
}

}  // namespace nkg
