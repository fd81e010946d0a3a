#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "nkg/harness.hpp"

namespace nkg {

enum class Command { Simulate, SweepSpace, SweepTime, DispersionCheck, EnergyDrift };

struct RunConfig {
    Command command = Command::Simulate;
    ProblemSpec problem;
    int grid_n = 128;
    StepperConfig stepper;
    std::vector<double> sweep_epsilons;
    std::vector<double> sweep_values;
    double sigma = 1.0;
    ReferenceConfig reference;  // zeros mean "derive kind-specific defaults"
    std::filesystem::path out = "out";
};

/// Flat key = value config text. Recognized keys: problem.kind, problem.p,
/// problem.epsilon, problem.beta, problem.preset, preset.amplitude,
/// preset.mode, domain.a, domain.b, grid.n, time.dt, time.t0,
/// splitting.composition, splitting.formulation, sweep.epsilons,
/// sweep.values, sweep.sigma, reference.h, reference.dt, output.path.
/// Flag-supplied overrides win over file keys; unknown keys, malformed
/// values and invariant violations are rejected with the key named in the
/// message.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& overrides, Command command);

/// Executes one command; returns the process exit status. Artifacts land
/// under config.out.
int run(const RunConfig& config);

/// Full argv front end (subcommand + flags); used by the binary and by
/// in-process tests.
int run_cli(int argc, const char* const* argv);

}  // namespace nkg
