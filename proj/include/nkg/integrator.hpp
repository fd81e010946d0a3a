#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "nkg/model.hpp"

namespace nkg {

/// TVT: half linear flow, full nonlinear kick, half linear flow.
/// VTV: the reverse symmetric arrangement.
enum class Composition { TVT, VTV };

/// UV steps the (u, v) pair directly; Psi steps the complex combination
/// psi = u - i <grad>^{-1} v. The two are algebraically equivalent for
/// real data; Psi is only defined for RealWeak problems.
enum class Formulation { UV, Psi };

struct StepperConfig {
    double dt = 1e-2;
    Composition composition = Composition::TVT;
    Formulation formulation = Formulation::UV;

    void validate(const ProblemSpec& spec) const;
};

struct PsiState {
    Field psi;
    double time = 0.0;
};

struct BlowupError : std::runtime_error {
    BlowupError(long step_index, double when);
    long step;
    double time;
};

PsiState to_psi(const StatePair& state, const ProblemSpec& spec);
StatePair from_psi(const PsiState& state);

/// Exact flow of the linear part: per-mode rotation of (u_l, v_l) with
/// frequency Omega_l = zeta_l * frequency_scale. Any t, including
/// negative, is valid.
StatePair linear_flow_uv(const StatePair& state, double t, const ProblemSpec& spec);

/// Exact flow of the nonlinear part: u unchanged, v decremented by
/// t * coeff * (pointwise nonlinearity of u).
StatePair nonlinear_flow_uv(const StatePair& state, double t, const ProblemSpec& spec);

/// Multiplies each psi coefficient by e^{i t zeta_l}; preserves every
/// Sobolev norm.
PsiState linear_flow_psi(const PsiState& state, double t);

/// psi += eps^p t i <grad>^{-1} (Re psi)^{p+1}; Re psi is untouched.
PsiState nonlinear_flow_psi(const PsiState& state, double t, const ProblemSpec& spec);

/// One full symmetric splitting step of size config.dt; advances time.
StatePair strang_step(const StatePair& state, const StepperConfig& config,
                      const ProblemSpec& spec);
PsiState strang_step(const PsiState& state, const StepperConfig& config,
                     const ProblemSpec& spec);

/// Precomputed multiplier tables for repeated steps with one fixed
/// (grid, problem, config) triple. Not safe for concurrent use; evolve
/// owns one per run.
class Stepper {
public:
    Stepper(GridPtr grid, const ProblemSpec& spec, const StepperConfig& config);

    void advance(StatePair& state);
    void advance(PsiState& state);

private:
    struct RotationTables {
        std::vector<double> cos;       // cos(t Omega_l) / n
        std::vector<double> sin_over;  // sin(t Omega_l) / (Omega_l n)
        std::vector<double> sin_times; // -Omega_l sin(t Omega_l) / n
    };

    RotationTables rotation_tables(double t) const;
    std::vector<Complex> phase_table(double t) const;
    void linear_uv(StatePair& state, const RotationTables& tables);
    void nonlinear_uv(StatePair& state, double t) const;
    void linear_psi(PsiState& state, const std::vector<Complex>& phase);
    void nonlinear_psi(PsiState& state, double t);

    GridPtr grid_;
    ProblemSpec spec_;
    StepperConfig config_;
    double nl_coeff_;
    RotationTables half_, full_;
    std::vector<Complex> phase_half_, phase_full_;
    std::vector<Complex> scratch_a_, scratch_b_;
};

struct EvolveOptions {
    /// Invoke the observer every this many steps (0 = final state only).
    long observe_every = 0;
    std::function<void(long step, const StatePair& state)> observer;
};

/// Builds the initial state from the preset and composes Strang steps up
/// to the problem horizon. A non-dividing dt gets one trailing short
/// step. Throws BlowupError when the state stops being finite or its
/// amplitude passes 1e12.
StatePair evolve(const ProblemSpec& spec, const GridPtr& grid, const StepperConfig& config,
                 const EvolveOptions& options = {});

}  // namespace nkg
