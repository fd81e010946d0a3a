#include "nkg/integrator.hpp"

#include <cmath>
#include <string>

namespace nkg {

namespace {

constexpr double kBlowupThreshold = 1e12;

double ipow(double base, int exponent) {
    double r = 1.0;
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}

Complex ipow(Complex base, int exponent) {
    Complex r = 1.0;
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}

bool finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void StepperConfig::validate(const ProblemSpec& spec) const {
    // negative steps are legal (the composition is time symmetric)
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be nonzero");
    if (spec.kind == ProblemKind::ComplexOscillatory && formulation == Formulation::Psi) {
        throw std::invalid_argument(
            "the psi formulation is only defined for the real problem; "
            "complex-oscillatory runs use the (u, v) formulation");
    }
}

BlowupError::BlowupError(long step_index, double when)
    : std::runtime_error("solution blew up at step " + std::to_string(step_index) +
                         " (t = " + std::to_string(when) + ")"),
      step(step_index),
      time(when) {}

PsiState to_psi(const StatePair& state, const ProblemSpec& spec) {
    if (spec.kind != ProblemKind::RealWeak) {
        throw std::invalid_argument("to_psi is only defined for the real problem");
    }
    const Field w = inverse(apply_symbol(forward(state.v), -1.0));
    PsiState out{make_field(state.u.grid), state.time};
    for (size_t j = 0; j < out.psi.values.size(); ++j) {
        out.psi.values[j] = state.u.values[j] - Complex(0.0, 1.0) * w.values[j];
    }
    return out;
}

StatePair from_psi(const PsiState& state) {
    StatePair out{make_field(state.psi.grid), make_field(state.psi.grid), state.time};
    Field imag_part = make_field(state.psi.grid);
    for (size_t j = 0; j < state.psi.values.size(); ++j) {
        out.u.values[j] = state.psi.values[j].real();
        imag_part.values[j] = -state.psi.values[j].imag();
    }
    out.v = inverse(apply_symbol(forward(imag_part), 1.0));
    return out;
}

StatePair linear_flow_uv(const StatePair& state, double t, const ProblemSpec& spec) {
    const auto& grid = *state.u.grid;
    const double scale = spec.frequency_scale();
    Spectrum su = forward(state.u);
    Spectrum sv = forward(state.v);
    const auto& zeta = grid.symbols();
    for (int k = 0; k < grid.n(); ++k) {
        const double omega = scale * zeta[k];
        const double c = std::cos(t * omega);
        const double s = std::sin(t * omega);
        const Complex uk = su.coeffs[k];
        const Complex vk = sv.coeffs[k];
        su.coeffs[k] = c * uk + (s / omega) * vk;
        sv.coeffs[k] = -omega * s * uk + c * vk;
    }
    return StatePair{inverse(su), inverse(sv), state.time};
}

StatePair nonlinear_flow_uv(const StatePair& state, double t, const ProblemSpec& spec) {
    StatePair out = state;
    const double coeff = t * spec.nonlinear_coefficient();
    if (spec.kind == ProblemKind::RealWeak) {
        for (size_t j = 0; j < out.v.values.size(); ++j) {
            out.v.values[j] -= coeff * ipow(out.u.values[j], spec.p + 1);
        }
    } else {
        for (size_t j = 0; j < out.v.values.size(); ++j) {
            const Complex u = out.u.values[j];
            out.v.values[j] -= coeff * ipow(std::abs(u), spec.p) * u;
        }
    }
    return out;
}

PsiState linear_flow_psi(const PsiState& state, double t) {
    Spectrum s = forward(state.psi);
    const auto& zeta = state.psi.grid->symbols();
    for (size_t k = 0; k < s.coeffs.size(); ++k) {
        s.coeffs[k] *= std::polar(1.0, t * zeta[k]);
    }
    return PsiState{inverse(s), state.time};
}

PsiState nonlinear_flow_psi(const PsiState& state, double t, const ProblemSpec& spec) {
    if (spec.kind != ProblemKind::RealWeak) {
        throw std::invalid_argument("the psi nonlinear flow is only defined for the real problem");
    }
    Field g = make_field(state.psi.grid);
    for (size_t j = 0; j < g.values.size(); ++j) {
        g.values[j] = ipow(state.psi.values[j].real(), spec.p + 1);
    }
    const Field kick = inverse(apply_symbol(forward(g), -1.0));
    const double coeff = t * spec.nonlinear_coefficient();
    PsiState out = state;
    for (size_t j = 0; j < out.psi.values.size(); ++j) {
        out.psi.values[j] += coeff * Complex(0.0, 1.0) * kick.values[j];
    }
    return out;
}

StatePair strang_step(const StatePair& state, const StepperConfig& config,
                      const ProblemSpec& spec) {
    config.validate(spec);
    if (config.formulation == Formulation::Psi) {
        return from_psi(strang_step(to_psi(state, spec), config, spec));
    }
    StatePair out = state;
    Stepper stepper(state.u.grid, spec, config);
    stepper.advance(out);
    return out;
}

PsiState strang_step(const PsiState& state, const StepperConfig& config,
                     const ProblemSpec& spec) {
    config.validate(spec);
    if (spec.kind != ProblemKind::RealWeak) {
        throw std::invalid_argument("psi stepping is only defined for the real problem");
    }
    StepperConfig psi_config = config;  // stepping a PsiState is the psi formulation
    psi_config.formulation = Formulation::Psi;
    PsiState out = state;
    Stepper stepper(state.psi.grid, spec, psi_config);
    stepper.advance(out);
    return out;
}

Stepper::Stepper(GridPtr grid, const ProblemSpec& spec, const StepperConfig& config)
    : grid_(std::move(grid)),
      spec_(spec),
      config_(config),
      nl_coeff_(spec.nonlinear_coefficient()),
      scratch_a_(grid_->n()),
      scratch_b_(grid_->n()) {
    config_.validate(spec_);
    if (config_.formulation == Formulation::UV) {
        half_ = rotation_tables(0.5 * config_.dt);
        if (config_.composition == Composition::VTV) full_ = rotation_tables(config_.dt);
    } else {
        phase_half_ = phase_table(0.5 * config_.dt);
        if (config_.composition == Composition::VTV) phase_full_ = phase_table(config_.dt);
    }
}

Stepper::RotationTables Stepper::rotation_tables(double t) const {
    const int n = grid_->n();
    const double scale = spec_.frequency_scale();
    const double norm = 1.0 / n;  // folds the inverse-transform scaling in
    RotationTables tables;
    tables.cos.resize(n);
    tables.sin_over.resize(n);
    tables.sin_times.resize(n);
    const auto& zeta = grid_->symbols();
    for (int k = 0; k < n; ++k) {
        const double omega = scale * zeta[k];
        const double c = std::cos(t * omega);
        const double s = std::sin(t * omega);
        tables.cos[k] = c * norm;
        tables.sin_over[k] = s / omega * norm;
        tables.sin_times[k] = -omega * s * norm;
    }
    return tables;
}

std::vector<Complex> Stepper::phase_table(double t) const {
    const int n = grid_->n();
    std::vector<Complex> phase(n);
    const auto& zeta = grid_->symbols();
    for (int k = 0; k < n; ++k) phase[k] = std::polar(1.0 / n, t * zeta[k]);
    return phase;
}

void Stepper::linear_uv(StatePair& state, const RotationTables& tables) {
    const int n = grid_->n();
    grid_->dft(state.u.values.data(), scratch_a_.data(), /*inverse=*/false);
    grid_->dft(state.v.values.data(), scratch_b_.data(), /*inverse=*/false);
    for (int k = 0; k < n; ++k) {
        const Complex uk = scratch_a_[k];
        const Complex vk = scratch_b_[k];
        scratch_a_[k] = tables.cos[k] * uk + tables.sin_over[k] * vk;
        scratch_b_[k] = tables.sin_times[k] * uk + tables.cos[k] * vk;
    }
    grid_->dft(scratch_a_.data(), state.u.values.data(), /*inverse=*/true);
    grid_->dft(scratch_b_.data(), state.v.values.data(), /*inverse=*/true);
}

void Stepper::nonlinear_uv(StatePair& state, double t) const {
    const double coeff = t * nl_coeff_;
    if (spec_.kind == ProblemKind::RealWeak) {
        for (size_t j = 0; j < state.v.values.size(); ++j) {
            state.v.values[j] -= coeff * ipow(state.u.values[j], spec_.p + 1);
        }
    } else {
        for (size_t j = 0; j < state.v.values.size(); ++j) {
            const Complex u = state.u.values[j];
            state.v.values[j] -= coeff * ipow(std::abs(u), spec_.p) * u;
        }
    }
}

void Stepper::linear_psi(PsiState& state, const std::vector<Complex>& phase) {
    grid_->dft(state.psi.values.data(), scratch_a_.data(), /*inverse=*/false);
    for (size_t k = 0; k < phase.size(); ++k) scratch_a_[k] *= phase[k];
    grid_->dft(scratch_a_.data(), state.psi.values.data(), /*inverse=*/true);
}

void Stepper::nonlinear_psi(PsiState& state, double t) {
    const int n = grid_->n();
    for (int j = 0; j < n; ++j) {
        scratch_a_[j] = ipow(state.psi.values[j].real(), spec_.p + 1);
    }
    grid_->dft(scratch_a_.data(), scratch_b_.data(), /*inverse=*/false);
    const auto& zeta = grid_->symbols();
    const double coeff = t * nl_coeff_ / n;
    for (int k = 0; k < n; ++k) {
        scratch_b_[k] *= Complex(0.0, coeff / zeta[k]);
    }
    grid_->dft(scratch_b_.data(), scratch_a_.data(), /*inverse=*/true);
    for (int j = 0; j < n; ++j) state.psi.values[j] += scratch_a_[j];
}

void Stepper::advance(StatePair& state) {
    if (config_.formulation != Formulation::UV) {
        throw std::logic_error("stepper was built for the psi formulation");
    }
    if (config_.composition == Composition::TVT) {
        linear_uv(state, half_);
        nonlinear_uv(state, config_.dt);
        linear_uv(state, half_);
    } else {
        nonlinear_uv(state, 0.5 * config_.dt);
        linear_uv(state, full_);
        nonlinear_uv(state, 0.5 * config_.dt);
    }
    state.time += config_.dt;
}

void Stepper::advance(PsiState& state) {
    if (config_.formulation != Formulation::Psi) {
        throw std::logic_error("stepper was built for the (u, v) formulation");
    }
    if (config_.composition == Composition::TVT) {
        linear_psi(state, phase_half_);
        nonlinear_psi(state, config_.dt);
        linear_psi(state, phase_half_);
    } else {
        nonlinear_psi(state, 0.5 * config_.dt);
        linear_psi(state, phase_full_);
        nonlinear_psi(state, 0.5 * config_.dt);
    }
    state.time += config_.dt;
}

namespace {

void check_finite(const Field& field, long step, double time) {
    for (const auto& z : field.values) {
        if (!finite(z) || std::abs(z) > kBlowupThreshold) throw BlowupError(step, time);
    }
}

struct StepPlan {
    long full_steps = 0;
    double trailing = 0.0;
};

StepPlan plan_steps(double horizon, double dt) {
    StepPlan plan;
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, rounded)) {
        plan.full_steps = static_cast<long>(rounded);
    } else {
        plan.full_steps = static_cast<long>(std::floor(ratio));
        plan.trailing = horizon - plan.full_steps * dt;
    }
    return plan;
}

// Long-run driver that keeps the state in coefficient space between steps,
// so a fused block of m steps costs one inverse and one forward transform
// per step. Between nonlinear kicks the trailing and leading half
// rotations of adjacent steps combine into one full rotation; the result
// is the same composition with half the roundoff of stepping nodally.
class FusedLoop {
public:
    FusedLoop(GridPtr grid, const ProblemSpec& spec, const StepperConfig& config)
        : grid_(std::move(grid)),
          spec_(spec),
          config_(config),
          kick_scale_(spec.nonlinear_coefficient() / grid_->n()),
          psi_mode_(config.formulation == Formulation::Psi),
          u_hat_(grid_->n()),
          v_hat_(grid_->n()),
          nodal_(grid_->n()),
          scratch_(grid_->n()) {
        const int n = grid_->n();
        const double scale = spec_.frequency_scale();
        const auto& zeta = grid_->symbols();
        cos_half_.resize(n);
        sin_over_half_.resize(n);
        sin_times_half_.resize(n);
        cos_full_.resize(n);
        sin_over_full_.resize(n);
        sin_times_full_.resize(n);
        phase_half_.resize(n);
        phase_full_.resize(n);
        inv_symbol_.resize(n);
        for (int k = 0; k < n; ++k) {
            const double omega = scale * zeta[k];
            const double th = 0.5 * config_.dt * omega;
            const double tf = config_.dt * omega;
            cos_half_[k] = std::cos(th);
            sin_over_half_[k] = std::sin(th) / omega;
            sin_times_half_[k] = -omega * std::sin(th);
            cos_full_[k] = std::cos(tf);
            sin_over_full_[k] = std::sin(tf) / omega;
            sin_times_full_[k] = -omega * std::sin(tf);
            phase_half_[k] = std::polar(1.0, 0.5 * config_.dt * zeta[k]);
            phase_full_[k] = std::polar(1.0, config_.dt * zeta[k]);
            inv_symbol_[k] = 1.0 / zeta[k];
        }
    }

    void load(const StatePair& state) {
        const double scale = 1.0 / grid_->n();
        if (psi_mode_) {
            const PsiState psi = to_psi(state, spec_);
            grid_->dft(psi.psi.values.data(), u_hat_.data(), /*inverse=*/false);
            for (auto& c : u_hat_) c *= scale;
        } else {
            grid_->dft(state.u.values.data(), u_hat_.data(), /*inverse=*/false);
            grid_->dft(state.v.values.data(), v_hat_.data(), /*inverse=*/false);
            for (auto& c : u_hat_) c *= scale;
            for (auto& c : v_hat_) c *= scale;
        }
    }

    void store(StatePair& state) const {
        if (psi_mode_) {
            PsiState psi{make_field(grid_), state.time};
            grid_->dft(u_hat_.data(), psi.psi.values.data(), /*inverse=*/true);
            StatePair recovered = from_psi(psi);
            state.u = std::move(recovered.u);
            state.v = std::move(recovered.v);
        } else {
            grid_->dft(u_hat_.data(), state.u.values.data(), /*inverse=*/true);
            grid_->dft(v_hat_.data(), state.v.values.data(), /*inverse=*/true);
        }
    }

    /// Runs `count` full steps; `base` is the absolute index of the last
    /// completed step, used for blow-up reporting.
    void run_block(long count, long base) {
        if (count <= 0) return;
        if (config_.composition == Composition::TVT) {
            rotate_half();
            kick(config_.dt, base + 1);
            for (long i = 1; i < count; ++i) {
                rotate_full();
                kick(config_.dt, base + i + 1);
            }
            rotate_half();
        } else {
            kick(0.5 * config_.dt, base + 1);
            rotate_full();
            for (long i = 1; i < count; ++i) {
                kick(config_.dt, base + i + 1);
                rotate_full();
            }
            kick(0.5 * config_.dt, base + count);
        }
    }

private:
    void rotate(const std::vector<double>& c, const std::vector<double>& so,
                const std::vector<double>& st) {
        if (psi_mode_) return;  // psi rotations are the phase tables
        for (size_t k = 0; k < u_hat_.size(); ++k) {
            const Complex uk = u_hat_[k];
            const Complex vk = v_hat_[k];
            u_hat_[k] = c[k] * uk + so[k] * vk;
            v_hat_[k] = st[k] * uk + c[k] * vk;
        }
    }

    void rotate_half() {
        if (psi_mode_) {
            for (size_t k = 0; k < u_hat_.size(); ++k) u_hat_[k] *= phase_half_[k];
        } else {
            rotate(cos_half_, sin_over_half_, sin_times_half_);
        }
    }

    void rotate_full() {
        if (psi_mode_) {
            for (size_t k = 0; k < u_hat_.size(); ++k) u_hat_[k] *= phase_full_[k];
        } else {
            rotate(cos_full_, sin_over_full_, sin_times_full_);
        }
    }

    void kick(double t, long step_index) {
        const int n = grid_->n();
        const double time = step_index * config_.dt;
        grid_->dft(u_hat_.data(), nodal_.data(), /*inverse=*/true);
        if (psi_mode_) {
            for (int j = 0; j < n; ++j) {
                const Complex z = nodal_[j];
                if (!finite(z) || std::abs(z) > kBlowupThreshold) {
                    throw BlowupError(step_index, time);
                }
                nodal_[j] = ipow(z.real(), spec_.p + 1);
            }
            grid_->dft(nodal_.data(), scratch_.data(), /*inverse=*/false);
            const double coeff = t * kick_scale_;
            for (int k = 0; k < n; ++k) {
                u_hat_[k] += Complex(0.0, coeff * inv_symbol_[k]) * scratch_[k];
            }
        } else {
            if (spec_.kind == ProblemKind::RealWeak) {
                for (int j = 0; j < n; ++j) {
                    const Complex z = nodal_[j];
                    if (!finite(z) || std::abs(z) > kBlowupThreshold) {
                        throw BlowupError(step_index, time);
                    }
                    nodal_[j] = ipow(z, spec_.p + 1);
                }
            } else {
                for (int j = 0; j < n; ++j) {
                    const Complex z = nodal_[j];
                    if (!finite(z) || std::abs(z) > kBlowupThreshold) {
                        throw BlowupError(step_index, time);
                    }
                    nodal_[j] = ipow(std::abs(z), spec_.p) * z;
                }
            }
            grid_->dft(nodal_.data(), scratch_.data(), /*inverse=*/false);
            const double coeff = t * kick_scale_;
            for (int k = 0; k < n; ++k) v_hat_[k] -= coeff * scratch_[k];
        }
    }

    GridPtr grid_;
    ProblemSpec spec_;
    StepperConfig config_;
    double kick_scale_;
    bool psi_mode_;
    std::vector<Complex> u_hat_, v_hat_, nodal_, scratch_;
    std::vector<double> cos_half_, sin_over_half_, sin_times_half_;
    std::vector<double> cos_full_, sin_over_full_, sin_times_full_;
    std::vector<Complex> phase_half_, phase_full_;
    std::vector<double> inv_symbol_;
};

}  // namespace

StatePair evolve(const ProblemSpec& spec, const GridPtr& grid, const StepperConfig& config,
                 const EvolveOptions& options) {
    config.validate(spec);
    if (!(config.dt > 0.0)) throw std::invalid_argument("evolve requires dt > 0");
    StatePair state = initial_state(spec, grid);
    const double horizon = spec.horizon();
    const bool observing = static_cast<bool>(options.observer);
    if (horizon <= 0.0) {
        if (observing) options.observer(0, state);
        return state;
    }
    const StepPlan plan = plan_steps(horizon, config.dt);
    const long final_step = plan.full_steps + (plan.trailing > 0.0 ? 1 : 0);
    const long cadence = observing ? options.observe_every : 0;
    long last_observed = -1;
    if (cadence > 0) {
        options.observer(0, state);
        last_observed = 0;
    }

    FusedLoop loop(grid, spec, config);
    loop.load(state);
    long done = 0;
    while (done < plan.full_steps) {
        long block = plan.full_steps - done;
        if (cadence > 0) block = std::min(block, cadence - done % cadence);
        loop.run_block(block, done);
        done += block;
        state.time = done * config.dt;
        if (cadence > 0 && done % cadence == 0) {
            loop.store(state);
            check_finite(state.u, done, state.time);
            check_finite(state.v, done, state.time);
            options.observer(done, state);
            last_observed = done;
        }
    }
    if (done != last_observed || cadence == 0) loop.store(state);

    if (plan.trailing > 0.0) {
        StepperConfig tail = config;
        tail.dt = plan.trailing;
        FusedLoop last(grid, spec, tail);
        last.load(state);
        last.run_block(1, plan.full_steps);
        last.store(state);
        state.time = horizon;
    }
    check_finite(state.u, final_step, state.time);
    check_finite(state.v, final_step, state.time);

    if (observing && final_step != last_observed) options.observer(final_step, state);
    return state;
}

}  // namespace nkg
