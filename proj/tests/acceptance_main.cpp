// End-to-end acceptance suite. Each check reproduces one published
// benchmark figure of merit at desk scale and prints a single PASS/FAIL
// line; the binary exits nonzero if any check fails. References are
// cached under ./acceptance-cache so reruns are fast.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nkg/harness.hpp"

using namespace nkg;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int g_failures = 0;

void report(int index, const char* title, const Outcome& outcome, double seconds) {
    std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", index,
                title, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++g_failures;
}

void run_check(int index, const char* title, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = check();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(index, title, outcome, seconds);
}

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

ProblemSpec real_spec(double epsilon, double beta) {
    ProblemSpec spec;
    spec.kind = ProblemKind::RealWeak;
    spec.p = 2;
    spec.epsilon = epsilon;
    spec.beta = beta;
    spec.a = 0.0;
    spec.b = 2.0 * kPi;
    spec.t0 = 1.0;
    spec.initial.tag = PresetTag::Trig;
    return spec;
}

ProblemSpec oscillatory_spec(double epsilon, double beta) {
    ProblemSpec spec;
    spec.kind = ProblemKind::ComplexOscillatory;
    spec.p = 3;
    spec.epsilon = epsilon;
    spec.beta = beta;
    std::tie(spec.a, spec.b) = oscillatory_domain(beta, epsilon);
    spec.t0 = 1.0;
    spec.initial.tag = PresetTag::Gaussian;
    return spec;
}

std::vector<double> dyadic(double start, int count, double factor = 2.0) {
    std::vector<double> values(count);
    double v = start;
    for (int i = 0; i < count; ++i) {
        values[i] = v;
        v /= factor;
    }
    return values;
}

ReferenceCache& cache() {
    static ReferenceCache instance("acceptance-cache");
    return instance;
}

// --- criterion 1: spatial spectral accuracy, beta = 0, eps = 1 ---------------

// The published spatial table reports the solution error at the computed
// nodes in the integral-scaled H^1 norm (the plain coefficient-sum norm
// times sqrt(b - a)); measuring that way reproduces its digits, while the
// interpolant error against the zero-padded fine reference adds the
// truncation tail of the missing modes on top.
Outcome spatial_accuracy() {
    const ProblemSpec base = real_spec(1.0, 0.0);
    const ReferenceEntry reference = cache().get(base, {kPi / 64.0, 1e-5});
    const double root_len = std::sqrt(base.b - base.a);

    const double hs[4] = {kPi / 4.0, kPi / 8.0, kPi / 16.0, kPi / 32.0};
    const double published[3] = {1.12e-1, 1.22e-3, 5.03e-6};
    Outcome outcome;
    for (int j = 0; j < 4; ++j) {
        const int n = grid_size_for(base.b - base.a, hs[j]);
        const GridPtr grid = make_grid(base.a, base.b, n);
        const StatePair run = evolve(base, grid, StepperConfig{1e-5});
        Spectrum diff = forward(run.u);
        const Spectrum folded = fold(reference.u_hat, grid);
        for (size_t k = 0; k < diff.coeffs.size(); ++k) diff.coeffs[k] -= folded.coeffs[k];
        const double error = root_len * sobolev_norm(diff, 1.0);
        if (j < 3) {
            if (!(error > published[j] / 2.0 && error < published[j] * 2.0)) {
                outcome.pass = false;
            }
        } else if (!(error <= 1e-10)) {
            outcome.pass = false;
        }
        outcome.detail += fmt("%.3e", error) + " ";
    }
    outcome.detail += "; targets 1.12e-1 1.22e-3 5.03e-6 <=1e-10 (factor 2)";
    return outcome;
}

// --- criterion 2: temporal second order, beta = 0 -----------------------------

Outcome temporal_order() {
    SweepSpec spec;
    spec.base = real_spec(1.0, 0.0);
    spec.axis = SweepAxis::Temporal;
    spec.epsilons = {1.0, 0.5, 0.25};
    spec.values = dyadic(0.1, 7);
    spec.reference = {kPi / 64.0, 1e-5};
    const SweepResult result = sweep(spec, &cache());

    Outcome outcome;
    for (size_t i = 0; i < spec.epsilons.size(); ++i) {
        std::vector<double> errors;
        for (const auto& cell : result.cells[i]) errors.push_back(cell.error_u);
        const double order = log_log_slope(spec.values, errors);
        if (!(std::abs(order - 2.0) <= 0.1)) outcome.pass = false;
        outcome.detail += "eps=" + fmt("%g", spec.epsilons[i]) + " order=" + fmt("%.3f", order) +
                          (i + 1 < spec.epsilons.size() ? ", " : "");
    }
    return outcome;
}

// --- criterion 3: epsilon scaling of the temporal error, beta = 0 -------------

Outcome epsilon_scaling() {
    SweepSpec spec;
    spec.base = real_spec(1.0, 0.0);
    spec.axis = SweepAxis::Temporal;
    spec.epsilons = dyadic(1.0, 6);
    spec.values = {0.05};
    spec.reference = {kPi / 64.0, 1e-5};
    const SweepResult result = sweep(spec, &cache());
    const double slope = epsilon_scaling_slope(result);

    Outcome outcome;
    outcome.pass = std::abs(slope - 2.0) <= 0.3;
    outcome.detail = "slope=" + fmt("%.3f", slope) + ", target 2.0 +- 0.3";
    return outcome;
}

// --- criterion 4: beta = 2 uniformity over the long horizon -------------------

Outcome long_time_uniformity() {
    SweepSpec spec;
    spec.base = real_spec(1.0, 2.0);
    spec.axis = SweepAxis::Temporal;
    spec.epsilons = {1.0, 0.5, 0.25, 0.125};
    spec.values = {0.01};
    spec.reference = {kPi / 64.0, 1e-4};
    const SweepResult result = sweep(spec, &cache());

    double lo = 1e300, hi = 0.0;
    Outcome outcome;
    for (size_t i = 0; i < spec.epsilons.size(); ++i) {
        const auto& cell = result.cells[i][0];
        if (!cell.ok()) {
            outcome.pass = false;
            outcome.detail += "cell eps=" + fmt("%g", spec.epsilons[i]) + " failed; ";
            continue;
        }
        lo = std::min(lo, cell.error_u);
        hi = std::max(hi, cell.error_u);
        outcome.detail += fmt("%.2e", cell.error_u) + " ";
    }
    const double ratio = hi / lo;
    if (!(ratio < 3.0)) outcome.pass = false;
    outcome.detail += "spread=" + fmt("%.2f", ratio) + ", target < 3";
    return outcome;
}

// --- criterion 5: oscillatory temporal table, beta = 1, p = 3 ------------------

// The published oscillatory tables print the combined error functional of
// the rescaled problem, ||u err||_1 + eps^beta ||v err||_0, again in the
// integral-scaled norm; the convergence orders follow the u part alone.
Outcome oscillatory_table() {
    SweepSpec spec;
    spec.base = oscillatory_spec(1.0, 1.0);
    spec.axis = SweepAxis::Temporal;
    spec.epsilons = {1.0, 0.5, 0.25};
    spec.values = dyadic(0.1, 7);
    spec.reference = {1.0 / 16.0, 1e-5};
    spec.domain_tracks_epsilon = true;
    const SweepResult result = sweep(spec, &cache());

    auto combined = [&](size_t i, size_t j) {
        const auto [a, b] = oscillatory_domain(spec.base.beta, spec.epsilons[i]);
        const double weight = std::pow(spec.epsilons[i], spec.base.beta);
        const auto& cell = result.cells[i][j];
        return std::sqrt(b - a) * (cell.error_u + weight * cell.error_v);
    };

    const double published[7] = {2.82e-1, 6.71e-2, 1.66e-2, 4.13e-3, 1.03e-3, 2.58e-4, 6.45e-5};
    Outcome outcome;
    const auto& row = result.cells[0];
    for (int j = 0; j < 7; ++j) {
        const double e = combined(0, j);
        if (!(e > published[j] / 2.0 && e < published[j] * 2.0)) {
            outcome.pass = false;
            outcome.detail += "cell " + std::to_string(j) + "=" + fmt("%.2e", e) + " off; ";
        }
        if (j > 0) {
            const double order = row[j].observed_order.value_or(0.0);
            if (!(std::abs(order - 2.0) <= 0.1)) {
                outcome.pass = false;
                outcome.detail += "order " + std::to_string(j) + "=" + fmt("%.2f", order) + "; ";
            }
        }
        // e_inf over the swept epsilons must reduce to the eps = 1 row
        double worst = 0.0;
        for (size_t i = 0; i < spec.epsilons.size(); ++i) worst = std::max(worst, combined(i, j));
        if (worst != combined(0, j)) {
            outcome.pass = false;
            outcome.detail += "e_inf mismatch at " + std::to_string(j) + "; ";
        }
    }
    outcome.detail += "errors " + fmt("%.2e", combined(0, 0)) + " .. " +
                      fmt("%.2e", combined(0, 6)) + ", e_inf row equals eps=1 row";
    return outcome;
}

// --- criterion 6: oscillatory order breakdown across the k ~ eps^{(3b-p)/2} line

Outcome order_breakdown(double beta, double column_factor) {
    SweepSpec spec;
    spec.base = oscillatory_spec(1.0, beta);
    spec.axis = SweepAxis::Temporal;
    const double step = std::pow(4.0, 1.0 / 3.0);
    spec.epsilons = {1.0, 1.0 / step, 1.0 / (step * step), 0.25};
    spec.values = dyadic(0.1, 5, column_factor);
    spec.reference = {1.0 / 16.0, 1e-4};
    spec.domain_tracks_epsilon = true;
    const SweepResult result = sweep(spec, &cache());

    Outcome outcome;
    bool saw_degraded = false;
    for (size_t i = 0; i < spec.epsilons.size(); ++i) {
        for (size_t j = 1; j < spec.values.size(); ++j) {
            const auto& cell = result.cells[i][j];
            if (!cell.ok() || !cell.observed_order) continue;
            const double order = *cell.observed_order;
            if (j >= i + 1) {  // finer than the diagonal: clean second order
                if (!(std::abs(order - 2.0) <= 0.3)) {
                    outcome.pass = false;
                    outcome.detail += "cell(" + std::to_string(i) + "," + std::to_string(j) +
                                      ") order=" + fmt("%.2f", order) + "; ";
                }
            } else if (j < i) {  // coarser than the diagonal
                if (order < 1.5) saw_degraded = true;
            }
        }
    }
    if (!saw_degraded) {
        outcome.pass = false;
        outcome.detail += "no degraded below-diagonal cell; ";
    }
    outcome.detail += "beta=" + fmt("%g", beta) +
                      ": above-diagonal orders ~2, degraded below-diagonal present";
    return outcome;
}

// --- criterion 7: plane-wave exactness oracle ---------------------------------

Outcome plane_wave_oracle() {
    ProblemSpec spec;
    spec.kind = ProblemKind::ComplexOscillatory;
    spec.p = 3;
    spec.epsilon = 0.5;
    spec.beta = 1.0;
    spec.a = 0.0;
    spec.b = 2.0 * kPi;
    spec.t0 = 1.0;
    spec.initial.tag = PresetTag::PlaneWave;
    spec.initial.amplitude = 1.0;
    spec.initial.mode = 1;
    const GridPtr grid = make_grid(spec.a, spec.b, 32);
    const double omega = dispersion(spec, 1.0, 1.0).omega;

    auto h1_error = [&](double k) {
        const StatePair final_state = evolve(spec, grid, StepperConfig{k});
        ReferenceEntry exact{make_spectrum(grid), make_spectrum(grid), spec.t0};
        const Complex coeff = std::polar(1.0, -omega * spec.t0);
        exact.u_hat.coeff(1) = coeff;
        exact.v_hat.coeff(1) = Complex(0.0, -omega) * coeff;
        return measure_error(final_state, exact, 1.0).error_u;
    };

    const std::vector<double> ks = dyadic(0.1, 5);
    std::vector<double> errors;
    for (double k : ks) errors.push_back(h1_error(k));
    const double slope = log_log_slope(ks, errors);
    const double tiny = h1_error(1e-4);

    Outcome outcome;
    outcome.pass = std::abs(slope - 2.0) <= 0.1 && tiny <= 1e-8;
    outcome.detail =
        "slope=" + fmt("%.3f", slope) + ", error(k=1e-4)=" + fmt("%.2e", tiny) + " <= 1e-8";
    return outcome;
}

// --- criterion 8: property suite (no references) -------------------------------

double state_rel_diff(const StatePair& x, const StatePair& y) {
    double scale = std::max({max_abs(x.u), max_abs(x.v), 1e-300});
    double diff = 0.0;
    for (size_t j = 0; j < x.u.values.size(); ++j) {
        diff = std::max(diff, std::abs(x.u.values[j] - y.u.values[j]));
        diff = std::max(diff, std::abs(x.v.values[j] - y.v.values[j]));
    }
    return diff / scale;
}

double state_error(const StatePair& x, const StatePair& y) {
    Spectrum du = forward(x.u);
    Spectrum dv = forward(x.v);
    const Spectrum yu = forward(y.u);
    const Spectrum yv = forward(y.v);
    for (size_t k = 0; k < du.coeffs.size(); ++k) {
        du.coeffs[k] -= yu.coeffs[k];
        dv.coeffs[k] -= yv.coeffs[k];
    }
    return sobolev_norm(du, 1.0) + sobolev_norm(dv, 0.0);
}

Outcome property_suite() {
    const ProblemSpec spec = real_spec(1.0, 0.0);
    const GridPtr grid = make_grid(spec.a, spec.b, 32);
    const StatePair start = initial_state(spec, grid);
    Outcome outcome;
    auto expect = [&](bool ok, const std::string& label) {
        if (!ok) {
            outcome.pass = false;
            outcome.detail += label + " failed; ";
        }
    };

    // formulation equivalence, per step along a trajectory
    {
        StepperConfig uv{0.01, Composition::TVT, Formulation::UV};
        StepperConfig psi{0.01, Composition::TVT, Formulation::Psi};
        StatePair state = start;
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const StatePair a = strang_step(state, uv, spec);
            const StatePair b = strang_step(state, psi, spec);
            worst = std::max(worst, state_rel_diff(a, b));
            state = a;
        }
        expect(worst < 1e-12, "uv/psi equivalence (" + fmt("%.1e", worst) + ")");
    }

    // time reversibility over 100 steps
    {
        Stepper forward_stepper(grid, spec, StepperConfig{0.01});
        Stepper backward_stepper(grid, spec, StepperConfig{-0.01});
        StatePair state = start;
        for (int i = 0; i < 100; ++i) forward_stepper.advance(state);
        for (int i = 0; i < 100; ++i) backward_stepper.advance(state);
        expect(state_rel_diff(start, state) < 1e-10,
               "reversibility (" + fmt("%.1e", state_rel_diff(start, state)) + ")");
    }

    // linear psi flow is an isometry in every Sobolev norm
    {
        const PsiState psi = to_psi(start, spec);
        const Spectrum before = forward(psi.psi);
        const Spectrum after = forward(linear_flow_psi(psi, 0.77).psi);
        for (double sigma : {0.0, 1.0, 2.0}) {
            const double a = sobolev_norm(before, sigma);
            const double b = sobolev_norm(after, sigma);
            expect(std::abs(a - b) / a < 1e-13, "isometry sigma=" + fmt("%g", sigma));
        }
    }

    // nonlinear flows leave u (resp. Re psi) untouched
    {
        const StatePair kicked = nonlinear_flow_uv(start, 0.3, spec);
        bool exact = true;
        for (size_t j = 0; j < start.u.values.size(); ++j) {
            exact = exact && kicked.u.values[j] == start.u.values[j];
        }
        expect(exact, "uv nonlinear u-invariance");

        const PsiState psi = to_psi(start, spec);
        const PsiState moved = nonlinear_flow_psi(psi, 0.3, spec);
        double drift = 0.0;
        for (size_t j = 0; j < psi.psi.values.size(); ++j) {
            drift = std::max(drift,
                             std::abs(moved.psi.values[j].real() - psi.psi.values[j].real()));
        }
        expect(drift < 1e-14 * max_abs(psi.psi), "psi real-part invariance");
    }

    // realness preservation over a long uv run
    {
        StatePair state = start;
        Stepper stepper(grid, spec, StepperConfig{0.01});
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            stepper.advance(state);
            const double scale = std::max(max_abs(state.u), max_abs(state.v));
            worst = std::max(worst,
                             std::max(max_imag_abs(state.u), max_imag_abs(state.v)) / scale);
        }
        expect(worst <= 1e-12, "realness (" + fmt("%.1e", worst) + ")");
    }

    // energy drift scales like tau^2
    {
        std::vector<double> taus = {0.1, 0.05, 0.025, 0.0125};
        std::vector<double> drifts;
        for (double tau : taus) drifts.push_back(energy_drift(spec, grid, StepperConfig{tau}));
        const double slope = log_log_slope(taus, drifts);
        expect(std::abs(slope - 2.0) <= 0.3, "energy drift slope (" + fmt("%.2f", slope) + ")");
    }

    // richardson self-convergence ratio tends to 4
    {
        auto propagate = [&](double dt, int count) {
            StatePair state = start;
            Stepper stepper(grid, spec, StepperConfig{dt});
            for (int i = 0; i < count; ++i) stepper.advance(state);
            return state;
        };
        const StatePair coarse = propagate(0.01, 1);
        const StatePair medium = propagate(0.005, 2);
        const StatePair fine = propagate(0.0025, 4);
        const double ratio = state_error(coarse, medium) / state_error(medium, fine);
        expect(std::abs(ratio - 4.0) <= 0.4, "richardson ratio (" + fmt("%.2f", ratio) + ")");
    }

    if (outcome.pass) outcome.detail = "all seven properties hold at their stated tolerances";
    return outcome;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    auto wanted = [&](int index) {
        return filter.empty() || filter == std::to_string(index);
    };

    if (wanted(1)) run_check(1, "spatial spectral accuracy (beta=0, eps=1)", spatial_accuracy);
    if (wanted(2)) run_check(2, "temporal second order (beta=0)", temporal_order);
    if (wanted(3)) run_check(3, "epsilon scaling of the temporal error", epsilon_scaling);
    if (wanted(4)) run_check(4, "beta=2 uniformity over the long horizon", long_time_uniformity);
    if (wanted(5)) run_check(5, "oscillatory temporal table (beta=1, p=3)", oscillatory_table);
    if (wanted(6)) {
        run_check(6, "oscillatory order breakdown (beta=2 and beta=3)", [] {
            Outcome two = order_breakdown(2.0, 2.0);
            const Outcome three = order_breakdown(3.0, 4.0);
            two.pass = two.pass && three.pass;
            two.detail += " | " + three.detail;
            return two;
        });
    }
    if (wanted(7)) run_check(7, "plane-wave exactness oracle", plane_wave_oracle);
    if (wanted(8)) run_check(8, "property suite", property_suite);

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
