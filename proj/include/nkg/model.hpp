#pragma once

#include <utility>

#include "nkg/spectral.hpp"

namespace nkg {

/// RealWeak: real scalar field, nonlinearity eps^p u^{p+1}, evolved in
/// physical time t up to t0 / eps^beta.
/// ComplexOscillatory: complex field in rescaled time s = eps^beta t,
/// nonlinearity eps^{p-2 beta} |u|^p u, evolved up to s = t0.
enum class ProblemKind { RealWeak, ComplexOscillatory };

enum class PresetTag {
    Trig,        // u0 = 1.5 sin(2x), u1 = 5 / (1 + cos^2 x)
    Gaussian,    // u0 = (2+i) e^{-x^2/2}, u1 = sech(x^2)
    PlaneWave,   // u0 = A e^{i mu (x-a)}, u1 = -i omega u0
    SingleMode,  // u0 = cos(mu (x-a)), u1 = 0
    Zero,
};

struct InitialPreset {
    PresetTag tag = PresetTag::Trig;
    double amplitude = 1.0;  // PlaneWave only
    int mode = 1;            // PlaneWave / SingleMode
};

struct ProblemSpec {
    ProblemKind kind = ProblemKind::RealWeak;
    int p = 2;
    double epsilon = 1.0;
    double beta = 0.0;
    double a = 0.0;
    double b = 0.0;
    double t0 = 1.0;
    InitialPreset initial;

    /// Throws std::invalid_argument on any broken invariant.
    void validate() const;

    /// Final time in the native clock of the problem: t0 / eps^beta for
    /// RealWeak, t0 for ComplexOscillatory.
    double horizon() const;
    /// Coefficient in front of the pointwise nonlinearity.
    double nonlinear_coefficient() const;
    /// Mode frequencies are zeta_l times this factor.
    double frequency_scale() const;
};

/// Solution value and its time derivative sampled at the nodes.
struct StatePair {
    Field u;
    Field v;
    double time = 0.0;
};

struct DispersionResult {
    double omega;           // positive branch
    double group_velocity;  // d omega / d xi at fixed amplitude
};

/// Samples the preset at the grid nodes; for ComplexOscillatory the
/// derivative field carries the eps^{-beta} rescaling.
StatePair initial_state(const ProblemSpec& spec, const GridPtr& grid);

/// Conserved energy of the continuous flow, evaluated by nodal trapezoid
/// quadrature with the gradient taken spectrally.
double energy(const ProblemSpec& spec, const StatePair& state);

/// Plane-wave time frequency and group velocity for wavenumber xi and
/// amplitude A >= 0 (positive branch).
DispersionResult dispersion(const ProblemSpec& spec, double xi, double amplitude);

/// Interval (-8 - eps^{-beta}, 8 + eps^{-beta}), wide enough that periodic
/// wrap-around stays negligible over one rescaled time unit.
std::pair<double, double> oscillatory_domain(double beta, double epsilon);

}  // namespace nkg
