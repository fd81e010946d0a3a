#include "nkg/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nkg {

namespace {

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

}  // namespace

void ProblemSpec::validate() const {
    if (p < 1) throw std::invalid_argument("nonlinearity exponent p must be >= 1");
    if (!(epsilon > 0.0) || epsilon > 1.0) {
        throw std::invalid_argument("epsilon must lie in (0, 1]");
    }
    if (beta < 0.0 || beta > static_cast<double>(p)) {
        throw std::invalid_argument("beta must lie in [0, p]");
    }
    if (!(b > a)) throw std::invalid_argument("domain requires b > a");
    if (t0 < 0.0) throw std::invalid_argument("t0 must be >= 0");
    if (initial.tag == PresetTag::PlaneWave && initial.amplitude < 0.0) {
        throw std::invalid_argument("plane-wave amplitude must be >= 0");
    }
}

double ProblemSpec::horizon() const {
    if (kind == ProblemKind::RealWeak) return t0 * std::pow(epsilon, -beta);
    return t0;
}

double ProblemSpec::nonlinear_coefficient() const {
    if (kind == ProblemKind::RealWeak) return std::pow(epsilon, p);
    return std::pow(epsilon, p - 2.0 * beta);
}

double ProblemSpec::frequency_scale() const {
    if (kind == ProblemKind::RealWeak) return 1.0;
    return std::pow(epsilon, -beta);
}

StatePair initial_state(const ProblemSpec& spec, const GridPtr& grid) {
    spec.validate();
    const double tol = 1e-9 * (1.0 + std::abs(spec.a) + std::abs(spec.b));
    if (std::abs(grid->a() - spec.a) > tol || std::abs(grid->b() - spec.b) > tol) {
        throw std::invalid_argument("grid domain does not match the problem domain");
    }

    StatePair state{make_field(grid), make_field(grid), 0.0};
    const auto& x = grid->nodes();
    const int n = grid->n();
    const bool oscillatory = spec.kind == ProblemKind::ComplexOscillatory;
    const double vscale = oscillatory ? std::pow(spec.epsilon, -spec.beta) : 1.0;

    switch (spec.initial.tag) {
        case PresetTag::Trig:
            for (int j = 0; j < n; ++j) {
                const double c = std::cos(x[j]);
                state.u.values[j] = 1.5 * std::sin(2.0 * x[j]);
                state.v.values[j] = vscale * 5.0 / (1.0 + c * c);
            }
            break;
        case PresetTag::Gaussian:
            for (int j = 0; j < n; ++j) {
                const double x2 = x[j] * x[j];
                state.u.values[j] = Complex(2.0, 1.0) * std::exp(-0.5 * x2);
                state.v.values[j] = vscale / std::cosh(x2);
            }
            break;
        case PresetTag::PlaneWave: {
            const int mode = spec.initial.mode;
            if (std::abs(mode) >= n / 2) {
                throw std::invalid_argument("plane-wave mode " + std::to_string(mode) +
                                            " is not representable on a grid with n = " +
                                            std::to_string(n));
            }
            const double mu = 2.0 * std::numbers::pi * mode / grid->length();
            const double amp = spec.initial.amplitude;
            const double omega = dispersion(spec, mu, amp).omega;
            for (int j = 0; j < n; ++j) {
                const Complex wave = amp * std::polar(1.0, mu * (x[j] - grid->a()));
                state.u.values[j] = wave;
                state.v.values[j] = Complex(0.0, -omega) * wave;
            }
            break;
        }
        case PresetTag::SingleMode: {
            const int mode = spec.initial.mode;
            if (std::abs(mode) >= n / 2) {
                throw std::invalid_argument("single-mode index " + std::to_string(mode) +
                                            " is not representable on a grid with n = " +
                                            std::to_string(n));
            }
            const double mu = 2.0 * std::numbers::pi * mode / grid->length();
            for (int j = 0; j < n; ++j) {
                state.u.values[j] = std::cos(mu * (x[j] - grid->a()));
            }
            break;
        }
        case PresetTag::Zero:
            break;
    }
    return state;
}

double energy(const ProblemSpec& spec, const StatePair& state) {
    const auto& grid = *state.u.grid;
    const int n = grid.n();

    // du/dx through the interpolant: multiply coefficients by i mu_l.
    Spectrum su = forward(state.u);
    const auto& mu = grid.wavenumbers();
    for (int k = 0; k < n; ++k) su.coeffs[k] *= Complex(0.0, mu[k]);
    const Field du = inverse(su);

    const bool oscillatory = spec.kind == ProblemKind::ComplexOscillatory;
    const double grad_weight = oscillatory ? std::pow(spec.epsilon, -2.0 * spec.beta) : 1.0;
    const double nl_weight =
        2.0 * spec.nonlinear_coefficient() / static_cast<double>(spec.p + 2);

    double quad = 0.0;
    double nl = 0.0;
    for (int j = 0; j < n; ++j) {
        quad += std::norm(state.v.values[j]) +
                grad_weight * (std::norm(du.values[j]) + std::norm(state.u.values[j]));
        if (oscillatory) {
            nl += ipow(std::abs(state.u.values[j]), spec.p + 2);
        } else {
            nl += ipow(state.u.values[j], spec.p + 2).real();
        }
    }
    return grid.h() * (quad + nl_weight * nl);
}

DispersionResult dispersion(const ProblemSpec& spec, double xi, double amplitude) {
    if (amplitude < 0.0) throw std::invalid_argument("dispersion requires amplitude >= 0");
    const double base =
        std::sqrt(1.0 + xi * xi + std::pow(spec.epsilon, spec.p) * ipow(amplitude, spec.p));
    const double scale = spec.frequency_scale();
    return DispersionResult{scale * base, scale * xi / base};
}

std::pair<double, double> oscillatory_domain(double beta, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0) {
        throw std::invalid_argument("epsilon must lie in (0, 1]");
    }
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    const double reach = 8.0 + std::pow(epsilon, -beta);
    return {-reach, reach};
}

}  // namespace nkg
