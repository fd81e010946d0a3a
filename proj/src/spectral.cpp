#include "nkg/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nkg {

namespace {

// The FFTW planner is not thread-safe; plan execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
const fftw_complex* as_fftw(const Complex* p) {
    return reinterpret_cast<const fftw_complex*>(p);
}

}  // namespace

SpectralGrid::SpectralGrid(double a, double b, int n) : a_(a), b_(b), n_(n) {
    if (!(b > a)) {
        throw std::invalid_argument("grid domain requires b > a, got [" +
                                    std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    if (n < 4 || n % 2 != 0) {
        throw std::invalid_argument("grid size must be even and >= 4, got " +
                                    std::to_string(n));
    }

    const double len = b - a;
    const double step = len / n;
    nodes_.resize(n);
    wavenumbers_.resize(n);
    symbols_.resize(n);
    for (int j = 0; j < n; ++j) nodes_[j] = a + j * step;
    for (int k = 0; k < n; ++k) {
        const int l = mode_of_bucket(k);
        const double mu = 2.0 * std::numbers::pi * l / len;
        wavenumbers_[k] = mu;
        symbols_[k] = std::sqrt(1.0 + mu * mu);
    }

    std::vector<Complex> in(n), out(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_UNALIGNED lets the plans execute on any caller buffer later.
    plan_forward_ = fftw_plan_dft_1d(n, as_fftw(in.data()), as_fftw(out.data()),
                                     FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_inverse_ = fftw_plan_dft_1d(n, as_fftw(in.data()), as_fftw(out.data()),
                                     FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_forward_ == nullptr || plan_inverse_ == nullptr) {
        if (plan_forward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
        if (plan_inverse_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
        throw std::runtime_error("failed to create FFT plans for n = " + std::to_string(n));
    }
}

SpectralGrid::~SpectralGrid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_forward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
    if (plan_inverse_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

bool SpectralGrid::same_domain(const SpectralGrid& other) const {
    const double tol = 1e-12 * (std::abs(a_) + std::abs(b_) + length());
    return std::abs(a_ - other.a_) <= tol && std::abs(b_ - other.b_) <= tol;
}

void SpectralGrid::dft(const Complex* in, Complex* out, bool inverse) const {
    auto plan = static_cast<fftw_plan>(inverse ? plan_inverse_ : plan_forward_);
    fftw_execute_dft(plan, const_cast<fftw_complex*>(as_fftw(in)), as_fftw(out));
}

GridPtr make_grid(double a, double b, int n) {
    return GridPtr(new SpectralGrid(a, b, n));
}

Field make_field(GridPtr grid) {
    const size_t n = static_cast<size_t>(grid->n());
    return Field{std::move(grid), std::vector<Complex>(n)};
}

Spectrum make_spectrum(GridPtr grid) {
    const size_t n = static_cast<size_t>(grid->n());
    return Spectrum{std::move(grid), std::vector<Complex>(n)};
}

Spectrum forward(const Field& field) {
    const int n = field.grid->n();
    if (static_cast<int>(field.values.size()) != n) {
        throw std::invalid_argument("field length does not match its grid");
    }
    Spectrum s{field.grid, std::vector<Complex>(n)};
    field.grid->dft(field.values.data(), s.coeffs.data(), /*inverse=*/false);
    const double scale = 1.0 / n;
    for (auto& c : s.coeffs) c *= scale;
    return s;
}

Field inverse(const Spectrum& spectrum) {
    const int n = spectrum.grid->n();
    if (static_cast<int>(spectrum.coeffs.size()) != n) {
        throw std::invalid_argument("spectrum length does not match its grid");
    }
    Field f{spectrum.grid, std::vector<Complex>(n)};
    spectrum.grid->dft(spectrum.coeffs.data(), f.values.data(), /*inverse=*/true);
    return f;
}

Spectrum apply_symbol(const Spectrum& spectrum, double alpha) {
    Spectrum out = spectrum;
    const auto& zeta = spectrum.grid->symbols();
    for (size_t k = 0; k < out.coeffs.size(); ++k) {
        out.coeffs[k] *= std::pow(zeta[k], alpha);
    }
    return out;
}

double sobolev_norm(const Spectrum& spectrum, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("sobolev_norm requires sigma >= 0");
    const auto& zeta = spectrum.grid->symbols();
    double acc = 0.0;
    for (size_t k = 0; k < spectrum.coeffs.size(); ++k) {
        const double w = std::pow(zeta[k] * zeta[k], sigma);
        acc += w * std::norm(spectrum.coeffs[k]);
    }
    return std::sqrt(acc);
}

Spectrum resample(const Spectrum& spectrum, const GridPtr& target) {
    const auto& src = *spectrum.grid;
    if (!src.same_domain(*target)) {
        throw std::invalid_argument("resample requires matching domains");
    }
    if (target->n() < src.n()) {
        throw std::invalid_argument("resample only zero-pads onto a grid with n >= source n");
    }
    Spectrum out{target, std::vector<Complex>(target->n())};
    for (int k = 0; k < src.n(); ++k) {
        const int l = src.mode_of_bucket(k);
        out.coeffs[target->bucket_of_mode(l)] = spectrum.coeffs[k];
    }
    return out;
}

Spectrum fold(const Spectrum& spectrum, const GridPtr& target) {
    const auto& src = *spectrum.grid;
    if (!src.same_domain(*target)) {
        throw std::invalid_argument("fold requires matching domains");
    }
    const int n = target->n();
    if (n > src.n()) {
        throw std::invalid_argument("fold only aliases onto a grid with n <= source n");
    }
    Spectrum out{target, std::vector<Complex>(n)};
    for (int k = 0; k < src.n(); ++k) {
        int l = src.mode_of_bucket(k) % n;
        if (l < -n / 2) l += n;
        if (l >= n / 2) l -= n;
        out.coeffs[target->bucket_of_mode(l)] += spectrum.coeffs[k];
    }
    return out;
}

double max_abs(const Field& field) {
    double m = 0.0;
    for (const auto& z : field.values) m = std::max(m, std::abs(z));
    return m;
}

double max_imag_abs(const Field& field) {
    double m = 0.0;
    for (const auto& z : field.values) m = std::max(m, std::abs(z.imag()));
    return m;
}

}  // namespace nkg
