#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace nkg {

using Complex = std::complex<double>;

class SpectralGrid;
using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Uniform periodic grid on [a, b) with an even number of nodes and the
/// symmetric mode set {-n/2, ..., n/2 - 1}. Owns the FFT plans for its
/// size so repeated transforms on the same grid reuse them. Immutable
/// after construction; transforms on distinct buffers may run from
/// several threads at once.
class SpectralGrid {
public:
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    double a() const { return a_; }
    double b() const { return b_; }
    int n() const { return n_; }
    double h() const { return (b_ - a_) / n_; }
    double length() const { return b_ - a_; }

    /// Node positions x_j = a + j h for j = 0..n-1 (x_n wraps to x_0).
    const std::vector<double>& nodes() const { return nodes_; }
    /// Wavenumbers mu_l = 2 pi l / (b - a) in storage-bucket order.
    const std::vector<double>& wavenumbers() const { return wavenumbers_; }
    /// Symbols zeta_l = sqrt(1 + mu_l^2), same ordering as wavenumbers().
    const std::vector<double>& symbols() const { return symbols_; }

    /// Signed mode of storage bucket k; bucket n/2 holds the Nyquist mode -n/2.
    int mode_of_bucket(int k) const { return k < n_ / 2 ? k : k - n_; }
    /// Storage bucket of signed mode l in [-n/2, n/2).
    int bucket_of_mode(int l) const { return l >= 0 ? l : l + n_; }

    bool same_domain(const SpectralGrid& other) const;

    /// Unnormalized DFT: out_k = sum_j in_j e^{-+2 pi i jk/n}. The buffers
    /// must not alias each other.
    void dft(const Complex* in, Complex* out, bool inverse) const;

private:
    friend GridPtr make_grid(double a, double b, int n);
    SpectralGrid(double a, double b, int n);

    double a_;
    double b_;
    int n_;
    std::vector<double> nodes_;
    std::vector<double> wavenumbers_;
    std::vector<double> symbols_;
    void* plan_forward_ = nullptr;
    void* plan_inverse_ = nullptr;
};

/// Throws std::invalid_argument unless b > a, n is even and n >= 4.
GridPtr make_grid(double a, double b, int n);

/// Nodal complex amplitudes; the periodic value at x_n is not stored.
struct Field {
    GridPtr grid;
    std::vector<Complex> values;
};

/// Fourier coefficients indexed by signed mode, stored in bucket order.
struct Spectrum {
    GridPtr grid;
    std::vector<Complex> coeffs;

    Complex coeff(int mode) const { return coeffs[grid->bucket_of_mode(mode)]; }
    Complex& coeff(int mode) { return coeffs[grid->bucket_of_mode(mode)]; }
};

Field make_field(GridPtr grid);
Spectrum make_spectrum(GridPtr grid);

/// Interpolation coefficients c_l = (1/n) sum_j z_j e^{-i mu_l (x_j - a)}.
Spectrum forward(const Field& field);

/// Nodal values z_j = sum_l c_l e^{i mu_l (x_j - a)}.
Field inverse(const Spectrum& spectrum);

/// Multiply each coefficient by zeta_l^alpha. alpha = 1 applies
/// sqrt(1 - Laplacian), alpha = -1 its inverse; zeta_l >= 1 keeps every
/// power well defined.
Spectrum apply_symbol(const Spectrum& spectrum, double alpha);

/// sqrt(sum_l (1 + mu_l^2)^sigma |c_l|^2). sigma = 0 is the plain l^2
/// norm of the coefficients; fractional sigma is allowed.
double sobolev_norm(const Spectrum& spectrum, double sigma);

/// Zero-pad onto a grid with at least as many modes over the same domain.
/// Preserves sobolev_norm for every sigma.
Spectrum resample(const Spectrum& spectrum, const GridPtr& target);

/// Alias-fold onto a grid with at most as many modes over the same domain:
/// the result is the transform of the source interpolant sampled at the
/// coarse nodes, i.e. coefficients congruent mod n accumulate.
Spectrum fold(const Spectrum& spectrum, const GridPtr& target);

double max_abs(const Field& field);
double max_imag_abs(const Field& field);

}  // namespace nkg
