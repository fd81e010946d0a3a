#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nkg/integrator.hpp"

namespace nkg {

inline constexpr const char* kVersion = "0.1.0";

/// One measured cell of a convergence sweep.
struct ErrorReport {
    double epsilon = 0.0;
    double beta = 0.0;
    double h = 0.0;
    double dt = 0.0;
    double axis_value = 0.0;
    double error_u = 0.0;             // H^sigma norm of the u difference
    double error_v = 0.0;             // H^{sigma-1} norm of the v difference
    std::optional<double> observed_order;
    /// "ok", "roundoff" (error below 1e-8, digits dominated by floating
    /// point drift rather than discretization), or "blowup".
    std::string status = "ok";
    double wallclock_seconds = 0.0;

    bool ok() const { return status != "blowup"; }
};

enum class SweepAxis { Spatial, Temporal };

struct ReferenceConfig {
    double h_ref = 0.0;
    double dt_ref = 0.0;
};

struct SweepSpec {
    ProblemSpec base;
    SweepAxis axis = SweepAxis::Temporal;
    std::vector<double> epsilons;      // defaults to {base.epsilon} when empty
    std::vector<double> values;        // h or dt, strictly decreasing
    ReferenceConfig reference;
    double sigma = 1.0;
    Composition composition = Composition::TVT;
    Formulation formulation = Formulation::UV;
    /// Recompute the domain as oscillatory_domain(beta, eps) per cell; only
    /// meaningful for ComplexOscillatory problems whose interval widens as
    /// eps shrinks.
    bool domain_tracks_epsilon = false;

    void validate() const;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<std::vector<ErrorReport>> cells;  // [epsilon][value]
    std::vector<double> e_inf;                    // per value, max over eps of error_u
};

/// Final-state coefficients of a fine run, used as the comparison target.
struct ReferenceEntry {
    Spectrum u_hat;
    Spectrum v_hat;
    double time = 0.0;
};

/// Smallest even n with (b - a) / n <= h.
int grid_size_for(double length, double h);

/// Canonical content key of a reference run (every field that changes the
/// resulting spectra participates).
std::string reference_key(const ProblemSpec& spec, const ReferenceConfig& ref,
                          Composition composition, Formulation formulation);
/// 16-hex-digit FNV-1a digest of reference_key.
std::string reference_digest(const ProblemSpec& spec, const ReferenceConfig& ref,
                             Composition composition, Formulation formulation);

/// Runs the problem at the reference resolution and returns its final
/// spectra (uncached).
ReferenceEntry reference_solution(const ProblemSpec& spec, const ReferenceConfig& ref,
                                  Composition composition = Composition::TVT,
                                  Formulation formulation = Formulation::UV);

/// Disk cache of reference spectra, content-addressed by reference_digest.
/// Files hold a fixed header (magic, n, a, b, time) followed by the raw
/// little-endian re/im pairs of both spectra.
class ReferenceCache {
public:
    explicit ReferenceCache(std::filesystem::path directory);

    ReferenceEntry get(const ProblemSpec& spec, const ReferenceConfig& ref,
                       Composition composition = Composition::TVT,
                       Formulation formulation = Formulation::UV);

    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::map<std::string, ReferenceEntry> memory_;
};

void write_reference_file(const std::filesystem::path& path, const ReferenceEntry& entry);
ReferenceEntry read_reference_file(const std::filesystem::path& path);

/// H^sigma error of u and H^{sigma-1} error of v against the reference,
/// with the coarse spectra zero-padded onto the reference grid.
ErrorReport measure_error(const StatePair& numerical, const ReferenceEntry& reference,
                          double sigma);

/// Runs every (epsilon, value) cell, fills per-row observed orders from
/// successive error ratios and the column-wise e_inf row. A cell that
/// blows up is recorded with status "blowup" and the sweep continues.
SweepResult sweep(const SweepSpec& spec, ReferenceCache* cache = nullptr);

/// log(e_prev / e_curr) / log(v_prev / v_curr); empty unless both errors
/// are positive and finite.
std::optional<double> refinement_order(double e_prev, double e_curr, double v_prev,
                                       double v_curr);

/// Least-squares slope of log(error_u) against log(epsilon) down one value
/// column. Throws when fewer than 3 usable cells exist.
double epsilon_scaling_slope(const SweepResult& result, size_t value_index = 0);

/// Least-squares slope of log y against log x over positive samples.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Columns: kind, p, epsilon, beta, axis, axis_value, sigma, error_u,
/// error_v, observed_order, status, wallclock_seconds. Identical sweeps
/// produce identical bytes except for the wallclock column.
void write_csv(const SweepResult& result, std::ostream& out);
void write_csv(const SweepResult& result, const std::filesystem::path& path);

/// {"spec": ..., "cells": [...], "e_inf": [...], "version": ...}
std::string to_json(const SweepResult& result);
void write_json(const SweepResult& result, const std::filesystem::path& path);

/// Max of |E(t) - E(0)| / |E(0)| over the run, sampling every
/// observe_every steps.
double energy_drift(const ProblemSpec& spec, const GridPtr& grid, const StepperConfig& config,
                    long observe_every = 1);

const char* to_string(ProblemKind kind);
const char* to_string(SweepAxis axis);
const char* to_string(Composition composition);
const char* to_string(Formulation formulation);
const char* to_string(PresetTag tag);

}  // namespace nkg
