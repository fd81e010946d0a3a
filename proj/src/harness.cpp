#include "nkg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nkg {

namespace {

constexpr char kMagic[8] = {'N', 'K', 'G', 'R', 'E', 'F', '0', '1'};

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

// %a keeps the key exact; two specs differing in the last bit get distinct
// reference files.
std::string hex_double(double value) { return fmt("%a", value); }

uint64_t fnv1a(const std::string& data) {
    uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

void append_le(std::string& out, uint64_t value) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

void append_le(std::string& out, double value) {
    uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    append_le(out, bits);
}

uint64_t read_le_u64(const char* p) {
    uint64_t value = 0;
    for (int i = 7; i >= 0; --i) value = (value << 8) | static_cast<unsigned char>(p[i]);
    return value;
}

double read_le_f64(const char* p) {
    const uint64_t bits = read_le_u64(p);
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

double wallclock_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* to_string(ProblemKind kind) {
    return kind == ProblemKind::RealWeak ? "real-weak" : "complex-oscillatory";
}
const char* to_string(SweepAxis axis) {
    return axis == SweepAxis::Spatial ? "spatial" : "temporal";
}
const char* to_string(Composition composition) {
    return composition == Composition::TVT ? "tvt" : "vtv";
}
const char* to_string(Formulation formulation) {
    return formulation == Formulation::UV ? "uv" : "psi";
}
const char* to_string(PresetTag tag) {
    switch (tag) {
        case PresetTag::Trig: return "trig";
        case PresetTag::Gaussian: return "gaussian";
        case PresetTag::PlaneWave: return "plane-wave";
        case PresetTag::SingleMode: return "single-mode";
        case PresetTag::Zero: return "zero";
    }
    return "unknown";
}

int grid_size_for(double length, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
    int n = static_cast<int>(std::ceil(length / h - 1e-9));
    if (n % 2 != 0) ++n;
    return std::max(n, 4);
}

void SweepSpec::validate() const {
    base.validate();
    if (values.empty()) throw std::invalid_argument("sweep needs at least one refinement value");
    for (size_t j = 0; j < values.size(); ++j) {
        if (!(values[j] > 0.0)) throw std::invalid_argument("refinement values must be > 0");
        if (j > 0 && !(values[j] < values[j - 1])) {
            throw std::invalid_argument("refinement values must be strictly decreasing");
        }
    }
    const double finest = values.back();
    if (axis == SweepAxis::Spatial && !(reference.h_ref < finest)) {
        throw std::invalid_argument("reference mesh must be finer than every swept h");
    }
    if (axis == SweepAxis::Temporal && !(reference.dt_ref < finest)) {
        throw std::invalid_argument("reference step must be finer than every swept dt");
    }
    if (!(reference.h_ref > 0.0) || !(reference.dt_ref > 0.0)) {
        throw std::invalid_argument("reference resolution must be positive");
    }
    for (double eps : epsilons) {
        if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("epsilon must lie in (0, 1]");
    }
}

std::string reference_key(const ProblemSpec& spec, const ReferenceConfig& ref,
                          Composition composition, Formulation formulation) {
    std::ostringstream key;
    key << to_string(spec.kind) << '|' << spec.p << '|' << hex_double(spec.epsilon) << '|'
        << hex_double(spec.beta) << '|' << hex_double(spec.a) << '|' << hex_double(spec.b)
        << '|' << hex_double(spec.t0) << '|' << to_string(spec.initial.tag) << '|'
        << hex_double(spec.initial.amplitude) << '|' << spec.initial.mode << '|'
        << hex_double(ref.h_ref) << '|' << hex_double(ref.dt_ref) << '|'
        << to_string(composition) << '|' << to_string(formulation);
    return key.str();
}

std::string reference_digest(const ProblemSpec& spec, const ReferenceConfig& ref,
                             Composition composition, Formulation formulation) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a(reference_key(spec, ref, composition, formulation))));
    return buf;
}

ReferenceEntry reference_solution(const ProblemSpec& spec, const ReferenceConfig& ref,
                                  Composition composition, Formulation formulation) {
    const int n = grid_size_for(spec.b - spec.a, ref.h_ref);
    const GridPtr grid = make_grid(spec.a, spec.b, n);
    StepperConfig config{ref.dt_ref, composition, formulation};
    const StatePair final_state = evolve(spec, grid, config);
    return ReferenceEntry{forward(final_state.u), forward(final_state.v), final_state.time};
}

void write_reference_file(const std::filesystem::path& path, const ReferenceEntry& entry) {
    std::string blob;
    const int n = entry.u_hat.grid->n();
    blob.reserve(40 + 32 * static_cast<size_t>(n));
    blob.append(kMagic, sizeof(kMagic));
    append_le(blob, static_cast<uint64_t>(n));
    append_le(blob, entry.u_hat.grid->a());
    append_le(blob, entry.u_hat.grid->b());
    append_le(blob, entry.time);
    for (const auto* spectrum : {&entry.u_hat, &entry.v_hat}) {
        for (const auto& c : spectrum->coeffs) {
            append_le(blob, c.real());
            append_le(blob, c.imag());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write reference file " + path.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

ReferenceEntry read_reference_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read reference file " + path.string());
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (blob.size() < 40 || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("bad reference file header in " + path.string());
    }
    const auto n = static_cast<int>(read_le_u64(blob.data() + 8));
    const double a = read_le_f64(blob.data() + 16);
    const double b = read_le_f64(blob.data() + 24);
    const double time = read_le_f64(blob.data() + 32);
    const size_t expected = 40 + 32 * static_cast<size_t>(n);
    if (blob.size() != expected) {
        throw std::runtime_error("truncated reference file " + path.string());
    }
    const GridPtr grid = make_grid(a, b, n);
    ReferenceEntry entry{make_spectrum(grid), make_spectrum(grid), time};
    const char* p = blob.data() + 40;
    for (auto* spectrum : {&entry.u_hat, &entry.v_hat}) {
        for (auto& c : spectrum->coeffs) {
            c = Complex(read_le_f64(p), read_le_f64(p + 8));
            p += 16;
        }
    }
    return entry;
}

ReferenceCache::ReferenceCache(std::filesystem::path directory) : dir_(std::move(directory)) {
    std::filesystem::create_directories(dir_);
}

ReferenceEntry ReferenceCache::get(const ProblemSpec& spec, const ReferenceConfig& ref,
                                   Composition composition, Formulation formulation) {
    const std::string digest = reference_digest(spec, ref, composition, formulation);
    if (auto it = memory_.find(digest); it != memory_.end()) return it->second;

    const std::filesystem::path path = dir_ / (digest + ".ref");
    const int n = grid_size_for(spec.b - spec.a, ref.h_ref);
    if (std::filesystem::exists(path)) {
        ReferenceEntry entry = read_reference_file(path);
        const double tol = 1e-9 * (1.0 + std::abs(spec.a) + std::abs(spec.b));
        if (entry.u_hat.grid->n() == n && std::abs(entry.u_hat.grid->a() - spec.a) <= tol &&
            std::abs(entry.u_hat.grid->b() - spec.b) <= tol) {
            memory_.emplace(digest, entry);
            return entry;
        }
        // stale or colliding file: fall through and rebuild
    }
    ReferenceEntry entry = reference_solution(spec, ref, composition, formulation);
    write_reference_file(path, entry);
    memory_.emplace(digest, entry);
    return entry;
}

ErrorReport measure_error(const StatePair& numerical, const ReferenceEntry& reference,
                          double sigma) {
    const GridPtr& fine = reference.u_hat.grid;
    if (numerical.u.grid->n() > fine->n()) {
        throw std::invalid_argument("numerical grid is finer than the reference grid");
    }
    Spectrum du = resample(forward(numerical.u), fine);
    Spectrum dv = resample(forward(numerical.v), fine);
    for (size_t k = 0; k < du.coeffs.size(); ++k) {
        du.coeffs[k] -= reference.u_hat.coeffs[k];
        dv.coeffs[k] -= reference.v_hat.coeffs[k];
    }
    ErrorReport report;
    report.error_u = sobolev_norm(du, sigma);
    report.error_v = sobolev_norm(dv, sigma >= 1.0 ? sigma - 1.0 : 0.0);
    return report;
}

SweepResult sweep(const SweepSpec& spec, ReferenceCache* cache) {
    SweepSpec filled = spec;
    if (filled.epsilons.empty()) filled.epsilons = {filled.base.epsilon};
    filled.validate();

    SweepResult result;
    result.spec = filled;
    result.cells.resize(filled.epsilons.size());

    for (size_t i = 0; i < filled.epsilons.size(); ++i) {
        ProblemSpec problem = filled.base;
        problem.epsilon = filled.epsilons[i];
        if (filled.domain_tracks_epsilon) {
            const auto [a, b] = oscillatory_domain(problem.beta, problem.epsilon);
            problem.a = a;
            problem.b = b;
        }
        const double length = problem.b - problem.a;

        ReferenceEntry reference =
            cache ? cache->get(problem, filled.reference, filled.composition, filled.formulation)
                  : reference_solution(problem, filled.reference, filled.composition,
                                       filled.formulation);

        for (double value : filled.values) {
            ErrorReport cell;
            cell.epsilon = problem.epsilon;
            cell.beta = problem.beta;
            cell.axis_value = value;
            const auto start = std::chrono::steady_clock::now();
            try {
                int n;
                StepperConfig config{0.0, filled.composition, filled.formulation};
                if (filled.axis == SweepAxis::Spatial) {
                    n = grid_size_for(length, value);
                    config.dt = filled.reference.dt_ref;
                } else {
                    n = grid_size_for(length, filled.reference.h_ref);
                    config.dt = value;
                }
                const GridPtr grid = make_grid(problem.a, problem.b, n);
                cell.h = grid->h();
                cell.dt = config.dt;
                const StatePair final_state = evolve(problem, grid, config);
                ErrorReport measured = measure_error(final_state, reference, filled.sigma);
                cell.error_u = measured.error_u;
                cell.error_v = measured.error_v;
                if (cell.error_u <= 1e-8) cell.status = "roundoff";
            } catch (const BlowupError&) {
                cell.status = "blowup";
                cell.error_u = std::numeric_limits<double>::quiet_NaN();
                cell.error_v = std::numeric_limits<double>::quiet_NaN();
            }
            cell.wallclock_seconds = wallclock_since(start);
            result.cells[i].push_back(cell);
        }

        // observed orders from successive refinement pairs
        auto& row = result.cells[i];
        for (size_t j = 1; j < row.size(); ++j) {
            if (row[j].ok() && row[j - 1].ok()) {
                row[j].observed_order = refinement_order(
                    row[j - 1].error_u, row[j].error_u, filled.values[j - 1], filled.values[j]);
            }
        }
    }

    result.e_inf.assign(filled.values.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t j = 0; j < filled.values.size(); ++j) {
        double worst = -1.0;
        for (const auto& row : result.cells) {
            if (row[j].ok()) worst = std::max(worst, row[j].error_u);
        }
        if (worst >= 0.0) result.e_inf[j] = worst;
    }
    return result;
}

std::optional<double> refinement_order(double e_prev, double e_curr, double v_prev,
                                       double v_curr) {
    if (!(e_prev > 0.0) || !(e_curr > 0.0) || !std::isfinite(e_prev) || !std::isfinite(e_curr)) {
        return std::nullopt;
    }
    return std::log(e_prev / e_curr) / std::log(v_prev / v_curr);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("slope fit needs at least two samples");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2) throw std::invalid_argument("slope fit needs at least two positive samples");
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("slope fit is degenerate");
    return (count * sxy - sx * sy) / denom;
}

double epsilon_scaling_slope(const SweepResult& result, size_t value_index) {
    std::vector<double> eps, err;
    for (size_t i = 0; i < result.cells.size(); ++i) {
        const auto& row = result.cells[i];
        if (value_index >= row.size()) continue;
        if (row[value_index].ok() && row[value_index].error_u > 0.0) {
            eps.push_back(result.spec.epsilons[i]);
            err.push_back(row[value_index].error_u);
        }
    }
    if (eps.size() < 3) {
        throw std::invalid_argument("epsilon scaling fit needs at least 3 usable cells");
    }
    return log_log_slope(eps, err);
}

void write_csv(const SweepResult& result, std::ostream& out) {
    out << "kind,p,epsilon,beta,axis,axis_value,sigma,error_u,error_v,observed_order,"
           "status,wallclock_seconds\n";
    for (const auto& row : result.cells) {
        for (const auto& cell : row) {
            out << to_string(result.spec.base.kind) << ',' << result.spec.base.p << ','
                << fmt("%.17g", cell.epsilon) << ',' << fmt("%.17g", cell.beta) << ','
                << to_string(result.spec.axis) << ',' << fmt("%.17g", cell.axis_value) << ','
                << fmt("%.17g", result.spec.sigma) << ',' << fmt("%.17g", cell.error_u) << ','
                << fmt("%.17g", cell.error_v) << ','
                << (cell.observed_order ? fmt("%.17g", *cell.observed_order) : std::string())
                << ',' << cell.status << ',' << fmt("%.6f", cell.wallclock_seconds) << '\n';
        }
    }
}

void write_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(result, out);
}

std::string to_json(const SweepResult& result) {
    nlohmann::json spec;
    const auto& s = result.spec;
    spec["kind"] = to_string(s.base.kind);
    spec["p"] = s.base.p;
    spec["beta"] = s.base.beta;
    spec["t0"] = s.base.t0;
    spec["domain"] = {{"a", s.base.a}, {"b", s.base.b}};
    spec["preset"] = {{"tag", to_string(s.base.initial.tag)},
                      {"amplitude", s.base.initial.amplitude},
                      {"mode", s.base.initial.mode}};
    spec["axis"] = to_string(s.axis);
    spec["sigma"] = s.sigma;
    spec["epsilons"] = s.epsilons;
    spec["values"] = s.values;
    spec["reference"] = {{"h", s.reference.h_ref}, {"dt", s.reference.dt_ref}};
    spec["composition"] = to_string(s.composition);
    spec["formulation"] = to_string(s.formulation);
    spec["domain_tracks_epsilon"] = s.domain_tracks_epsilon;
    spec["hash"] = reference_digest(s.base, s.reference, s.composition, s.formulation);

    nlohmann::json cells = nlohmann::json::array();
    for (const auto& row : result.cells) {
        for (const auto& cell : row) {
            nlohmann::json c;
            c["epsilon"] = cell.epsilon;
            c["beta"] = cell.beta;
            c["axis_value"] = cell.axis_value;
            c["h"] = cell.h;
            c["dt"] = cell.dt;
            c["error_u"] = cell.error_u;
            c["error_v"] = cell.error_v;
            if (cell.observed_order) {
                c["observed_order"] = *cell.observed_order;
            } else {
                c["observed_order"] = nullptr;
            }
            c["status"] = cell.status;
            c["wallclock_seconds"] = cell.wallclock_seconds;
            cells.push_back(std::move(c));
        }
    }

    nlohmann::json doc;
    doc["spec"] = std::move(spec);
    doc["cells"] = std::move(cells);
    doc["e_inf"] = result.e_inf;
    doc["version"] = kVersion;
    return doc.dump(2);
}

void write_json(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(result) << '\n';
}

double energy_drift(const ProblemSpec& spec, const GridPtr& grid, const StepperConfig& config,
                    long observe_every) {
    double initial = 0.0;
    double drift = 0.0;
    bool first = true;
    EvolveOptions options;
    options.observe_every = observe_every;
    options.observer = [&](long, const StatePair& state) {
        const double e = energy(spec, state);
        if (first) {
            initial = e;
            first = false;
            return;
        }
        if (initial != 0.0) drift = std::max(drift, std::abs(e - initial) / std::abs(initial));
    };
    evolve(spec, grid, config, options);
    return drift;
}

}  // namespace nkg
