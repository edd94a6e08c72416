#include "dispersion_lab/runner.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/estimate_experiments.hpp"
#include "dispersion_lab/parallel.hpp"
#include "dispersion_lab/resolvent_checks.hpp"
#include "dispersion_lab/scattering.hpp"

#ifndef DISPERSION_LAB_VERSION
#define DISPERSION_LAB_VERSION "unknown"
#endif

namespace dispersion_lab {

namespace {

using json = nlohmann::ordered_json;

// NaN and infinities are not JSON numbers.
json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& columns) {
        out_ << "# schema=1\n";
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n' << std::setprecision(17);
    }
    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << v;
            first = false;
        }
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

struct Result {
    json body = json::object();
    std::string csv;
    std::vector<std::string> warnings;
    bool hypothesis_violation = false;
};

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = lo * std::pow(hi / lo, frac);
    }
    return out;
}

std::size_t as_count(double v) { return static_cast<std::size_t>(std::llround(v)); }

PotentialGrid config_potential(const ExperimentConfig& c) {
    return sample_potential(c.potential, Grid(c.grid.L_box, c.grid.n_points));
}

json fit_json(const EstimateReport& r) {
    if (!r.fit) return nullptr;
    return json{{"slope", number(r.fit->slope)},
                {"intercept", number(r.fit->intercept)},
                {"ci_low", number(r.fit->ci_low)},
                {"ci_high", number(r.fit->ci_high)}};
}

// Common JSON and CSV for estimate-style experiments.
Result from_estimate(const EstimateReport& r, const std::string& abscissa_name,
                     const std::string& value_name) {
    Result out;
    out.body["fitted_slope"] = r.fit ? number(r.fit->slope) : json(nullptr);
    out.body["fit"] = fit_json(r);
    out.body["n_paths"] = r.n_paths;
    json metrics = json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
    out.body["metrics"] = metrics;
    out.body["n_samples"] = r.abscissa.size();

    std::vector<std::string> columns{abscissa_name, value_name};
    std::vector<const std::vector<double>*> extra;
    for (const auto& [name, series] : r.series) {
        if (series.size() != r.abscissa.size()) continue;
        columns.push_back(name);
        extra.push_back(&series);
    }
    Csv csv(columns);
    for (std::size_t i = 0; i < r.abscissa.size(); ++i) {
        std::vector<double> row{r.abscissa[i], r.values[i]};
        for (const auto* s : extra) row.push_back((*s)[i]);
        csv.row(row);
    }
    out.csv = csv.str();
    out.warnings = r.warnings;
    out.hypothesis_violation = r.hypothesis_violation;
    return out;
}

Result run_scatter_sweep(const ExperimentConfig& c) {
    const PotentialGrid pot = config_potential(c);
    const auto lambdas = default_lambda_sweep(c.potential, as_count(c.param("n_lambda")));
    const auto rows = scattering_sweep(pot, lambdas);
    double unitarity = 0.0;
    double sigma = 0.0;
    for (const auto& row : rows) {
        unitarity = std::max(unitarity, std::abs(std::norm(row.transmission) + std::norm(row.reflection) - 1.0));
        const auto profile = wronskian_profile(jost_solution(pot, row.lambda, JostSign::plus),
                                               jost_solution(pot, row.lambda, JostSign::minus));
        cplx mean = 0.0;
        for (cplx w : profile) mean += w;
        mean /= static_cast<double>(profile.size());
        double var = 0.0;
        for (cplx w : profile) var += std::norm(w - mean);
        sigma = std::max(sigma, std::sqrt(var / static_cast<double>(profile.size())) / std::abs(mean));
    }
    Result out;
    out.body["metrics"] = {{"max_unitarity_defect", number(unitarity)},
                           {"max_wronskian_relative_sigma", number(sigma)},
                           {"n_lambda", rows.size()}};
    out.body["resonance_at_zero"] = rows.empty() ? json(nullptr) : json(rows.front().resonance_at_zero.value_or(false));
    std::ostringstream csv;
    write_scattering_csv(csv, rows);
    out.csv = csv.str();
    return out;
}

Result run_resonance(const ExperimentConfig& c) {
    const PotentialGrid pot = config_potential(c);
    const double tol = c.param("tolerance");
    const bool resonant = detect_resonance(pot, tol);
    const cplx w0 = jost_wronskian(pot, 0.0);
    Csv csv({"lambda", "re_W", "im_W", "abs_W"});
    for (std::size_t i = 0; i <= 100; ++i) {
        const double l = 0.01 * static_cast<double>(i);
        const cplx w = jost_wronskian(pot, l);
        csv.row({l, w.real(), w.imag(), std::abs(w)});
    }
    Result out;
    out.body["resonant"] = resonant;
    out.body["metrics"] = {{"abs_W0", number(std::abs(w0))},
                           {"threshold", number(tol * std::max(1.0, weighted_l1_norm(c.potential, 0)))}};
    out.csv = csv.str();
    return out;
}

Result run_resolvent_check(const ExperimentConfig& c) {
    ResolventCheckOptions o;
    o.jost_half_width = c.grid.L_box;
    o.jost_points = c.grid.n_points;
    o.oracle_half_width = c.param("oracle_half_width");
    o.oracle_spacing = c.param("oracle_spacing");
    o.epsilon_per_lambda = c.param("epsilon_per_lambda");
    Csv csv({"lambda", "x", "y", "re_jost", "im_jost", "re_reference", "im_reference", "relative_error"});
    double worst = 0.0;
    json per_lambda = json::object();
    for (double lambda : {0.5, 1.0, 2.0}) {
        const auto r = check_jost_resolvent(c.potential, lambda, o);
        for (const auto& p : r.probes) {
            csv.row({lambda, p.x, p.y, p.jost.real(), p.jost.imag(), p.oracle.real(), p.oracle.imag(),
                     p.relative_error});
        }
        worst = std::max(worst, r.max_relative_error);
        std::ostringstream key;
        key << "lambda_" << lambda;
        per_lambda[key.str()] = number(r.max_relative_error);
    }
    Result out;
    out.body["metrics"] = {{"max_relative_error", number(worst)}, {"per_lambda", per_lambda}};
    out.csv = csv.str();
    return out;
}

Result run_born_check(const ExperimentConfig& c) {
    BornCheckOptions o;
    o.energy_factor = c.param("energy_factor");
    o.n_max = static_cast<int>(c.param("n_max"));
    o.born_half_width = c.grid.L_box;
    o.born_points = c.grid.n_points;
    o.source_width = c.param("source_width");
    o.refinement = as_count(c.param("refinement"));
    o.oracle_half_width = c.param("oracle_half_width");
    o.epsilon = c.param("epsilon");
    const auto r = check_born_series(c.potential, o);
    Csv csv({"n", "term_sup_norm", "ratio_to_previous"});
    for (std::size_t n = 0; n < r.term_sup_norms.size(); ++n) {
        csv.row({static_cast<double>(n), r.term_sup_norms[n],
                 n == 0 ? std::numeric_limits<double>::quiet_NaN() : r.term_ratios[n - 1]});
    }
    Result out;
    out.body["metrics"] = {{"energy", number(r.energy)},
                           {"lambda0", number(r.lambda0)},
                           {"ratio_bound", number(r.ratio_bound)},
                           {"max_term_ratio", number(r.max_term_ratio)},
                           {"relative_error", number(r.relative_error)}};
    out.csv = csv.str();
    return out;
}

Result run_stone_density(const ExperimentConfig& c) {
    HamiltonianOptions ho;
    ho.backend = SpectralBackend::dense;
    const auto H = build_hamiltonian(config_potential(c), ho);
    const auto k = static_cast<Eigen::Index>(as_count(c.param("mode")));
    const auto& ev = H.eigenvalues();
    const double lk = ev[k];
    const double spacing = 0.5 * (ev[k + 1] - ev[k - 1]);
    const double eps = c.param("epsilon_fraction") * spacing;
    const double half = c.param("window_spacings") * spacing;
    const bool boundary = c.param("boundary") != 0.0;
    const double a = boundary ? lk : lk - half;
    const double b = boundary ? lk + 2.0 * half : lk + half;
    const State f = H.eigenvectors().col(k).cast<cplx>();
    const auto est = stone_spectral_density(H, a, b, eps, as_count(c.param("n_lambda")), f);
    const double mass = est.integral();
    const double lorentz = (std::atan((b - lk) / eps) - std::atan((a - lk) / eps)) / std::numbers::pi;
    Csv csv({"lambda", "density"});
    for (std::size_t i = 0; i < est.lambda_grid.size(); ++i) csv.row({est.lambda_grid[i], est.density[i]});
    Result out;
    out.body["metrics"] = {{"mass", number(mass)},
                           {"ideal_mass", boundary ? 0.5 : 1.0},
                           {"lorentzian_mass", number(lorentz)},
                           {"eigenvalue", number(lk)},
                           {"spacing", number(spacing)},
                           {"epsilon", number(eps)},
                           {"a", number(a)},
                           {"b", number(b)}};
    out.csv = csv.str();
    out.warnings = est.warnings;
    return out;
}

Result run_sde_convergence(const ExperimentConfig& c) {
    const auto H = build_hamiltonian(config_potential(c));
    SdeConvergenceOptions o;
    o.horizon = c.stochastic.T;
    o.n_paths = c.stochastic.n_paths;
    o.seed = c.stochastic.seed;
    o.energy_cutoff = c.param("energy_cutoff");
    const std::size_t levels = as_count(c.param("levels"));
    o.step_counts.clear();
    for (std::size_t j = levels; j-- > 0;) o.step_counts.push_back(c.stochastic.n_steps >> j);
    const auto r = sde_convergence_experiment(H, gaussian_state(H.grid(), c.param("u0_width"), 2.0), o);
    return from_estimate(r, "dt", "mean_l2_error");
}

Result run_dispersive(const ExperimentConfig& c) {
    const auto H = build_hamiltonian(config_potential(c));
    const BrownianEnsemble ens(c.stochastic.T, c.stochastic.n_steps, c.stochastic.n_paths, c.stochastic.seed);
    DispersiveOptions o;
    const double width = c.param("u0_width");
    o.t_min = c.param("t_min");
    o.t_max = c.stochastic.T;
    o.times_per_path = as_count(c.param("times_per_path"));
    o.project = c.param("project") != 0.0;
    const double resolution = std::max(H.grid().spacing(), width);
    o.beta_min = c.param("beta_min") > 0.0 ? c.param("beta_min") : resolution * resolution;
    const auto r = dispersive_experiment(H, ens, gaussian_state(H.grid(), width, 1.0), o);
    return from_estimate(r, "abs_beta", "sup_norm");
}

Result run_expectation_decay(const ExperimentConfig& c) {
    const BrownianEnsemble ens(c.stochastic.T, c.stochastic.n_steps, c.stochastic.n_paths, c.stochastic.seed);
    ExpectationDecayOptions o;
    o.p = c.param("p");
    o.t_min = c.param("t_min");
    o.t_max = c.stochastic.T;
    o.n_times = as_count(c.param("n_times"));
    EstimateReport r;
    if (c.param("abscissa_only") != 0.0) {
        r = expectation_decay_abscissa_only(ens, o);
    } else {
        const auto H = build_hamiltonian(config_potential(c));
        r = expectation_decay_experiment(H, ens, gaussian_state(H.grid(), c.param("u0_width"), 1.0), o);
        r.metrics["gaussian_constant"] = std::pow(normal_abs_moment(-o.p / 2.0), 1.0 / o.p);
    }
    return from_estimate(r, "t", "moment");
}

Result run_convolution_lemma(const ExperimentConfig& c) {
    ConvolutionLemmaOptions o;
    o.alpha = c.param("alpha");
    o.horizons = geometric_grid(c.param("T_min"), c.stochastic.T, as_count(c.param("n_horizons")));
    o.n_paths = c.stochastic.n_paths;
    o.n_steps = c.stochastic.n_steps;
    o.seed = c.stochastic.seed;
    const double f = c.param("forcing");
    o.forcing = [f](double) { return f; };
    return from_estimate(convolution_lemma_experiment(o), "T", "lhs");
}

StrichartzOptions strichartz_options(const ExperimentConfig& c) {
    StrichartzOptions o;
    o.rho = c.norms.rho;
    o.r = c.norms.r;
    o.p = c.norms.p;
    o.horizons = geometric_grid(c.param("T_min"), c.stochastic.T, as_count(c.param("n_horizons")));
    o.n_paths = c.stochastic.n_paths;
    o.n_times = c.stochastic.n_steps;
    o.seed = c.stochastic.seed;
    return o;
}

Result run_strichartz_hom(const ExperimentConfig& c) {
    const auto H = build_hamiltonian(config_potential(c));
    auto o = strichartz_options(c);
    o.project = c.param("project") != 0.0;
    const auto r = strichartz_homogeneous_experiment(H, gaussian_state(H.grid(), c.param("u0_width"), 2.0), o);
    return from_estimate(r, "T", "lhs");
}

Result run_strichartz_inhom(const ExperimentConfig& c) {
    const auto H = build_hamiltonian(config_potential(c));
    const auto o = strichartz_options(c);
    const State g = gaussian_state(H.grid(), c.param("forcing_width"), holder_conjugate(o.p));
    return from_estimate(strichartz_inhomogeneous_experiment(H, g, o), "T", "lhs");
}

Result dispatch(const ExperimentConfig& c) {
    using K = ExperimentKind;
    switch (c.experiment) {
        case K::scatter_sweep: return run_scatter_sweep(c);
        case K::resonance: return run_resonance(c);
        case K::resolvent_check: return run_resolvent_check(c);
        case K::born_check: return run_born_check(c);
        case K::stone_density: return run_stone_density(c);
        case K::sde_convergence: return run_sde_convergence(c);
        case K::dispersive: return run_dispersive(c);
        case K::expectation_decay: return run_expectation_decay(c);
        case K::convolution_lemma: return run_convolution_lemma(c);
        case K::strichartz_hom: return run_strichartz_hom(c);
        case K::strichartz_inhom: return run_strichartz_inhom(c);
    }
    throw ContractViolation("unhandled experiment kind");
}

json versions() {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    return json{{"dispersion_lab", DISPERSION_LAB_VERSION},
                {"eigen", eigen.str()},
                {"fftw", std::string(fftw_version)},
                {"compiler", std::string(__VERSION__)},
                {"cxx_standard", static_cast<long>(__cplusplus)}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string library_version() { return DISPERSION_LAB_VERSION; }

ExperimentArtifacts execute_experiment(const ExperimentConfig& config) {
    const auto issues = validate_config(config);
    if (!issues.empty()) {
        std::string msg;
        for (const auto& i : issues) msg += (msg.empty() ? "" : "\n") + i;
        throw ValidationError(msg);
    }
    const auto start = std::chrono::steady_clock::now();
    Result result = dispatch(config);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string hash = config_hash(config);
    json report;
    report["experiment"] = std::string(to_string(config.experiment));
    report["config_hash"] = hash;
    report["seed"] = config.stochastic.seed;
    report["status"] = result.hypothesis_violation ? "hypothesis_violation" : "ok";
    report["hypothesis_violation"] = result.hypothesis_violation;
    report["warnings"] = result.warnings;
    report["potential"] = {{"family", std::string(to_string(config.potential.family))},
                           {"amplitude", number(config.potential.amplitude)},
                           {"width", number(config.potential.width)}};
    report["grid"] = {{"n_points", config.grid.n_points}, {"L_box", number(config.grid.L_box)}};
    for (auto& [key, value] : result.body.items()) report[key] = value;

    json manifest;
    manifest["config_hash"] = hash;
    manifest["seed"] = config.stochastic.seed;
    manifest["experiment"] = std::string(to_string(config.experiment));
    manifest["versions"] = versions();
    manifest["workers"] = worker_count();
    manifest["elapsed_seconds"] = elapsed;
    manifest["config"] = serialize_config(config);

    ExperimentArtifacts out;
    out.report_json = report.dump(2) + "\n";
    out.data_csv = std::move(result.csv);
    out.manifest_json = manifest.dump(2) + "\n";
    out.warnings = std::move(result.warnings);
    out.hypothesis_violation = result.hypothesis_violation;
    return out;
}

RunOutcome run_experiment(ExperimentConfig config, const RunOverrides& overrides) {
    if (overrides.seed) config.stochastic.seed = *overrides.seed;
    if (overrides.output_dir) config.output_dir = overrides.output_dir->string();

    RunOutcome outcome;
    outcome.output_dir = config.output_dir;
    outcome.config_hash = config_hash(config);
    const auto issues = validate_config(config);
    if (!issues.empty()) {
        outcome.exit_code = kExitError;
        outcome.messages = issues;
        return outcome;
    }
    try {
        const ExperimentArtifacts artifacts = execute_experiment(config);
        std::filesystem::create_directories(outcome.output_dir);
        write_file(outcome.output_dir / "report.json", artifacts.report_json);
        write_file(outcome.output_dir / "data.csv", artifacts.data_csv);
        write_file(outcome.output_dir / "manifest.json", artifacts.manifest_json);
        for (const auto& w : artifacts.warnings) outcome.messages.push_back("warning: " + w);
        outcome.exit_code = artifacts.hypothesis_violation ? kExitHypothesisViolation : kExitSuccess;
    } catch (const std::exception& e) {
        outcome.exit_code = kExitError;
        outcome.messages.push_back(std::string("error: ") + e.what());
    }
    return outcome;
}

RunOutcome run_config_file(const std::filesystem::path& path, const RunOverrides& overrides) {
    ExperimentConfig config;
    try {
        config = load_config(path);
    } catch (const Error& e) {
        RunOutcome outcome;
        outcome.exit_code = kExitError;
        std::istringstream lines(e.what());
        for (std::string line; std::getline(lines, line);) outcome.messages.push_back(line);
        return outcome;
    }
    return run_experiment(std::move(config), overrides);
}

RunOutcome validate_config_file(const std::filesystem::path& path) {
    RunOutcome outcome;
    try {
        const ExperimentConfig config = load_config(path);
        outcome.output_dir = config.output_dir;
        outcome.config_hash = config_hash(config);
        outcome.messages = validate_config(config);
    } catch (const Error& e) {
        std::istringstream lines(e.what());
        for (std::string line; std::getline(lines, line);) outcome.messages.push_back(line);
    }
    outcome.exit_code = outcome.messages.empty() ? kExitSuccess : kExitError;
    return outcome;
}

std::string list_experiments() {
    std::ostringstream out;
    std::size_t width = 0;
    for (const auto& e : experiment_catalog()) width = std::max(width, e.name.size());
    for (const auto& e : experiment_catalog()) {
        out << std::left << std::setw(static_cast<int>(width + 2)) << e.name << e.tagline << '\n';
    }
    return out.str();
}

}  // namespace dispersion_lab
