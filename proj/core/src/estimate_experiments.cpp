#include "dispersion_lab/estimate_experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/parallel.hpp"
#include "dispersion_lab/scattering.hpp"

namespace dispersion_lab {

namespace {

double max_over_min(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

std::vector<std::size_t> evenly_spaced_indices(std::size_t first, std::size_t last,
                                               std::size_t count) {
    std::vector<std::size_t> out;
    if (last < first) return out;
    const std::size_t available = last - first + 1;
    if (count >= available) {
        for (std::size_t k = first; k <= last; ++k) out.push_back(k);
        return out;
    }
    for (std::size_t j = 0; j < count; ++j) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(count - 1);
        out.push_back(first + static_cast<std::size_t>(std::llround(frac * static_cast<double>(available - 1))));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Ensemble step indices closest to a geometric t grid on [t_min, t_max].
std::vector<std::size_t> geometric_time_indices(const BrownianEnsemble& ensemble, double t_min,
                                                double t_max, std::size_t n_times) {
    if (!(t_min > 0.0) || !(t_max > t_min)) throw DomainError("need 0 < t_min < t_max");
    if (t_max > ensemble.horizon() * (1.0 + 1e-12)) {
        throw DomainError("t_max lies beyond the ensemble horizon");
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n_times; ++j) {
        const double frac = n_times == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n_times - 1);
        const double t = t_min * std::pow(t_max / t_min, frac);
        const auto k = static_cast<std::size_t>(std::llround(t / ensemble.dt()));
        out.push_back(std::clamp<std::size_t>(k, 1, ensemble.n_steps()));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool is_resonant_nonfree(const PotentialGrid& potential) {
    if (potential.spec.family == PotentialFamily::zero) return false;
    return detect_resonance(potential);
}

// Per-path sup norms at the given ensemble times.
std::vector<std::vector<double>> sup_norm_table(const DiscreteHamiltonian& H,
                                                const BrownianEnsemble& ensemble, const State& u0,
                                                bool project,
                                                std::span<const std::size_t> indices) {
    const State start = project ? project_ac(H, u0) : u0;
    const State coefficients = H.to_eigenbasis(start);
    std::vector<std::vector<double>> table(ensemble.n_paths());
    parallel_for(ensemble.n_paths(), [&](std::size_t p) {
        std::vector<double> taus(indices.size());
        for (std::size_t j = 0; j < indices.size(); ++j) taus[j] = ensemble.value(p, indices[j]);
        const Eigen::MatrixXcd states = propagate_batch_from_coefficients(H, taus, coefficients);
        table[p].resize(indices.size());
        for (std::size_t j = 0; j < indices.size(); ++j) {
            table[p][j] = states.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff();
        }
    });
    return table;
}

std::vector<double> power_means_over_paths(const std::vector<std::vector<double>>& table,
                                           std::span<const std::size_t> paths, double p) {
    const std::size_t n_times = table.front().size();
    std::vector<double> out(n_times, 0.0);
    for (std::size_t j = 0; j < n_times; ++j) {
        double acc = 0.0;
        for (std::size_t path : paths) acc += std::pow(table[path][j], p);
        out[j] = std::pow(acc / static_cast<double>(paths.size()), 1.0 / p);
    }
    return out;
}

// Slope interval from resampling whole paths.
void path_bootstrap_interval(EstimateReport& report, const std::vector<std::vector<double>>& table,
                             double p, const FitOptions& fit) {
    if (!report.fit || fit.bootstrap_resamples == 0) return;
    const std::size_t n_paths = table.size();
    std::mt19937_64 engine(fit.bootstrap_seed);
    std::uniform_int_distribution<std::size_t> pick(0, n_paths - 1);
    FitOptions quiet = fit;
    quiet.bootstrap_resamples = 0;
    std::vector<double> slopes;
    slopes.reserve(fit.bootstrap_resamples);
    std::vector<std::size_t> sample(n_paths);
    for (std::size_t b = 0; b < fit.bootstrap_resamples; ++b) {
        for (auto& s : sample) s = pick(engine);
        const auto values = power_means_over_paths(table, sample, p);
        slopes.push_back(fit_decay_exponent(report.abscissa, values, quiet).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    const auto at = [&](double q) {
        return slopes[static_cast<std::size_t>(std::llround(q * static_cast<double>(slopes.size() - 1)))];
    };
    report.fit->ci_low = std::min(at(0.025), report.fit->slope);
    report.fit->ci_high = std::max(at(0.975), report.fit->slope);
}

void check_expectation_p(double p) {
    if (!(p >= 1.0) || !(p < 2.0)) {
        throw DomainError("expectation decay needs 1 <= p < 2 (the Gaussian average of |beta|^{-p/2} diverges for p >= 2)");
    }
}

}  // namespace

State gaussian_state(const Grid& grid, double width, double p_norm) {
    if (!(width > 0.0)) throw DomainError("Gaussian width must be positive");
    State u(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i) / width;
        u[static_cast<Eigen::Index>(i)] = std::exp(-0.5 * x * x);
    }
    return u / lp_norm_x(u, p_norm, grid);
}

EstimateReport dispersive_experiment(const DiscreteHamiltonian& H, const BrownianEnsemble& ensemble,
                                     const State& u0, const DispersiveOptions& options) {
    EstimateReport report;
    report.n_paths = ensemble.n_paths();
    report.seed = ensemble.seed();
    if (is_resonant_nonfree(H.potential())) {
        report.hypothesis_violation = true;
        report.warnings.push_back("zero-energy resonance detected; the decay hypothesis fails");
    }

    const double l1 = lp_norm_x(u0, 1.0, H.grid());
    if (!(l1 > 0.0)) throw DomainError("initial state has zero L^1 norm");

    const auto first = static_cast<std::size_t>(std::ceil(options.t_min / ensemble.dt() - 1e-9));
    const auto last = std::min(ensemble.n_steps(),
                               static_cast<std::size_t>(std::floor(options.t_max / ensemble.dt() + 1e-9)));
    const auto indices = evenly_spaced_indices(std::max<std::size_t>(first, 1), last,
                                               options.times_per_path);
    if (indices.empty()) throw DomainError("no ensemble times inside [t_min, t_max]");

    const auto table = sup_norm_table(H, ensemble, u0, options.project, indices);

    double largest = 0.0;
    std::size_t censored = 0;
    for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
        for (std::size_t j = 0; j < indices.size(); ++j) {
            const double x = std::abs(ensemble.value(p, indices[j]));
            const double v = table[p][j] / l1;
            largest = std::max(largest, v);
            if (x < options.beta_min || !(v > 0.0)) {
                ++censored;
                continue;
            }
            report.abscissa.push_back(x);
            report.values.push_back(v);
        }
    }
    report.metrics["max_sup_norm"] = largest;
    report.metrics["censored_samples"] = static_cast<double>(censored);
    report.metrics["beta_min"] = options.beta_min;
    if (largest < options.zero_threshold) {
        report.warnings.push_back("propagated state vanishes (sup-norm below threshold); no fit");
        return report;
    }
    try {
        report.fit = fit_decay_exponent(report.abscissa, report.values, options.fit);
    } catch (const ConditioningError& e) {
        // A failed hypothesis already explains a degenerate sample.
        if (!report.hypothesis_violation) throw;
        report.warnings.push_back(std::string("no fit: ") + e.what());
    }
    return report;
}

EstimateReport expectation_decay_experiment(const DiscreteHamiltonian& H,
                                            const BrownianEnsemble& ensemble, const State& u0,
                                            const ExpectationDecayOptions& options) {
    check_expectation_p(options.p);
    EstimateReport report;
    report.n_paths = ensemble.n_paths();
    report.seed = ensemble.seed();
    if (is_resonant_nonfree(H.potential())) {
        report.hypothesis_violation = true;
        report.warnings.push_back("zero-energy resonance detected; the decay hypothesis fails");
    }
    const double l1 = lp_norm_x(u0, 1.0, H.grid());
    const auto indices = geometric_time_indices(ensemble, options.t_min, options.t_max, options.n_times);
    auto table = sup_norm_table(H, ensemble, u0, options.project, indices);
    for (auto& row : table) {
        for (double& v : row) v /= l1;
    }

    std::vector<std::size_t> all(ensemble.n_paths());
    for (std::size_t p = 0; p < all.size(); ++p) all[p] = p;
    for (std::size_t k : indices) report.abscissa.push_back(ensemble.time(k));
    report.values = power_means_over_paths(table, all, options.p);
    report.metrics["p"] = options.p;

    FitOptions quiet = options.fit;
    quiet.bootstrap_resamples = 0;
    report.fit = fit_decay_exponent(report.abscissa, report.values, quiet);
    path_bootstrap_interval(report, table, options.p, options.fit);
    return report;
}

EstimateReport expectation_decay_abscissa_only(const BrownianEnsemble& ensemble,
                                               const ExpectationDecayOptions& options) {
    check_expectation_p(options.p);
    EstimateReport report;
    report.n_paths = ensemble.n_paths();
    report.seed = ensemble.seed();
    const auto indices = geometric_time_indices(ensemble, options.t_min, options.t_max, options.n_times);
    std::vector<std::vector<double>> table(ensemble.n_paths(), std::vector<double>(indices.size()));
    std::size_t censored = 0;
    for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
        for (std::size_t j = 0; j < indices.size(); ++j) {
            const double b = std::abs(ensemble.value(p, indices[j]));
            if (b == 0.0) {
                ++censored;
                table[p][j] = 0.0;
            } else {
                table[p][j] = 1.0 / std::sqrt(b);
            }
        }
    }
    std::vector<std::size_t> all(ensemble.n_paths());
    for (std::size_t p = 0; p < all.size(); ++p) all[p] = p;
    for (std::size_t k : indices) report.abscissa.push_back(ensemble.time(k));
    report.values = power_means_over_paths(table, all, options.p);
    report.metrics["p"] = options.p;
    report.metrics["censored_samples"] = static_cast<double>(censored);
    report.metrics["gaussian_constant"] = std::pow(normal_abs_moment(-options.p / 2.0), 1.0 / options.p);

    FitOptions quiet = options.fit;
    quiet.bootstrap_resamples = 0;
    report.fit = fit_decay_exponent(report.abscissa, report.values, quiet);
    path_bootstrap_interval(report, table, options.p, options.fit);
    return report;
}

double normal_abs_moment(double q) {
    if (!(q > -1.0)) throw DomainError("E|Z|^q diverges for q <= -1");
    // z = s^m with m = 1/(q+1) turns z^q dz into m s^{mq+m-1} ds = m ds for q < 0.
    const double m = std::max(1.0, 1.0 / (q + 1.0));
    const double z_max = 14.0;
    const double s_max = std::pow(z_max, 1.0 / m);
    const std::size_t n = 200000;
    const double h = s_max / static_cast<double>(n);
    std::vector<double> f(n + 1);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i <= n; ++i) {
        const double z = std::pow(h * static_cast<double>(i), m);
        const double s_i = h * static_cast<double>(i);
        const double jac = m == 1.0 ? std::pow(z, q) : m;
        f[i] = (s_i == 0.0 && q > 0.0 ? 0.0 : jac) * norm * std::exp(-0.5 * z * z);
    }
    return 2.0 * simpson(f, h);
}

EstimateReport convolution_lemma_experiment(const ConvolutionLemmaOptions& options) {
    if (!(options.alpha >= 0.0) || !(options.alpha < 1.0)) {
        throw DomainError("convolution bound needs alpha in [0, 1)");
    }
    if (options.horizons.empty()) throw DomainError("empty horizon grid");
    EstimateReport report;
    report.n_paths = options.n_paths;
    report.seed = options.seed;
    const double alpha = options.alpha;
    std::vector<double> ratios;

    for (std::size_t m = 0; m < options.horizons.size(); ++m) {
        const double T = options.horizons[m];
        const BrownianEnsemble ens(T, options.n_steps, options.n_paths, mix_seed(options.seed, m));
        const std::size_t n = options.n_steps;
        const double dt = ens.dt();
        std::vector<double> f_abs(n + 1);
        for (std::size_t k = 0; k <= n; ++k) f_abs[k] = std::abs(options.forcing(ens.time(k)));

        std::vector<double> per_path(options.n_paths);
        parallel_for(options.n_paths, [&](std::size_t p) {
            const auto beta = ens.values(p);
            std::vector<double> squared(n + 1, 0.0);
            for (std::size_t i = 1; i <= n; ++i) {
                double inner = 0.0;
                for (std::size_t j = 0; j < i; ++j) {
                    const double diff = std::abs(beta[i] - beta[j]);
                    if (alpha == 0.0) {
                        inner += f_abs[j];
                    } else if (diff > 0.0) {
                        inner += std::pow(diff, -alpha) * f_abs[j];
                    }
                }
                inner *= dt;
                squared[i] = inner * inner;
            }
            per_path[p] = simpson(squared, dt);
        });
        double lhs = 0.0;
        for (double v : per_path) lhs += v;
        lhs /= static_cast<double>(options.n_paths);

        std::vector<double> f_sq(n + 1);
        for (std::size_t k = 0; k <= n; ++k) f_sq[k] = f_abs[k] * f_abs[k];
        const double rhs = std::pow(T, 2.0 - alpha) * simpson(f_sq, dt);
        report.abscissa.push_back(T);
        report.values.push_back(lhs);
        ratios.push_back(lhs / rhs);
    }
    report.series["ratio"] = ratios;
    report.metrics["alpha"] = alpha;
    report.metrics["ratio_max_over_min"] = max_over_min(ratios);
    report.fit = fit_decay_exponent(report.abscissa, report.values, options.fit);
    return report;
}

namespace {

void check_strichartz(const StrichartzOptions& o) {
    if (!admissible_pair(o.r, o.p)) throw DomainError("(r, p) is not an admissible pair");
    if (std::isinf(o.r)) throw DomainError("r = infinity is not sampled by Monte Carlo");
    if (o.horizons.empty()) throw DomainError("empty horizon grid");
    if (o.n_times < 1) throw DomainError("n_times must be >= 1");
}

std::vector<double> column_norms(const Eigen::MatrixXcd& states, double p, const Grid& grid) {
    std::vector<double> out(static_cast<std::size_t>(states.cols()));
    for (Eigen::Index j = 0; j < states.cols(); ++j) {
        const State col = states.col(j);
        out[static_cast<std::size_t>(j)] = lp_norm_x(col, p, grid);
    }
    return out;
}

}  // namespace

EstimateReport strichartz_homogeneous_experiment(const DiscreteHamiltonian& H, const State& u0,
                                                 const StrichartzOptions& options) {
    check_strichartz(options);
    EstimateReport report;
    report.n_paths = options.n_paths;
    report.seed = options.seed;
    const double mu = mu_homogeneous(options.r, options.p);
    const State start = options.project ? project_ac(H, u0) : u0;
    const double l2 = lp_norm_x(u0, 2.0, H.grid());
    const State coefficients = H.to_eigenbasis(start);

    std::vector<double> ratios;
    for (std::size_t m = 0; m < options.horizons.size(); ++m) {
        const double T = options.horizons[m];
        const BrownianEnsemble ens(T, options.n_times, options.n_paths, mix_seed(options.seed, m));
        std::vector<std::vector<double>> space(options.n_paths);
        parallel_for(options.n_paths, [&](std::size_t p) {
            const auto beta = ens.values(p);
            const Eigen::MatrixXcd states = propagate_batch_from_coefficients(H, beta, coefficients);
            space[p] = column_norms(states, options.p, H.grid());
        });
        MixedNormSpec spec{options.r, options.r, options.p, 0.0, T};
        const double lhs = mixed_norm(space, ens.dt(), spec) / l2;
        report.abscissa.push_back(T);
        report.values.push_back(lhs);
        ratios.push_back(lhs / std::pow(T, mu / 2.0));
    }
    report.series["ratio"] = ratios;
    report.metrics["mu"] = mu;
    report.metrics["ratio_max_over_min"] = max_over_min(ratios);
    report.fit = fit_decay_exponent(report.abscissa, report.values, options.fit);
    return report;
}

Eigen::MatrixXcd duhamel_path(const DiscreteHamiltonian& H, const BrownianEnsemble& ensemble,
                              std::size_t path, const AdaptedForcing& forcing) {
    const auto beta = ensemble.values(path);
    const std::size_t n = ensemble.n_steps();
    const auto dim = static_cast<Eigen::Index>(H.size());
    const Eigen::VectorXd& lambda = H.eigenvalues();
    std::vector<bool> bound(H.size(), false);
    for (std::size_t k : H.bound_state_indices()) bound[k] = true;

    Eigen::MatrixXcd coefficients(dim, static_cast<Eigen::Index>(n + 1));
    State accumulated = State::Zero(dim);
    for (std::size_t i = 0; i <= n; ++i) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            coefficients(k, static_cast<Eigen::Index>(i)) =
                std::exp(cplx(0.0, -lambda[k] * beta[i])) * accumulated[k];
        }
        if (i == n) break;
        const State f = forcing(beta.subspan(0, i + 1), i, ensemble.time(i));
        if (f.size() != dim) throw ContractViolation("forcing returned a state of the wrong size");
        const State fc = H.to_eigenbasis(f);
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (bound[static_cast<std::size_t>(k)]) continue;
            accumulated[k] += ensemble.dt() * std::exp(cplx(0.0, lambda[k] * beta[i])) * fc[k];
        }
    }
    return H.from_eigenbasis(coefficients);
}

namespace {

EstimateReport inhomogeneous_impl(const DiscreteHamiltonian& H, const StrichartzOptions& options,
                                  const std::function<Eigen::MatrixXcd(const BrownianEnsemble&,
                                                                       std::size_t)>& duhamel,
                                  const std::function<std::vector<double>(const BrownianEnsemble&,
                                                                          std::size_t)>& forcing_norms) {
    check_strichartz(options);
    const double r_dual = holder_conjugate(options.r);
    if (!(options.rho >= r_dual - 1e-12) || !(options.rho <= options.r + 1e-12)) {
        throw DomainError("inhomogeneous bound needs r' <= rho <= r");
    }
    EstimateReport report;
    report.n_paths = options.n_paths;
    report.seed = options.seed;
    const double mu = mu_inhomogeneous(options.r, options.p);

    std::vector<double> ratios;
    std::vector<double> rhs_values;
    for (std::size_t m = 0; m < options.horizons.size(); ++m) {
        const double T = options.horizons[m];
        const BrownianEnsemble ens(T, options.n_times, options.n_paths, mix_seed(options.seed, m));
        std::vector<std::vector<double>> lhs_space(options.n_paths);
        std::vector<std::vector<double>> rhs_space(options.n_paths);
        parallel_for(options.n_paths, [&](std::size_t p) {
            lhs_space[p] = column_norms(duhamel(ens, p), options.p, H.grid());
            rhs_space[p] = forcing_norms(ens, p);
        });
        const MixedNormSpec spec{options.rho, options.r, options.p, 0.0, T};
        const double lhs = mixed_norm(lhs_space, ens.dt(), spec);
        const double rhs = mixed_norm(rhs_space, ens.dt(), spec.dual());
        report.abscissa.push_back(T);
        report.values.push_back(lhs);
        rhs_values.push_back(rhs);
        ratios.push_back(rhs > 0.0 ? lhs / (std::pow(T, mu) * rhs) : 0.0);
    }
    report.series["ratio"] = ratios;
    report.series["rhs"] = rhs_values;
    report.metrics["mu"] = mu;
    const bool all_zero = std::all_of(report.values.begin(), report.values.end(),
                                      [](double v) { return v == 0.0; });
    if (all_zero) {
        report.metrics["ratio_max_over_min"] = 1.0;
        report.warnings.push_back("forcing vanishes; Duhamel term is identically zero");
        return report;
    }
    report.metrics["ratio_max_over_min"] = max_over_min(ratios);
    report.fit = fit_decay_exponent(report.abscissa, report.values, options.fit);
    return report;
}

}  // namespace

EstimateReport strichartz_inhomogeneous_experiment(const DiscreteHamiltonian& H,
                                                   const AdaptedForcing& forcing,
                                                   const StrichartzOptions& options) {
    const double p_dual = holder_conjugate(options.p);
    return inhomogeneous_impl(
        H, options,
        [&](const BrownianEnsemble& ens, std::size_t p) { return duhamel_path(H, ens, p, forcing); },
        [&](const BrownianEnsemble& ens, std::size_t p) {
            const auto beta = ens.values(p);
            std::vector<double> out(ens.n_steps() + 1);
            for (std::size_t k = 0; k <= ens.n_steps(); ++k) {
                out[k] = lp_norm_x(forcing(beta.subspan(0, k + 1), k, ens.time(k)), p_dual, H.grid());
            }
            return out;
        });
}

EstimateReport strichartz_inhomogeneous_experiment(const DiscreteHamiltonian& H, const State& g,
                                                   const StrichartzOptions& options) {
    if (g.size() != static_cast<Eigen::Index>(H.size())) {
        throw ContractViolation("forcing profile does not live on the Hamiltonian's grid");
    }
    const double g_dual_norm = lp_norm_x(g, holder_conjugate(options.p), H.grid());
    // Constant profile: transform once, reuse on every path.
    State gc = H.to_eigenbasis(g);
    for (std::size_t k : H.bound_state_indices()) gc[static_cast<Eigen::Index>(k)] = 0.0;
    const Eigen::VectorXd& lambda = H.eigenvalues();
    const auto dim = static_cast<Eigen::Index>(H.size());

    return inhomogeneous_impl(
        H, options,
        [&](const BrownianEnsemble& ens, std::size_t p) {
            const auto beta = ens.values(p);
            const std::size_t n = ens.n_steps();
            Eigen::MatrixXcd coefficients(dim, static_cast<Eigen::Index>(n + 1));
            State accumulated = State::Zero(dim);
            for (std::size_t i = 0; i <= n; ++i) {
                for (Eigen::Index k = 0; k < dim; ++k) {
                    coefficients(k, static_cast<Eigen::Index>(i)) =
                        std::exp(cplx(0.0, -lambda[k] * beta[i])) * accumulated[k];
                }
                if (i == n) break;
                for (Eigen::Index k = 0; k < dim; ++k) {
                    accumulated[k] += ens.dt() * std::exp(cplx(0.0, lambda[k] * beta[i])) * gc[k];
                }
            }
            return H.from_eigenbasis(coefficients);
        },
        [&](const BrownianEnsemble& ens, std::size_t) {
            return std::vector<double>(ens.n_steps() + 1, g_dual_norm);
        });
}

EstimateReport sde_convergence_experiment(const DiscreteHamiltonian& H, const State& u0,
                                          const SdeConvergenceOptions& options) {
    if (options.step_counts.empty()) throw DomainError("no step counts given");
    const std::size_t finest = *std::max_element(options.step_counts.begin(), options.step_counts.end());
    for (std::size_t s : options.step_counts) {
        if (s == 0 || finest % s != 0) {
            throw DomainError("every step count must divide the finest step count");
        }
    }
    EstimateReport report;
    report.n_paths = options.n_paths;
    report.seed = options.seed;
    const BrownianEnsemble ens(options.horizon, finest, options.n_paths, options.seed);
    const State start = spectral_truncate(H, u0, options.energy_cutoff);
    const Grid& grid = H.grid();

    std::vector<std::vector<double>> errors(options.n_paths,
                                            std::vector<double>(options.step_counts.size()));
    std::vector<std::string> path_warnings;
    parallel_for(options.n_paths, [&](std::size_t p) {
        const State exact = propagate(H, ens.value(p, finest), start);
        for (std::size_t j = 0; j < options.step_counts.size(); ++j) {
            const auto em = euler_maruyama_ito(H, ens, p, start, options.step_counts[j],
                                               {.energy_cutoff = options.energy_cutoff});
            errors[p][j] = lp_norm_x(State(em.final_state - exact), 2.0, grid);
        }
    });
    for (std::size_t j = 0; j < options.step_counts.size(); ++j) {
        double mean = 0.0;
        for (std::size_t p = 0; p < options.n_paths; ++p) mean += errors[p][j];
        report.abscissa.push_back(options.horizon / static_cast<double>(options.step_counts[j]));
        report.values.push_back(mean / static_cast<double>(options.n_paths));
    }
    report.metrics["energy_cutoff"] = options.energy_cutoff;
    report.metrics["initial_l2_norm"] = lp_norm_x(start, 2.0, grid);
    report.fit = fit_decay_exponent(report.abscissa, report.values, options.fit);
    return report;
}

}  // namespace dispersion_lab
