#include "dispersion_lab/norms.hpp"

#include <algorithm>
#include <cmath>

#include "dispersion_lab/errors.hpp"

namespace dispersion_lab {

namespace {

template <typename Magnitudes>
double lp_from_magnitudes(const Magnitudes& mags, std::size_t n, double p, const Grid& grid) {
    if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1");
    if (n != grid.size()) throw ContractViolation("array size does not match the grid");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, mags(i));
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = mags(i);
        acc += (p == 2.0) ? a * a : std::pow(a, p);
    }
    return std::pow(grid.spacing() * acc, 1.0 / p);
}

}  // namespace

double holder_conjugate(double r) {
    if (!(r >= 1.0)) throw DomainError("Hoelder exponent must be >= 1");
    if (r == 1.0) return kInfinity;
    if (std::isinf(r)) return 1.0;
    return r / (r - 1.0);
}

double lp_norm_x(std::span<const cplx> u, double p, const Grid& grid) {
    return lp_from_magnitudes([&](std::size_t i) { return std::abs(u[i]); }, u.size(), p, grid);
}

double lp_norm_x(const State& u, double p, const Grid& grid) {
    return lp_norm_x(std::span<const cplx>(u.data(), static_cast<std::size_t>(u.size())), p, grid);
}

double lp_norm_x(std::span<const double> u, double p, const Grid& grid) {
    return lp_from_magnitudes([&](std::size_t i) { return std::abs(u[i]); }, u.size(), p, grid);
}

MixedNormSpec MixedNormSpec::dual() const {
    MixedNormSpec d = *this;
    d.r = holder_conjugate(r);
    d.p = holder_conjugate(p);
    return d;
}

double time_norm(std::span<const double> samples, double dt, double r) {
    if (samples.empty()) throw DomainError("empty time window");
    if (!(r >= 1.0)) throw DomainError("time exponent must be >= 1");
    if (samples.size() == 1) return std::abs(samples[0]);
    if (std::isinf(r)) {
        double m = 0.0;
        for (double a : samples) m = std::max(m, std::abs(a));
        return m;
    }
    std::vector<double> powered(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) powered[k] = std::pow(std::abs(samples[k]), r);
    return std::pow(simpson(powered, dt), 1.0 / r);
}

double omega_norm(std::span<const double> samples, double rho) {
    if (samples.empty()) throw DomainError("no paths to average over");
    if (!(rho >= 1.0)) throw DomainError("probability exponent must be >= 1");
    if (std::isinf(rho)) {
        double m = 0.0;
        for (double a : samples) m = std::max(m, std::abs(a));
        return m;
    }
    double acc = 0.0;
    for (double a : samples) acc += std::pow(std::abs(a), rho);
    return std::pow(acc / static_cast<double>(samples.size()), 1.0 / rho);
}

double mixed_norm(const std::vector<std::vector<double>>& space_norms, double dt,
                  const MixedNormSpec& spec) {
    if (space_norms.empty() || !(spec.window_length > 0.0)) throw DomainError("empty window");
    std::vector<double> per_path(space_norms.size());
    for (std::size_t p = 0; p < space_norms.size(); ++p) {
        per_path[p] = time_norm(space_norms[p], dt, spec.r);
    }
    return omega_norm(per_path, spec.rho);
}

bool admissible_pair(double r, double p) {
    if (std::isinf(r)) return p == 2.0;
    return r >= 2.0 && p >= 2.0 && 2.0 / r > 0.5 - 1.0 / p;
}

double mu_inhomogeneous(double r, double p) {
    if (!admissible_pair(r, p)) throw DomainError("(r, p) is not an admissible pair");
    return 2.0 / r + 1.0 / (2.0 * p) - 0.25;
}

double mu_homogeneous(double r, double p) {
    if (!admissible_pair(r, p)) throw DomainError("(r, p) is not an admissible pair");
    return 2.0 / r - 0.5 * (0.5 - 1.0 / p);
}

}  // namespace dispersion_lab
