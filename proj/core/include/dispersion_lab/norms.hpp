#pragma once

#include <limits>
#include <span>
#include <vector>

#include "dispersion_lab/grid_model.hpp"
#include "dispersion_lab/spectral_operator.hpp"

namespace dispersion_lab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Hoelder conjugate r' = r / (r - 1), with 1' = infinity and infinity' = 1.
double holder_conjugate(double r);

/// (h sum |u_i|^p)^{1/p}, or max |u_i| for p = infinity. Throws DomainError for p < 1.
double lp_norm_x(std::span<const cplx> u, double p, const Grid& grid);
double lp_norm_x(const State& u, double p, const Grid& grid);
double lp_norm_x(std::span<const double> u, double p, const Grid& grid);

/// Exponents of L^rho(Omega; L^r(s, s+T; L^p_x)).
struct MixedNormSpec {
    double rho = 2.0;
    double r = 2.0;
    double p = 2.0;
    double window_start = 0.0;
    double window_length = 1.0;

    /// Exponents of the dual space L^rho(Omega; L^{r'}(L^{p'})).
    MixedNormSpec dual() const;
};

/// space_norms[path][k] holds ||u(t_k)||_{L^p_x} on a uniform time grid with
/// spacing dt covering the window. Time integral by composite Simpson, then a
/// power mean over paths; infinite exponents become maxima. A single time
/// sample is taken as the time layer itself.
double mixed_norm(const std::vector<std::vector<double>>& space_norms, double dt,
                  const MixedNormSpec& spec);

/// Time layer only: (int |a(t)|^r dt)^{1/r} on a uniform grid.
double time_norm(std::span<const double> samples, double dt, double r);

/// Power mean (E |X|^rho)^{1/rho} over equally weighted samples.
double omega_norm(std::span<const double> samples, double rho);

/// (2 <= r < inf, 2 <= p <= inf, 2/r > 1/2 - 1/p) or (r = inf, p = 2).
bool admissible_pair(double r, double p);

/// 2/r + 1/(2p) - 1/4. Throws DomainError for inadmissible pairs.
double mu_inhomogeneous(double r, double p);

/// 2/r - (1/2)(1/2 - 1/p). Throws DomainError for inadmissible pairs.
double mu_homogeneous(double r, double p);

}  // namespace dispersion_lab
