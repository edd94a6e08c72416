#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "dispersion_lab/grid_model.hpp"

namespace dispersion_lab {

using cplx = std::complex<double>;

enum class JostSign { plus, minus };

/// Value and x-derivative of a solution at a point.
struct WaveState {
    cplx value;
    cplx derivative;
};

/// Jost solution f_{+-}(lambda, x) = exp(+-i lambda x) m_{+-}(lambda, x) of
/// -f'' + V f = lambda^2 f, with m -> 1 at the matching wall (x = +L_box for
/// plus, -L_box for minus).
class JostFunction {
public:
    JostFunction(double lambda, JostSign sign, PotentialGrid potential, std::vector<cplx> m,
                 std::vector<cplx> dm);

    double lambda() const noexcept { return lambda_; }
    JostSign sign() const noexcept { return sign_; }
    const Grid& grid() const noexcept { return potential_.grid; }
    std::span<const cplx> m_values() const noexcept { return m_; }
    std::span<const cplx> m_derivatives() const noexcept { return dm_; }

    /// f and f' at grid node i.
    WaveState at_node(std::size_t i) const;

    /// f and f' at any x in the box, continued from the nearest node with RK4.
    WaveState at(double x) const;

private:
    double lambda_;
    JostSign sign_;
    PotentialGrid potential_;
    std::vector<cplx> m_;
    std::vector<cplx> dm_;
};

/// Integrates m'' +- 2 i lambda m' = V m inward from the matching wall with
/// classical RK4 on the grid. Throws ResolutionError when
/// h (|lambda| + sqrt(max|V|)) > 0.5.
JostFunction jost_solution(const PotentialGrid& potential, double lambda, JostSign sign);

/// W = f_+ f_-' - f_+' f_- at x = 0. Throws ContractViolation unless the two
/// solutions share lambda and grid and have opposite signs.
cplx wronskian(const JostFunction& f_plus, const JostFunction& f_minus);

/// W evaluated at every grid node; constant in x up to integration error.
std::vector<cplx> wronskian_profile(const JostFunction& f_plus, const JostFunction& f_minus);

/// W(lambda) computed from freshly integrated Jost solutions.
cplx jost_wronskian(const PotentialGrid& potential, double lambda);

constexpr double kDefaultResonanceTolerance = 1e-4;

/// True iff |W(0)| < tol * max(1, ||V||_1).
bool detect_resonance(const PotentialGrid& potential, double tol = kDefaultResonanceTolerance);

struct ScatteringData {
    double lambda = 0.0;
    cplx W;             // Wronskian of f_+(lambda), f_-(lambda)
    cplx alpha;         // f_- = alpha f_+(lambda) + beta f_+(-lambda)
    cplx beta;          // from the 2x2 matching solve
    cplx beta_coeff;    // W / (-2 i lambda)
    cplx transmission;  // -2 i lambda / W
    cplx reflection;    // alpha / beta
    std::optional<bool> resonance_at_zero;
};

/// Matches f_- against f_+(lambda), f_+(-lambda) at x = 0.
/// Throws SingularParameterError for lambda = 0 and ConditioningError if the
/// matching system is numerically singular.
ScatteringData scattering_coefficients(const PotentialGrid& potential, double lambda);

/// Geometric lambda grid on [0.05, 4 sqrt(lambda0) + 1].
std::vector<double> default_lambda_sweep(const PotentialSpec& spec, std::size_t count);

/// One record per lambda; the first record also carries the resonance flag.
std::vector<ScatteringData> scattering_sweep(const PotentialGrid& potential,
                                             std::span<const double> lambdas);

/// CSV with columns lambda, Re W, Im W, |T|, |R|, |alpha|, |beta|.
void write_scattering_csv(std::ostream& out, std::span<const ScatteringData> rows);

/// Outgoing resolvent kernel R_V(lambda^2 + i0)(x, y) built from Jost
/// solutions: f_+(lambda, max(x,y)) f_-(lambda, min(x,y)) / W(lambda).
class JostResolvent {
public:
    /// Throws SingularParameterError for lambda = 0 and NearResonanceError when
    /// |W(lambda)| falls below `tol`.
    JostResolvent(const PotentialGrid& potential, double lambda, double tol = 1e-10);

    cplx operator()(double x, double y) const;
    cplx wronskian() const noexcept { return W_; }

private:
    JostFunction plus_;
    JostFunction minus_;
    cplx W_;
};

cplx resolvent_kernel_jost(const PotentialGrid& potential, double lambda, double x, double y);

}  // namespace dispersion_lab
