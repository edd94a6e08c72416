#include "dispersion_lab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include "dispersion_lab/errors.hpp"

namespace dispersion_lab {

namespace {

constexpr cplx kI{0.0, 1.0};

double sign_factor(JostSign sign) { return sign == JostSign::plus ? 1.0 : -1.0; }

struct MState {
    cplx m;
    cplx dm;
};

// m'' = V m - 2 i s lambda m'
MState rhs(const PotentialSpec& v, double s_lambda, double x, const MState& y) {
    return {y.dm, v(x) * y.m - 2.0 * kI * s_lambda * y.dm};
}

MState rk4_step(const PotentialSpec& v, double s_lambda, double x, const MState& y, double dx) {
    const MState k1 = rhs(v, s_lambda, x, y);
    const MState k2 = rhs(v, s_lambda, x + 0.5 * dx, {y.m + 0.5 * dx * k1.m, y.dm + 0.5 * dx * k1.dm});
    const MState k3 = rhs(v, s_lambda, x + 0.5 * dx, {y.m + 0.5 * dx * k2.m, y.dm + 0.5 * dx * k2.dm});
    const MState k4 = rhs(v, s_lambda, x + dx, {y.m + dx * k3.m, y.dm + dx * k3.dm});
    return {y.m + dx / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m),
            y.dm + dx / 6.0 * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm)};
}

// RK4 substeps per cell keep h_sub * (|lambda| + sqrt(max|V|)) below this.
constexpr double kSubstepScale = 0.025;

std::size_t substeps_for(double scale) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(scale / kSubstepScale)));
}

MState advance(const PotentialSpec& v, double s_lambda, double x, MState y, double dx, std::size_t sub) {
    const double d = dx / static_cast<double>(sub);
    for (std::size_t k = 0; k < sub; ++k) y = rk4_step(v, s_lambda, x + static_cast<double>(k) * d, y, d);
    return y;
}

WaveState to_wave(double s_lambda, double x, const MState& y) {
    const cplx phase = std::exp(kI * s_lambda * x);
    return {phase * y.m, phase * (y.dm + kI * s_lambda * y.m)};
}

cplx wronskian_of(const WaveState& a, const WaveState& b) {
    return a.value * b.derivative - a.derivative * b.value;
}

void check_pair(const JostFunction& f_plus, const JostFunction& f_minus) {
    if (f_plus.sign() != JostSign::plus || f_minus.sign() != JostSign::minus) {
        throw ContractViolation("wronskian expects (f_plus, f_minus)");
    }
    if (f_plus.lambda() != f_minus.lambda()) {
        throw ContractViolation("wronskian: Jost solutions have different lambda");
    }
    if (!(f_plus.grid() == f_minus.grid())) {
        throw ContractViolation("wronskian: Jost solutions live on different grids");
    }
}

}  // namespace

JostFunction::JostFunction(double lambda, JostSign sign, PotentialGrid potential,
                           std::vector<cplx> m, std::vector<cplx> dm)
    : lambda_(lambda), sign_(sign), potential_(std::move(potential)), m_(std::move(m)),
      dm_(std::move(dm)) {}

WaveState JostFunction::at_node(std::size_t i) const {
    const double s_lambda = sign_factor(sign_) * lambda_;
    return to_wave(s_lambda, grid().x(i), {m_[i], dm_[i]});
}

WaveState JostFunction::at(double x) const {
    const Grid& g = grid();
    if (x < -g.half_width() - 1e-12 || x > g.half_width() + 1e-12) {
        throw DomainError("Jost solution evaluated outside the grid box");
    }
    const std::size_t i = g.nearest_index(x);
    const double x0 = g.x(i);
    const double s_lambda = sign_factor(sign_) * lambda_;
    MState y{m_[i], dm_[i]};
    if (x != x0) {
        const double scale = std::abs(x - x0) * (std::abs(lambda_) + std::sqrt(potential_.max_abs()));
        y = advance(potential_.spec, s_lambda, x0, y, x - x0, substeps_for(scale));
    }
    return to_wave(s_lambda, x, y);
}

JostFunction jost_solution(const PotentialGrid& potential, double lambda, JostSign sign) {
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
    const Grid& g = potential.grid;
    const double h = g.spacing();
    const double scale = h * (std::abs(lambda) + std::sqrt(potential.max_abs()));
    if (scale > 0.5) {
        throw ResolutionError("grid too coarse for lambda = " + std::to_string(lambda) +
                              ": h*(|lambda| + sqrt(max|V|)) = " + std::to_string(scale) +
                              " > 0.5; refine the grid");
    }

    const std::size_t n = g.size();
    const double s_lambda = sign_factor(sign) * lambda;
    std::vector<cplx> m(n);
    std::vector<cplx> dm(n);
    const std::size_t sub = substeps_for(scale);
    MState y{1.0, 0.0};
    if (sign == JostSign::plus) {
        m[n - 1] = y.m;
        dm[n - 1] = y.dm;
        for (std::size_t i = n - 1; i > 0; --i) {
            y = advance(potential.spec, s_lambda, g.x(i), y, -h, sub);
            m[i - 1] = y.m;
            dm[i - 1] = y.dm;
        }
    } else {
        m[0] = y.m;
        dm[0] = y.dm;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            y = advance(potential.spec, s_lambda, g.x(i), y, h, sub);
            m[i + 1] = y.m;
            dm[i + 1] = y.dm;
        }
    }
    return JostFunction(lambda, sign, potential, std::move(m), std::move(dm));
}

cplx wronskian(const JostFunction& f_plus, const JostFunction& f_minus) {
    check_pair(f_plus, f_minus);
    return wronskian_of(f_plus.at(0.0), f_minus.at(0.0));
}

std::vector<cplx> wronskian_profile(const JostFunction& f_plus, const JostFunction& f_minus) {
    check_pair(f_plus, f_minus);
    std::vector<cplx> w(f_plus.grid().size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = wronskian_of(f_plus.at_node(i), f_minus.at_node(i));
    }
    return w;
}

cplx jost_wronskian(const PotentialGrid& potential, double lambda) {
    return wronskian(jost_solution(potential, lambda, JostSign::plus),
                     jost_solution(potential, lambda, JostSign::minus));
}

bool detect_resonance(const PotentialGrid& potential, double tol) {
    if (!(tol > 0.0)) throw DomainError("resonance tolerance must be positive");
    const cplx w0 = jost_wronskian(potential, 0.0);
    const double v1 = weighted_l1_norm(potential.spec, 0);
    return std::abs(w0) < tol * std::max(1.0, v1);
}

ScatteringData scattering_coefficients(const PotentialGrid& potential, double lambda) {
    if (lambda == 0.0) {
        throw SingularParameterError("scattering coefficients are undefined at lambda = 0");
    }
    const JostFunction f_plus = jost_solution(potential, lambda, JostSign::plus);
    const JostFunction f_plus_reflected = jost_solution(potential, -lambda, JostSign::plus);
    const JostFunction f_minus = jost_solution(potential, lambda, JostSign::minus);

    const WaveState a = f_plus.at(0.0);
    const WaveState b = f_plus_reflected.at(0.0);
    const WaveState c = f_minus.at(0.0);

    // [a.v b.v; a.d b.d] [alpha; beta] = [c.v; c.d]
    const cplx det = a.value * b.derivative - a.derivative * b.value;
    const double scale = std::abs(a.value * b.derivative) + std::abs(a.derivative * b.value);
    if (!(std::abs(det) > 1e-12 * scale)) {
        throw ConditioningError("matching system for alpha, beta is singular at lambda = " +
                                std::to_string(lambda));
    }

    ScatteringData out;
    out.lambda = lambda;
    out.alpha = (c.value * b.derivative - c.derivative * b.value) / det;
    out.beta = (a.value * c.derivative - a.derivative * c.value) / det;
    out.W = wronskian(f_plus, f_minus);
    const cplx free_w = -2.0 * kI * lambda;
    out.beta_coeff = out.W / free_w;
    out.transmission = free_w / out.W;
    out.reflection = out.alpha / out.beta;
    return out;
}

std::vector<double> default_lambda_sweep(const PotentialSpec& spec, std::size_t count) {
    if (count < 2) throw DomainError("lambda sweep needs at least two points");
    const double lo = 0.05;
    const double hi = 4.0 * std::sqrt(lambda0(spec)) + 1.0;
    std::vector<double> out(count);
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(ratio * static_cast<double>(i));
    out.back() = hi;
    return out;
}

std::vector<ScatteringData> scattering_sweep(const PotentialGrid& potential,
                                             std::span<const double> lambdas) {
    std::vector<ScatteringData> rows;
    rows.reserve(lambdas.size());
    for (double lambda : lambdas) rows.push_back(scattering_coefficients(potential, lambda));
    if (!rows.empty()) rows.front().resonance_at_zero = detect_resonance(potential);
    return rows;
}

void write_scattering_csv(std::ostream& out, std::span<const ScatteringData> rows) {
    out << "# schema=1\n";
    out << "lambda,re_W,im_W,abs_T,abs_R,abs_alpha,abs_beta\n";
    out << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.lambda << ',' << r.W.real() << ',' << r.W.imag() << ',' << std::abs(r.transmission)
            << ',' << std::abs(r.reflection) << ',' << std::abs(r.alpha) << ','
            << std::abs(r.beta_coeff) << '\n';
    }
}

JostResolvent::JostResolvent(const PotentialGrid& potential, double lambda, double tol)
    : plus_(jost_solution(potential, lambda, JostSign::plus)),
      minus_(jost_solution(potential, lambda, JostSign::minus)),
      W_(dispersion_lab::wronskian(plus_, minus_)) {
    if (lambda == 0.0) throw SingularParameterError("Jost resolvent needs lambda != 0");
    if (std::abs(W_) < tol) {
        throw NearResonanceError("|W(lambda)| below tolerance; resolvent kernel is ill-conditioned");
    }
}

cplx JostResolvent::operator()(double x, double y) const {
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    return plus_.at(hi).value * minus_.at(lo).value / W_;
}

cplx resolvent_kernel_jost(const PotentialGrid& potential, double lambda, double x, double y) {
    return JostResolvent(potential, lambda)(x, y);
}

}  // namespace dispersion_lab
