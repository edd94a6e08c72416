#include "dispersion_lab/power_law_fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dispersion_lab/errors.hpp"

namespace dispersion_lab {

namespace {

struct Line {
    double slope;
    double intercept;
};

std::optional<Line> least_squares(std::span<const double> x, std::span<const double> y,
                                  std::span<const std::size_t> idx) {
    const double n = static_cast<double>(idx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i : idx) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i : idx) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    const double slope = sxy / sxx;
    return Line{slope, my - slope * mx};
}

double percentile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return (1.0 - t) * sorted[lo] + t * sorted[hi];
}

}  // namespace

LogLogFit fit_decay_exponent(std::span<const double> abscissa, std::span<const double> values,
                             const FitOptions& options) {
    if (abscissa.size() != values.size()) {
        throw ContractViolation("abscissa and values differ in length");
    }
    if (abscissa.size() < std::max<std::size_t>(options.min_pairs, 2)) {
        throw ConditioningError("power-law fit needs at least " + std::to_string(options.min_pairs) +
                                " pairs");
    }
    std::vector<double> lx(abscissa.size());
    std::vector<double> ly(values.size());
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        if (!(abscissa[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(abscissa[i]) ||
            !std::isfinite(values[i])) {
            throw DomainError("power-law fit needs finite positive abscissae and values");
        }
        lx[i] = std::log(abscissa[i]);
        ly[i] = std::log(values[i]);
        lo = std::min(lo, abscissa[i]);
        hi = std::max(hi, abscissa[i]);
    }
    if (std::log10(hi / lo) < options.min_decades) {
        throw ConditioningError("abscissa spans fewer than " + std::to_string(options.min_decades) +
                                " decades");
    }

    std::vector<std::size_t> all(lx.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto base = least_squares(lx, ly, all);
    if (!base) throw ConditioningError("degenerate abscissa: all values coincide");

    LogLogFit fit{base->slope, base->intercept, base->slope, base->slope};
    if (options.bootstrap_resamples > 0) {
        std::mt19937_64 engine(options.bootstrap_seed);
        std::uniform_int_distribution<std::size_t> pick(0, lx.size() - 1);
        std::vector<double> slopes;
        slopes.reserve(options.bootstrap_resamples);
        std::vector<std::size_t> idx(lx.size());
        while (slopes.size() < options.bootstrap_resamples) {
            for (auto& i : idx) i = pick(engine);
            if (auto line = least_squares(lx, ly, idx)) slopes.push_back(line->slope);
        }
        std::sort(slopes.begin(), slopes.end());
        fit.ci_low = std::min(percentile(slopes, 0.025), fit.slope);
        fit.ci_high = std::max(percentile(slopes, 0.975), fit.slope);
    }
    return fit;
}

}  // namespace dispersion_lab
