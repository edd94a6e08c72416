#include "dispersion_lab/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dispersion_lab/errors.hpp"

namespace dispersion_lab {

Grid::Grid(double half_width, std::size_t n_points)
    : half_width_(half_width), n_points_(n_points), spacing_(0.0) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw ValidationError("grid half_width must be positive and finite");
    }
    if (n_points < kMinPoints) {
        throw ValidationError("grid needs at least 16 points, got " + std::to_string(n_points));
    }
    spacing_ = 2.0 * half_width / static_cast<double>(n_points - 1);
}

std::vector<double> Grid::points() const {
    std::vector<double> xs(n_points_);
    for (std::size_t i = 0; i < n_points_; ++i) xs[i] = x(i);
    return xs;
}

std::size_t Grid::nearest_index(double x) const noexcept {
    const double s = std::round((x + half_width_) / spacing_);
    if (!(s > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(s), n_points_ - 1);
}

std::string_view to_string(PotentialFamily family) {
    switch (family) {
        case PotentialFamily::zero: return "zero";
        case PotentialFamily::gaussian: return "gaussian";
        case PotentialFamily::sech_squared: return "sech_squared";
        case PotentialFamily::square_well: return "square_well";
        case PotentialFamily::custom_table: return "custom_table";
    }
    return "unknown";
}

PotentialFamily parse_potential_family(std::string_view name) {
    for (auto f : {PotentialFamily::zero, PotentialFamily::gaussian, PotentialFamily::sech_squared,
                   PotentialFamily::square_well, PotentialFamily::custom_table}) {
        if (to_string(f) == name) return f;
    }
    throw ValidationError("unknown potential family '" + std::string(name) + "'");
}

PotentialSpec PotentialSpec::custom(std::vector<std::pair<double, double>> nodes) {
    PotentialSpec spec;
    spec.family = PotentialFamily::custom_table;
    spec.amplitude = 1.0;
    spec.table = std::move(nodes);
    std::sort(spec.table.begin(), spec.table.end());
    return spec;
}

double PotentialSpec::operator()(double x) const {
    switch (family) {
        case PotentialFamily::zero:
            return 0.0;
        case PotentialFamily::gaussian: {
            const double s = x / width;
            return amplitude * std::exp(-s * s);
        }
        case PotentialFamily::sech_squared: {
            const double c = std::cosh(x / width);
            return amplitude / (c * c);
        }
        case PotentialFamily::square_well:
            return std::abs(x) <= width ? amplitude : 0.0;
        case PotentialFamily::custom_table: {
            if (table.empty() || x < table.front().first || x > table.back().first) return 0.0;
            auto it = std::upper_bound(table.begin(), table.end(), x,
                                       [](double v, const auto& node) { return v < node.first; });
            if (it == table.end()) return table.back().second;
            auto prev = std::prev(it);
            const double dx = it->first - prev->first;
            if (dx <= 0.0) return prev->second;
            const double t = (x - prev->first) / dx;
            return (1.0 - t) * prev->second + t * it->second;
        }
    }
    return 0.0;
}

std::vector<double> PotentialSpec::breakpoints() const {
    std::vector<double> pts;
    if (family == PotentialFamily::square_well) {
        pts = {-width, width};
    } else if (family == PotentialFamily::custom_table) {
        for (std::size_t i = 0; i < table.size(); ++i) {
            pts.push_back(table[i].first);
            if (i + 1 < table.size()) {
                const auto [x0, v0] = table[i];
                const auto [x1, v1] = table[i + 1];
                // |V| kinks where the interpolant changes sign
                if ((v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0)) {
                    pts.push_back(x0 + (x1 - x0) * v0 / (v0 - v1));
                }
            }
        }
    }
    return pts;
}

bool PotentialSpec::is_even() const {
    if (family != PotentialFamily::custom_table) return true;
    for (const auto& [x, v] : table) {
        if (std::abs((*this)(-x) - v) > 1e-14 * std::max(1.0, std::abs(v))) return false;
    }
    return true;
}

void PotentialSpec::validate() const {
    if (!std::isfinite(amplitude)) throw ValidationError("potential amplitude must be finite");
    if (family == PotentialFamily::custom_table) {
        if (table.size() < 2) throw ValidationError("custom_table needs at least two nodes");
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (!std::isfinite(table[i].first) || !std::isfinite(table[i].second)) {
                throw ValidationError("custom_table contains a non-finite node");
            }
            if (i > 0 && !(table[i].first > table[i - 1].first)) {
                throw ValidationError("custom_table abscissae must be strictly increasing");
            }
        }
    } else if (family != PotentialFamily::zero) {
        if (!(width > 0.0) || !std::isfinite(width)) {
            throw ValidationError("potential width must be positive and finite");
        }
    }
}

double PotentialGrid::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

PotentialGrid sample_potential(const PotentialSpec& spec, const Grid& grid) {
    spec.validate();
    if (spec.family == PotentialFamily::custom_table) {
        const double lo = spec.table.front().first;
        const double hi = spec.table.back().first;
        if (lo > -grid.half_width() || hi < grid.half_width()) {
            throw DomainError("custom_table does not cover the grid box [-L_box, L_box]");
        }
    }
    PotentialGrid out{grid, spec, std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = spec(grid.x(i));
        if (!std::isfinite(v)) {
            throw ValidationError("potential is not finite at x = " + std::to_string(grid.x(i)));
        }
        out.values[i] = v;
    }
    return out;
}

double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    if (n == 4) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
    // Simpson needs an even number of intervals; an odd count ends with a 3/8 panel.
    const std::size_t intervals = n - 1;
    const std::size_t simpson_end = (intervals % 2 == 0) ? n - 1 : n - 4;
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < simpson_end; ++i) {
        (i % 2 == 1 ? odd : even) += f[i];
    }
    double total = h / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[simpson_end]);
    if (simpson_end != n - 1) {
        const std::size_t k = simpson_end;
        total += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
    }
    return total;
}

namespace {

double natural_box(const PotentialSpec& spec) {
    switch (spec.family) {
        case PotentialFamily::zero: return 1.0;
        case PotentialFamily::gaussian:
        case PotentialFamily::sech_squared: return 40.0 * spec.width;
        case PotentialFamily::square_well: return 2.0 * spec.width;
        case PotentialFamily::custom_table:
            return std::max(std::abs(spec.table.front().first), std::abs(spec.table.back().first));
    }
    return 1.0;
}

double resolution_scale(const PotentialSpec& spec) {
    if (spec.family == PotentialFamily::custom_table || spec.family == PotentialFamily::zero) {
        return 1.0;
    }
    return std::min(1.0, spec.width);
}

double simpson_on_box(const PotentialSpec& spec, int j, double box) {
    std::vector<double> cuts{-box, 0.0, box};
    for (double b : spec.breakpoints()) {
        if (b > -box && b < box) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double target_h = resolution_scale(spec) / 400.0;
    double total = 0.0;
    std::vector<double> f;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c];
        const double b = cuts[c + 1];
        std::size_t n = static_cast<std::size_t>(std::ceil((b - a) / target_h));
        n = std::max<std::size_t>(2, n + (n % 2));
        const double h = (b - a) / static_cast<double>(n);
        f.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = (i == n) ? b : a + static_cast<double>(i) * h;
            f[i] = std::abs(spec(x)) * std::pow(1.0 + std::abs(x), j);
        }
        total += simpson(f, h);
    }
    return total;
}

}  // namespace

double weighted_l1_norm(const PotentialSpec& spec, int j, double box) {
    if (j < 0 || j > 2) throw DomainError("weight exponent j must be 0, 1 or 2");
    if (!(box > 0.0)) throw DomainError("quadrature box must be positive");
    spec.validate();
    if (spec.family == PotentialFamily::zero) return 0.0;

    constexpr int kMaxDoublings = 12;
    double previous = simpson_on_box(spec, j, box);
    for (int k = 0; k < kMaxDoublings; ++k) {
        box *= 2.0;
        const double current = simpson_on_box(spec, j, box);
        if (std::abs(current - previous) <= 1e-10 * std::max(1.0, std::abs(current))) {
            return current;
        }
        previous = current;
    }
    throw DivergenceError("weighted L1 norm did not converge under box doubling (j = " +
                          std::to_string(j) + ")");
}

double weighted_l1_norm(const PotentialSpec& spec, int j) {
    spec.validate();
    return weighted_l1_norm(spec, j, natural_box(spec));
}

double lambda0(const PotentialSpec& spec) {
    const double n = weighted_l1_norm(spec, 0);
    return n * n;
}

}  // namespace dispersion_lab
