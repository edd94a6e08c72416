#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dispersion_lab {

/// Uniform grid on [-half_width, half_width], symmetric about 0.
class Grid {
public:
    static constexpr std::size_t kMinPoints = 16;

    Grid(double half_width, std::size_t n_points);

    double half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return n_points_; }
    double spacing() const noexcept { return spacing_; }
    // Mirrored halves, so x(n-1-i) == -x(i) exactly.
    double x(std::size_t i) const noexcept {
        const std::size_t j = n_points_ - 1 - i;
        if (i == j) return 0.0;
        return i < j ? -half_width_ + static_cast<double>(i) * spacing_
                     : half_width_ - static_cast<double>(j) * spacing_;
    }
    std::vector<double> points() const;

    /// Index of the grid node closest to `x` (clamped to the box).
    std::size_t nearest_index(double x) const noexcept;

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.half_width_ == b.half_width_ && a.n_points_ == b.n_points_;
    }

private:
    double half_width_;
    std::size_t n_points_;
    double spacing_;
};

enum class PotentialFamily { zero, gaussian, sech_squared, square_well, custom_table };

std::string_view to_string(PotentialFamily family);
PotentialFamily parse_potential_family(std::string_view name);

/// Analytic potential family, or a table of (x, V) nodes.
///
/// gaussian      V(x) = amplitude * exp(-(x/width)^2)
/// sech_squared  V(x) = amplitude * sech^2(x/width)
/// square_well   V(x) = amplitude for |x| <= width, else 0
/// custom_table  linear interpolation between nodes, zero outside the table
struct PotentialSpec {
    PotentialFamily family = PotentialFamily::zero;
    double amplitude = 0.0;
    double width = 1.0;
    std::vector<std::pair<double, double>> table;

    static PotentialSpec zero() { return {}; }
    static PotentialSpec gaussian(double amplitude, double width) {
        return {PotentialFamily::gaussian, amplitude, width, {}};
    }
    static PotentialSpec sech_squared(double amplitude, double width) {
        return {PotentialFamily::sech_squared, amplitude, width, {}};
    }
    static PotentialSpec square_well(double amplitude, double width) {
        return {PotentialFamily::square_well, amplitude, width, {}};
    }
    static PotentialSpec custom(std::vector<std::pair<double, double>> nodes);

    /// Pointwise value. Defined on all of R (tables extend by zero).
    double operator()(double x) const;

    /// Points where the potential is not smooth; quadrature panels split here.
    std::vector<double> breakpoints() const;

    bool is_even() const;

    /// Throws ValidationError when parameters are unusable.
    void validate() const;
};

/// A potential sampled on a grid. Keeps its spec so off-grid evaluation
/// (RK4 midpoints, probes) uses the same closed form as the samples.
struct PotentialGrid {
    Grid grid;
    PotentialSpec spec;
    std::vector<double> values;

    double at(double x) const { return spec(x); }
    double max_abs() const;
};

PotentialGrid sample_potential(const PotentialSpec& spec, const Grid& grid);

/// \int |V(x)| (1+|x|)^j dx by composite Simpson on [-box, box], doubling
/// the box until the value settles. Throws DivergenceError if it never does.
double weighted_l1_norm(const PotentialSpec& spec, int j, double box);

/// Same, with a box chosen from the family's decay scale.
double weighted_l1_norm(const PotentialSpec& spec, int j);

/// High-energy threshold ||V||_1^2.
double lambda0(const PotentialSpec& spec);

/// Composite Simpson for uniformly spaced samples. An even sample count
/// finishes with a 3/8 panel.
double simpson(std::span<const double> f, double h);

}  // namespace dispersion_lab
