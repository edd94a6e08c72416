#include "dispersion_lab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/norms.hpp"

namespace dispersion_lab {

namespace {

const std::array<ExperimentInfo, 11>& catalog() {
    static const std::array<ExperimentInfo, 11> entries{{
        {ExperimentKind::scatter_sweep, "scatter-sweep",
         "Jost Wronskian, transmission and reflection over a lambda sweep (unitarity |T|^2+|R|^2=1)",
         {{"n_lambda", 64, "number of lambda samples"}}},
        {ExperimentKind::resonance, "resonance",
         "zero-energy resonance classification from W(0) (non-resonance hypothesis of the dispersive bound)",
         {{"tolerance", 1e-4, "resonant iff |W(0)| < tolerance * max(1, ||V||_1)"}}},
        {ExperimentKind::resolvent_check, "resolvent-check",
         "low-energy resolvent from Jost solutions vs extrapolated (H - (lambda^2 + i eps))^-1",
         {{"oracle_half_width", 3000, "reference box half-width"},
          {"oracle_spacing", 0.01, "reference grid spacing"},
          {"epsilon_per_lambda", 0.01, "eps = epsilon_per_lambda * lambda"}}},
        {ExperimentKind::born_check, "born-check",
         "high-energy Born series for R_V(E + i0), term ratios <= ||V||_1 / (2 sqrt(E))",
         {{"energy_factor", 4, "E = energy_factor * ||V||_1^2"},
          {"n_max", 20, "last Born term"},
          {"epsilon", 0.15, "reference absorption"},
          {"oracle_half_width", 3000, "reference box half-width"},
          {"refinement", 2, "reference spacing = grid spacing / refinement"},
          {"source_width", 1, "width of the Gaussian source"}}},
        {ExperimentKind::stone_density, "stone-density",
         "Stone's formula: spectral mass of one eigenvector from the resolvent jump",
         {{"mode", 100, "eigenvalue index k"},
          {"window_spacings", 10, "half-width of [a, b] in local level spacings"},
          {"epsilon_fraction", 0.1, "eps = epsilon_fraction * spacing"},
          {"n_lambda", 2001, "lambda samples on [a, b]"},
          {"boundary", 0, "1 puts the eigenvalue at the left end a"}}},
        {ExperimentKind::sde_convergence, "sde-convergence",
         "Euler-Maruyama on the Ito form converges to exp(-i beta(T) H) u0 (strong order 1/2)",
         {{"levels", 7, "number of step counts, halving from stochastic.n_steps"},
          {"energy_cutoff", 4, "spectral truncation |lambda| <= cutoff"},
          {"u0_width", 1, "Gaussian initial data width"}}},
        {ExperimentKind::dispersive, "dispersive",
         "Theorem 1: L^1 -> L^inf bound ||exp(-i beta(t) H) P_ac||_{1->inf} <~ |beta(t)|^{-1/2}",
         {{"u0_width", 0.5, "Gaussian initial data width"},
          {"t_min", 0.5, "first sampled time"},
          {"times_per_path", 16, "sampled times per path"},
          {"beta_min", 0, "censoring threshold; 0 selects max(h, u0_width)^2"},
          {"project", 1, "1 removes bound states"}}},
        {ExperimentKind::expectation_decay, "expectation-decay",
         "expectation decay: (E ||u(t)||_inf^p)^{1/p} <~ t^{-1/4} for 1 <= p < 2",
         {{"p", 1, "moment order, 1 <= p < 2"},
          {"u0_width", 0.1, "Gaussian initial data width"},
          {"t_min", 0.5, "first sampled time"},
          {"n_times", 16, "geometric time samples"},
          {"abscissa_only", 0, "1 replaces the propagator by |beta(t)|^{-1/2}"}}},
        {ExperimentKind::convolution_lemma, "convolution-lemma",
         "Brownian convolution lemma: LHS <= c_alpha T^{2-alpha} E int |f|^2",
         {{"alpha", 0.5, "singularity exponent, 0 <= alpha < 1"},
          {"T_min", 0.25, "smallest horizon (largest is stochastic.T)"},
          {"n_horizons", 9, "geometric horizon samples"},
          {"forcing", 1, "constant forcing value f"}}},
        {ExperimentKind::strichartz_hom, "strichartz-hom",
         "homogeneous stochastic Strichartz bound with T^{mu/2} scaling",
         {{"u0_width", 0.5, "Gaussian initial data width"},
          {"T_min", 0.25, "smallest horizon (largest is stochastic.T)"},
          {"n_horizons", 9, "geometric horizon samples"},
          {"project", 1, "1 removes bound states"}}},
        {ExperimentKind::strichartz_inhom, "strichartz-inhom",
         "inhomogeneous (Duhamel) stochastic Strichartz bound with T^mu scaling",
         {{"forcing_width", 0.5, "Gaussian forcing profile width"},
          {"T_min", 0.25, "smallest horizon (largest is stochastic.T)"},
          {"n_horizons", 9, "geometric horizon samples"}}},
    }};
    return entries;
}

std::string format_number(double v) {
    if (std::isnan(v)) return ".nan";
    if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

bool potentials_equal(const PotentialSpec& a, const PotentialSpec& b) {
    return a.family == b.family && a.amplitude == b.amplitude && a.width == b.width &&
           a.table == b.table;
}

class Parser {
public:
    std::vector<std::string> issues;

    void unknown_keys(const YAML::Node& map, const std::string& prefix,
                      std::initializer_list<std::string_view> allowed) {
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            bool ok = false;
            for (auto a : allowed) ok = ok || a == key;
            if (!ok) issues.push_back(prefix + key + ": unknown key");
        }
    }

    bool is_map(const YAML::Node& node, const std::string& path) {
        if (!node.IsMap()) {
            issues.push_back(path + ": expected a mapping");
            return false;
        }
        return true;
    }

    void read(const YAML::Node& node, const std::string& path, double& out) {
        if (!node) return;
        try {
            out = node.as<double>();
        } catch (const YAML::Exception&) {
            issues.push_back(path + ": expected a number");
        }
    }

    void read_count(const YAML::Node& node, const std::string& path, std::size_t& out) {
        if (!node) return;
        double v = 0.0;
        try {
            v = node.as<double>();
        } catch (const YAML::Exception&) {
            issues.push_back(path + ": expected a non-negative integer");
            return;
        }
        if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
            issues.push_back(path + ": expected a non-negative integer");
            return;
        }
        out = static_cast<std::size_t>(v);
    }

    void read_u64(const YAML::Node& node, const std::string& path, std::uint64_t& out) {
        if (!node) return;
        try {
            out = node.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            issues.push_back(path + ": expected an unsigned 64-bit integer");
        }
    }

    void read(const YAML::Node& node, const std::string& path, std::string& out) {
        if (!node) return;
        if (!node.IsScalar()) {
            issues.push_back(path + ": expected a string");
            return;
        }
        out = node.as<std::string>();
    }
};

}  // namespace

std::span<const ExperimentInfo> experiment_catalog() { return catalog(); }

const ExperimentInfo& experiment_info(ExperimentKind kind) {
    for (const auto& e : catalog()) {
        if (e.kind == kind) return e;
    }
    throw ContractViolation("experiment kind missing from the catalog");
}

std::string_view to_string(ExperimentKind kind) { return experiment_info(kind).name; }

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
    for (const auto& e : catalog()) {
        if (e.name == name) return e.kind;
    }
    return std::nullopt;
}

double ExperimentConfig::param(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) throw ContractViolation("params." + name + " is not set");
    return it->second;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.experiment == b.experiment && potentials_equal(a.potential, b.potential) &&
           a.grid == b.grid && a.stochastic == b.stochastic && a.norms == b.norms &&
           a.params == b.params && a.output_dir == b.output_dir;
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    c.output_dir = "out/" + std::string(to_string(kind));
    for (const auto& p : experiment_info(kind).params) c.params[p.name] = p.default_value;
    using K = ExperimentKind;
    switch (kind) {
        case K::scatter_sweep:
            c.potential = PotentialSpec::gaussian(3.0, 1.0);
            c.grid = {8192, 40.0};
            break;
        case K::resolvent_check:
        case K::stone_density:
            c.potential = PotentialSpec::gaussian(3.0, 1.0);
            break;
        case K::resonance:
            c.potential = PotentialSpec::sech_squared(-2.0, 1.0);
            break;
        case K::born_check:
            c.potential = PotentialSpec::gaussian(3.0, 1.0);
            c.grid = {4097, 8.0};
            break;
        case K::sde_convergence:
            c.potential = PotentialSpec::gaussian(3.0, 1.0);
            c.stochastic = {1.0, 4096, 200, 42};
            break;
        case K::dispersive:
            c.stochastic = {8.0, 1024, 200, 42};
            break;
        case K::expectation_decay:
            c.grid = {16384, 160.0};
            c.stochastic = {16.0, 2048, 1000, 42};
            break;
        case K::convolution_lemma:
            c.stochastic = {4.0, 256, 500, 42};
            break;
        case K::strichartz_hom:
            c.stochastic = {4.0, 64, 64, 42};
            break;
        case K::strichartz_inhom:
            c.stochastic = {4.0, 64, 64, 42};
            c.norms = {2.0, 4.0, 4.0};
            break;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ValidationError(std::string("config: malformed YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ValidationError("config: expected a mapping at the top level");

    Parser ps;
    ps.unknown_keys(root, "", {"experiment", "potential", "grid", "stochastic", "norms", "params",
                               "output_dir"});
    if (!root["experiment"]) throw ValidationError("experiment: missing");
    std::string name;
    ps.read(root["experiment"], "experiment", name);
    const auto kind = parse_experiment(name);
    if (!kind) {
        std::string known;
        for (const auto& e : catalog()) known += (known.empty() ? "" : ", ") + e.name;
        throw ValidationError("experiment: unknown experiment '" + name + "' (known: " + known + ")");
    }
    ExperimentConfig c = default_config(*kind);

    if (const auto pot = root["potential"]; pot && ps.is_map(pot, "potential")) {
        ps.unknown_keys(pot, "potential.", {"family", "amplitude", "width", "table"});
        if (pot["family"]) {
            std::string family;
            ps.read(pot["family"], "potential.family", family);
            try {
                c.potential = PotentialSpec{parse_potential_family(family), 0.0, 1.0, {}};
            } catch (const ValidationError& e) {
                ps.issues.push_back(std::string("potential.family: ") + e.what());
            }
        }
        ps.read(pot["amplitude"], "potential.amplitude", c.potential.amplitude);
        ps.read(pot["width"], "potential.width", c.potential.width);
        if (const auto table = pot["table"]) {
            if (!table.IsSequence()) {
                ps.issues.push_back("potential.table: expected a list of [x, V] pairs");
            } else {
                std::vector<std::pair<double, double>> nodes;
                for (std::size_t i = 0; i < table.size(); ++i) {
                    const std::string path = "potential.table[" + std::to_string(i) + "]";
                    if (!table[i].IsSequence() || table[i].size() != 2) {
                        ps.issues.push_back(path + ": expected [x, V]");
                        continue;
                    }
                    double x = 0.0, v = 0.0;
                    ps.read(table[i][0], path + "[0]", x);
                    ps.read(table[i][1], path + "[1]", v);
                    nodes.emplace_back(x, v);
                }
                c.potential.table = std::move(nodes);
            }
        }
        if (c.potential.family == PotentialFamily::zero) {
            c.potential = PotentialSpec::zero();
        } else if (c.potential.family == PotentialFamily::custom_table) {
            c.potential = PotentialSpec::custom(c.potential.table);
        } else if (!c.potential.table.empty()) {
            ps.issues.push_back("potential.table: only allowed with family custom_table");
        }
    }
    if (const auto g = root["grid"]; g && ps.is_map(g, "grid")) {
        ps.unknown_keys(g, "grid.", {"n_points", "L_box"});
        ps.read_count(g["n_points"], "grid.n_points", c.grid.n_points);
        ps.read(g["L_box"], "grid.L_box", c.grid.L_box);
    }
    if (const auto s = root["stochastic"]; s && ps.is_map(s, "stochastic")) {
        ps.unknown_keys(s, "stochastic.", {"T", "n_steps", "n_paths", "seed"});
        ps.read(s["T"], "stochastic.T", c.stochastic.T);
        ps.read_count(s["n_steps"], "stochastic.n_steps", c.stochastic.n_steps);
        ps.read_count(s["n_paths"], "stochastic.n_paths", c.stochastic.n_paths);
        ps.read_u64(s["seed"], "stochastic.seed", c.stochastic.seed);
    }
    if (const auto n = root["norms"]; n && ps.is_map(n, "norms")) {
        ps.unknown_keys(n, "norms.", {"rho", "r", "p"});
        ps.read(n["rho"], "norms.rho", c.norms.rho);
        ps.read(n["r"], "norms.r", c.norms.r);
        ps.read(n["p"], "norms.p", c.norms.p);
    }
    if (const auto p = root["params"]; p && ps.is_map(p, "params")) {
        for (const auto& kv : p) {
            const auto key = kv.first.as<std::string>();
            if (!c.params.contains(key)) {
                ps.issues.push_back("params." + key + ": unknown parameter for experiment " + name);
                continue;
            }
            ps.read(kv.second, "params." + key, c.params[key]);
        }
    }
    ps.read(root["output_dir"], "output_dir", c.output_dir);

    if (!ps.issues.empty()) {
        std::string msg;
        for (const auto& issue : ps.issues) msg += (msg.empty() ? "" : "\n") + issue;
        throw ValidationError(msg);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

namespace {

std::string serialize(const ExperimentConfig& c, bool with_output_dir) {
    std::ostringstream out;
    out << "experiment: " << to_string(c.experiment) << '\n';
    out << "potential:\n  family: " << to_string(c.potential.family) << '\n';
    switch (c.potential.family) {
        case PotentialFamily::zero:
            break;
        case PotentialFamily::custom_table:
            out << "  table:\n";
            for (const auto& [x, v] : c.potential.table) {
                out << "    - [" << format_number(x) << ", " << format_number(v) << "]\n";
            }
            break;
        default:
            out << "  amplitude: " << format_number(c.potential.amplitude) << '\n';
            out << "  width: " << format_number(c.potential.width) << '\n';
    }
    out << "grid:\n  n_points: " << c.grid.n_points << "\n  L_box: " << format_number(c.grid.L_box) << '\n';
    out << "stochastic:\n  T: " << format_number(c.stochastic.T) << "\n  n_steps: " << c.stochastic.n_steps
        << "\n  n_paths: " << c.stochastic.n_paths << "\n  seed: " << c.stochastic.seed << '\n';
    out << "norms:\n  rho: " << format_number(c.norms.rho) << "\n  r: " << format_number(c.norms.r)
        << "\n  p: " << format_number(c.norms.p) << '\n';
    out << "params:\n";
    for (const auto& [k, v] : c.params) out << "  " << k << ": " << format_number(v) << '\n';
    if (with_output_dir) {
        out << "output_dir: " << YAML::Dump(YAML::Node(c.output_dir)) << '\n';
    }
    return out.str();
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) { return serialize(config, true); }

std::string config_hash(const ExperimentConfig& config) {
    // The output location does not change what is computed.
    const std::string text = serialize(config, false);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf.data(), 16);
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> issues;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) issues.push_back(msg);
    };
    auto finite_positive = [](double v) { return v > 0.0 && std::isfinite(v); };

    try {
        c.potential.validate();
    } catch (const ValidationError& e) {
        issues.push_back(std::string("potential: ") + e.what());
    }
    if (c.potential.family == PotentialFamily::custom_table && c.potential.table.size() >= 2) {
        need(c.potential.table.front().first <= -c.grid.L_box &&
                 c.potential.table.back().first >= c.grid.L_box,
             "potential.table: must cover [-L_box, L_box]");
    }
    need(c.grid.n_points >= Grid::kMinPoints, "grid.n_points: must be >= 16");
    need(finite_positive(c.grid.L_box), "grid.L_box: must be positive");
    if (c.potential.family != PotentialFamily::zero) {
        need(c.grid.n_points <= 8192, "grid.n_points: the dense eigensolver is capped at 8192 points");
    }
    need(finite_positive(c.stochastic.T), "stochastic.T: must be positive");
    need(c.stochastic.n_steps >= 1, "stochastic.n_steps: must be >= 1");
    need(c.stochastic.n_paths >= 1, "stochastic.n_paths: must be >= 1");
    need(!c.output_dir.empty(), "output_dir: must not be empty");

    const auto& p = c.params;
    auto positive_param = [&](const char* name) {
        need(finite_positive(p.at(name)), std::string("params.") + name + ": must be positive");
    };
    auto integer_param = [&](const char* name, double lo) {
        const double v = p.at(name);
        need(v >= lo && v == std::floor(v),
             std::string("params.") + name + ": must be an integer >= " + format_number(lo));
    };
    auto flag_param = [&](const char* name) {
        const double v = p.at(name);
        need(v == 0.0 || v == 1.0, std::string("params.") + name + ": must be 0 or 1");
    };
    auto horizons = [&] {
        positive_param("T_min");
        integer_param("n_horizons", 2);
        need(p.at("T_min") < c.stochastic.T, "params.T_min: must be below stochastic.T");
    };

    using K = ExperimentKind;
    switch (c.experiment) {
        case K::scatter_sweep:
            integer_param("n_lambda", 1);
            if (issues.empty()) {
                const Grid grid(c.grid.L_box, c.grid.n_points);
                const auto pot = sample_potential(c.potential, grid);
                const double lambda_max = 4.0 * std::sqrt(lambda0(c.potential)) + 1.0;
                const double step = grid.spacing() * (lambda_max + std::sqrt(pot.max_abs()));
                need(step <= 0.5, "grid.n_points: too coarse for the lambda sweep, h*(lambda_max + sqrt(max|V|)) = " +
                                      format_number(step) + " > 0.5");
            }
            break;
        case K::resonance:
            positive_param("tolerance");
            break;
        case K::resolvent_check:
            positive_param("oracle_half_width");
            positive_param("oracle_spacing");
            positive_param("epsilon_per_lambda");
            break;
        case K::born_check:
            need(p.at("energy_factor") > 1.0, "params.energy_factor: must exceed 1 (Born region E > lambda0)");
            integer_param("n_max", 0);
            positive_param("epsilon");
            positive_param("oracle_half_width");
            integer_param("refinement", 1);
            positive_param("source_width");
            need(c.potential.family != PotentialFamily::zero, "potential.family: Born check needs V != 0");
            break;
        case K::stone_density:
            integer_param("mode", 1);
            need(p.at("mode") + 1 < static_cast<double>(c.grid.n_points), "params.mode: must leave a neighbour above");
            positive_param("window_spacings");
            positive_param("epsilon_fraction");
            integer_param("n_lambda", 3);
            flag_param("boundary");
            break;
        case K::sde_convergence: {
            integer_param("levels", 2);
            positive_param("energy_cutoff");
            positive_param("u0_width");
            const double levels = p.at("levels");
            if (levels >= 2 && levels < 63) {
                const auto divisor = std::uint64_t{1} << static_cast<unsigned>(levels - 1);
                need(c.stochastic.n_steps % divisor == 0,
                     "stochastic.n_steps: must be divisible by 2^(levels-1)");
            }
            break;
        }
        case K::dispersive:
            positive_param("u0_width");
            positive_param("t_min");
            need(p.at("t_min") < c.stochastic.T, "params.t_min: must be below stochastic.T");
            integer_param("times_per_path", 1);
            need(p.at("beta_min") >= 0.0, "params.beta_min: must be >= 0");
            flag_param("project");
            break;
        case K::expectation_decay:
            need(p.at("p") >= 1.0 && p.at("p") < 2.0, "params.p: must satisfy 1 <= p < 2");
            positive_param("u0_width");
            positive_param("t_min");
            need(p.at("t_min") < c.stochastic.T, "params.t_min: must be below stochastic.T");
            integer_param("n_times", 2);
            flag_param("abscissa_only");
            break;
        case K::convolution_lemma:
            need(p.at("alpha") >= 0.0 && p.at("alpha") < 1.0, "params.alpha: must satisfy 0 <= alpha < 1");
            horizons();
            need(std::isfinite(p.at("forcing")), "params.forcing: must be finite");
            break;
        case K::strichartz_hom:
            need(admissible_pair(c.norms.r, c.norms.p), "norms: (r, p) is not an admissible pair");
            need(std::isfinite(c.norms.r), "norms.r: must be finite for Monte Carlo");
            positive_param("u0_width");
            horizons();
            flag_param("project");
            break;
        case K::strichartz_inhom: {
            need(admissible_pair(c.norms.r, c.norms.p), "norms: (r, p) is not an admissible pair");
            need(std::isfinite(c.norms.r), "norms.r: must be finite for Monte Carlo");
            const double r_dual = std::isfinite(c.norms.r) && c.norms.r > 1.0 ? holder_conjugate(c.norms.r) : 1.0;
            need(c.norms.rho >= r_dual - 1e-12 && c.norms.rho <= c.norms.r + 1e-12,
                 "norms.rho: must satisfy r' <= rho <= r");
            positive_param("forcing_width");
            horizons();
            break;
        }
    }
    return issues;
}

}  // namespace dispersion_lab
