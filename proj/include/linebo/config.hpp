#pragma once

#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "linebo/benchmarks.hpp"
#include "linebo/linebo.hpp"
#include "linebo/trace.hpp"

namespace linebo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parsed method name. RandomSearch ignores every model setting.
struct MethodSpec {
    bool random_search = false;
    bool safe = false;
    DirectionKind direction = DirectionKind::Coordinate;
};

inline std::vector<std::string> method_names() {
    return {"RandomSearch",          "LineBO-Random",     "LineBO-Coordinate",     "LineBO-Descent",
            "SafeLineBO-Random",     "SafeLineBO-Coordinate", "SafeLineBO-Descent"};
}

inline MethodSpec parse_method(const std::string& name) {
    if (name == "RandomSearch") return {true, false, DirectionKind::RandomSphere};
    std::string rest;
    MethodSpec m;
    if (name.rfind("SafeLineBO-", 0) == 0) {
        m.safe = true;
        rest = name.substr(11);
    } else if (name.rfind("LineBO-", 0) == 0) {
        rest = name.substr(7);
    } else {
        throw ConfigError("unknown method: " + name);
    }
    if (rest == "Random") m.direction = DirectionKind::RandomSphere;
    else if (rest == "Coordinate") m.direction = DirectionKind::Coordinate;
    else if (rest == "Descent") m.direction = DirectionKind::Descent;
    else throw ConfigError("unknown method: " + name);
    return m;
}

inline std::string init_mode_name(InitMode mode) {
    switch (mode) {
        case InitMode::UniformDomain: return "uniform_domain";
        case InitMode::UniformSafeSet: return "uniform_safe_set";
        case InitMode::LevelSet: return "level_set";
    }
    return "unknown";
}

struct ExperimentConfig {
    std::string objective = "Camelback2D";
    BenchmarkOptions benchmark;
    std::string method = "LineBO-Coordinate";
    LineBOConfig linebo;
    NoiseModel noise;
    InitSpec init;
    std::vector<std::uint64_t> seeds{0};
    int jobs = 1;

    [[nodiscard]] MethodSpec method_spec() const { return parse_method(method); }

    /// Copy of `linebo` with the method's direction and safety settings applied.
    [[nodiscard]] LineBOConfig resolved_linebo() const {
        LineBOConfig c = linebo;
        const MethodSpec m = method_spec();
        c.direction.kind = m.direction;
        c.safe = m.safe;
        return c;
    }

    void validate() const {
        const MethodSpec m = method_spec();
        try {
            noise.validate();
            resolved_linebo().validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (seeds.empty()) throw ConfigError("at least one seed is required");
        if (jobs < 1) throw ConfigError("jobs must be >= 1");
        const ObjectiveSpec spec = [&] {
            try {
                return make_benchmark(objective, benchmark);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }();
        if (m.safe && !spec.constrained()) throw ConfigError(method + " requires a constrained objective");
        if (init.mode == InitMode::LevelSet && !spec.level_set)
            throw ConfigError("init mode level_set is not available for " + objective);
    }
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": " + v);
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    T out{};
    ss >> out;
    if (ss.fail() || !(ss >> std::ws).eof()) throw ConfigError("invalid value for " + key + ": " + v);
    return out;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty entry in seed list");
        seeds.push_back(parse_number<std::uint64_t>(item.substr(b, e - b + 1), "seeds"));
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    return seeds;
}

inline InitMode parse_init_mode(const std::string& v) {
    if (v == "uniform_domain") return InitMode::UniformDomain;
    if (v == "uniform_safe_set") return InitMode::UniformSafeSet;
    if (v == "level_set") return InitMode::LevelSet;
    throw ConfigError("unknown init mode: " + v);
}

inline KernelFamily parse_family(const std::string& v) {
    try {
        return parse_kernel_family(v);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace detail

/// Parses an INI experiment description. Unknown sections and keys are errors.
inline ExperimentConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    static const std::set<std::string> known = {"objective", "method", "kernel", "solver", "noise", "init"};
    const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    {
        // Unknown section headers, empty sections included.
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            const auto first = line.find_first_not_of(" \t");
            const auto last = line.find_last_not_of(" \t\r");
            if (first == std::string::npos || line[first] != '[' || line[last] != ']') continue;
            const std::string name = line.substr(first + 1, last - first - 1);
            if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
        }
    }
    pt::ptree tree;
    try {
        std::istringstream body(text);
        pt::read_ini(body, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    std::optional<std::vector<std::uint64_t>> seed_list;
    int repeats = 1;
    std::uint64_t seed_start = 0;
    std::optional<KernelFamily> g_family;
    std::optional<double> g_lengthscale, g_variance;

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError("key outside any section: " + section);
        if (!known.count(section)) throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            const std::string v = node.get_value<std::string>();
            const std::string where = section + "." + key;
            using detail::parse_number;
            if (section == "objective") {
                if (key == "name") cfg.objective = v;
                else if (key == "permutation_seed") cfg.benchmark.permutation_seed = parse_number<std::uint64_t>(v, where);
                else if (key == "tau") cfg.benchmark.tau = parse_number<double>(v, where);
                else if (key == "constraint_sign") {
                    if (v == "literal") cfg.benchmark.sign = ConstraintSign::Literal;
                    else if (v == "flipped") cfg.benchmark.sign = ConstraintSign::Flipped;
                    else throw ConfigError("constraint_sign must be literal or flipped");
                } else throw ConfigError("unknown key " + where);
            } else if (section == "method") {
                DirectionOracleConfig& d = cfg.linebo.direction;
                if (key == "name") cfg.method = v;
                else if (key == "budget") cfg.linebo.budget = parse_number<int>(v, where);
                else if (key == "seeds") seed_list = detail::parse_seed_list(v);
                else if (key == "repeats") repeats = parse_number<int>(v, where);
                else if (key == "seed_start") seed_start = parse_number<std::uint64_t>(v, where);
                else if (key == "jobs") cfg.jobs = parse_number<int>(v, where);
                else if (key == "buffer_cap") cfg.linebo.buffer_cap = parse_number<int>(v, where);
                else if (key == "lipschitz") cfg.linebo.lipschitz = parse_number<double>(v, where);
                else if (key == "coordinate_mode") {
                    if (v == "cyclic") d.coordinate_mode = CoordinateMode::Cyclic;
                    else if (v == "uniform") d.coordinate_mode = CoordinateMode::Uniform;
                    else throw ConfigError("coordinate_mode must be cyclic or uniform");
                } else if (key == "descent_step") d.descent_step = parse_number<double>(v, where);
                else if (key == "descent_evals") d.descent_evals = parse_number<int>(v, where);
                else if (key == "descent_switch_norm") d.descent_switch_norm = parse_number<double>(v, where);
                else if (key == "normalize_descent_step") d.normalize_descent_step = detail::parse_bool(v, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "kernel") {
                KernelSpec& k = cfg.linebo.kernel;
                if (key == "family") k.family = detail::parse_family(v);
                else if (key == "lengthscale") k.lengthscale = parse_number<double>(v, where);
                else if (key == "variance") k.variance = parse_number<double>(v, where);
                else if (key == "noise_std") cfg.linebo.noise_std = parse_number<double>(v, where);
                else if (key == "constraint_family") g_family = detail::parse_family(v);
                else if (key == "constraint_lengthscale") g_lengthscale = parse_number<double>(v, where);
                else if (key == "constraint_variance") g_variance = parse_number<double>(v, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "solver") {
                LineSolverConfig& s = cfg.linebo.solver;
                if (key == "epsilon") s.epsilon = parse_number<double>(v, where);
                else if (key == "beta") s.confidence.beta = parse_number<double>(v, where);
                else if (key == "max_evals_per_line") s.max_evals_per_line = parse_number<int>(v, where);
                else if (key == "grid_size") s.grid_size = parse_number<int>(v, where);
                else if (key == "refine") s.refine = detail::parse_bool(v, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "noise") {
                if (key == "std") cfg.noise.std = parse_number<double>(v, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "init") {
                if (key == "mode") cfg.init.mode = detail::parse_init_mode(v);
                else if (key == "level") cfg.init.level = parse_number<double>(v, where);
                else throw ConfigError("unknown key " + where);
            }
        }
    }
    if (g_family || g_lengthscale || g_variance) {
        KernelSpec g = cfg.linebo.kernel;
        if (g_family) g.family = *g_family;
        if (g_lengthscale) g.lengthscale = *g_lengthscale;
        if (g_variance) g.variance = *g_variance;
        cfg.linebo.constraint_kernel = g;
    }

    if (seed_list) {
        if (tree.get_optional<std::string>("method.repeats") && repeats != static_cast<int>(seed_list->size()))
            throw ConfigError("repeats does not match the number of listed seeds");
        cfg.seeds = *seed_list;
    } else {
        if (repeats < 1) throw ConfigError("repeats must be >= 1");
        cfg.seeds.clear();
        for (int i = 0; i < repeats; ++i) cfg.seeds.push_back(seed_start + static_cast<std::uint64_t>(i));
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    return parse_config(is);
}

/// Canonical INI serialization of every effective setting. Parsing the output
/// yields the same configuration; its hash fingerprints a run.
inline std::string to_ini(const ExperimentConfig& cfg) {
    std::ostringstream os;
    const LineBOConfig& l = cfg.linebo;
    os << "[objective]\n"
       << "name = " << cfg.objective << "\n"
       << "permutation_seed = " << cfg.benchmark.permutation_seed << "\n";
    if (cfg.benchmark.tau) os << "tau = " << format_double(*cfg.benchmark.tau) << "\n";
    os << "constraint_sign = " << (cfg.benchmark.sign == ConstraintSign::Literal ? "literal" : "flipped") << "\n\n";

    os << "[method]\n"
       << "name = " << cfg.method << "\n"
       << "budget = " << l.budget << "\n"
       << "seeds = ";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? "," : "") << cfg.seeds[i];
    os << "\n"
       << "buffer_cap = " << l.buffer_cap << "\n"
       << "lipschitz = " << format_double(l.lipschitz) << "\n"
       << "coordinate_mode = " << (l.direction.coordinate_mode == CoordinateMode::Cyclic ? "cyclic" : "uniform")
       << "\n"
       << "descent_step = " << format_double(l.direction.descent_step) << "\n"
       << "descent_evals = " << l.direction.descent_evals << "\n"
       << "descent_switch_norm = " << format_double(l.direction.descent_switch_norm) << "\n"
       << "normalize_descent_step = " << (l.direction.normalize_descent_step ? "true" : "false") << "\n\n";

    os << "[kernel]\n"
       << "family = " << to_string(l.kernel.family) << "\n"
       << "lengthscale = " << format_double(l.kernel.lengthscale) << "\n"
       << "variance = " << format_double(l.kernel.variance) << "\n"
       << "noise_std = " << format_double(l.noise_std) << "\n";
    if (l.constraint_kernel)
        os << "constraint_family = " << to_string(l.constraint_kernel->family) << "\n"
           << "constraint_lengthscale = " << format_double(l.constraint_kernel->lengthscale) << "\n"
           << "constraint_variance = " << format_double(l.constraint_kernel->variance) << "\n";
    os << "\n";

    os << "[solver]\n"
       << "epsilon = " << format_double(l.solver.epsilon) << "\n"
       << "beta = " << format_double(l.solver.confidence.beta) << "\n"
       << "max_evals_per_line = " << l.solver.max_evals_per_line << "\n"
       << "grid_size = " << l.solver.grid_size << "\n"
       << "refine = " << (l.solver.refine ? "true" : "false") << "\n\n";

    os << "[noise]\n"
       << "std = " << format_double(cfg.noise.std) << "\n\n";

    os << "[init]\n"
       << "mode = " << init_mode_name(cfg.init.mode) << "\n"
       << "level = " << format_double(cfg.init.level) << "\n";
    return os.str();
}

/// Fingerprint of the configuration excluding the seed list (seeds are recorded separately).
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.seeds = {0};
    c.jobs = 1;
    return fnv1a64(to_ini(c));
}

}  // namespace linebo
