// Scenario configuration files: flat sectioned text parsed into a
// ScenarioConfig.
//
// Grammar (also documented in README.md):
//
//   # comment lines start with '#' or ';'; blank lines are ignored
//   [scenario]
//   x0_axis  = 0, 0, 1          # unperturbed rotation vector X0 (nonzero)
//   q_axis   = 0, 0, 1          # surviving symmetry axis (normalized here)
//   epsilons = 0.005, 0.01      # strictly ascending, each <= epsilon_cap
//   seeds    = 50               # optional survey seed count (default 50)
//   [field]
//   builtin = equatorial_trap   # or one or more inline monomial terms:
//   # term = G2, 1, 0, 1, 1.0   #   component, powers of x1 x2 x3, coefficient
//   # epsilon_cap = 0.1         # optional admissible-epsilon bound
//   [tolerances]                # optional overrides, defaults in Tolerances
//   # newton = 1e-12            # keys: integ_rel integ_abs newton quadrature
//   #                           #       max_step phi_min chart_domain
//   [output]
//   directory = out/run1
//
// Every diagnostic carries "<origin>:<line>:" where it can and names the
// offending key, so a failing config is fixable from the message alone.  All
// violations are ConfigError; the command line maps that to exit code 1.
#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/scenario.hpp"

namespace spherefsb {

struct ScenarioConfig {
    Vec3 x0_axis = Vec3(0.0, 0.0, 1.0);
    Vec3 q_axis = Vec3(0.0, 0.0, 1.0); // as written; normalized when building scenarios
    PerturbationField field;
    std::string field_origin;          // "builtin:<name>" or "inline"
    std::vector<double> epsilons;
    int seeds = 50;
    Tolerances tolerances;
    std::string output_dir;

    Scenario scenario_at(double eps) const {
        return Scenario(AlgebraElement(x0_axis),
                        AlgebraElement(Vec3(q_axis / q_axis.norm())), field, eps, tolerances);
    }
};

namespace detail {

inline std::string config_trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> config_split(const std::string& s) {
    std::vector<std::string> cells;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        cells.push_back(config_trim(s.substr(pos, comma - pos)));
        pos = comma + 1;
        if (comma == s.size()) break;
    }
    return cells;
}

inline double config_double(const std::string& cell, const std::string& where) {
    try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        if (!std::isfinite(v)) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + cell + "' is not a finite number");
    }
}

inline long config_int(const std::string& cell, const std::string& where) {
    try {
        size_t used = 0;
        const long v = std::stol(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + cell + "' is not an integer");
    }
}

inline Vec3 config_vec3(const std::string& text, const std::string& where) {
    const std::vector<std::string> cells = config_split(text);
    if (cells.size() != 3) {
        throw ConfigError(where + ": needs 3 comma-separated numbers, got " +
                          std::to_string(cells.size()));
    }
    return Vec3(config_double(cells[0], where), config_double(cells[1], where),
                config_double(cells[2], where));
}

inline FieldComponent config_component(const std::string& name, const std::string& where) {
    if (name == "G1") return FieldComponent::G1;
    if (name == "G2") return FieldComponent::G2;
    if (name == "G3") return FieldComponent::G3;
    throw ConfigError(where + ": field component must be G1, G2, or G3, got '" + name + "'");
}

} // namespace detail

// Parse configuration text.  `origin` names the source (file path) in
// diagnostics.
inline ScenarioConfig parse_config_text(const std::string& text,
                                        const std::string& origin = "<config>") {
    ScenarioConfig cfg;
    cfg.field = PerturbationField(); // replaced below once [field] resolves

    enum class Section { none, scenario, field, tolerances, output };
    Section section = Section::none;

    std::map<std::string, bool> seen;   // duplicate-key detection, per section+key
    std::string builtin_name;
    double epsilon_cap = 0.1;
    bool cap_given = false;
    struct TermLine {
        FieldComponent c;
        int i, j, k;
        double coeff;
        int line;
    };
    std::vector<TermLine> terms;

    static const std::map<std::string, double Tolerances::*> kTolKeys = {
        {"integ_rel", &Tolerances::integ_rel},   {"integ_abs", &Tolerances::integ_abs},
        {"newton", &Tolerances::newton},         {"quadrature", &Tolerances::quadrature},
        {"max_step", &Tolerances::max_step},     {"phi_min", &Tolerances::phi_min},
        {"chart_domain", &Tolerances::chart_domain}};

    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const std::string line = detail::config_trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            const std::string name = detail::config_trim(line.substr(1, line.size() - 2));
            if (name == "scenario") section = Section::scenario;
            else if (name == "field") section = Section::field;
            else if (name == "tolerances") section = Section::tolerances;
            else if (name == "output") section = Section::output;
            else throw ConfigError(where + ": unknown section '[" + name + "]'");
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value' or a section header");
        }
        const std::string key = detail::config_trim(line.substr(0, eq));
        const std::string value = detail::config_trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (section == Section::none) {
            throw ConfigError(where + ": key '" + key + "' appears before any section");
        }

        const std::string section_name = section == Section::scenario     ? "scenario"
                                         : section == Section::field      ? "field"
                                         : section == Section::tolerances ? "tolerances"
                                                                          : "output";
        if (key != "term") { // terms accumulate; everything else is single-valued
            const std::string tag = section_name + "." + key;
            if (seen[tag]) throw ConfigError(where + ": duplicate key '" + key + "'");
            seen[tag] = true;
        }

        switch (section) {
        case Section::scenario:
            if (key == "x0_axis") {
                cfg.x0_axis = detail::config_vec3(value, where + ": x0_axis");
            } else if (key == "q_axis") {
                cfg.q_axis = detail::config_vec3(value, where + ": q_axis");
            } else if (key == "epsilons") {
                cfg.epsilons.clear();
                for (const std::string& cell : detail::config_split(value)) {
                    cfg.epsilons.push_back(detail::config_double(cell, where + ": epsilons"));
                }
            } else if (key == "seeds") {
                const long n = detail::config_int(value, where + ": seeds");
                if (n < 1) throw ConfigError(where + ": seeds must be >= 1, got " + value);
                cfg.seeds = static_cast<int>(n);
            } else {
                throw ConfigError(where + ": unknown [scenario] key '" + key + "'");
            }
            break;

        case Section::field:
            if (key == "builtin") {
                if (!PerturbationField::is_builtin(value)) {
                    throw ConfigError(where + ": unknown builtin field '" + value + "'");
                }
                builtin_name = value;
            } else if (key == "epsilon_cap") {
                epsilon_cap = detail::config_double(value, where + ": epsilon_cap");
                cap_given = true;
            } else if (key == "term") {
                const std::vector<std::string> cells = detail::config_split(value);
                if (cells.size() != 5) {
                    throw ConfigError(where +
                                      ": term needs 'component, i, j, k, coeff' (5 cells), got " +
                                      std::to_string(cells.size()));
                }
                TermLine t;
                t.c = detail::config_component(cells[0], where + ": term");
                t.i = static_cast<int>(detail::config_int(cells[1], where + ": term"));
                t.j = static_cast<int>(detail::config_int(cells[2], where + ": term"));
                t.k = static_cast<int>(detail::config_int(cells[3], where + ": term"));
                t.coeff = detail::config_double(cells[4], where + ": term");
                t.line = lineno;
                terms.push_back(t);
            } else {
                throw ConfigError(where + ": unknown [field] key '" + key + "'");
            }
            break;

        case Section::tolerances: {
            const auto it = kTolKeys.find(key);
            if (it == kTolKeys.end()) {
                throw ConfigError(where + ": unknown [tolerances] key '" + key + "'");
            }
            cfg.tolerances.*(it->second) = detail::config_double(value, where + ": " + key);
            break;
        }

        case Section::output:
            if (key == "directory") {
                if (value.empty()) throw ConfigError(where + ": directory must not be empty");
                cfg.output_dir = value;
            } else {
                throw ConfigError(where + ": unknown [output] key '" + key + "'");
            }
            break;

        case Section::none:
            break; // unreachable: handled above
        }
    }

    // --- assemble the field ---
    if (!builtin_name.empty() && !terms.empty()) {
        throw ConfigError(origin + ": [field] sets both 'builtin' and inline 'term' entries; "
                          "pick one");
    }
    if (builtin_name.empty() && terms.empty()) {
        throw ConfigError(origin + ": [field] must set 'builtin' or at least one 'term'");
    }
    try {
        if (!builtin_name.empty()) {
            cfg.field = cap_given ? PerturbationField::builtin(builtin_name, epsilon_cap)
                                  : PerturbationField::builtin(builtin_name);
            cfg.field_origin = "builtin:" + builtin_name;
        } else {
            cfg.field = PerturbationField(epsilon_cap);
            for (const TermLine& t : terms) {
                try {
                    cfg.field.add_term(t.c, t.i, t.j, t.k, t.coeff);
                } catch (const ValidationError& e) {
                    throw ConfigError(origin + ":" + std::to_string(t.line) + ": term: " +
                                      e.what());
                }
            }
            cfg.field_origin = "inline";
        }
    } catch (const ValidationError& e) { // epsilon_cap out of range
        throw ConfigError(origin + ": epsilon_cap: " + e.what());
    }

    // --- cross-field invariants, named diagnostics first ---
    if (!seen["scenario.x0_axis"]) throw ConfigError(origin + ": missing required key 'x0_axis'");
    if (!seen["scenario.q_axis"]) throw ConfigError(origin + ": missing required key 'q_axis'");
    if (!seen["scenario.epsilons"]) {
        throw ConfigError(origin + ": missing required key 'epsilons'");
    }
    if (!seen["output.directory"]) {
        throw ConfigError(origin + ": missing required key 'directory'");
    }
    if (!(cfg.x0_axis.norm() > 0.0)) {
        throw ConfigError(origin + ": x0_axis must be nonzero");
    }
    if (!(cfg.q_axis.norm() > 1e-12)) {
        std::ostringstream os;
        os << origin << ": q_axis must have norm > 1e-12 (got " << cfg.q_axis.norm() << ")";
        throw ConfigError(os.str());
    }
    if (cfg.epsilons.empty()) throw ConfigError(origin + ": epsilons must not be empty");
    for (size_t i = 0; i < cfg.epsilons.size(); ++i) {
        if (!(cfg.epsilons[i] >= 0.0)) {
            throw ConfigError(origin + ": epsilons must be >= 0");
        }
        if (i > 0 && !(cfg.epsilons[i] > cfg.epsilons[i - 1])) {
            throw ConfigError(origin + ": epsilons must be strictly ascending");
        }
        if (cfg.epsilons[i] > cfg.field.epsilon_cap()) {
            std::ostringstream os;
            os << origin << ": epsilons entry " << cfg.epsilons[i]
               << " exceeds the field epsilon_cap " << cfg.field.epsilon_cap();
            throw ConfigError(os.str());
        }
    }

    // Anything the scenario type itself would reject (tolerance ranges, ...)
    // is a config problem too; surface it now with the same exit-1 contract.
    try {
        (void)cfg.scenario_at(cfg.epsilons.front());
    } catch (const ValidationError& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace spherefsb
