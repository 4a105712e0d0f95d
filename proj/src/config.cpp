#include "nrqb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>

#include "nrqb/error.hpp"
#include "nrqb/io.hpp"

namespace nrqb {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string canonical_key(std::string_view key) {
    if (key == "j") return "J";
    return std::string(key);
}

double* field_ptr(SystemParams& p, std::string_view key) {
    const std::string k = canonical_key(key);
    if (k == "delta_a") return &p.delta_a;
    if (k == "delta_b") return &p.delta_b;
    if (k == "delta_c") return &p.delta_c;
    if (k == "g_a") return &p.g_a;
    if (k == "g_b") return &p.g_b;
    if (k == "J") return &p.J;
    if (k == "phi") return &p.phi;
    if (k == "epsilon") return &p.epsilon;
    if (k == "kappa_a") return &p.kappa_a;
    if (k == "kappa_b") return &p.kappa_b;
    if (k == "gamma_m") return &p.gamma_m;
    if (k == "omega_a") return &p.omega_a;
    if (k == "omega_b") return &p.omega_b;
    return nullptr;
}

}  // namespace

SystemParams baseline_preset() { return baseline_with_gamma_m(20.0); }

SystemParams baseline_with_gamma_m(double gamma_m) {
    constexpr double gamma_diss = 0.04;
    SystemParams p;
    p.gamma_m = gamma_m;
    p.g_a = p.g_b = std::sqrt(gamma_diss * gamma_m / 2.0);
    p.J = gamma_diss / 2.0;
    p.phi = std::numbers::pi / 2.0;
    p.epsilon = 0.1;
    p.kappa_a = p.kappa_b = 0.003;
    return p;
}

SystemParams superconducting_preset(double unit_mhz) {
    if (!(unit_mhz > 0.0)) throw InvalidParameter("frequency unit must be > 0");
    SystemParams p;
    p.kappa_a = 0.08 / unit_mhz;
    p.kappa_b = 0.06 / unit_mhz;
    p.gamma_m = 5.0 / unit_mhz;
    p.g_a = p.g_b = 0.33 / unit_mhz;
    p.J = 0.01 / unit_mhz;
    p.epsilon = 0.01 / unit_mhz;
    p.phi = std::numbers::pi / 2.0;
    return p;
}

SystemParams preset(std::string_view name) {
    if (name == "baseline") return baseline_preset();
    if (name == "superconducting") return superconducting_preset();
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"baseline", "superconducting"}; }

const std::vector<std::string>& field_names() {
    static const std::vector<std::string> names = {
        "delta_a", "delta_b", "delta_c", "g_a",     "g_b",     "J",      "phi",
        "epsilon", "kappa_a", "kappa_b", "gamma_m", "omega_a", "omega_b"};
    return names;
}

void set_field(SystemParams& p, std::string_view key, double value) {
    double* f = field_ptr(p, key);
    if (!f) throw ConfigError("unknown parameter key '" + std::string(key) + "'");
    *f = value;
}

double get_field(const SystemParams& p, std::string_view key) {
    SystemParams copy = p;
    const double* f = field_ptr(copy, key);
    if (!f) throw ConfigError("unknown parameter key '" + std::string(key) + "'");
    return *f;
}

double parse_number(std::string_view text, int line) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ConfigError("invalid number '" + std::string(text) + "'", line);
    }
    return v;
}

SystemParams parse_config(std::istream& in, const SystemParams& base) {
    SystemParams p = base;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'key = value', got '" + std::string(text) + "'", line);
        }
        const std::string key = canonical_key(trim(text.substr(0, eq)));
        if (key.empty()) throw ConfigError("missing key before '='", line);
        if (!field_ptr(p, key)) throw ConfigError("unknown parameter key '" + key + "'", line);
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
        set_field(p, key, parse_number(text.substr(eq + 1), line));
    }
    return p;
}

SystemParams load_config(const std::filesystem::path& path, const SystemParams& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in, base);
}

void apply_assignment(SystemParams& p, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("override must look like key=value, got '" + std::string(assignment) + "'");
    }
    set_field(p, trim(assignment.substr(0, eq)), parse_number(assignment.substr(eq + 1)));
}

std::string format_config(const SystemParams& p) {
    std::ostringstream out;
    for (const auto& name : field_names()) {
        out << name << " = " << format_double(get_field(p, name)) << '\n';
    }
    return out.str();
}

}  // namespace nrqb
