// config.hpp — named parameter presets and the flat `key = value` parameter
// file format.
//
// Format: one `key = value` per line, `#` starts a comment, blank lines are
// ignored. Keys are the lowercase SystemParams field names (`J` may also be
// written `j`); values are decimal numbers. Unknown or repeated keys are
// errors reported with their line number.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nrqb/model.hpp"

namespace nrqb {

/// Charger/battery resonant with the drive, Δ_c = 0, γ_m = 20, g_a = g_b = √0.4
/// (so Γ = 0.04), κ_a = κ_b = 0.003, ε = 0.1, φ = π/2 and J = Γ/2.
SystemParams baseline_preset();

/// Baseline with a different bad-cavity width and g = √(Γγ_m/2), which keeps
/// Γ = 0.04 after the reduction.
SystemParams baseline_with_gamma_m(double gamma_m);

/// Circuit-QED numbers (κ_a/2π = 0.08 MHz, κ_b/2π = 0.06 MHz, γ_m/2π = 5 MHz,
/// g/2π = 0.33 MHz, J/2π = 0.01 MHz) expressed in units of 2π·`unit_mhz` MHz.
/// The drive ε/2π = 0.01 MHz and φ = π/2 are choices, not measured values.
SystemParams superconducting_preset(double unit_mhz = 1.0);

SystemParams preset(std::string_view name);
std::vector<std::string> preset_names();

const std::vector<std::string>& field_names();
void set_field(SystemParams& p, std::string_view key, double value);
double get_field(const SystemParams& p, std::string_view key);

/// Strict decimal parse of a whole token. Throws ConfigError.
double parse_number(std::string_view text, int line = 0);

/// Parses the flat format on top of `base`.
SystemParams parse_config(std::istream& in, const SystemParams& base = {});
SystemParams load_config(const std::filesystem::path& path, const SystemParams& base = {});

/// Applies one `key=value` assignment.
void apply_assignment(SystemParams& p, std::string_view assignment);

/// Serializes in the same format, 17 significant digits.
std::string format_config(const SystemParams& p);

}  // namespace nrqb
