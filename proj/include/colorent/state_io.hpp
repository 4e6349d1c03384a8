#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "colorent/field.hpp"

namespace colorent {

// JSON: {"n": n, "n_colors": N_c, "phi": [[Φ_0^0, ...], ...]} with one row per k.
// CSV: header "k,phi_0,...,phi_{N_c-1}" then one row per k in increasing order.
// Both readers reject states that break the unit-norm invariant.

std::string state_to_json(const ColoredState& state);
ColoredState state_from_json(const std::string& text);

void write_state_csv(std::ostream& out, const ColoredState& state);
ColoredState read_state_csv(std::istream& in, int n);

void save_state(const std::filesystem::path& path, const ColoredState& state);
/// Dispatches on extension: .json or .csv (CSV infers n from the row count).
ColoredState load_state(const std::filesystem::path& path);

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_double(double value);

}  // namespace colorent
