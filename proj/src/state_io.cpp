#include "colorent/state_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace colorent {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string state_to_json(const ColoredState& state) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::uint32_t k = 0; k < state.dim(); ++k) {
    const auto row = state.row(k);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json doc{{"n", state.n()}, {"n_colors", state.n_colors()}, {"phi", rows}};
  return doc.dump(1) + "\n";
}

ColoredState state_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("state JSON: ") + e.what());
  }
  if (!doc.contains("n") || !doc.contains("n_colors") || !doc.contains("phi"))
    throw UsageError("state JSON: expected fields n, n_colors, phi");
  const int n = doc["n"].get<int>();
  const int nc = doc["n_colors"].get<int>();
  const auto& rows = doc["phi"];
  if (!rows.is_array() || rows.size() != (std::size_t{1} << n))
    throw UsageError("state JSON: phi must hold 2^n rows");
  std::vector<double> phi;
  phi.reserve(rows.size() * static_cast<std::size_t>(nc));
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(nc))
      throw UsageError("state JSON: every row must hold n_colors values");
    for (const auto& v : row) phi.push_back(v.get<double>());
  }
  return ColoredState(n, nc, std::move(phi));
}

void write_state_csv(std::ostream& out, const ColoredState& state) {
  out << "k";
  for (int mu = 0; mu < state.n_colors(); ++mu) out << ",phi_" << mu;
  out << "\n";
  for (std::uint32_t k = 0; k < state.dim(); ++k) {
    out << k;
    for (double v : state.row(k)) out << "," << format_double(v);
    out << "\n";
  }
}

ColoredState read_state_csv(std::istream& in, int n) {
  std::string line;
  if (!std::getline(in, line)) throw UsageError("state CSV: empty input");
  const int nc = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (nc < 1) throw UsageError("state CSV: header must list phi columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const std::size_t k = std::stoul(cell);
    if (k != rows.size()) throw UsageError("state CSV: rows must be ordered by k from 0");
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != static_cast<std::size_t>(nc)) throw UsageError("state CSV: ragged row");
    rows.push_back(std::move(row));
  }
  if (n < 0) {
    if (rows.empty() || !std::has_single_bit(rows.size()))
      throw UsageError("state CSV: row count must be a power of two");
    n = std::countr_zero(rows.size());
  }
  if (rows.size() != (std::size_t{1} << n)) throw UsageError("state CSV: expected 2^n rows");
  std::vector<double> phi;
  for (const auto& row : rows) phi.insert(phi.end(), row.begin(), row.end());
  return ColoredState(n, nc, std::move(phi));
}

void save_state(const std::filesystem::path& path, const ColoredState& state) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  if (path.extension() == ".csv")
    write_state_csv(out, state);
  else
    out << state_to_json(state);
}

ColoredState load_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  if (path.extension() == ".csv") return read_state_csv(in, -1);
  std::stringstream buf;
  buf << in.rdbuf();
  return state_from_json(buf.str());
}

}  // namespace colorent
