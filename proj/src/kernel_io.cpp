#include "smk/kernel_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smk/error.hpp"

namespace smk {
namespace {

using nlohmann::json;

const json& field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    config_error("kernel_format", std::string("missing field '") + name + "'");
  }
  return doc.at(name);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) config_error("kernel_format", where + " is not a number");
  return v.get<double>();
}

// Renormalise `row` when its sum is within kLoadTolerance of 1 but outside
// the constructor's tolerance; rows already accepted are kept bit for bit.
void fix_row(std::vector<double>& row, std::size_t state,
             std::vector<RowAdjustment>& adjustments) {
  double total = 0.0;
  for (double v : row) {
    if (!(v >= 0.0)) config_error("not_stochastic", "negative entry in row " + std::to_string(state));
    total += v;
  }
  if (std::abs(total - 1.0) > kLoadTolerance) {
    config_error("not_stochastic", "row " + std::to_string(state) + " sums to " +
                                       format_double(total));
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    for (double& v : row) v /= total;
    adjustments.push_back({state, total});
  }
}

SojournDensity parse_family(const json& f, const std::string& where) {
  const auto& name = field(f, "family");
  if (!name.is_string()) config_error("kernel_format", where + ": family must be a string");
  const std::string family = name.get<std::string>();
  if (family == "exponential") {
    return SojournDensity::exponential(number(field(f, "rate"), where + ".rate"));
  }
  if (family == "weibull") {
    return SojournDensity::weibull(number(field(f, "shape"), where + ".shape"),
                                   number(field(f, "scale"), where + ".scale"));
  }
  if (family == "gamma") {
    return SojournDensity::gamma(number(field(f, "shape"), where + ".shape"),
                                 number(field(f, "rate"), where + ".rate"));
  }
  config_error("unknown_family", where + ": unknown sojourn family '" + family + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LoadedKernel parse_kernel(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("kernel_format", std::string("invalid JSON: ") + e.what());
  }

  const auto& labels_json = field(doc, "states");
  if (!labels_json.is_array()) config_error("kernel_format", "'states' must be an array");
  std::vector<std::string> labels;
  for (const auto& l : labels_json) {
    labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
  }
  StateSpace states(labels);
  const std::size_t n = states.size();

  const auto& kind = field(doc, "kind");
  if (!kind.is_string()) config_error("kernel_format", "'kind' must be a string");
  std::vector<RowAdjustment> adjustments;

  if (kind == "discrete") {
    const auto& km = field(doc, "k_max");
    if (!km.is_number_unsigned() || km.get<std::size_t>() < 1) {
      config_error("bad_k_max", "'k_max' must be a positive integer");
    }
    const auto k_max = km.get<std::size_t>();
    const auto& q = field(doc, "q");
    if (!q.is_array() || q.size() != n) config_error("shape_mismatch", "'q' needs one block per state");
    std::vector<double> table;
    table.reserve(n * n * k_max);
    for (std::size_t x = 0; x < n; ++x) {
      if (!q[x].is_array() || q[x].size() != n) {
        config_error("shape_mismatch", "q[" + std::to_string(x) + "] needs one row per state");
      }
      std::vector<double> row;
      for (std::size_t y = 0; y < n; ++y) {
        const auto& cells = q[x][y];
        if (!cells.is_array() || cells.size() != k_max) {
          config_error("shape_mismatch", "q[" + std::to_string(x) + "][" + std::to_string(y) +
                                             "] needs k_max entries");
        }
        for (const auto& c : cells) row.push_back(number(c, "q entry"));
      }
      fix_row(row, x, adjustments);
      table.insert(table.end(), row.begin(), row.end());
    }
    return {DiscreteSmk(std::move(states), k_max, std::move(table)), adjustments};
  }
  if (kind == "continuous") {
    const auto& p = field(doc, "p");
    const auto& fam = field(doc, "families");
    if (!p.is_array() || p.size() != n) config_error("shape_mismatch", "'p' needs one row per state");
    if (!fam.is_array() || fam.size() != n) {
      config_error("shape_mismatch", "'families' needs one row per state");
    }
    Matrix pm(n, n);
    std::vector<SojournDensity> sojourns;
    for (std::size_t x = 0; x < n; ++x) {
      if (!p[x].is_array() || p[x].size() != n || !fam[x].is_array() || fam[x].size() != n) {
        config_error("shape_mismatch", "row " + std::to_string(x) + " has the wrong length");
      }
      std::vector<double> row;
      for (const auto& v : p[x]) row.push_back(number(v, "p entry"));
      fix_row(row, x, adjustments);
      for (std::size_t y = 0; y < n; ++y) {
        pm(x, y) = row[y];
        sojourns.push_back(parse_family(
            fam[x][y], "families[" + std::to_string(x) + "][" + std::to_string(y) + "]"));
      }
    }
    return {ContinuousSmk(std::move(states), std::move(pm), std::move(sojourns)), adjustments};
  }
  config_error("kernel_format", "'kind' must be \"discrete\" or \"continuous\"");
}

LoadedKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("file_not_found", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kernel(ss.str());
}

std::string format_kernel(const Kernel& kernel) {
  const StateSpace& states = states_of(kernel);
  const std::size_t n = states.size();
  std::ostringstream os;
  os << "{\n  \"states\": [";
  for (std::size_t i = 0; i < n; ++i) {
    os << (i ? ", " : "") << json(states.label(i)).dump();
  }
  os << "],\n";
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    os << "  \"kind\": \"discrete\",\n  \"k_max\": " << d->k_max() << ",\n  \"q\": [\n";
    for (std::size_t x = 0; x < n; ++x) {
      os << "    [";
      for (std::size_t y = 0; y < n; ++y) {
        os << (y ? ", " : "") << '[';
        for (std::size_t k = 1; k <= d->k_max(); ++k) {
          os << (k > 1 ? ", " : "") << format_double(d->q(x, y, k));
        }
        os << ']';
      }
      os << (x + 1 < n ? "],\n" : "]\n");
    }
    os << "  ]\n}\n";
    return os.str();
  }
  const auto& c = std::get<ContinuousSmk>(kernel);
  os << "  \"kind\": \"continuous\",\n  \"p\": [\n";
  for (std::size_t x = 0; x < n; ++x) {
    os << "    [";
    for (std::size_t y = 0; y < n; ++y) os << (y ? ", " : "") << format_double(c.p()(x, y));
    os << (x + 1 < n ? "],\n" : "]\n");
  }
  os << "  ],\n  \"families\": [\n";
  for (std::size_t x = 0; x < n; ++x) {
    os << "    [";
    for (std::size_t y = 0; y < n; ++y) {
      const auto& f = c.sojourn(x, y);
      const auto par = f.parameters();
      os << (y ? ", " : "") << "{\"family\": \"" << f.family_name() << "\", ";
      switch (f.family()) {
        case SojournFamily::kExponential:
          os << "\"rate\": " << format_double(par[0]);
          break;
        case SojournFamily::kWeibull:
          os << "\"shape\": " << format_double(par[0]) << ", \"scale\": " << format_double(par[1]);
          break;
        case SojournFamily::kGamma:
          os << "\"shape\": " << format_double(par[0]) << ", \"rate\": " << format_double(par[1]);
          break;
        case SojournFamily::kRootMix:
          config_error("unserialisable_family",
                       "root-mixture sojourns have no parametric file representation");
      }
      os << '}';
    }
    os << (x + 1 < n ? "],\n" : "]\n");
  }
  os << "  ]\n}\n";
  return os.str();
}

void save_kernel(const Kernel& kernel, const std::filesystem::path& path) {
  const std::string text = format_kernel(kernel);
  std::ofstream out(path);
  if (!out) config_error("file_write", "cannot write " + path.string());
  out << text;
}

}  // namespace smk
