#pragma once

// Kernel files are JSON documents:
//
//   {"states": ["a", "b"], "kind": "discrete", "k_max": 3,
//    "q": [[[q_aa1, q_aa2, q_aa3], [q_ab1, ...]], [[...], [...]]]}
//
//   {"states": ["a", "b"], "kind": "continuous",
//    "p": [[0, 1], [1, 0]],
//    "families": [[{"family": "exponential", "rate": 1}, {...}], [...]]}
//
// Weibull entries carry "shape" and "scale"; gamma entries "shape" and
// "rate". Numbers are written with 17 significant digits.

#include <filesystem>
#include <string>
#include <vector>

#include "smk/kernel.hpp"

namespace smk {

// Rows whose total differs from 1 by more than this are rejected; smaller
// discrepancies are renormalised.
inline constexpr double kLoadTolerance = 1e-9;

struct RowAdjustment {
  std::size_t state = 0;
  double original_sum = 1.0;
};

struct LoadedKernel {
  Kernel kernel;
  std::vector<RowAdjustment> adjustments;
};

LoadedKernel parse_kernel(const std::string& text);
LoadedKernel load_kernel(const std::filesystem::path& path);

std::string format_kernel(const Kernel& kernel);
void save_kernel(const Kernel& kernel, const std::filesystem::path& path);

// printf("%.17g") of a double.
std::string format_double(double v);

}  // namespace smk
