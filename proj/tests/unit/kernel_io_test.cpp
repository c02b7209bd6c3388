#include <gtest/gtest.h>

#include <filesystem>

#include "smk/error.hpp"
#include "smk/kernel_io.hpp"
#include "unit/fixtures.hpp"

namespace smk {
namespace {

std::string code_of(const std::string& text) {
  try {
    parse_kernel(text);
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

TEST(KernelIo, ParsesDiscrete) {
  const LoadedKernel k = parse_kernel(
      R"({"states":["up","down"],"kind":"discrete","k_max":2,
          "q":[[[0,0],[0.25,0.75]],[[1,0],[0,0]]]})");
  const auto& q = std::get<DiscreteSmk>(k.kernel);
  EXPECT_EQ(q.states().label(1), "down");
  EXPECT_EQ(q.q(0, 1, 2), 0.75);
  EXPECT_TRUE(k.adjustments.empty());
}

TEST(KernelIo, ParsesContinuous) {
  const LoadedKernel k = parse_kernel(
      R"({"states":["a","b"],"kind":"continuous","p":[[0,1],[1,0]],
          "families":[[{"family":"exponential","rate":1},{"family":"weibull","shape":0.5,"scale":2}],
                      [{"family":"gamma","shape":2,"rate":3},{"family":"exponential","rate":1}]]})");
  const auto& q = std::get<ContinuousSmk>(k.kernel);
  EXPECT_EQ(q.sojourn(0, 1).family(), SojournFamily::kWeibull);
  EXPECT_EQ(q.sojourn(1, 0).parameters()[1], 3.0);
}

TEST(KernelIo, RenormalisesTinyDrift) {
  const LoadedKernel k = parse_kernel(
      R"({"states":["a","b"],"kind":"discrete","k_max":1,"q":[[[0],[1.0000000001]],[[1],[0]]]})");
  ASSERT_EQ(k.adjustments.size(), 1u);
  EXPECT_EQ(k.adjustments[0].state, 0u);
  EXPECT_EQ(std::get<DiscreteSmk>(k.kernel).q(0, 1, 1), 1.0);
}

TEST(KernelIo, ErrorCodes) {
  EXPECT_EQ(code_of("{"), "kernel_format");
  EXPECT_EQ(code_of(R"({"states":["a","b"],"kind":"discrete","k_max":1,"q":[[[0],[0.9]],[[1],[0]]]})"),
            "not_stochastic");
  EXPECT_EQ(code_of(R"({"states":["a","b"],"kind":"discrete","k_max":1,"q":[[[0],[1]]]})"),
            "shape_mismatch");
  EXPECT_EQ(code_of(R"({"states":["a","b"],"kind":"discrete","k_max":0,"q":[]})"), "bad_k_max");
  EXPECT_EQ(code_of(R"({"states":["a","b"],"kind":"continuous","p":[[0,1],[1,0]],
      "families":[[{"family":"lognormal"},{"family":"lognormal"}],[{"family":"lognormal"},{"family":"lognormal"}]]})"),
            "unknown_family");
  EXPECT_EQ(code_of(R"({"states":["a","b"],"kind":"tabular"})"), "kernel_format");
  EXPECT_EQ(code_of(R"({"kind":"discrete"})"), "kernel_format");
}

TEST(KernelIo, RoundTripIsExact) {
  const Kernel q = testing::geometric_kernel(0.3, 0.6, 7);
  const std::string text = format_kernel(q);
  const LoadedKernel loaded = parse_kernel(text);
  const auto& back = std::get<DiscreteSmk>(loaded.kernel);
  const auto& orig = std::get<DiscreteSmk>(q);
  ASSERT_EQ(back.table().size(), orig.table().size());
  for (std::size_t i = 0; i < back.table().size(); ++i) EXPECT_EQ(back.table()[i], orig.table()[i]);
  EXPECT_EQ(format_kernel(back), text);
}

TEST(KernelIo, ContinuousRoundTripAndFiles) {
  const Kernel q = embed_markov_continuous((Matrix(2, 2) << -1.5, 1.5, 0.1, -0.1).finished());
  const auto path = std::filesystem::temp_directory_path() / "smk_kernel_io_test.json";
  save_kernel(q, path);
  const Kernel back = load_kernel(path).kernel;
  EXPECT_EQ(format_kernel(back), format_kernel(q));
  std::filesystem::remove(path);
  EXPECT_THROW(load_kernel(path), Error);
}

TEST(KernelIo, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
}

}  // namespace
}  // namespace smk
