// Acceptance suite: one PASS/FAIL line per criterion. CSVs produced along the
// way land in ./acceptance_output (or $SMK_OUTPUT_DIR when set).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/kl_enumeration.hpp"
#include "smk/bayes.hpp"
#include "smk/error.hpp"
#include "smk/hypothesis.hpp"
#include "smk/kernel.hpp"
#include "smk/simulate.hpp"
#include "smk/verification.hpp"

namespace fs = std::filesystem;
using namespace smk;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr std::size_t kGeomKmax = 40;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds,
               const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const Error& e) {
    v = {false, std::string("error ") + e.code() + ": " + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_seconds <= 0.0 || secs < limit_seconds;
  const bool ok = v.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s [%s; %.2fs%s]\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              v.detail.c_str(), secs, in_time ? "" : " over time limit");
  std::fflush(stdout);
}

fs::path output_dir() {
  const char* env = std::getenv("SMK_OUTPUT_DIR");
  fs::path dir = env && *env ? fs::path(env) : fs::path("acceptance_output");
  fs::create_directories(dir);
  return dir;
}

void save(const std::string& name, const std::string& text) {
  std::ofstream(output_dir() / name) << text;
}

Matrix stay(double a, double b) {
  Matrix m(2, 2);
  m << a, 1.0 - a, 1.0 - b, b;
  return m;
}

Kernel geometric_null() { return embed_markov_discrete(stay(0.2, 0.2), kGeomKmax); }
Kernel geometric_alt() { return embed_markov_discrete(stay(0.6, 0.6), kGeomKmax); }

const std::vector<std::size_t> kTypeGrid = {200, 500, 1000, 2000, 5000};

// The (1, 1) minorant of the alternating embedded chain is zero, so the plan
// takes the smallest informative window (k = 2, l = 1).
TestPlan geometric_plan(AlternativeKind kind) {
  return make_plan(geometric_null(), kind, {geometric_alt()}, PlanOptions{0.1, {}, {}, {}, {}, kSeed});
}

std::string type_i_csv() {
  StudyConfig config;
  config.cells.push_back({geometric_plan(AlternativeKind::kSimple), {}});
  config.n_grid = kTypeGrid;
  config.replications = 2000;
  config.seed = kSeed;
  std::ostringstream out;
  write_study_csv(error_study(config), out);
  return out.str();
}

std::string concentration_csv(ConcentrationCurve* keep = nullptr) {
  const DiscreteSmk q0 = embed_markov_discrete(stay(0.2, 0.6), 10);
  const DirichletSmk prior = DirichletSmk::uniform(q0.states(), q0.k_max());
  ConcentrationConfig cfg;
  cfg.n_grid = {100, 1000, 10000, 100000};
  cfg.m_values = {10.0};
  cfg.replications = 20;
  cfg.mc_samples = 1000;
  cfg.seed = kSeed;
  const ConcentrationCurve curve = concentration_curve(q0, prior, cfg);
  if (keep) *keep = curve;
  std::ostringstream out;
  write_concentration_csv(curve, out);
  return out.str();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "least-favourable identities, 1000 draws within 1e-10", 10.0, [] {
    IdentityOptions o;
    o.seed = kSeed;
    const IdentityReport r = verify_identities(o);
    const bool ok = r.draws == 1000 && r.violations == 0;
    return Verdict{ok, fmt("violations=%g max_h12_err=%.2e max_phi_lambda=%.4f", r.violations,
                           r.max_h12_error, r.max_phi_ratio_to_bound)};
  });

  criterion(2, "stationary pair invariance, 1000 kernels within 1e-10", 10.0, [] {
    const StationarityReport r = verify_stationarity(kSeed, 1000, 1e-10);
    return Verdict{r.draws == 1000 && r.violations == 0,
                   fmt("violations=%g max_invariance=%.2e max_mass=%.2e", r.violations,
                       r.max_invariance_residual, r.max_mass_residual)};
  });

  std::string first_type_i;
  criterion(3, "type-I rate <= exp(-K n eps^2) + 99% Wilson half-width in >= 4/5 cells", 300.0,
            [&] {
              first_type_i = type_i_csv();
              save("criterion3_type_i.csv", first_type_i);
              const TestPlan plan = geometric_plan(AlternativeKind::kSimple);
              std::istringstream in(first_type_i);
              std::string line;
              std::getline(in, line);
              int good = 0, cells = 0;
              while (std::getline(in, line)) {
                ++cells;
                good += line.find(",false,false") != std::string::npos;
              }
              return Verdict{cells == 5 && good >= 4,
                             fmt("cells within bound=%g/5 k=%g K=%.4f", good, plan.k,
                                     plan.constants.k) +
                                 fmt(" eps=%.4f", plan.epsilon)};
            });

  criterion(4, "type-II rate over 20 probes <= exp(-K~ n eps^2) + half-width in >= 4/5 cells",
            600.0, [] {
              const TestPlan plan = geometric_plan(AlternativeKind::kBall);
              StudyConfig config;
              const double radius = plan.constants.xi * plan.epsilon;
              config.cells.push_back(
                  {plan, ball_probes(geometric_alt(), radius, plan.minorization.eta_star, 20,
                                     derive_seed(kSeed, "probes"))});
              config.n_grid = kTypeGrid;
              config.replications = 2000;
              config.seed = kSeed;
              const ErrorStudy study = error_study(config);
              std::ostringstream out;
              write_study_csv(study, out);
              save("criterion4_type_ii.csv", out.str());
              int good = 0;
              for (const auto& r : study.rows) good += !r.type_ii_flagged;
              return Verdict{study.rows.size() == 5 && good >= 4,
                             fmt("cells within bound=%g/5 K~=%.5f radius=%.4f", good,
                                 plan.constants.k_tilde, radius)};
            });

  criterion(5, "Weibull(0.5) sojourns vs geometric embedding: power >= 0.95 at n=5000", 300.0,
            [] {
              Matrix swap(2, 2);
              swap << 0, 1, 1, 0;
              const std::vector<SojournDensity> w(4, SojournDensity::weibull(0.5, 2.0));
              const DiscreteSmk alt = discretize_sojourns(swap, w, kGeomKmax);
              const MarkovNull null{moment_matched_markov(alt), false};
              PlanOptions o;
              o.seed = kSeed;
              const TestPlan plan = markov_vs_semimarkov_plan(null, Kernel{alt}, o);
              StudyConfig config;
              config.cells.push_back({plan, {Kernel{alt}}});
              config.n_grid = {5000};
              config.replications = 500;
              config.seed = kSeed;
              const ErrorStudy study = error_study(config);
              std::ostringstream out;
              write_study_csv(study, out);
              save("criterion5_markov_vs_semi.csv", out.str());
              const StudyRow& r = study.rows.at(0);
              const double power = 1.0 - r.type_ii_rate;
              return Verdict{power >= 0.95 && !r.type_i_flagged,
                             fmt("power=%.4f type_i=%.4f bound=%.3e", power, r.type_i_rate,
                                 r.type_i_bound)};
            });

  criterion(6, "Monte Carlo K and V0 within 3 SE of path enumeration, 10 cases", 60.0, [] {
    int agree = 0;
    double worst = 0.0;
    for (std::uint64_t c = 0; c < 10; ++c) {
      Rng rng(kSeed, "acceptance/kl", c);
      const DiscreteSmk q0 = random_discrete_kernel(rng, 2, 2);
      const DiscreteSmk q = random_discrete_kernel(rng, 2, 2);
      const oracle::EnumeratedKl exact = oracle::enumerate_kl(q0, q, 3);
      KlOptions o;
      o.method = KlMethod::kMonteCarlo;
      o.replications = 20000;
      o.seed = derive_seed(kSeed, "acceptance/kl-mc", c);
      const KlFunctionals mc = kl_functionals(Kernel{q0}, Kernel{q}, 3, o);
      const double zk = std::abs(mc.kl - exact.kl) / mc.kl_se;
      const double zv = std::abs(mc.v0 - exact.v0) / mc.v0_se;
      worst = std::max({worst, zk, zv});
      agree += zk <= 3.0 && zv <= 3.0;
    }
    return Verdict{agree == 10, fmt("cases agreeing=%g/10 worst z=%.2f", agree, worst)};
  });

  std::string first_curve;
  criterion(7, "posterior mass outside M eps_n ball nonincreasing and < 0.05 at n=1e5", 600.0,
            [&] {
              ConcentrationCurve curve;
              first_curve = concentration_csv(&curve);
              save("criterion7_concentration.csv", first_curve);
              const double last = curve.rows.back().posterior_mass_outside;
              std::string masses;
              for (const auto& r : curve.rows) masses += fmt("%.4f ", r.posterior_mass_outside);
              return Verdict{curve.monotone.at(0) && last < 0.05, "mass=" + masses};
            });

  criterion(8, "posterior equals prior plus tally, 100 trajectories", 5.0, [] {
    int exact = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
      Rng rng(kSeed, "acceptance/conjugacy", t);
      const auto states = static_cast<std::size_t>(rng.uniform_int(2, 4));
      const auto k_max = static_cast<std::size_t>(rng.uniform_int(1, 6));
      const Kernel q{random_irreducible_kernel(rng, states, k_max, 0.3)};
      const auto n = static_cast<std::size_t>(rng.uniform_int(0, 500));
      const Trajectory traj = sample_trajectory(q, n, InitialLaw::stationary(), rng());
      std::vector<double> alpha(states * states * k_max);
      for (auto& a : alpha) a = static_cast<double>(rng.uniform_int(1, 5));
      const DirichletSmk prior(StateSpace::numbered(states), k_max, alpha);
      const DirichletSmk post = posterior_update(prior, traj);
      std::vector<long> tally(alpha.size(), 0);
      for (std::size_t l = 1; l <= traj.n(); ++l) {
        const auto k = static_cast<std::size_t>(traj.jump_times[l] - traj.jump_times[l - 1]);
        ++tally[(traj.states[l - 1] * states + traj.states[l]) * k_max + k - 1];
      }
      bool same = true;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        same = same && post.concentration()[i] == alpha[i] + static_cast<double>(tally[i]);
      }
      exact += same;
    }
    return Verdict{exact == 100, fmt("exact=%g/100", exact)};
  });

  criterion(9, "criteria 3 and 7 CSVs identical on rerun", 0.0, [&] {
    const bool a = !first_type_i.empty() && type_i_csv() == first_type_i;
    const bool b = !first_curve.empty() && concentration_csv() == first_curve;
    return Verdict{a && b, std::string("type_i ") + (a ? "same" : "differs") + ", curve " +
                               (b ? "same" : "differs")};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
