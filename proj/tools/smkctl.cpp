// smkctl: command-line front end for the smk library.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric or precondition
// failure. Errors are reported on stderr as one line:
//   error: kind=<config|numeric> code=<code> message=<text>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "smk/bayes.hpp"
#include "smk/covering.hpp"
#include "smk/error.hpp"
#include "smk/hypothesis.hpp"
#include "smk/kernel.hpp"
#include "smk/kernel_io.hpp"
#include "smk/metrics.hpp"
#include "smk/simulate.hpp"
#include "smk/verification.hpp"

namespace fs = std::filesystem;
using namespace smk;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v(i));
  }
  return out;
}

template <class T>
std::string join_list(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

void field(const std::string& key, const std::string& value) {
  std::cout << key << ": " << value << '\n';
}
void field(const std::string& key, double value) { field(key, format_double(value)); }
void field(const std::string& key, std::size_t value) { field(key, std::to_string(value)); }
void field(const std::string& key, bool value) { field(key, std::string(value ? "true" : "false")); }

// Explicit --output wins; otherwise $SMK_OUTPUT_DIR/<default_name>; otherwise
// stdout (empty optional).
std::optional<fs::path> output_path(const std::string& explicit_path,
                                    const std::string& default_name) {
  if (!explicit_path.empty()) return fs::path(explicit_path);
  if (const char* dir = std::getenv("SMK_OUTPUT_DIR"); dir && *dir) {
    fs::create_directories(dir);
    return fs::path(dir) / default_name;
  }
  return std::nullopt;
}

template <class Writer>
void emit(const std::optional<fs::path>& path, Writer&& write, const std::string& label) {
  if (!path) {
    write(std::cout);
    return;
  }
  std::ofstream out(*path);
  if (!out) config_error("file_write", "cannot write " + path->string());
  write(out);
  std::cerr << label << ": " << path->string() << '\n';
}

Kernel load(const std::string& path) { return load_kernel(path).kernel; }

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string kernel;
};

int run_validate(const ValidateArgs& a) {
  const LoadedKernel loaded = load_kernel(a.kernel);
  const Kernel& k = loaded.kernel;
  const AssumptionReport r = validate_assumptions(k);
  const StateSpace& states = states_of(k);
  field("kind", std::string(is_discrete(k) ? "discrete" : "continuous"));
  field("states", join_list(states.labels()));
  if (const auto* d = std::get_if<DiscreteSmk>(&k)) field("k_max", d->k_max());
  field("row_adjustments", loaded.adjustments.size());
  for (const auto& adj : loaded.adjustments) {
    field("row_adjusted", states.label(adj.state) + " sum=" + format_double(adj.original_sum));
  }
  field("a1_irreducible_emc", r.a1.satisfied);
  field("a1_witness", r.a1.witness);
  field("emc_period", r.period);
  field("a2_finite_mean_sojourn", r.a2.satisfied);
  field("a2_witness", r.a2.witness);
  field("a3_nondegenerate_sojourn", r.a3.satisfied);
  field("a3_witness", r.a3.witness);
  field("mean_sojourn", join(r.mean_sojourn));
  field("stationary_mean_sojourn", r.stationary_mean_sojourn);
  if (!is_discrete(k)) field("normalisation_error", r.normalisation_error);
  if (r.irreducible) {
    const Matrix p = emc_transition(k);
    field("rho", join(stationary_emc(p)));
    const unsigned kk = smallest_minorizing_k(p);
    const MinorizationConstants m = minorization(p, kk, 1);
    field("minorization_k", std::size_t{kk});
    field("nu_star", join(m.nu_star));
    field("eta_star", join(m.eta_star));
    field("uniform_minorization_constant", m.uniform_constant);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string kernel;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string init = "stationary";
  std::string output;
};

InitialLaw parse_init(const std::string& init, const StateSpace& states) {
  if (init == "stationary") return InitialLaw::stationary();
  const auto idx = states.index_of(init);
  if (!idx) config_error("bad_initial_law", "--init must be 'stationary' or a state label");
  return InitialLaw::fixed(*idx, states.size());
}

int run_simulate(const SimulateArgs& a) {
  const Kernel k = load(a.kernel);
  const StateSpace& states = states_of(k);
  const Trajectory traj =
      sample_trajectory(k, a.n, parse_init(a.init, states), derive_seed(a.seed, "simulate"));
  emit(output_path(a.output, "trajectory.csv"),
       [&](std::ostream& out) { write_trajectory_csv(traj, states, out); }, "trajectory");
  return 0;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
  double lambda = 0.1;
  std::optional<double> xi;
  std::optional<double> epsilon;
  std::optional<unsigned> k;
  std::optional<unsigned> l;
};

PlanOptions plan_options(const PlanArgs& a, std::uint64_t seed) {
  PlanOptions o;
  o.lambda = a.lambda;
  o.xi = a.xi;
  o.epsilon = a.epsilon;
  o.k = a.k;
  o.l = a.l;
  o.seed = seed;
  return o;
}

AlternativeKind parse_kind(const std::string& s) {
  if (s == "simple") return AlternativeKind::kSimple;
  if (s == "ball") return AlternativeKind::kBall;
  if (s == "net") return AlternativeKind::kNet;
  config_error("bad_alternative", "--kind must be simple, ball, or net");
}

struct TestArgs {
  std::string null_kernel;
  std::string alt_kernel;
  std::string markov_null;
  std::string kind = "ball";
  PlanArgs plan;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string trajectory;
  std::string truth;
  double grid_lo = 0.05, grid_hi = 0.95, grid_step = 0.05;
  double m = 2.0;
};

Matrix parse_matrix_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("file_not_found", "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    config_error("markov_format", std::string("invalid JSON: ") + e.what());
  }
  const bool gen = doc.contains("generator");
  const auto& rows = gen ? doc["generator"] : doc.value("transition", nlohmann::json());
  if (!rows.is_array() || rows.empty()) {
    config_error("markov_format", "expected a 'transition' or 'generator' matrix");
  }
  Matrix m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != rows.size()) {
      config_error("markov_format", "matrix must be square");
    }
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

MarkovNull load_markov_null(const std::string& path) {
  std::ifstream in(path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  MarkovNull null;
  null.generator = !doc.is_discarded() && doc.contains("generator");
  null.matrix = parse_matrix_json(path);
  return null;
}

int run_test(const TestArgs& a) {
  const AlternativeKind kind = parse_kind(a.kind);
  std::optional<Kernel> alt;
  if (!a.alt_kernel.empty()) alt = load(a.alt_kernel);
  Kernel q0 = [&]() -> Kernel {
    if (!a.markov_null.empty()) {
      if (!alt) config_error("bad_alternative", "--markov-null needs --alt");
      return embed_markov_null(load_markov_null(a.markov_null), *alt);
    }
    if (a.null_kernel.empty()) config_error("missing_null", "give --null or --markov-null");
    return load(a.null_kernel);
  }();

  std::optional<CoveringNet> net;
  TestPlan plan = [&]() {
    const PlanOptions o = plan_options(a.plan, derive_seed(a.seed, "test"));
    if (kind == AlternativeKind::kNet) {
      if (!a.plan.epsilon) config_error("bad_epsilon", "net tests need --epsilon");
      const Matrix p0 = emc_transition(q0);
      const unsigned k = a.plan.k ? *a.plan.k : smallest_minorizing_k(p0);
      const MinorizationConstants mc = minorization(p0, k, a.plan.l ? *a.plan.l : 1);
      const double xi = a.plan.xi ? *a.plan.xi : default_xi(a.plan.lambda);
      net = covering_net(q0, *a.plan.epsilon, xi * *a.plan.epsilon,
                         ParametricGrid::geometric(a.grid_lo, a.grid_hi, a.grid_step),
                         mc.nu_star, mc.eta_star);
      return make_net_plan(q0, *net, o);
    }
    if (!alt) config_error("bad_alternative", "--alt is required for simple and ball tests");
    return make_plan(q0, kind, {*alt}, o);
  }();

  Trajectory traj;
  std::string source;
  if (!a.trajectory.empty()) {
    std::ifstream in(a.trajectory);
    if (!in) config_error("file_not_found", "cannot open " + a.trajectory);
    traj = read_trajectory_csv(in, states_of(q0));
    source = a.trajectory;
  } else {
    const Kernel truth = a.truth.empty() ? q0 : load(a.truth);
    require_comparable(q0, truth);
    traj = sample_trajectory(truth, a.n, InitialLaw::stationary(), derive_seed(a.seed, "test/data"));
    source = a.truth.empty() ? "simulated under null" : "simulated under " + a.truth;
  }
  Rng aux(a.seed, "test/aux");
  const TestOutcome out = run_test(traj, plan, aux);
  const std::size_t n = traj.n();

  field("alternative", alternative_name(plan.kind));
  field("data", source);
  field("n", n);
  field("decision", std::string(out.reject_null ? "reject" : "accept"));
  field("reject_null", out.reject_null);
  field("statistic", out.statistic);
  field("blocks", out.blocks);
  field("tau", join_list(out.tau));
  field("lambda", plan.constants.lambda);
  field("xi", plan.constants.xi);
  field("epsilon", plan.epsilon);
  field("k", std::size_t{plan.k});
  field("l", std::size_t{plan.l});
  field("kappa", std::size_t{plan.kappa()});
  field("nu_star", join(plan.minorization.nu_star));
  field("eta_star", join(plan.minorization.eta_star));
  field("K", plan.constants.k);
  field("K_lambda", plan.constants.k_lambda);
  field("K_tilde", plan.constants.k_tilde);
  field("type_i_bound", plan.type_i_bound(n));
  field("type_ii_bound", plan.type_ii_bound(n));
  field("test_kernel_digest", hex(out.test_digest));
  if (plan.kind == AlternativeKind::kNet) {
    field("net_size", plan.alternatives.size());
    field("net_log_cardinality", net->log_cardinality);
    field("rejecting_index", out.rejecting_index ? std::to_string(*out.rejecting_index)
                                                 : std::string("none"));
    const CorollaryBounds cb = corollary_bounds(plan.constants, n, plan.epsilon, a.m);
    field("M", a.m);
    field("corollary_type_i_bound_m_squared", cb.type_i_m_squared);
    field("corollary_type_i_bound_m_linear", cb.type_i_m_linear);
    field("corollary_type_ii_bound_m_squared", cb.type_ii_m_squared);
    field("corollary_type_ii_bound_m_linear", cb.type_ii_m_linear);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PowerArgs {
  std::string grid;
  std::string output;
  std::optional<std::uint64_t> seed;
};

template <class T>
std::optional<T> opt(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<T>();
}

int run_power(const PowerArgs& a) {
  std::ifstream in(a.grid);
  if (!in) config_error("file_not_found", "cannot open " + a.grid);
  nlohmann::json grid;
  try {
    grid = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    config_error("grid_format", std::string("invalid JSON: ") + e.what());
  }
  const fs::path base = fs::path(a.grid).parent_path();
  auto resolve = [&](const std::string& p) { return (base / p).string(); };
  try {
    if (!grid.contains("alternative")) config_error("grid_format", "missing 'alternative'");
    const Kernel alt = load(resolve(grid["alternative"].get<std::string>()));
    Kernel q0 = [&]() -> Kernel {
      if (grid.contains("markov_null")) {
        return embed_markov_null(load_markov_null(resolve(grid["markov_null"].get<std::string>())),
                                 alt);
      }
      if (!grid.contains("null")) config_error("grid_format", "missing 'null' or 'markov_null'");
      return load(resolve(grid["null"].get<std::string>()));
    }();
    const AlternativeKind kind = parse_kind(grid.value("kind", std::string("ball")));
    if (kind == AlternativeKind::kNet) config_error("grid_format", "power studies take simple or ball");

    StudyConfig config;
    config.n_grid = grid.at("n").get<std::vector<std::size_t>>();
    config.replications = grid.value("replications", std::size_t{1000});
    config.seed = a.seed ? *a.seed : grid.value("seed", std::uint64_t{0});
    if (config.replications < 100) config_error("bad_replications", "power studies need >= 100 replications");

    PlanArgs pa;
    pa.lambda = grid.value("lambda", 0.1);
    pa.xi = opt<double>(grid, "xi");
    pa.k = opt<unsigned>(grid, "k");
    pa.l = opt<unsigned>(grid, "l");
    std::vector<std::optional<double>> epsilons;
    if (grid.contains("epsilon")) {
      for (double e : grid["epsilon"].get<std::vector<double>>()) epsilons.emplace_back(e);
    } else {
      epsilons.emplace_back(std::nullopt);
    }
    const std::size_t probes = grid.value("probes", std::size_t{0});
    for (const auto& eps : epsilons) {
      pa.epsilon = eps;
      TestPlan plan = make_plan(q0, kind, {alt}, plan_options(pa, derive_seed(config.seed, "plan")));
      StudyCell cell{plan, {}};
      if (kind == AlternativeKind::kBall && probes > 0) {
        cell.alternatives = ball_probes(alt, plan.constants.xi * plan.epsilon,
                                        plan.minorization.eta_star, probes,
                                        derive_seed(config.seed, "probes"));
      } else {
        cell.alternatives = {alt};
      }
      config.cells.push_back(std::move(cell));
    }
    const ErrorStudy study = error_study(config);
    for (const auto& r : study.rows) {
      if (r.skipped) std::cerr << "skipped: n=" << r.n << " reason=" << r.skip_reason << '\n';
    }
    emit(output_path(a.output, "error_study.csv"),
         [&](std::ostream& out) { write_study_csv(study, out); }, "error_study");
  } catch (const nlohmann::json::exception& e) {
    config_error("grid_format", e.what());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PosteriorArgs {
  std::string q0;
  double prior_alpha = 1.0;
  std::string prior_file;
  std::vector<std::size_t> n_grid = {100, 1000, 10000};
  std::string eps_rule = "sqrt-log";
  std::vector<double> m_values = {2, 5, 10};
  std::size_t replications = 20;
  std::size_t mc_samples = 1000;
  std::uint64_t seed = 0;
  std::vector<double> c_grid = {0.5, 1, 2, 4, 8};
  std::string output;
  std::string feasibility_output;
  bool skip_feasibility = false;
};

EpsRule parse_eps_rule(const std::string& s) {
  if (s == "sqrt-log") return default_eps_rule;
  if (s.rfind("power:", 0) == 0) {
    double a = 0.0;
    try {
      a = std::stod(s.substr(6));
    } catch (const std::exception&) {
      config_error("bad_eps_rule", "power:<a> needs a number");
    }
    if (!(a > 0.0 && a < 0.5)) config_error("bad_eps_rule", "power:<a> needs 0 < a < 1/2");
    return [a](std::size_t n) { return std::pow(static_cast<double>(n), -a); };
  }
  config_error("bad_eps_rule", "--eps-rule must be sqrt-log or power:<a>");
}

DirichletSmk load_prior(const std::string& path, const DiscreteSmk& q0) {
  std::ifstream in(path);
  if (!in) config_error("file_not_found", "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    const auto& alpha = doc.at("alpha");
    std::vector<double> table;
    for (const auto& row : alpha) {
      for (const auto& cells : row) {
        for (const auto& v : cells) table.push_back(v.get<double>());
      }
    }
    return DirichletSmk(q0.states(), q0.k_max(), std::move(table));
  } catch (const nlohmann::json::exception& e) {
    config_error("prior_format", e.what());
  }
}

int run_posterior(const PosteriorArgs& a) {
  const Kernel k = load(a.q0);
  const auto* q0 = std::get_if<DiscreteSmk>(&k);
  if (!q0) config_error("kernel_mismatch", "posterior studies need a discrete q0");
  const DirichletSmk prior = a.prior_file.empty()
                                 ? DirichletSmk::uniform(q0->states(), q0->k_max(), a.prior_alpha)
                                 : load_prior(a.prior_file, *q0);
  for (std::size_t n : a.n_grid) {
    if (n < 2) config_error("bad_n", "n grid values must be >= 2");
  }
  const EpsRule rule = parse_eps_rule(a.eps_rule);

  ConcentrationConfig cc;
  cc.n_grid = a.n_grid;
  cc.eps_rule = rule;
  cc.m_values = a.m_values;
  cc.replications = a.replications;
  cc.mc_samples = a.mc_samples;
  cc.seed = derive_seed(a.seed, "posterior/curve");
  const ConcentrationCurve curve = concentration_curve(*q0, prior, cc);
  emit(output_path(a.output, "concentration.csv"),
       [&](std::ostream& out) { write_concentration_csv(curve, out); }, "concentration");

  if (!a.skip_feasibility) {
    FeasibilityConfig fc;
    fc.n_grid = a.n_grid;
    fc.eps_rule = rule;
    fc.c_grid = a.c_grid;
    fc.mc_samples = a.mc_samples;
    fc.seed = derive_seed(a.seed, "posterior/feasibility");
    const FeasibilityReport rep = h3_h4_feasibility(prior, *q0, fc);
    std::optional<fs::path> path = output_path(a.feasibility_output, "feasibility.csv");
    if (!path && !a.output.empty()) {
      path = fs::path(a.output).parent_path() / "feasibility.csv";
    }
    emit(path, [&](std::ostream& out) { write_feasibility_csv(rep, out); }, "feasibility");
    std::cerr << "feasible_c: " << (rep.feasible_c.empty() ? "none" : join_list(rep.feasible_c))
              << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = 7;
  std::size_t draws = 1000;
  double tolerance = 1e-10;
};

int run_verify(const VerifyArgs& a) {
  IdentityOptions o;
  o.seed = a.seed;
  o.draws = a.draws;
  o.tolerance = a.tolerance;
  const IdentityReport ir = verify_identities(o);
  const StationarityReport sr = verify_stationarity(a.seed, a.draws, a.tolerance);
  field("seed", std::to_string(a.seed));
  field("draws", ir.draws);
  field("tolerance", a.tolerance);
  field("states_checked", ir.states_checked);
  field("degenerate_states", ir.degenerate_states);
  field("max_chain_excess", ir.max_chain_excess);
  field("max_lower_excess", ir.max_lower_excess);
  field("max_h12_error", ir.max_h12_error);
  field("max_h02_error", ir.max_h02_error);
  field("max_phi_inverse_times_lambda", ir.max_phi_ratio_to_bound);
  field("max_q2_mass_error", ir.max_mass_error);
  field("identity_violations", ir.violations);
  for (const auto& e : ir.examples) field("violation", e);
  field("stationary_draws", sr.draws);
  field("max_emc_residual", sr.max_emc_residual);
  field("max_invariance_residual", sr.max_invariance_residual);
  field("max_mass_residual", sr.max_mass_residual);
  field("stationarity_violations", sr.violations);
  const std::size_t total = ir.violations + sr.violations;
  field("total_violations", total);
  if (total > 0) {
    numeric_error("identity_violations", std::to_string(total) + " identity checks failed");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-Markov kernels: validation, simulation, tests, and posterior studies"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a kernel file against A1-A3");
  validate->add_option("kernel", va.kernel, "Kernel file")->required()->check(CLI::ExistingFile);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Simulate a trajectory as CSV");
  simulate->add_option("--kernel", sa.kernel, "Kernel file")->required()->check(CLI::ExistingFile);
  simulate->add_option("-n,--n", sa.n, "Number of jumps")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sa.seed, "Master seed");
  simulate->add_option("--init", sa.init, "'stationary' or the label of the initial state");
  simulate->add_option("-o,--output", sa.output, "Output CSV");

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Run one robust test on a trajectory");
  test->add_option("--null", ta.null_kernel, "Null kernel file")->check(CLI::ExistingFile);
  test->add_option("--markov-null", ta.markov_null,
                   "JSON with a 'transition' or 'generator' matrix")
      ->check(CLI::ExistingFile);
  test->add_option("--alt", ta.alt_kernel, "Alternative kernel file")->check(CLI::ExistingFile);
  test->add_option("--kind", ta.kind, "simple, ball, or net")
      ->check(CLI::IsMember({"simple", "ball", "net"}));
  test->add_option("--lambda", ta.plan.lambda, "lambda in (0, 1/4)");
  test->add_option("--xi", ta.plan.xi, "Ball radius factor");
  test->add_option("--epsilon", ta.plan.epsilon, "Separation in d_nu*");
  test->add_option("--k", ta.plan.k, "Minorization window k");
  test->add_option("--l", ta.plan.l, "Majorization lag l");
  test->add_option("-n,--n", ta.n, "Jumps to simulate when no trajectory is given");
  test->add_option("--seed", ta.seed, "Master seed");
  test->add_option("--trajectory", ta.trajectory, "Trajectory CSV")->check(CLI::ExistingFile);
  test->add_option("--truth", ta.truth, "Kernel to simulate from (default: null)")
      ->check(CLI::ExistingFile);
  test->add_option("--grid-lo", ta.grid_lo, "Net grid: smallest stay probability");
  test->add_option("--grid-hi", ta.grid_hi, "Net grid: largest stay probability");
  test->add_option("--grid-step", ta.grid_step, "Net grid: step");
  test->add_option("--m", ta.m, "M for the aggregated-test bounds");

  PowerArgs pa;
  auto* power = app.add_subcommand("power", "Monte Carlo error study from a grid grid");
  power->add_option("grid", pa.grid, "Grid grid JSON")->required()->check(CLI::ExistingFile);
  power->add_option("-o,--output", pa.output, "Output CSV");
  power->add_option("--seed", pa.seed, "Override the grid seed");

  PosteriorArgs po;
  auto* posterior = app.add_subcommand("posterior", "Posterior concentration study");
  posterior->add_option("--q0", po.q0, "True discrete kernel")->required()->check(CLI::ExistingFile);
  posterior->add_option("--prior-alpha", po.prior_alpha, "Uniform Dirichlet concentration")
      ->check(CLI::PositiveNumber);
  posterior->add_option("--prior", po.prior_file, "JSON with an 'alpha' table")
      ->check(CLI::ExistingFile);
  posterior->add_option("--n-grid", po.n_grid, "Trajectory lengths")->delimiter(',');
  posterior->add_option("--eps-rule", po.eps_rule, "sqrt-log or power:<a>");
  posterior->add_option("--m", po.m_values, "Radius multipliers M")->delimiter(',');
  posterior->add_option("--replications", po.replications, "Trajectories per n")
      ->check(CLI::PositiveNumber);
  posterior->add_option("--mc-samples", po.mc_samples, "Draws per estimate")
      ->check(CLI::PositiveNumber);
  posterior->add_option("--seed", po.seed, "Master seed");
  posterior->add_option("--c-grid", po.c_grid, "Candidate c values")->delimiter(',');
  posterior->add_option("-o,--output", po.output, "Concentration CSV");
  posterior->add_option("--feasibility-output", po.feasibility_output, "Feasibility CSV");
  posterior->add_flag("--no-feasibility", po.skip_feasibility, "Skip the H3/H4 search");

  VerifyArgs ve;
  auto* verify = app.add_subcommand("verify", "Randomised identity suite");
  verify->add_option("--seed", ve.seed, "Master seed");
  verify->add_option("--draws", ve.draws, "Random draws")->check(CLI::PositiveNumber);
  verify->add_option("--tolerance", ve.tolerance, "Absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: kind=config code=usage message=" << msg << '\n';
    return kExitConfig;
  }

  try {
    if (*validate) return run_validate(va);
    if (*simulate) return run_simulate(sa);
    if (*test) return run_test(ta);
    if (*power) return run_power(pa);
    if (*posterior) return run_posterior(po);
    if (*verify) return run_verify(ve);
  } catch (const Error& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cout.flush();
    std::cerr << "error: kind=" << (e.kind() == ErrorKind::kConfig ? "config" : "numeric")
              << " code=" << e.code() << " message=" << msg << '\n';
    return e.kind() == ErrorKind::kConfig ? kExitConfig : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=numeric code=internal message=" << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
