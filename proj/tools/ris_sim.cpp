#include "ris/asymptotics.hpp"
#include "ris/config.hpp"
#include "ris/experiment.hpp"
#include "ris/units.hpp"
#include "ris/validation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInfeasible = 2;

struct Output {
  std::string path;
  std::string format = "csv";
};

void add_output(CLI::App* cmd, Output& out) {
  cmd->add_option("--out", out.path, "Output file (stdout when omitted)");
  cmd->add_option("--format", out.format, "csv or json-lines")->check(CLI::IsMember({"csv", "json-lines"}));
}

template <class Writer>
void write_to(const Output& out, Writer&& writer) {
  if (out.path.empty()) {
    writer(std::cout);
    return;
  }
  std::ofstream file(out.path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + out.path + "' for writing");
  writer(file);
  if (!file.flush()) throw std::runtime_error("failed writing '" + out.path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active/passive RIS beamforming simulator"};
  app.require_subcommand(1);

  // asymptotic
  Output asym_out;
  std::vector<double> asym_grid;
  auto* asym = app.add_subcommand("asymptotic", "Asymptotic SNR versus element count");
  asym->add_option("--elements", asym_grid, "Element counts (default 2^4 .. 2^24)")->delimiter(',');
  add_output(asym, asym_out);

  // crossover
  ris::AsymptoticParams cross = ris::reference_asymptotic_params();
  double cross_sigma2_dbm = -100.0, cross_sigma_v2_dbm = -100.0, cross_rho_f_db = -70.0, cross_rho_g_db = -70.0;
  auto* crossover = app.add_subcommand("crossover", "Element count above which a passive RIS wins");
  crossover->add_option("--p-bs-passive", cross.p_bs_p_max, "BS power of the passive system (W)");
  crossover->add_option("--p-bs-active", cross.p_bs_max, "BS power of the active system (W)");
  crossover->add_option("--p-ris", cross.p_a_max, "Reflect power of the active RIS (W)");
  crossover->add_option("--sigma2-dbm", cross_sigma2_dbm, "User noise (dBm)");
  crossover->add_option("--sigma-v2-dbm", cross_sigma_v2_dbm, "RIS noise (dBm)");
  crossover->add_option("--rho-f-db", cross_rho_f_db, "RIS-user path gain (dB)");
  crossover->add_option("--rho-g-db", cross_rho_g_db, "BS-RIS path gain (dB)");

  // coverage
  double cov_dt = 20.0, cov_alpha = 2.0, cov_beta = 2.0, cov_l0_db = -30.0, cov_p = 2.0, cov_sigma2_dbm = -100.0;
  double cov_n = 1024;
  auto* coverage = app.add_subcommand("coverage", "Smallest RIS-user distance where an active RIS wins");
  coverage->add_option("--dt", cov_dt, "BS-RIS distance (m)");
  coverage->add_option("--alpha", cov_alpha, "BS-RIS path loss exponent");
  coverage->add_option("--beta", cov_beta, "RIS-user path loss exponent");
  coverage->add_option("--l0-db", cov_l0_db, "Path gain at 1 m (dB)");
  coverage->add_option("--p-max", cov_p, "Total radiated power (W)");
  coverage->add_option("--sigma2-dbm", cov_sigma2_dbm, "Noise power (dBm)");
  coverage->add_option("--elements", cov_n, "Number of RIS elements");

  // sweep
  Output sweep_out;
  std::string var_name = "L", scenario_name = "strong", config_path;
  std::uint64_t seed = 1;
  int trials = 20, elements = 64;
  std::vector<double> values;
  std::vector<std::string> scheme_names;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sum-rate sweep");
  auto* var_opt = sweep->add_option("--var", var_name, "L, power, elements or si")
                      ->check(CLI::IsMember({"L", "power", "elements", "si"}));
  auto* scen_opt = sweep->add_option("--scenario", scenario_name, "weak or strong direct link")
                       ->check(CLI::IsMember({"weak", "strong"}));
  auto* seed_opt = sweep->add_option("--seed", seed, "Master seed");
  auto* trials_opt = sweep->add_option("--trials", trials, "Trials per x value");
  auto* elements_opt = sweep->add_option("--elements", elements, "RIS elements N");
  auto* values_opt = sweep->add_option("--values", values, "x values of the sweep")->delimiter(',');
  auto* schemes_opt = sweep->add_option("--schemes", scheme_names, "Schemes to evaluate")->delimiter(',');
  sweep->add_option("--config", config_path, "JSON config file; flags override it");
  add_output(sweep, sweep_out);

  // validate
  std::uint64_t validate_seed = 2023;
  auto* validate = app.add_subcommand("validate", "Run the built-in property checks");
  validate->add_option("--seed", validate_seed, "Seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (asym->parsed()) {
      const auto grid = asym_grid.empty() ? ris::default_asymptotic_grid() : asym_grid;
      const auto rows = ris::run_asymptotic_table(ris::reference_asymptotic_params(), grid);
      const auto fmt = ris::parse_format(asym_out.format);
      write_to(asym_out, [&](std::ostream& os) { ris::write_asymptotic(rows, os, fmt); });
      return kExitOk;
    }
    if (crossover->parsed()) {
      cross.sigma2 = ris::units::dbm_to_watt(cross_sigma2_dbm);
      cross.sigma_v2 = ris::units::dbm_to_watt(cross_sigma_v2_dbm);
      cross.rho_f2 = ris::units::db_to_linear(cross_rho_f_db);
      cross.rho_g2 = ris::units::db_to_linear(cross_rho_g_db);
      cross.validate();
      std::cout << ris::format_number(ris::crossover_elements(cross)) << '\n';
      return kExitOk;
    }
    if (coverage->parsed()) {
      const auto c = ris::min_distance_active_wins(cov_dt, cov_alpha, cov_beta, ris::units::db_to_linear(cov_l0_db),
                                                   cov_p, ris::units::dbm_to_watt(cov_sigma2_dbm), cov_n);
      if (c.attainable) {
        std::cout << ris::format_number(c.d_r) << '\n';
      } else {
        std::cout << "inf\n";
        std::cerr << "no RIS-user distance satisfies the condition\n";
      }
      return kExitOk;
    }
    if (validate->parsed()) {
      bool all = true;
      for (const auto& r : ris::run_validation(validate_seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
      }
      return all ? kExitOk : kExitInvalid;
    }
    if (sweep->parsed()) {
      ris::ScenarioSpec scenario;
      ris::SweepSpec spec;
      spec.seed = seed;
      spec.trials = trials;
      spec.variable = ris::parse_variable(var_name);
      if (!config_path.empty()) ris::apply_config_file(config_path, scenario, spec);
      if (var_opt->count()) spec.variable = ris::parse_variable(var_name);
      if (scen_opt->count()) scenario.scenario = ris::parse_scenario_kind(scenario_name);
      if (seed_opt->count()) spec.seed = seed;
      if (trials_opt->count()) spec.trials = trials;
      if (elements_opt->count()) scenario.n = elements;
      if (values_opt->count()) spec.values = values;
      if (schemes_opt->count()) {
        spec.schemes.clear();
        for (const auto& s : scheme_names) spec.schemes.push_back(ris::parse_scheme(s));
      }
      if (spec.values.empty()) spec.values = ris::default_values(spec.variable);
      if (spec.schemes.empty()) spec.schemes = ris::default_schemes(spec.variable);

      const auto outcome = ris::run_sweep(scenario, spec);
      const auto fmt = ris::parse_format(sweep_out.format);
      write_to(sweep_out, [&](std::ostream& os) { ris::write_results(outcome.rows, os, fmt); });
      for (const auto& rec : outcome.records)
        if (rec.excluded)
          std::cerr << "excluded: " << ris::scheme_name(rec.scheme) << " x=" << ris::format_number(spec.values[rec.x_index])
                    << " trial=" << rec.trial << ": " << rec.failure << '\n';
      return outcome.all_failed ? kExitInfeasible : kExitOk;
    }
  } catch (const std::invalid_argument& e) {  // ConfigError, DomainError, DimensionError
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
  return kExitOk;
}
