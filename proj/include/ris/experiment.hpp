#pragma once

#include "ris/asymptotics.hpp"
#include "ris/channel_model.hpp"
#include "ris/fp_beamforming.hpp"
#include "ris/si_suppression.hpp"
#include "ris/system_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ris {

enum class ScenarioKind { WeakDirect, StrongDirect };

struct ScenarioSpec {
  ScenarioKind scenario = ScenarioKind::StrongDirect;
  Point2 bs_position{0.0, -60.0};
  Point2 ris_position{300.0, 10.0};
  Point2 user_center{300.0, 0.0};
  double user_radius = 50.0;
  int m = 4;
  int n = 64;
  int k = 4;
  double kappa = 1.0;
  double sigma2_dbm = -100.0;
  double sigma_v2_dbm = -100.0;
  double p_total_dbm = 10.0;
  double bs_share = 0.99;  // active system: P_BS = share * P, P_A = (1 - share) * P
  double carrier_hz = 5e9;

  void validate() const;
};

/// Configs for one realization of a scenario. The active system splits the
/// total power; every other scheme gives the whole budget to the BS.
struct BuiltScenario {
  SystemConfig active;
  SystemConfig passive;
  Geometry geometry;
  PathLossAssignment laws;
  double wavelength = 0.0;
};

BuiltScenario build_scenario(const ScenarioSpec& spec, RandomStream& rng);

enum class SweepVariable { DistanceL, TotalPower, ElementCount, SiDelta };

enum class Scheme {
  ActiveRis,
  PassiveRis,
  RandomPhase,
  NoRis,
  ActiveRisIdeal,
  ActiveRisNoSuppression,
  ActiveRisSuppression,
};

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);
SweepVariable parse_variable(const std::string& name);
std::vector<Scheme> default_schemes(SweepVariable v);
std::vector<double> default_values(SweepVariable v);

struct SweepSpec {
  SweepVariable variable = SweepVariable::DistanceL;
  std::vector<double> values;  // L in m, P in dBm, N, or delta in dB (delta = 10^(x/10))
  int trials = 20;
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes;
  SolverOptions solver;

  void validate() const;
};

/// Scenario for one x value of a sweep.
ScenarioSpec scenario_at(const ScenarioSpec& base, SweepVariable v, double x);

struct TrialRecord {
  Scheme scheme = Scheme::NoRis;
  std::size_t x_index = 0;
  int trial = 0;
  double sum_rate = 0.0;
  bool excluded = false;
  std::string failure;
  std::uint64_t channel_fingerprint = 0;
};

struct ResultRow {
  std::string scheme;
  double x = 0.0;
  double mean_rate = 0.0;
  double std_rate = 0.0;
  int trials = 0;    // trials that entered the mean
  int excluded = 0;
};

struct SweepOutcome {
  std::vector<ResultRow> rows;        // x-major, then the order of sweep.schemes
  std::vector<TrialRecord> records;   // every (x, trial, scheme)
  bool all_failed = false;
};

SweepOutcome run_sweep(const ScenarioSpec& scenario, const SweepSpec& sweep);

/// Channel draw shared by every scheme at (x_index, trial).
ChannelSet sweep_channels(const ScenarioSpec& scenario, const SweepSpec& sweep, std::size_t x_index, int trial,
                          BuiltScenario* built = nullptr);

struct AsymptoticRow {
  double n = 0.0;
  double snr_passive_db = 0.0;
  double snr_active_db = 0.0;
};

/// P_BS-P = 2 W, P_BS-A = P_A = 1 W, sigma2 = sigma_v2 = -100 dBm, rho_f2 = rho_g2 = -70 dB.
AsymptoticParams reference_asymptotic_params();
std::vector<double> default_asymptotic_grid();
std::vector<AsymptoticRow> run_asymptotic_table(const AsymptoticParams& base, const std::vector<double>& n_grid);

enum class OutputFormat { Csv, JsonLines };
OutputFormat parse_format(const std::string& name);

void write_results(const std::vector<ResultRow>& rows, std::ostream& out, OutputFormat format);
void write_asymptotic(const std::vector<AsymptoticRow>& rows, std::ostream& out, OutputFormat format);

/// Writes to `path`; throws std::runtime_error naming the path on I/O failure.
void emit_results(const std::vector<ResultRow>& rows, const std::string& path, OutputFormat format);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace ris
