#include "ris/experiment.hpp"

#include "ris/baselines.hpp"
#include "ris/units.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace ris {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

// Stream purposes under derive_seed(seed, {x_index, trial, purpose}).
enum Purpose : std::uint64_t { kPlacement = 1, kChannels = 2, kSelfInterference = 3, kActiveInit = 4,
                               kPassiveInit = 5, kRandomPhase = 6 };

bool is_si_scheme(Scheme s) {
  return s == Scheme::ActiveRisIdeal || s == Scheme::ActiveRisNoSuppression || s == Scheme::ActiveRisSuppression;
}

RandomStream trial_stream(const SweepSpec& sweep, std::size_t x_index, int trial, Purpose purpose) {
  return RandomStream(derive_seed(sweep.seed, {x_index, static_cast<std::uint64_t>(trial), purpose}));
}

// SI sweeps reuse one geometry/channel draw per trial across every delta.
std::size_t channel_key(const SweepSpec& sweep, std::size_t x_index) {
  return sweep.variable == SweepVariable::SiDelta ? 0 : x_index;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (!(user_radius > 0.0)) throw DomainError("user_radius must be positive");
  if (m < 1 || n < 1 || k < 1) throw DomainError("M, N, K must be >= 1");
  if (!(kappa >= 0.0)) throw DomainError("kappa must be >= 0");
  if (!(bs_share > 0.0 && bs_share < 1.0)) throw DomainError("bs_share must lie in (0, 1)");
  if (!(carrier_hz > 0.0)) throw DomainError("carrier_hz must be positive");
  if (!std::isfinite(p_total_dbm) || !std::isfinite(sigma2_dbm) || !std::isfinite(sigma_v2_dbm))
    throw DomainError("powers must be finite");
}

BuiltScenario build_scenario(const ScenarioSpec& spec, RandomStream& rng) {
  spec.validate();
  BuiltScenario out;
  out.geometry.bs_position = spec.bs_position;
  out.geometry.ris_position = spec.ris_position;
  for (int k = 0; k < spec.k; ++k) {
    const double r = spec.user_radius * std::sqrt(rng.uniform(0.0, 1.0));
    const double a = rng.uniform_phase();
    out.geometry.user_positions.push_back({spec.user_center.x + r * std::cos(a), spec.user_center.y + r * std::sin(a)});
  }
  out.geometry.validate();

  out.laws.bs_ris = PathLossModel::strong();
  out.laws.ris_user = PathLossModel::strong();
  out.laws.bs_user = spec.scenario == ScenarioKind::WeakDirect ? PathLossModel::weak() : PathLossModel::strong();
  out.wavelength = kSpeedOfLight / spec.carrier_hz;

  const double p_total = units::dbm_to_watt(spec.p_total_dbm);
  SystemConfig base;
  base.m = spec.m;
  base.k = spec.k;
  base.n = spec.n;
  base.sigma2 = units::dbm_to_watt(spec.sigma2_dbm);
  base.sigma_v2 = units::dbm_to_watt(spec.sigma_v2_dbm);

  out.active = base;
  out.active.mode = RisMode::ActiveRis;
  out.active.p_bs_max = spec.bs_share * p_total;
  out.active.p_a_max = (1.0 - spec.bs_share) * p_total;

  out.passive = base;
  out.passive.mode = RisMode::PassiveRis;
  out.passive.p_bs_max = p_total;
  out.passive.p_a_max = p_total;  // unused without an active surface
  return out;
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ActiveRis: return "active-ris";
    case Scheme::PassiveRis: return "passive-ris";
    case Scheme::RandomPhase: return "random-phase";
    case Scheme::NoRis: return "no-ris";
    case Scheme::ActiveRisIdeal: return "active-ris-ideal";
    case Scheme::ActiveRisNoSuppression: return "active-ris-no-suppression";
    case Scheme::ActiveRisSuppression: return "active-ris-suppression";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::ActiveRis, Scheme::PassiveRis, Scheme::RandomPhase, Scheme::NoRis, Scheme::ActiveRisIdeal,
                   Scheme::ActiveRisNoSuppression, Scheme::ActiveRisSuppression})
    if (scheme_name(s) == name) return s;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

SweepVariable parse_variable(const std::string& name) {
  if (name == "L" || name == "distance") return SweepVariable::DistanceL;
  if (name == "power") return SweepVariable::TotalPower;
  if (name == "elements") return SweepVariable::ElementCount;
  if (name == "si") return SweepVariable::SiDelta;
  throw std::invalid_argument("unknown sweep variable '" + name + "' (expected L, power, elements or si)");
}

std::vector<Scheme> default_schemes(SweepVariable v) {
  if (v == SweepVariable::SiDelta)
    return {Scheme::ActiveRisIdeal, Scheme::ActiveRisNoSuppression, Scheme::ActiveRisSuppression};
  return {Scheme::ActiveRis, Scheme::PassiveRis, Scheme::RandomPhase, Scheme::NoRis};
}

std::vector<double> default_values(SweepVariable v) {
  switch (v) {
    case SweepVariable::DistanceL: return {100, 200, 300, 400, 500};
    case SweepVariable::TotalPower: return {-10, 0, 10, 20, 30};
    case SweepVariable::ElementCount: return {16, 32, 64, 128};
    case SweepVariable::SiDelta: return {-70, -50, -35};
  }
  return {};
}

void SweepSpec::validate() const {
  if (values.empty()) throw DomainError("sweep needs at least one value");
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (schemes.empty()) throw DomainError("sweep needs at least one scheme");
  for (Scheme s : schemes)
    if (is_si_scheme(s) != (variable == SweepVariable::SiDelta))
      throw DomainError("scheme " + scheme_name(s) + " does not match the sweep variable");
  if (variable == SweepVariable::ElementCount)
    for (double v : values)
      if (!(v >= 1.0) || v != std::floor(v)) throw DomainError("element counts must be positive integers");
}

ScenarioSpec scenario_at(const ScenarioSpec& base, SweepVariable v, double x) {
  ScenarioSpec s = base;
  switch (v) {
    case SweepVariable::DistanceL:
      s.user_center = {x, 0.0};
      s.user_radius = 5.0;
      break;
    case SweepVariable::TotalPower:
      s.p_total_dbm = x;
      break;
    case SweepVariable::ElementCount:
      s.n = static_cast<int>(x);
      break;
    case SweepVariable::SiDelta:
      break;
  }
  return s;
}

ChannelSet sweep_channels(const ScenarioSpec& scenario, const SweepSpec& sweep, std::size_t x_index, int trial,
                          BuiltScenario* built) {
  const ScenarioSpec spec = scenario_at(scenario, sweep.variable, sweep.values.at(x_index));
  const std::size_t key = channel_key(sweep, x_index);
  RandomStream placement = trial_stream(sweep, key, trial, kPlacement);
  BuiltScenario b = build_scenario(spec, placement);
  RandomStream draw = trial_stream(sweep, key, trial, kChannels);
  ChannelSet ch = generate_channels(draw, b.geometry, b.laws, spec.m, spec.n, spec.kappa, b.wavelength);
  if (sweep.variable == SweepVariable::SiDelta) {
    const double delta = std::pow(10.0, sweep.values[x_index] / 10.0);
    RandomStream si = trial_stream(sweep, key, trial, kSelfInterference);
    ch.H = delta * self_interference_matrix(si, spec.n, 1.0);
  }
  if (built) *built = std::move(b);
  return ch;
}

namespace {

struct ActiveCacheEntry {
  JointSolution solution;
  std::string failure;
};

double run_scheme(Scheme scheme, const ChannelSet& ch, const BuiltScenario& b, const SweepSpec& sweep,
                  std::size_t x_index, int trial, std::map<int, ActiveCacheEntry>& active_cache) {
  const std::size_t key = channel_key(sweep, x_index);

  auto active_solution = [&]() -> const JointSolution& {
    auto it = active_cache.find(trial);
    if (it == active_cache.end()) {
      ActiveCacheEntry entry;
      try {
        RandomStream init_rng = trial_stream(sweep, key, trial, kActiveInit);
        ChannelSet ideal = ch;
        ideal.H.reset();
        entry.solution = solve_joint(ideal, b.active, sweep.solver, initial_precoder(ideal, b.active, init_rng));
      } catch (const std::exception& e) {
        entry.failure = e.what();
      }
      it = active_cache.emplace(trial, std::move(entry)).first;
    }
    if (!it->second.failure.empty()) throw InfeasibleError(it->second.failure);
    return it->second.solution;
  };

  switch (scheme) {
    case Scheme::ActiveRis:
    case Scheme::ActiveRisIdeal:
      return active_solution().result.sum_rate;
    case Scheme::PassiveRis: {
      RandomStream init_rng = trial_stream(sweep, key, trial, kPassiveInit);
      const Precoder init = initial_precoder(ch, b.passive, init_rng);
      return passive_ris_fp(ch, b.passive, sweep.solver, init).result.sum_rate;
    }
    case Scheme::RandomPhase: {
      RandomStream rng = trial_stream(sweep, key, trial, kRandomPhase);
      return random_phase_baseline(ch, b.passive, rng).result.sum_rate;
    }
    case Scheme::NoRis:
      return no_ris_baseline(ch, b.passive).result.sum_rate;
    case Scheme::ActiveRisNoSuppression: {
      const JointSolution& sol = active_solution();
      const Reflection refl = Reflection::dense(effective_precoding(sol.precoder.psi, *ch.H));
      return sum_rate(ch, sol.precoder.w, refl, b.active);
    }
    case Scheme::ActiveRisSuppression: {
      const JointSolution& sol = active_solution();
      const SiProblem problem = SiProblem::build(sol.precoder.psi, *ch.H, ch.f);
      const SiSolution si = suppress(problem);
      const TauResult tau = rescale_tau(si.phi, *ch.H, ch.G, sol.precoder.w, b.active);
      const Reflection refl = Reflection::dense(effective_precoding(tau.tau * si.phi, *ch.H));
      return sum_rate(ch, sol.precoder.w, refl, b.active);
    }
  }
  throw std::logic_error("unhandled scheme");
}

}  // namespace

SweepOutcome run_sweep(const ScenarioSpec& scenario, const SweepSpec& sweep) {
  scenario.validate();
  sweep.validate();
  SweepOutcome out;
  const std::size_t nx = sweep.values.size();
  const std::size_t ns = sweep.schemes.size();
  std::vector<std::vector<double>> rates(nx * ns);
  std::vector<int> excluded(nx * ns, 0);

  // Ideal active solutions depend only on the trial in an SI sweep.
  std::map<int, ActiveCacheEntry> si_cache;
  for (std::size_t xi = 0; xi < nx; ++xi) {
    for (int t = 0; t < sweep.trials; ++t) {
      BuiltScenario b;
      const ChannelSet ch = sweep_channels(scenario, sweep, xi, t, &b);
      const std::uint64_t fp = ch.fingerprint();
      std::map<int, ActiveCacheEntry> local_cache;
      auto& cache = sweep.variable == SweepVariable::SiDelta ? si_cache : local_cache;
      for (std::size_t si = 0; si < ns; ++si) {
        TrialRecord rec;
        rec.scheme = sweep.schemes[si];
        rec.x_index = xi;
        rec.trial = t;
        rec.channel_fingerprint = fp;
        try {
          rec.sum_rate = run_scheme(rec.scheme, ch, b, sweep, xi, t, cache);
          if (!std::isfinite(rec.sum_rate)) throw InfeasibleError("non-finite sum rate");
          rates[xi * ns + si].push_back(rec.sum_rate);
        } catch (const std::exception& e) {
          rec.excluded = true;
          rec.failure = e.what();
          ++excluded[xi * ns + si];
        }
        out.records.push_back(std::move(rec));
      }
    }
  }

  bool any_ok = false;
  for (std::size_t xi = 0; xi < nx; ++xi) {
    for (std::size_t si = 0; si < ns; ++si) {
      const auto& r = rates[xi * ns + si];
      ResultRow row;
      row.scheme = scheme_name(sweep.schemes[si]);
      row.x = sweep.values[xi];
      row.trials = static_cast<int>(r.size());
      row.excluded = excluded[xi * ns + si];
      if (!r.empty()) {
        any_ok = true;
        double sum = 0.0;
        for (double v : r) sum += v;
        row.mean_rate = sum / static_cast<double>(r.size());
        if (r.size() > 1) {
          double ss = 0.0;
          for (double v : r) ss += (v - row.mean_rate) * (v - row.mean_rate);
          row.std_rate = std::sqrt(ss / static_cast<double>(r.size() - 1));
        }
      }
      out.rows.push_back(row);
    }
  }
  out.all_failed = !any_ok;
  return out;
}

AsymptoticParams reference_asymptotic_params() {
  AsymptoticParams p;
  p.p_bs_p_max = 2.0;
  p.p_bs_max = 1.0;
  p.p_a_max = 1.0;
  p.sigma2 = units::dbm_to_watt(-100.0);
  p.sigma_v2 = units::dbm_to_watt(-100.0);
  p.rho_f2 = units::db_to_linear(-70.0);
  p.rho_g2 = units::db_to_linear(-70.0);
  return p;
}

std::vector<double> default_asymptotic_grid() {
  std::vector<double> grid;
  for (int e = 4; e <= 24; ++e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

std::vector<AsymptoticRow> run_asymptotic_table(const AsymptoticParams& base, const std::vector<double>& n_grid) {
  std::vector<AsymptoticRow> rows;
  for (double n : n_grid) {
    AsymptoticParams p = base;
    p.n = n;
    p.validate();
    rows.push_back({n, units::linear_to_db(snr_passive_asymptotic(p)), units::linear_to_db(snr_active_asymptotic(p))});
  }
  return rows;
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json-lines" || name == "jsonl") return OutputFormat::JsonLines;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv or json-lines)");
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_results(const std::vector<ResultRow>& rows, std::ostream& out, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    out << "scheme,x,mean_rate,std_rate,trials,excluded\n";
    for (const auto& r : rows)
      out << r.scheme << ',' << format_number(r.x) << ',' << format_number(r.mean_rate) << ','
          << format_number(r.std_rate) << ',' << r.trials << ',' << r.excluded << '\n';
    return;
  }
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["scheme"] = r.scheme;
    j["x"] = r.x;
    j["mean_rate"] = r.mean_rate;
    j["std_rate"] = r.std_rate;
    j["trials"] = r.trials;
    j["excluded"] = r.excluded;
    out << j.dump() << '\n';
  }
}

void write_asymptotic(const std::vector<AsymptoticRow>& rows, std::ostream& out, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    out << "n,snr_passive_db,snr_active_db\n";
    for (const auto& r : rows)
      out << format_number(r.n) << ',' << format_number(r.snr_passive_db) << ',' << format_number(r.snr_active_db)
          << '\n';
    return;
  }
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["snr_passive_db"] = r.snr_passive_db;
    j["snr_active_db"] = r.snr_active_db;
    out << j.dump() << '\n';
  }
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path, OutputFormat format) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_results(rows, file, format);
  file.flush();
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace ris
