#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <sstream>

#include "ceq/circuit.hpp"
#include "ceq/drive.hpp"
#include "ceq/errors.hpp"
#include "ceq/fgr.hpp"
#include "ceq/noise.hpp"
#include "ceq/reduction.hpp"
#include "ceq/seeds.hpp"
#include "ceq/spin.hpp"

namespace ceqcli {

using ceq::kPi;
using ceq::kTwoPi;
using ceq::ValidationError;

namespace {

constexpr double GHz = kTwoPi * 1e9;
constexpr double MHz = kTwoPi * 1e6;

using Row = std::vector<std::string>;

struct PointOut {
  std::vector<Row> rows;
  std::vector<Table> tables;
};

// Runs n independent points on the worker pool and appends their rows in
// point order. A failed point contributes fail(i) and an error record.
template <typename Fn, typename Fail, typename Label>
void sweep(std::size_t n, int workers, Table& table, RunOutput& out, Fn fn, Fail fail, Label label) {
  std::vector<std::optional<PointOut>> results(n);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, workers, [&](std::size_t i) {
    try {
      results[i] = fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      out.errors.push_back(describe(errors[i], label(i)));
      table.rows.push_back(fail(i));
      continue;
    }
    for (auto& r : results[i]->rows) table.rows.push_back(std::move(r));
    for (auto& t : results[i]->tables) out.tables.push_back(std::move(t));
  }
}

Row padded(Row head, std::size_t width) {
  head.resize(width);
  return head;
}

std::string fixed(const std::string& key, double x) { return key + "=" + format_number(x); }

void add_warnings(RunOutput& out, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) out.summary.push_back("warning: " + w);
}

struct CircuitDefaults {
  double ec, ej, el;
};

ceq::CircuitSpec read_circuit(Section& p, const CircuitDefaults& d) {
  Section s = p.child("circuit");
  ceq::CircuitSpec c;
  c.ec = s.frequency("E_C", d.ec);
  c.ej = s.frequency("E_J", d.ej);
  c.el = s.frequency("E_L", d.el);
  c.gamma = s.number("gamma", 1.0);
  c.num_qubits = s.integer("L", 2);
  if (c.num_qubits != 2 && c.num_qubits != 3) throw ValidationError("parameters.circuit.L: must be 2 or 3");
  const auto nq = static_cast<std::size_t>(c.num_qubits);
  c.fluxes = s.list("fluxes", std::vector<double>(nq, kPi));
  c.charge_offsets = s.list("charge_offsets", std::vector<double>(nq, 0.0));
  c.grid_points = s.integer("grid_points", 2001);
  c.grid_halfwidth = s.positive("grid_halfwidth", 4.0 * kPi);
  c.levels_kept = s.integer("levels_kept", 6);
  p.adopt("circuit", s);
  if (c.fluxes.size() != nq || c.charge_offsets.size() != nq)
    throw ValidationError("parameters.circuit: fluxes and charge_offsets need one entry per fluxonium");
  c.validate();
  return c;
}

// ---------------------------------------------------------------- spectrum

Plan plan_spectrum(Section& p) {
  const ceq::CircuitSpec spec = read_circuit(p, {1.0 * GHz, 8.0 * GHz, 0.2 * GHz});
  const int levels = p.integer("levels", 8);
  const std::vector<double> offsets = p.grid("single_charge_offsets", {spec.charge_of(0)});
  const bool coupled = p.flag("coupled", true);
  p.finish();
  if (levels < 2) throw ValidationError("parameters.levels: must be at least 2");

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings& run) {
    RunOutput out;
    add_warnings(out, spec.validate());
    Table t{"spectrum.csv", {"system", "charge_offset", "level", "energy_rad_s"}, {}};
    const std::size_t n = offsets.size() + (coupled ? 1 : 0);
    std::vector<std::vector<double>> single(offsets.size());
    sweep(
        n, run.workers, t, out,
        [&](std::size_t i) {
          PointOut po;
          if (i < offsets.size()) {
            ceq::CircuitSpec s = spec;
            s.charge_offsets[0] = offsets[i];
            const auto e = ceq::single_fluxonium_spectrum(s, 0, levels).energies;
            for (ceq::Index k = 0; k < e.size(); ++k) {
              po.rows.push_back({"single", cell(offsets[i]), cell(static_cast<int>(k)), cell(e(k))});
              single[i].push_back(e(k));
            }
          } else {
            const auto h = ceq::build_coupled_circuit(spec);
            const auto eig = ceq::eigendecompose(h, std::min<ceq::Index>(levels, h.dim()));
            for (ceq::Index k = 0; k < eig.values.size(); ++k)
              po.rows.push_back({"coupled", cell(spec.charge_of(0)), cell(static_cast<int>(k)), cell(eig.values(k))});
          }
          return po;
        },
        [&](std::size_t i) {
          return padded({i < offsets.size() ? "single" : "coupled", cell(i < offsets.size() ? offsets[i] : spec.charge_of(0))}, 4);
        },
        [&](std::size_t i) { return i < offsets.size() ? fixed("single charge_offset", offsets[i]) : std::string("coupled"); });
    out.tables.insert(out.tables.begin(), std::move(t));
    double spread = 0.0;
    for (const auto& e : single) {
      if (e.empty() || single.front().empty()) continue;
      for (std::size_t k = 0; k < e.size(); ++k)
        spread = std::max(spread, std::abs(e[k] - single.front()[k]) / std::abs(single.front()[k]));
    }
    if (offsets.size() > 1) out.summary.push_back("max relative spread of single-fluxonium levels over charge offsets: " + format_number(spread));
    return out;
  };
  return plan;
}

// ---------------------------------------------------------------- reduce

Plan plan_reduce(Section& p) {
  const ceq::CircuitSpec spec = read_circuit(p, {1.0 * GHz, 8.0 * GHz, 0.2 * GHz});
  p.finish();

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings&) {
    RunOutput out;
    add_warnings(out, spec.validate());
    Table t{"reduce.csv",
            {"L", "kappa_rad_s", "J_rad_s", "h_rad_s", "h_flux_rad_s", "omega0_rad_s", "kappa_sq_over_J_rad_s",
             "omega0_perturbative_rad_s"},
            {}};
    Table levels{"reduce_levels.csv", {"level", "energy_rad_s"}, {}};
    try {
      const auto x = ceq::extract_spin_params(spec);
      const auto& m = x.model;
      t.rows.push_back({cell(m.num_spins), cell(m.kappa), cell(m.J), cell(m.h), cell(x.h_flux), cell(m.omega0),
                        cell(x.kappa_sq_over_J), cell(ceq::perturbative_omega0(m.kappa, m.J, m.num_spins))});
      for (ceq::Index k = 0; k < x.coupled_levels.size(); ++k) levels.rows.push_back({cell(static_cast<int>(k)), cell(x.coupled_levels(k))});
      add_warnings(out, x.warnings);
      out.summary.push_back("kappa/J = " + format_number(m.kappa / m.J) + ", omega0 / (kappa^2/J) = " + format_number(m.omega0 / x.kappa_sq_over_J));
    } catch (...) {
      out.errors.push_back(describe(std::current_exception(), "circuit"));
      t.rows.push_back(padded({cell(spec.num_qubits)}, t.header.size()));
    }
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(levels));
    return out;
  };
  return plan;
}

// ---------------------------------------------------------------- rabi

Plan plan_rabi(Section& p) {
  Section ms = p.child("model");
  const double kappa = ms.frequency("kappa", 30.0 * MHz);
  const double J = ms.frequency("J", 1.0 * GHz);
  const double h_over = ms.number("h_over_omega0", 50.0);
  const int L = ms.integer("L", 2);
  p.adopt("model", ms);
  std::vector<double> sweep_default;
  for (int i = 0; i <= 40; ++i) sweep_default.push_back(0.1 * i);
  const std::vector<double> alphas = p.grid("alpha_bar", sweep_default);
  const double duration = p.positive("duration_over_omega0", 300.0);
  ceq::RabiOptions opt;
  opt.steps_per_period = p.integer("steps_per_period", 200);
  opt.driven_qubit = p.integer("driven_qubit", 0);
  opt.form = p.text("form", "full", {"full", "effective"}) == "full" ? ceq::DriveForm::full : ceq::DriveForm::effective;
  p.finish();

  if (L != 2) throw ValidationError("parameters.model.L: resonant Rabi runs on the two-spin dimer");
  if (!(kappa > 0.0 && J > 0.0)) throw ValidationError("parameters.model: kappa and J must be positive");
  const double w0 = ceq::spin_doublet_half_splitting(kappa, J, L);
  const ceq::SpinModel model = ceq::make_spin_model(kappa, J, h_over * w0, L);
  const auto warnings = model.validate();
  for (double a : alphas)
    if (a < 0.0) throw ValidationError("parameters.alpha_bar: must be non-negative");

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings& run) {
    RunOutput out;
    add_warnings(out, warnings);
    Table t{"rabi.csv",
            {"alpha_bar", "omega0_rad_s", "rabi_rate_rad_s", "ratio", "bessel_prediction", "contrast", "fit_residual"},
            {}};
    std::vector<double> ratio(alphas.size(), -1.0);
    sweep(
        alphas.size(), run.workers, t, out,
        [&](std::size_t i) {
          const auto r = ceq::resonant_rabi(model, alphas[i], duration / model.omega0, opt);
          ratio[i] = r.rabi_rate / (0.5 * model.omega0);
          return PointOut{{{cell(alphas[i]), cell(model.omega0), cell(r.rabi_rate), cell(ratio[i]),
                            cell(std::abs(2.0 * std::cyl_bessel_j(1.0, alphas[i]))), cell(r.contrast), cell(r.fit_residual)}},
                          {}};
        },
        [&](std::size_t i) { return padded({cell(alphas[i]), cell(model.omega0)}, 7); },
        [&](std::size_t i) { return fixed("alpha_bar", alphas[i]); });
    const auto best = std::max_element(ratio.begin(), ratio.end());
    if (best != ratio.end() && *best >= 0.0)
      out.summary.push_back("peak rabi_rate/(omega0/2) = " + format_number(*best) + " at alpha_bar = " +
                            format_number(alphas[static_cast<std::size_t>(best - ratio.begin())]));
    out.tables.insert(out.tables.begin(), std::move(t));
    return out;
  };
  return plan;
}

// ---------------------------------------------------------------- highfreq

Plan plan_highfreq(Section& p) {
  const ceq::CircuitSpec spec = read_circuit(p, {1.0 * GHz, 15.0 * GHz, 0.1875 * GHz});
  const std::vector<double> alphas = p.grid("alpha_bar", {1.0, 1.25, 1.5, 1.9});
  std::optional<double> omega;
  double omega_over_kappa = 0.0;
  if (p.has("drive_omega")) {
    if (p.has("drive_omega_over_kappa")) throw ValidationError("parameters: give drive_omega or drive_omega_over_kappa, not both");
    omega = p.frequency("drive_omega", 0.0);
  } else {
    omega_over_kappa = p.positive("drive_omega_over_kappa", 12.0);
  }
  const double duration = p.positive("duration_over_kappa", 40.0);
  p.finish();

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings& run) {
    RunOutput out;
    add_warnings(out, spec.validate());
    Table t{"highfreq_summary.csv",
            {"alpha_bar", "drive_omega_rad_s", "kappa_rad_s", "s", "bessel_j0", "fitted_omega_rad_s", "predicted_omega_rad_s",
             "relative_error", "trace_file"},
            {}};
    const auto low = ceq::single_fluxonium_spectrum(spec, 0, 3).energies;
    const double kappa = 0.5 * (low(1) - low(0));
    const double w = omega ? *omega : omega_over_kappa * kappa;
    std::vector<double> errs(alphas.size(), 0.0);
    sweep(
        alphas.size(), run.workers, t, out,
        [&](std::size_t i) {
          ceq::DriveSpec d;
          d.mode = ceq::DriveMode::high_frequency;
          d.alpha_bar = alphas[i];
          d.drive_omega = w;
          const auto tr = ceq::high_frequency_average(spec, d, duration / kappa);
          Table trace{"highfreq_alpha_" + format_number(alphas[i]) + ".csv", {"time_s", "pop_1z", "prediction"}, {}};
          for (std::size_t k = 0; k < tr.time.size(); ++k)
            trace.rows.push_back({cell(tr.time[k]), cell(tr.population[k]), cell(tr.prediction[k])});
          const double err = std::abs(tr.fitted_omega / tr.predicted_omega - 1.0);
          errs[i] = err;
          return PointOut{{{cell(alphas[i]), cell(w), cell(tr.kappa), cell(tr.s), cell(std::cyl_bessel_j(0.0, alphas[i])),
                            cell(tr.fitted_omega), cell(tr.predicted_omega), cell(err), trace.file}},
                          {std::move(trace)}};
        },
        [&](std::size_t i) { return padded({cell(alphas[i]), cell(w), cell(kappa)}, 9); },
        [&](std::size_t i) { return fixed("alpha_bar", alphas[i]); });
    out.summary.push_back("drive_omega / kappa = " + format_number(w / kappa) + ", worst relative frequency error " +
                          format_number(*std::max_element(errs.begin(), errs.end())));
    out.tables.insert(out.tables.begin(), std::move(t));
    return out;
  };
  return plan;
}

// ---------------------------------------------------------------- lifetime-sweep

Plan plan_lifetime(Section& p) {
  const std::vector<int> Ls = p.int_grid("L", {2});
  const double J = p.frequency("J", 1.5 * GHz);
  const double kt = p.frequency("kT_eff", 0.5 * GHz);
  const std::vector<double> t1s = p.grid("T1_s", {315e-6});
  const std::vector<double> tphis = p.grid("Tphi_s", {1e-6, 2e-6, 4e-6, 10e-6, 20e-6, 40e-6, 100e-6});
  const double gamma_z = p.number("gamma_z_s", 0.0);
  const std::vector<double> k_over_J = p.grid("kappa_over_J", ceq::kappa_grid(1.0));
  const double h_over = p.positive("h_over_omega0", 10.0);
  const bool optimize = p.flag("optimize", true);
  p.finish();

  struct Group {
    ceq::NoiseParams params;
  };
  std::vector<Group> groups;
  for (int L : Ls) {
    for (double t1 : t1s) {
      for (double tphi : tphis) {
        ceq::NoiseParams n;
        n.num_spins = L;
        n.gamma_y_s = t1 > 0.0 ? 1.0 / t1 : -1.0;
        n.gamma_z_s = gamma_z;
        n.t_phi = tphi;
        n.kt_eff = kt;
        n.validate();
        groups.push_back({n});
      }
    }
  }
  for (double k : k_over_J)
    if (!(k > 0.0 && k <= 0.5 + 1e-12)) throw ValidationError("parameters.kappa_over_J: values must lie in (0, 0.5]");
  if (!(J > 0.0)) throw ValidationError("parameters.J: must be positive");

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings& run) {
    RunOutput out;
    Table t{"lifetime.csv",
            {"L", "J_rad_s", "kappa_rad_s", "T1_s", "Tphi_s", "kTeff_rad_s", "gamma_th", "gamma_z_le", "gamma_y_le", "gamma_z_1f",
             "T_L_s", "kappa_opt_flag"},
            {}};
    std::vector<std::string> notes(groups.size());
    auto row = [&](const ceq::NoiseParams& n, double kappa, const ceq::LifetimeBudget& b, bool opt) -> Row {
      return {cell(n.num_spins), cell(J), cell(kappa), cell(1.0 / n.gamma_y_s), cell(n.t_phi), cell(kt), cell(b.gamma_th),
              cell(b.gamma_z_le), cell(b.gamma_y_le), cell(b.gamma_z_1f), b.t_L ? cell(*b.t_L) : std::string(), cell_flag(opt)};
    };
    sweep(
        groups.size(), run.workers, t, out,
        [&](std::size_t i) {
          const auto& n = groups[i].params;
          PointOut po;
          for (double k : k_over_J) po.rows.push_back(row(n, k * J, ceq::lifetime(n, ceq::budget_model(k * J, J, n.num_spins, h_over)), false));
          if (optimize) {
            const auto best = ceq::optimize_kappa(n, J, {J / 1000.0, J / 2.0}, 200, h_over);
            po.rows.push_back(row(n, *best.kappa_opt, best, true));
            std::ostringstream s;
            s << "L=" << n.num_spins << " T1=" << format_number(1.0 / n.gamma_y_s) << " s Tphi=" << format_number(n.t_phi)
              << " s: best T_L " << (best.t_L ? format_number(*best.t_L) + " s" : std::string("unbounded")) << " at kappa/J "
              << format_number(*best.kappa_opt / J);
            for (const auto& w : best.warnings) s << " (warning: " << w << ")";
            notes[i] = s.str();
          }
          return po;
        },
        [&](std::size_t i) {
          const auto& n = groups[i].params;
          return padded({cell(n.num_spins), cell(J), "", cell(1.0 / n.gamma_y_s), cell(n.t_phi), cell(kt)}, 12);
        },
        [&](std::size_t i) {
          const auto& n = groups[i].params;
          return "L=" + std::to_string(n.num_spins) + " " + fixed("T1_s", 1.0 / n.gamma_y_s) + " " + fixed("Tphi_s", n.t_phi);
        });
    for (const auto& s : notes)
      if (!s.empty()) out.summary.push_back(s);
    out.tables.insert(out.tables.begin(), std::move(t));
    return out;
  };
  return plan;
}

// ---------------------------------------------------------------- dephasing

Plan plan_dephasing(Section& p) {
  const std::vector<int> Ls = p.int_grid("L", {2});
  const double J = p.frequency("J", 1.5 * GHz);
  const double k_over_J = p.positive("kappa_over_J", 0.1);
  const double h_over = p.number("h_over_omega0", 0.0);
  const std::vector<double> tphis = p.grid("Tphi_s", {2e-6, 4e-6});
  const std::vector<double> products = p.grid("omega_tphi", {10.0, 20.0});
  const int realizations = p.integer("realizations", 200);
  const double dt_omega = p.positive("dt_omega", 0.05);
  const double decay_times = p.positive("duration_decay_times", 2.5);
  const double ramsey_tphi = p.positive("ramsey_duration_tphi", 4.0);
  const bool common = p.flag("common_mode", false);
  p.finish();

  for (int L : Ls)
    if (L != 2 && L != 3) throw ValidationError("parameters.L: must be 2 or 3");
  for (double t : tphis)
    if (!(t > 0.0)) throw ValidationError("parameters.Tphi_s: must be positive");
  for (double x : products)
    if (!(x > 1.0)) throw ValidationError("parameters.omega_tphi: must exceed 1");
  if (realizations < 20) throw ValidationError("parameters.realizations: need at least 20 to resolve the fits");

  struct Point {
    int L;
    double tphi, omega;
    std::uint64_t index[3];
  };
  std::vector<Point> points;
  for (std::size_t a = 0; a < Ls.size(); ++a)
    for (std::size_t b = 0; b < tphis.size(); ++b)
      for (std::size_t c = 0; c < products.size(); ++c) points.push_back({Ls[a], tphis[b], products[c] / tphis[b], {a, b, c}});

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings& run) {
    RunOutput out;
    Table t{"dephasing.csv",
            {"L", "Tphi_s", "omega_ac_rad_s", "realizations", "common_mode", "rate_per_s", "tphi_measured_s", "fitted_constant",
             "ramsey_residual", "driven_residual"},
            {}};
    std::vector<double> constants(points.size(), 0.0);
    sweep(
        points.size(), run.workers, t, out,
        [&](std::size_t i) {
          const Point& pt = points[i];
          const double kappa = k_over_J * J;
          const double w0 = ceq::spin_doublet_half_splitting(kappa, J, pt.L);
          const ceq::SpinModel m = ceq::make_spin_model(kappa, J, h_over * w0, pt.L);
          ceq::DephasingOptions o;
          o.realizations = realizations;
          o.dt = dt_omega / pt.omega;
          o.duration = decay_times * 5.0 * pt.tphi * pt.tphi * pt.omega / pt.L;
          o.ramsey_duration = ramsey_tphi * pt.tphi;
          o.common_mode = common;
          o.seed = ceq::derive_seed(run.master_seed, {pt.index[0], pt.index[1], pt.index[2]});
          o.amplitude = ceq::amplitude_for_tphi(pt.tphi, 0.1 / o.duration, 0.5 / o.dt);
          const auto r = ceq::simulate_dephasing(m, pt.omega, o);
          constants[i] = r.fitted_constant;
          return PointOut{{{cell(pt.L), cell(pt.tphi), cell(pt.omega), cell(realizations), cell_flag(common), cell(r.rate), cell(r.t_phi),
                            cell(r.fitted_constant), cell(r.ramsey_residual), cell(r.driven_residual)}},
                          {}};
        },
        [&](std::size_t i) {
          const Point& pt = points[i];
          return padded({cell(pt.L), cell(pt.tphi), cell(pt.omega), cell(realizations), cell_flag(common)}, 10);
        },
        [&](std::size_t i) {
          const Point& pt = points[i];
          return "L=" + std::to_string(pt.L) + " " + fixed("Tphi_s", pt.tphi) + " " + fixed("omega_ac", pt.omega);
        });
    double log_sum = 0.0;
    int n = 0;
    for (double c : constants)
      if (c > 0.0) {
        log_sum += std::log(c);
        ++n;
      }
    if (n > 0) out.summary.push_back("joint constant c (geometric mean over " + std::to_string(n) + " points): " + format_number(std::exp(log_sum / n)));
    out.tables.insert(out.tables.begin(), std::move(t));
    return out;
  };
  return plan;
}

// ---------------------------------------------------------------- fgr

Plan plan_fgr(Section& p) {
  ceq::FgrSpec base;
  base.bath_dim = p.integer("bath_dim", 1024);
  base.bandwidth = p.positive("bandwidth", 10.0);
  const std::string channel = p.text("channel", "y", {"x", "y", "z"});
  base.channel = channel == "x" ? ceq::Axis::x : channel == "y" ? ceq::Axis::y : ceq::Axis::z;
  base.allow_unsupported_channels = p.flag("allow_unsupported_channels", false);
  base.J = p.positive("J", 1.0);
  base.h = p.number("h", 0.5);
  base.alpha_bar = p.number("alpha_bar", 0.5);
  base.drive_omega = p.number("drive_omega", 0.0);
  base.n_realizations = p.integer("n_realizations", 20);
  base.fit_start = p.number("fit_start", -1.0);
  base.fit_end = p.number("fit_end", -1.0);
  base.samples = p.integer("samples", 32);
  base.steps_per_period = p.integer("steps_per_period", 16);
  const std::vector<double> couplings = p.grid("coupling_g", {0.1});
  const std::vector<double> kappas = p.grid("kappa", {0.2});
  const std::vector<bool> driven = p.flag_grid("driven", {false});
  p.finish();
  for (bool d : driven) {
    ceq::FgrSpec s = base;
    s.driven = d;
    s.validate();
  }
  if (base.channel != ceq::Axis::y && !base.allow_unsupported_channels)
    throw ValidationError("parameters.channel: x and z need allow_unsupported_channels");

  Plan plan;
  plan.parameters = p.resolved();
  plan.run = [=](const RunSettings& run) {
    RunOutput out;
    Table t{"fgr.csv",
            {"driven", "channel", "coupling_g", "kappa", "J", "bath_dim", "raw_rate", "rate_stderr", "m_squared", "matrix_element_sq",
             "fgr_constant"},
            {}};
    Table traces{"fgr_traces.csv", {"driven", "coupling_g", "kappa", "time", "survival", "population"}, {}};
    std::map<std::pair<std::size_t, std::size_t>, double> constant[2];
    for (bool d : driven) {
      ceq::FgrSpec s = base;
      s.driven = d;
      s.seed = run.master_seed;
      const auto outcomes = ceq::fgr_sweep_outcomes(s, couplings, kappas, run.workers);
      for (std::size_t gi = 0; gi < couplings.size(); ++gi) {
        for (std::size_t ki = 0; ki < kappas.size(); ++ki) {
          const auto& o = outcomes[gi * kappas.size() + ki];
          Row head{cell_flag(d), channel, cell(couplings[gi]), cell(kappas[ki]), cell(base.J), cell(static_cast<int>(base.bath_dim))};
          if (o.error) {
            out.errors.push_back(describe(o.error, std::string(d ? "driven " : "undriven ") + fixed("coupling_g", couplings[gi]) + " " +
                                                       fixed("kappa", kappas[ki])));
            t.rows.push_back(padded(head, t.header.size()));
            continue;
          }
          const auto& r = *o.result;
          Row row = head;
          for (double x : {r.raw_rate, r.rate_stderr, r.m_squared, r.matrix_element_sq, r.fgr_constant}) row.push_back(cell(x));
          t.rows.push_back(row);
          for (std::size_t k = 0; k < r.times.size(); ++k)
            traces.rows.push_back({cell_flag(d), cell(couplings[gi]), cell(kappas[ki]), cell(r.times[k]), cell(r.survival[k]), cell(r.population[k])});
          constant[d ? 1 : 0][{gi, ki}] = r.fgr_constant;
        }
      }
    }
    for (int d = 0; d < 2; ++d) {
      if (constant[d].empty()) continue;
      double lo = 1e300, hi = 0.0;
      for (const auto& [_, c] : constant[d]) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      out.summary.push_back(std::string(d ? "driven" : "undriven") + " FGR constants in [" + format_number(lo) + ", " + format_number(hi) + "]");
    }
    double ratio = 0.0;
    int matched = 0;
    for (const auto& [key, c] : constant[1]) {
      const auto it = constant[0].find(key);
      if (it == constant[0].end() || it->second <= 0.0) continue;
      ratio += 2.0 * c / it->second;
      ++matched;
    }
    if (matched > 0) out.summary.push_back("mean 2 x driven/undriven over " + std::to_string(matched) + " points: " + format_number(ratio / matched));
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(traces));
    return out;
  };
  return plan;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"spectrum", "reduce", "rabi", "highfreq", "lifetime-sweep", "dephasing", "fgr"};
  return names;
}

Plan make_plan(const std::string& command, const json& parameters) {
  Section p(parameters, "parameters");
  if (command == "spectrum") return plan_spectrum(p);
  if (command == "reduce") return plan_reduce(p);
  if (command == "rabi") return plan_rabi(p);
  if (command == "highfreq") return plan_highfreq(p);
  if (command == "lifetime-sweep") return plan_lifetime(p);
  if (command == "dephasing") return plan_dephasing(p);
  if (command == "fgr") return plan_fgr(p);
  throw ValidationError("unknown command '" + command + "'");
}

}  // namespace ceqcli
