// Copyright 2026 The reap-mpc Authors
// SPDX-License-Identifier: Apache-2.0
#include "reap/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "reap/errors.hpp"
#include "reap/oracle_qp.hpp"
#include "reap/scenario_io.hpp"

namespace reap {

void write_config(std::ostream& os, const Scenario& scenario, const std::string& prefix) {
  for (const auto& [k, v] : config_echo(scenario)) os << prefix << k << " = " << v << '\n';
}

std::string describe_policy(const SigmaPolicy& policy) {
  if (const auto* f = std::get_if<FixedSigma>(&policy)) return "fixed " + format_double(f->value);
  return std::get<AdaptiveSigma>(policy).curvature_cap ? "adaptive (curvature cap)" : "adaptive";
}

void write_montecarlo_report(std::ostream& os, const MonteCarloReport& report, const Scenario& scenario) {
  os << "[config]\n";
  write_config(os, scenario);
  os << "montecarlo.runs = " << report.runs << '\n';
  os << "montecarlo.seed = " << report.seed << '\n';
  os << "\n[results]\n";
  for (const auto& c : report.cases) {
    long iterations = 0;
    int repairs = 0;
    for (const auto& r : c.runs) {
      iterations += r.iterations;
      repairs += r.warm_start_repairs;
    }
    os << "case " << c.spec.name << ": sigma = " << describe_policy(c.spec.policy)
       << ", violating runs = " << c.violating_runs << "/" << report.runs
       << ", violation percentage = " << format_double(c.violation_percentage)
       << ", total iterations = " << iterations << ", warm start repairs = " << repairs << '\n';
  }
}

void write_montecarlo_csv(std::ostream& os, const CaseResult& result) {
  const int n = result.runs.empty() ? 0 : static_cast<int>(result.runs[0].x0.size());
  os << "run";
  for (int i = 1; i <= n; ++i) os << ",x0_" << i;
  os << ",violated,first_violation,iterations,performance,terminated_early,warm_start_repairs\n";
  os << std::setprecision(17);
  for (size_t r = 0; r < result.runs.size(); ++r) {
    const auto& s = result.runs[r];
    os << r;
    for (int i = 0; i < n; ++i) os << ',' << s.x0(i);
    os << ',' << (s.violated ? 1 : 0) << ',' << s.first_violation << ',' << s.iterations << ','
       << s.performance << ',' << (s.terminated_early ? 1 : 0) << ',' << s.warm_start_repairs << '\n';
  }
}

void write_sweep_report(std::ostream& os, const SweepResult& result, const Scenario& scenario) {
  os << "[config]\n";
  write_config(os, scenario);
  os << "\n[results]\n";
  os << "baseline performance = " << format_double(result.baseline) << '\n';
  for (const auto& pt : result.points) {
    os << "budget " << pt.budget << ": performance = " << format_double(pt.performance)
       << ", degradation % = " << format_double(pt.degradation)
       << ", violated = " << (pt.violated ? "yes" : "no") << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "budget,performance,degradation_percent,violated\n" << std::setprecision(17);
  for (const auto& pt : result.points) {
    os << pt.budget << ',' << pt.performance << ',' << pt.degradation << ',' << (pt.violated ? 1 : 0) << '\n';
  }
}

std::vector<CheckItem> run_checks(const Scenario& sc) {
  std::vector<CheckItem> items;
  auto add = [&](std::string name, bool ok, std::string detail) {
    items.push_back({std::move(name), ok, std::move(detail)});
    return ok;
  };
  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
  };

  SteadyStateTarget target;
  try {
    target = steady_state_target(sc.model, sc.reference);
    add("steady_state", true, "residual " + fmt(steady_state_residual(sc.model, target)));
  } catch (const Error& e) {
    add("steady_state", false, e.what());
    return items;
  }
  if (!add("admissibility", is_strictly_admissible(target, sc.X, sc.U, sc.admissibility_margin),
           "margin " + fmt(sc.admissibility_margin))) {
    return items;
  }

  Matrix QN, K;
  try {
    QN = solve_dare(sc.model.A(), sc.model.B(), sc.Qx, sc.Qu);
  } catch (const Error& e) {
    add("dare_residual", false, e.what());
    return items;
  }
  const double res = dare_residual(sc.model.A(), sc.model.B(), sc.Qx, sc.Qu, QN);
  add("dare_residual", res <= 1e-9 * QN.norm(), fmt(res) + " (limit " + fmt(1e-9 * QN.norm()) + ")");
  K = sc.terminal.K ? *sc.terminal.K : terminal_gain(sc.model.A(), sc.model.B(), sc.Qu, QN);
  if (K.rows() != sc.model.p() || K.cols() != sc.model.n()) {
    add("spectral_radius", false, "terminal gain must be p x n");
    return items;
  }
  const double rho = spectral_radius(sc.model.A() + sc.model.B() * K);
  if (!add("spectral_radius", rho < 1.0, "rho(A+BK) = " + fmt(rho))) return items;

  int omega = 0;
  try {
    omega = sc.terminal.omega ? *sc.terminal.omega : omega_star(sc.model, K, target, sc.X, sc.U);
    const bool upper = rows_redundant_after(sc.model, K, target, sc.X, sc.U, omega);
    const bool lower = omega == 1 || !rows_redundant_after(sc.model, K, target, sc.X, sc.U, omega - 1);
    std::string detail = "omega = " + std::to_string(omega) + (sc.terminal.omega ? " (override)" : "");
    detail += upper ? ", redundant at omega+1" : ", NOT redundant at omega+1";
    if (!sc.terminal.omega) detail += lower ? ", not redundant at omega-1" : ", redundant at omega-1";
    if (!add("omega_star", upper && (sc.terminal.omega || lower), detail)) return items;
  } catch (const Error& e) {
    add("omega_star", false, e.what());
    return items;
  }

  try {
    TerminalOverrides ov = sc.terminal;
    ov.K = K;
    ov.omega = omega;
    Scenario copy = sc;
    copy.terminal = ov;
    const PreparedScenario prepared = prepare(copy);
    const CondensedQp qp = prepared.mpc->at(sc.x0, true);
    const PrimalDual roll = rollout_warm_start(sc.model, K, target, sc.x0, sc.horizon, qp.rows());
    const bool rollout_ok = satisfies_invariants(qp, roll, sc.reap.epsilon);
    const double depth = interior_depth(qp.constraints);
    const bool ok = rollout_ok || depth > 4.0 * sc.reap.epsilon;
    add("warm_start", ok,
        std::string("terminal-law rollout ") + (rollout_ok ? "feasible" : "infeasible") +
            ", constraint depth at x0 " + fmt(depth) + ", rows " + std::to_string(qp.rows()));
  } catch (const Error& e) {
    add("warm_start", false, e.what());
  }
  return items;
}

}  // namespace reap
