#include "dkg/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include "dkg/errors.hpp"
#include "dkg/tridiagonal.hpp"

namespace dkg {

void IntegratorConfig::validate() const {
  if (stages < 1 || stages > 6) throw InvalidArgumentError("integrator stages must lie in [1, 6]");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgumentError("integrator step h must be positive");
  if (!(stage_solver_tol > 0.0)) throw InvalidArgumentError("stage_solver_tol must be positive");
  if (max_stage_iter < 1) throw InvalidArgumentError("max_stage_iter must be >= 1");
}

ButcherTableau gauss_legendre(int s) {
  if (s < 1 || s > 6) throw InvalidArgumentError("gauss_legendre: stages must lie in [1, 6]");
  using LD = long double;
  std::vector<LD> c(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    LD x = std::cos(std::numbers::pi_v<LD> * (i + 0.75L) / (s + 0.5L));
    for (int it = 0; it < 100; ++it) {
      LD p0 = 1.0L, p1 = x;
      for (int k = 2; k <= s; ++k) {
        const LD p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const LD dp = s * (x * p1 - p0) / (x * x - 1.0L);
      const LD dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    c[static_cast<std::size_t>(s - 1 - i)] = (1.0L + x) / 2.0L;
  }
  // V^T rows: sum_j w_j c_j^(k-1) = target_k / k
  using M = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>;
  M vt(s, s);
  for (int k = 0; k < s; ++k) {
    for (int j = 0; j < s; ++j) vt(k, j) = std::pow(c[static_cast<std::size_t>(j)], static_cast<LD>(k));
  }
  Eigen::PartialPivLU<M> lu(vt);
  ButcherTableau t;
  t.c.assign(c.begin(), c.end());
  Eigen::Matrix<LD, Eigen::Dynamic, 1> rhs(s);
  for (int k = 0; k < s; ++k) rhs[k] = 1.0L / (k + 1);
  const auto bw = lu.solve(rhs).eval();
  for (int j = 0; j < s; ++j) t.b.push_back(static_cast<double>(bw[j]));
  t.A.assign(static_cast<std::size_t>(s), std::vector<double>(static_cast<std::size_t>(s)));
  for (int i = 0; i < s; ++i) {
    for (int k = 0; k < s; ++k) rhs[k] = std::pow(c[static_cast<std::size_t>(i)], static_cast<LD>(k + 1)) / (k + 1);
    const auto row = lu.solve(rhs).eval();
    for (int j = 0; j < s; ++j) t.A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = static_cast<double>(row[j]);
  }
  return t;
}

LatticeField acceleration(const LatticeField& u, const Model& model) {
  model.require_conforming(u, "acceleration");
  return residual(u, model);
}

namespace {

// Reusable stage solver; products A^2 and b^T A kept in long double then rounded.
class Gauss {
 public:
  Gauss(const Model& model, const IntegratorConfig& cfg) : model_(model), cfg_(cfg) {
    cfg.validate();
    const ButcherTableau t = gauss_legendre(cfg.stages);
    s_ = cfg.stages;
    c_ = t.c;
    b_ = t.b;
    a2_.assign(static_cast<std::size_t>(s_ * s_), 0.0);
    ba_.assign(static_cast<std::size_t>(s_), 0.0);
    for (int i = 0; i < s_; ++i) {
      for (int j = 0; j < s_; ++j) {
        long double acc = 0.0L;
        for (int k = 0; k < s_; ++k) acc += static_cast<long double>(t.A[i][k]) * t.A[k][j];
        a2_[static_cast<std::size_t>(i * s_ + j)] = static_cast<double>(acc);
      }
    }
    for (int j = 0; j < s_; ++j) {
      long double acc = 0.0L;
      for (int i = 0; i < s_; ++i) acc += static_cast<long double>(t.b[i]) * t.A[i][j];
      ba_[static_cast<std::size_t>(j)] = static_cast<double>(acc);
    }
  }

  // Returns increments du, dv for a step of size h (sign included).
  void increments(const std::vector<double>& u0, const std::vector<double>& v0, double h, std::vector<double>& du,
                  std::vector<double>& dv) {
    const std::size_t n = u0.size();
    const auto S = static_cast<std::size_t>(s_);
    k_.assign(S * n, 0.0);
    std::vector<double> a0(n);
    accel(u0.data(), a0.data(), n);
    for (std::size_t i = 0; i < S; ++i) std::copy(a0.begin(), a0.end(), k_.begin() + static_cast<long>(i * n));

    std::vector<double> knew(S * n), ustage(n);
    double prev = INFINITY, inc = INFINITY;
    bool ok = false;
    int polish = 0;
    for (int it = 0; it < cfg_.max_stage_iter; ++it) {
      inc = 0.0;
      double scale = 1.0;
      for (std::size_t i = 0; i < S; ++i) {
        stage_position(u0, v0, h, i, ustage);
        accel(ustage.data(), knew.data() + i * n, n);
      }
      for (std::size_t q = 0; q < S * n; ++q) {
        inc = std::max(inc, std::abs(knew[q] - k_[q]));
        scale = std::max(scale, std::abs(knew[q]));
      }
      k_.swap(knew);
      inc /= scale;
      if (inc <= cfg_.stage_solver_tol) {
        // Below tolerance: keep going while the increment still shrinks, to reach the rounding floor.
        if (ok && (inc >= prev || ++polish >= 3)) break;
        if (inc == 0.0) {
          ok = true;
          break;
        }
        ok = true;
      } else if (it > 3 && inc > 0.5 * prev) {
        break;  // slow contraction
      }
      prev = inc;
    }
    if (!ok) newton(u0, v0, h, n);

    du.assign(n, 0.0);
    dv.assign(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      double su = 0.0, sv = 0.0;
      for (std::size_t j = 0; j < S; ++j) {
        su += ba_[j] * k_[j * n + x];
        sv += b_[j] * k_[j * n + x];
      }
      du[x] = h * v0[x] + h * h * su;
      dv[x] = h * sv;
    }
  }

 private:
  void accel(const double* u, double* out, std::size_t n) const {
    const double d = model_.d();
    const auto& nl = model_.nonlinearity();
    for (std::size_t i = 0; i < n; ++i) {
      const double l = u[i > 0 ? i - 1 : 0];
      const double r = u[i + 1 < n ? i + 1 : n - 1];
      out[i] = d * (l - 2.0 * u[i] + r) - nl.f(u[i]);
    }
  }

  void stage_position(const std::vector<double>& u0, const std::vector<double>& v0, double h, std::size_t i,
                      std::vector<double>& out) const {
    const std::size_t n = u0.size();
    const auto S = static_cast<std::size_t>(s_);
    for (std::size_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < S; ++j) acc += a2_[i * S + j] * k_[j * n + x];
      out[x] = u0[x] + c_[i] * h * v0[x] + h * h * acc;
    }
  }

  // Simplified Newton on K - a(U(K)) = 0 with the force Jacobian frozen at u0.
  void newton(const std::vector<double>& u0, const std::vector<double>& v0, double h, std::size_t n) {
    const auto S = static_cast<std::size_t>(s_);
    const auto& nl = model_.nonlinearity();
    const double d = model_.d();
    using Sp = Eigen::SparseMatrix<double>;
    std::vector<Eigen::Triplet<double>> trip;
    auto jac = [&](std::size_t x, std::size_t y) -> double {
      if (x == y) {
        const int nb = (x > 0 ? 1 : 0) + (x + 1 < n ? 1 : 0);
        return -nb * d - nl.f_prime(u0[x]);
      }
      return d;
    };
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t j = 0; j < S; ++j) {
        const double w = h * h * a2_[i * S + j];
        for (std::size_t x = 0; x < n; ++x) {
          for (std::size_t y = (x > 0 ? x - 1 : 0); y <= std::min(x + 1, n - 1); ++y) {
            double val = -w * jac(x, y);
            if (i == j && x == y) val += 1.0;
            if (val != 0.0) trip.emplace_back(static_cast<int>(i * n + x), static_cast<int>(j * n + y), val);
          }
        }
      }
    }
    Sp m(static_cast<long>(S * n), static_cast<long>(S * n));
    m.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Sp> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw StepError("gauss_step: stage Jacobian factorization failed", 0, INFINITY);
    std::vector<double> ustage(n), ak(S * n);
    double inc = INFINITY, prev = INFINITY;
    for (int it = 1; it <= cfg_.max_stage_iter; ++it) {
      double scale = 1.0;
      for (std::size_t i = 0; i < S; ++i) {
        stage_position(u0, v0, h, i, ustage);
        accel(ustage.data(), ak.data() + i * n, n);
      }
      Eigen::VectorXd g(static_cast<long>(S * n));
      for (std::size_t q = 0; q < S * n; ++q) {
        g[static_cast<long>(q)] = ak[q] - k_[q];
        scale = std::max(scale, std::abs(ak[q]));
      }
      const Eigen::VectorXd dk = lu.solve(g);
      inc = dk.lpNorm<Eigen::Infinity>() / scale;
      for (std::size_t q = 0; q < S * n; ++q) k_[q] += dk[static_cast<long>(q)];
      if (!std::isfinite(inc)) break;
      if (inc <= cfg_.stage_solver_tol && (inc == 0.0 || inc >= prev)) return;
      prev = inc;
      if (it == cfg_.max_stage_iter && inc <= cfg_.stage_solver_tol) return;
    }
    throw StepError("gauss_step: stage equations did not converge (increment " + std::to_string(inc) + ")",
                    cfg_.max_stage_iter, inc);
  }

  const Model& model_;
  IntegratorConfig cfg_;
  int s_ = 0;
  std::vector<double> c_, b_, a2_, ba_, k_;
};

void check_state(const State& s, const Model& model) {
  model.require_conforming(s.u, "gauss_step");
  model.require_conforming(s.udot, "gauss_step");
  for (double x : s.u.values) {
    if (!std::isfinite(x)) throw InvalidFieldError("state has non-finite entries");
  }
  for (double x : s.udot.values) {
    if (!std::isfinite(x)) throw InvalidFieldError("state has non-finite entries");
  }
}

}  // namespace

State gauss_step(const State& s, const Model& model, const IntegratorConfig& cfg, int direction) {
  check_state(s, model);
  Gauss g(model, cfg);
  const double h = direction >= 0 ? cfg.h : -cfg.h;
  std::vector<double> du, dv;
  g.increments(s.u.values, s.udot.values, h, du, dv);
  State out = s;
  for (std::size_t i = 0; i < du.size(); ++i) {
    out.u.values[i] += du[i];
    out.udot.values[i] += dv[i];
  }
  out.t = s.t + h;
  return out;
}

Trajectory evolve(const State& s0, const Model& model, const IntegratorConfig& cfg, double t_end,
                  const EvolveOptions& opts) {
  check_state(s0, model);
  if (opts.sample_stride < 1) throw InvalidArgumentError("evolve: sample_stride must be >= 1");
  for (int p : opts.probes) {
    if (!s0.u.contains(p)) throw InvalidArgumentError("evolve: probe site " + std::to_string(p) + " off the grid");
  }
  Gauss g(model, cfg);
  Trajectory tr;
  tr.probe_sites = opts.probes;
  tr.probes.assign(opts.probes.size(), {});
  State s = s0;
  auto sample = [&] {
    tr.times.push_back(s.t);
    for (std::size_t k = 0; k < opts.probes.size(); ++k) tr.probes[k].push_back(s.u.at(opts.probes[k]));
    tr.boundary_left.push_back(s.u.values.front());
    tr.boundary_right.push_back(s.u.values.back());
    tr.energy.push_back(hamiltonian(s.u, s.udot, model));
  };
  sample();
  if (opts.snapshot_stride > 0) tr.snapshots.emplace_back(s.t, s.u);

  const long steps = std::lround(std::floor((t_end - s0.t) / cfg.h + 1e-9));
  const std::size_t n = s.u.size();
  std::vector<double> cu(n, 0.0), cv(n, 0.0), du, dv;
  // Kahan-compensated accumulation of the increments.
  auto add = [](double& sum, double& comp, double inc) {
    const double y = inc - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  for (long k = 1; k <= steps; ++k) {
    try {
      g.increments(s.u.values, s.udot.values, cfg.h, du, dv);
    } catch (const StepError& e) {
      tr.failure = e.what();
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      add(s.u.values[i], cu[i], du[i]);
      add(s.udot.values[i], cv[i], dv[i]);
    }
    s.t = s0.t + static_cast<double>(k) * cfg.h;
    if (k % opts.sample_stride == 0) sample();
    if (opts.snapshot_stride > 0 && k % opts.snapshot_stride == 0) tr.snapshots.emplace_back(s.t, s.u);
  }
  tr.final_state = s;
  return tr;
}

State perturb(const LatticeField& equilibrium, std::span<const std::pair<int, double>> deltas) {
  State s{equilibrium, LatticeField::constant(equilibrium.offset, equilibrium.size(), 0.0), 0.0};
  for (const auto& [site, amount] : deltas) {
    if (!s.u.contains(site)) throw InvalidArgumentError("perturb: site " + std::to_string(site) + " off the grid");
    s.u.at(site) += amount;
  }
  return s;
}

EnergyDrift energy_drift(const Trajectory& tr, double boundary_threshold) {
  EnergyDrift out;
  if (tr.energy.empty()) return out;
  const double h0 = tr.energy.front();
  if (h0 == 0.0) throw InvalidArgumentError("energy_drift: H(0) = 0");
  for (double h : tr.energy) out.max_relative = std::max(out.max_relative, std::abs(h - h0) / std::abs(h0));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    if (std::abs(tr.boundary_left[k] - tr.boundary_left.front()) > boundary_threshold ||
        std::abs(tr.boundary_right[k] - tr.boundary_right.front()) > boundary_threshold) {
      out.boundary_onset = tr.times[k];
      break;
    }
  }
  return out;
}

SpectralPeak periodogram_peak(std::span<const double> series, double dt, double omega_max) {
  const std::size_t n = series.size();
  if (n < 8) throw InvalidArgumentError("periodogram_peak: need at least 8 samples");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    w[i] = hann * (series[i] - mean);
  }
  const double T = dt * static_cast<double>(n);
  SpectralPeak peak;
  peak.bin_width = 2.0 * std::numbers::pi / T;
  const auto kmax = static_cast<std::size_t>(std::min(omega_max, std::numbers::pi / dt) / peak.bin_width);
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double om = static_cast<double>(k) * peak.bin_width;
    // Rotation recurrence keeps the direct transform O(n) per bin.
    const double cs = std::cos(om * dt), sn = std::sin(om * dt);
    double c = 1.0, s = 0.0, re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += w[i] * c;
      im -= w[i] * s;
      const double c2 = c * cs - s * sn;
      s = s * cs + c * sn;
      c = c2;
    }
    const double a = std::hypot(re, im);
    if (a > peak.amplitude) {
      peak.amplitude = a;
      peak.omega = om;
    }
  }
  return peak;
}

}  // namespace dkg
