#include "patchlv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "patchlv/error.hpp"
#include "patchlv/spectral.hpp"

namespace patchlv {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inf_norm(const Vector& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double matrix_inf_norm(const Matrix& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

void require_positive(const Vector& x, const char* name) {
  if (!x.allFinite() || (x.array() <= 0.0).any()) {
    throw Error(ErrorKind::AssumptionViolated, std::string(name) + " must be strictly positive in every patch");
  }
}

void require_rate(double mu, const char* name) {
  if (!std::isfinite(mu) || mu < 0.0) {
    throw Error(ErrorKind::InvalidInput, std::string(name) + " must be finite and nonnegative");
  }
}

void require_connected(const Digraph& graph) {
  if (!is_strongly_connected(graph)) {
    throw Error(ErrorKind::NotStronglyConnected, "patch network is not strongly connected");
  }
}

Vector stack(const State& s) {
  Vector y(s.u.size() + s.v.size());
  y << s.u, s.v;
  return y;
}

State split(const Vector& y) {
  const Index n = y.size() / 2;
  return {y.head(n), y.tail(n)};
}

Vector stacked_rhs(const PatchSystem& sys, const Vector& y) {
  const Index n = sys.size();
  const auto u = y.head(n);
  const auto v = y.tail(n);
  Vector out(2 * n);
  out.head(n).noalias() = sys.mu_u() * (sys.L() * u);
  out.head(n).array() += u.array() * (sys.p().array() - u.array() - sys.c() * v.array());
  out.tail(n).noalias() = sys.mu_v() * (sys.L() * v);
  out.tail(n).array() += v.array() * (sys.q().array() - sys.b() * u.array() - v.array());
  return out;
}

// Round-off floor of the stationary equations at state size `x`.
double residual_floor(const Matrix& L, double mu, double rate, double x) {
  return 64.0 * kEps * (mu * matrix_inf_norm(L) * x + x * (rate + x));
}

struct NewtonOutcome {
  Vector x;
  double residual = 0.0;
  bool converged = false;
};

// Damped Newton that keeps x >> 0 (fraction-to-boundary step limit) and
// switches to a Levenberg step when the Jacobian is numerically singular.
// Backtracking uses the 2-norm, for which the Newton step is a descent
// direction; stops at `target` in the max-norm or when no step decreases.
template <typename F, typename J>
NewtonOutcome damped_newton(F&& f, J&& jac, Vector x, double target, int max_iter) {
  Vector r = f(x);
  double norm = inf_norm(r);
  double merit = r.norm();
  for (int it = 0; it < max_iter && norm > target; ++it) {
    const Matrix Jm = jac(x);
    Vector delta;
    Eigen::PartialPivLU<Matrix> lu(Jm);
    if (lu.rcond() > 1e-12) {
      delta = lu.solve(-r);
    } else {
      const double damping = 1e-12 * std::max(1.0, Jm.squaredNorm());
      Matrix normal = Jm.transpose() * Jm;
      normal.diagonal().array() += damping;
      delta = normal.ldlt().solve(-(Jm.transpose() * r));
    }
    if (!delta.allFinite()) break;

    double alpha = 1.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (delta(i) < 0.0) alpha = std::min(alpha, 0.99 * x(i) / -delta(i));
    }
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      Vector trial = x + alpha * delta;
      Vector rt = f(trial);
      const double nt = inf_norm(rt);
      const double mt = rt.norm();
      if (mt < (1.0 - 1e-4 * alpha) * merit || nt <= target) {
        x = std::move(trial);
        r = std::move(rt);
        norm = nt;
        merit = mt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return {x, norm, norm <= target};
}

// The stationary equations F(x) = 0 share the root x = 0 with the boundary
// faces, which attracts Newton from small seeds. Iterating on the per-capita
// form G = F / x removes those roots; a short polish on F follows.
template <typename F, typename JF, typename G, typename JG>
NewtonOutcome positive_root(F&& f, JF&& jf, G&& g, JG&& jg, const Vector& seed, double accept) {
  const auto first = damped_newton(g, jg, seed, 0.0, 100);
  if (!first.x.allFinite() || (first.x.array() <= 0.0).any()) return {first.x, first.residual, false};
  auto second = damped_newton(f, jf, first.x, 0.0, 4);
  // A collapse toward zero also makes F small; the per-capita residual tells them apart.
  second.converged = second.residual <= accept && (second.x.array() > 0.0).all() && inf_norm(g(second.x)) <= 1e-8;
  return second;
}

// Jacobian of w -> mu (L w) / w + r - w.
Matrix per_capita_jacobian(const Matrix& L, double mu, const Vector& w) {
  Matrix J = mu * (w.cwiseInverse().asDiagonal() * L);
  J.diagonal().array() -= mu * (L * w).array() / w.array().square() + 1.0;
  return J;
}

template <typename StateT>
struct Packing;

template <>
struct Packing<State> {
  static Vector pack(const State& s) { return stack(s); }
  static State unpack(const Vector& y) { return split(y); }
};

template <>
struct Packing<Vector> {
  static Vector pack(const Vector& s) { return s; }
  static Vector unpack(const Vector& y) { return y; }
};

template <typename StateT, typename Rhs>
TrajectoryOf<StateT> run_rk4(Rhs&& rhs, const StateT& init, double t_end, const StepControl& control, double rate,
                             double size_hint) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::InvalidInput, "t_end must be positive");
  Vector y = Packing<StateT>::pack(init);
  if (!y.allFinite() || (y.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidInput, "initial state must be finite and nonnegative");
  }
  std::vector<double> times = control.sample_times;
  if (times.empty()) times = {0.0, t_end};
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0 && times[k] <= t_end) || (k > 0 && times[k] < times[k - 1])) {
      throw Error(ErrorKind::InvalidInput, "sample times must be sorted and lie in [0, t_end]");
    }
  }
  const double dt = control.dt > 0.0 ? control.dt : 0.01 * std::min(1.0, 1.0 / rate);
  const double blowup = 1e6 * (1.0 + std::max(inf_norm(y), size_hint));

  TrajectoryOf<StateT> traj;
  traj.dt = dt;
  const Index m = y.size();
  Vector k1(m), k2(m), k3(m), k4(m), tmp(m), next(m);

  auto rk4 = [&](const Vector& x, double h) {
    k1 = rhs(x);
    tmp = x + (0.5 * h) * k1;
    k2 = rhs(tmp);
    tmp = x + (0.5 * h) * k2;
    k3 = rhs(tmp);
    tmp = x + h * k3;
    k4 = rhs(tmp);
    next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  // Advances y by h, halving on orthant exits; false when halving is exhausted.
  auto advance = [&](auto&& self, double h, int depth) -> bool {
    rk4(y, h);
    const double scale = std::max(1.0, inf_norm(y));
    const bool finite = next.allFinite() && inf_norm(next) <= blowup;
    if (finite && next.minCoeff() >= -control.clip_tol * scale) {
      for (Index i = 0; i < m; ++i) {
        if (next(i) < 0.0) {
          next(i) = 0.0;
          ++traj.clipped;
        }
      }
      y.swap(next);
      return true;
    }
    if (depth >= control.max_halvings) return false;
    ++traj.halvings;
    return self(self, 0.5 * h, depth + 1) && self(self, 0.5 * h, depth + 1);
  };

  double t = 0.0;
  for (const double target : times) {
    while (t < target) {
      double h = dt;
      const bool last = t + dt >= target - 1e-9 * dt;
      if (last) h = target - t;
      if (!advance(advance, h, 0)) {
        traj.failure = "step size too large near t = " + std::to_string(t);
        if (control.keep_partial) return traj;
        throw Error(ErrorKind::StepSizeTooLarge, *traj.failure);
      }
      t = last ? target : t + h;
    }
    traj.times.push_back(target);
    traj.states.push_back(Packing<StateT>::unpack(y));
  }
  return traj;
}

bool interior(const State& s, double scale) {
  const double floor = 1e-8 * scale;
  return s.u.minCoeff() > floor && s.v.minCoeff() > floor;
}

// Per-patch locally stable equilibrium of the uncoupled (mu = 0) system.
State uncoupled_equilibrium(const PatchSystem& sys) {
  const Index n = sys.size();
  const double b = sys.b(), c = sys.c();
  State s{Vector::Zero(n), Vector::Zero(n)};
  for (Index i = 0; i < n; ++i) {
    const double p = sys.p()(i), q = sys.q()(i);
    const double det = 1.0 - b * c;
    if (det > 0.0 && p - c * q > 0.0 && q - b * p > 0.0) {
      s.u(i) = (p - c * q) / det;
      s.v(i) = (q - b * p) / det;
    } else if (q - b * p < 0.0) {
      s.u(i) = p;
    } else if (p - c * q < 0.0) {
      s.v(i) = q;
    } else {
      s.u(i) = 0.5 * p;
      s.v(i) = 0.5 * q;
    }
  }
  return s;
}

State floored(State s, double floor) {
  s.u = s.u.cwiseMax(floor);
  s.v = s.v.cwiseMax(floor);
  return s;
}

NewtonOutcome coexistence_newton(const PatchSystem& sys, const State& seed) {
  const Index n = sys.size();
  const double scale = std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
  const double mu = std::max(sys.mu_u(), sys.mu_v());
  const double accept =
      std::max(1e-12, residual_floor(sys.L(), mu, (1.0 + sys.b() + sys.c()) * scale, 2.0 * scale));
  auto per_capita = [&](const Vector& y) {
    Vector out = stacked_rhs(sys, y);
    return Vector(out.cwiseQuotient(y));
  };
  auto per_capita_jac = [&](const Vector& y) {
    Matrix J(2 * n, 2 * n);
    J.topLeftCorner(n, n) = per_capita_jacobian(sys.L(), sys.mu_u(), y.head(n));
    J.bottomRightCorner(n, n) = per_capita_jacobian(sys.L(), sys.mu_v(), y.tail(n));
    J.topRightCorner(n, n) = -sys.c() * Matrix::Identity(n, n);
    J.bottomLeftCorner(n, n) = -sys.b() * Matrix::Identity(n, n);
    return J;
  };
  return positive_root([&](const Vector& y) { return stacked_rhs(sys, y); },
                       [&](const Vector& y) { return jacobian(sys, split(y)); }, per_capita, per_capita_jac,
                       stack(seed), accept);
}

std::optional<State> homotopy_seed(const PatchSystem& sys) {
  const double scale = std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
  Vector y = stack(floored(uncoupled_equilibrium(sys), 1e-6 * scale));
  constexpr int kSteps = 24;
  double t_prev = 0.0;
  for (int k = 0; k <= kSteps; ++k) {
    const double t = std::pow(10.0, -4.0 + 4.0 * k / kSteps);
    // Refine the step when Newton fails, down to a fixed depth.
    bool ok = false;
    for (int depth = 0; depth < 6 && !ok; ++depth) {
      const int pieces = 1 << depth;
      Vector trial = y;
      bool chain = true;
      for (int j = 1; j <= pieces && chain; ++j) {
        const double tj = t_prev + (t - t_prev) * j / pieces;
        const auto sub = sys.with_dispersal(tj * sys.mu_u(), tj * sys.mu_v());
        const auto out = coexistence_newton(sub, split(trial));
        chain = out.converged;
        trial = out.x;
      }
      if (chain) {
        y = trial;
        ok = true;
      }
    }
    if (!ok) return std::nullopt;
    t_prev = t;
  }
  return split(y);
}

}  // namespace

SinglePatchParams::SinglePatchParams(Digraph graph, Vector r, double mu)
    : graph_(std::move(graph)), r_(std::move(r)), mu_(mu) {
  require_rate(mu_, "mu");
  if (r_.size() != graph_.size()) throw Error(ErrorKind::InvalidInput, "r has the wrong length");
  require_positive(r_, "r");
  require_connected(graph_);
  L_ = connection_matrix(graph_);
}

PatchSystem::PatchSystem(Digraph graph, Vector p, Vector q, double b, double c, double mu_u, double mu_v)
    : graph_(std::move(graph)), p_(std::move(p)), q_(std::move(q)), b_(b), c_(c), mu_u_(mu_u), mu_v_(mu_v) {
  require_connected(graph_);
  validate();
  L_ = connection_matrix(graph_);
  certificate_ = certify_cycle_balance(graph_);
}

void PatchSystem::validate() const {
  require_rate(mu_u_, "mu_u");
  require_rate(mu_v_, "mu_v");
  if (p_.size() != graph_.size() || q_.size() != graph_.size()) {
    throw Error(ErrorKind::InvalidInput, "p and q need one entry per patch");
  }
  require_positive(p_, "p");
  require_positive(q_, "q");
  if (!(std::isfinite(b_) && std::isfinite(c_) && b_ > 0.0 && c_ > 0.0)) {
    throw Error(ErrorKind::AssumptionViolated, "competition rates b and c must be positive");
  }
}

PatchSystem PatchSystem::with_dispersal(double mu_u, double mu_v) const {
  PatchSystem out = *this;
  out.mu_u_ = mu_u;
  out.mu_v_ = mu_v;
  out.validate();
  return out;
}

PatchSystem PatchSystem::with_competition(double b, double c) const {
  PatchSystem out = *this;
  out.b_ = b;
  out.c_ = c;
  out.validate();
  return out;
}

PatchSystem PatchSystem::with_resources(Vector p, Vector q) const {
  PatchSystem out = *this;
  out.p_ = std::move(p);
  out.q_ = std::move(q);
  out.validate();
  return out;
}

Vector single_rhs(const SinglePatchParams& params, const Vector& w) {
  if (w.size() != params.size()) throw Error(ErrorKind::InvalidInput, "state has the wrong length");
  Vector out = params.mu() * (params.L() * w);
  out.array() += w.array() * (params.r().array() - w.array());
  return out;
}

State two_rhs(const PatchSystem& sys, const State& state) {
  if (state.u.size() != sys.size() || state.v.size() != sys.size()) {
    throw Error(ErrorKind::InvalidInput, "state has the wrong length");
  }
  return split(stacked_rhs(sys, stack(state)));
}

double stationary_residual(const PatchSystem& sys, const State& state) {
  const State f = two_rhs(sys, state);
  return std::max(inf_norm(f.u), inf_norm(f.v));
}

double max_rate(const PatchSystem& sys) {
  const double diag = sys.L().diagonal().cwiseAbs().maxCoeff();
  return std::max(sys.mu_u(), sys.mu_v()) * diag + std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
}

double max_rate(const SinglePatchParams& params) {
  return params.mu() * params.L().diagonal().cwiseAbs().maxCoeff() + params.r().maxCoeff();
}

Trajectory integrate(const PatchSystem& sys, const State& init, double t_end, const StepControl& control) {
  if (init.u.size() != sys.size() || init.v.size() != sys.size()) {
    throw Error(ErrorKind::InvalidInput, "initial state has the wrong length");
  }
  const double hint = std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
  return run_rk4<State>([&](const Vector& y) { return stacked_rhs(sys, y); }, init, t_end, control, max_rate(sys),
                        hint);
}

SingleTrajectory integrate(const SinglePatchParams& params, const Vector& init, double t_end,
                           const StepControl& control) {
  if (init.size() != params.size()) throw Error(ErrorKind::InvalidInput, "initial state has the wrong length");
  return run_rk4<Vector>([&](const Vector& w) { return single_rhs(params, w); }, init, t_end, control,
                         max_rate(params), params.r().maxCoeff());
}

std::optional<Vector> single_newton(const SinglePatchParams& params, const Vector& seed) {
  if (seed.size() != params.size() || !seed.allFinite() || (seed.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidInput, "Newton seed must be positive");
  }
  const double scale = params.r().maxCoeff();
  const double accept = std::max(1e-12, residual_floor(params.L(), params.mu(), scale, scale));
  const Matrix& L = params.L();
  const double mu = params.mu();
  const auto out = positive_root(
      [&](const Vector& w) { return single_rhs(params, w); },
      [&](const Vector& w) {
        Matrix J = mu * L;
        J.diagonal() += params.r() - 2.0 * w;
        return J;
      },
      [&](const Vector& w) { return Vector(single_rhs(params, w).cwiseQuotient(w)); },
      [&](const Vector& w) { return per_capita_jacobian(L, mu, w); }, seed, accept);
  if (!out.converged) return std::nullopt;
  return out.x;
}

Vector single_equilibrium(const SinglePatchParams& params, const Vector& seed) {
  if (auto w = single_newton(params, seed)) return *w;

  // Per-capita Newton loses its grip on the overall scale at large mu; the
  // mass-balanced multiple of theta is the large-mu limit and a good second seed.
  const Vector th = theta(params.L());
  const Vector shape = (th.dot(params.r()) / th.squaredNorm()) * th;
  if ((shape.array() > 0.0).all()) {
    if (auto w = single_newton(params, shape)) return *w;
  }

  // Fallback: relax along the flow, which converges to w* from every positive
  // state, then polish.
  StepControl control;
  control.dt = std::min(0.1, 0.5 / max_rate(params));
  Vector w = seed;
  for (int chunk = 0; chunk < 100; ++chunk) {
    w = integrate(params, w, 50.0, control).states.back();
    if (inf_norm(single_rhs(params, w)) <= 1e-6 * params.r().maxCoeff()) break;
  }
  if ((w.array() > 0.0).all()) {
    if (auto polished = single_newton(params, w)) return *polished;
  }
  throw Error(ErrorKind::NewtonDiverged, "single-species equilibrium did not converge");
}

Vector single_equilibrium(const SinglePatchParams& params) {
  if (params.mu() == 0.0) return params.r();
  return single_equilibrium(params, params.r());
}

Vector single_equilibrium(const Digraph& graph, double mu, const Vector& r) {
  return single_equilibrium(SinglePatchParams(graph, r, mu));
}

std::string to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Trivial: return "Trivial";
    case EquilibriumKind::SemitrivialU: return "SemitrivialU";
    case EquilibriumKind::SemitrivialV: return "SemitrivialV";
    case EquilibriumKind::Coexistence: return "Coexistence";
  }
  return "Unknown";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Stable: return "Stable";
    case Verdict::NeutrallyStable: return "NeutrallyStable";
    case Verdict::Unstable: return "Unstable";
  }
  return "Unknown";
}

std::string to_string(Order order) {
  switch (order) {
    case Order::LessK: return "LessK";
    case Order::GreaterK: return "GreaterK";
    case Order::EqualK: return "EqualK";
    case Order::Incomparable: return "Incomparable";
  }
  return "Unknown";
}

Matrix jacobian(const PatchSystem& sys, const State& state) {
  const Index n = sys.size();
  const Vector& u = state.u;
  const Vector& v = state.v;
  Matrix J = Matrix::Zero(2 * n, 2 * n);
  J.topLeftCorner(n, n) = sys.mu_u() * sys.L();
  J.topLeftCorner(n, n).diagonal() += sys.p() - 2.0 * u - sys.c() * v;
  J.bottomRightCorner(n, n) = sys.mu_v() * sys.L();
  J.bottomRightCorner(n, n).diagonal() += sys.q() - sys.b() * u - 2.0 * v;
  J.topRightCorner(n, n).diagonal() = -sys.c() * u;
  J.bottomLeftCorner(n, n).diagonal() = -sys.b() * v;
  return J;
}

StabilityReport stability(const PatchSystem& sys, const State& state, double tol) {
  const Index n = sys.size();
  const Matrix J = jacobian(sys, state);
  Eigen::EigenSolver<Matrix> solver(J, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "Jacobian eigenvalues failed");

  StabilityReport out;
  out.spectral_bound = solver.eigenvalues().real().maxCoeff();

  // Flipping the sign of v makes the Jacobian quasi-positive; when it is also
  // irreducible its Perron root must equal the spectral bound.
  Matrix K = J;
  K.topRightCorner(n, n) *= -1.0;
  K.bottomLeftCorner(n, n) *= -1.0;
  try {
    out.k_cone_bound = perron_root(K);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotIrreducible && e.kind() != ErrorKind::NotQuasiPositive) throw;
  }
  if (out.k_cone_bound &&
      std::abs(*out.k_cone_bound - out.spectral_bound) > 1e-8 * (1.0 + matrix_inf_norm(J))) {
    throw Error(ErrorKind::InvariantViolated, "Perron and QR spectral bounds of the Jacobian disagree");
  }

  if (out.spectral_bound < -tol) {
    out.verdict = Verdict::Stable;
  } else if (out.spectral_bound <= tol) {
    out.verdict = Verdict::NeutrallyStable;
  } else {
    out.verdict = Verdict::Unstable;
  }
  return out;
}

Verdict stability(const PatchSystem& sys, EquilibriumReport& report, double tol) {
  const auto s = stability(sys, report.point, tol);
  report.jacobian_spectral_bound = s.spectral_bound;
  report.lambda = -s.spectral_bound;
  report.k_cone_bound = s.k_cone_bound;
  report.verdict = s.verdict;
  return s.verdict;
}

bool is_degenerate(const PatchSystem& sys) {
  if (std::abs(sys.b() * sys.c() - 1.0) > 1e-9) return false;
  const Vector u = single_equilibrium(sys.graph(), sys.mu_u(), sys.p());
  const Vector v = single_equilibrium(sys.graph(), sys.mu_v(), sys.q());
  return inf_norm(u - sys.c() * v) <= 1e-7 * inf_norm(u);
}

EquilibriumReport assess_equilibrium(const PatchSystem& sys, EquilibriumKind kind, State point, double tol) {
  EquilibriumReport report;
  report.kind = kind;
  report.point = std::move(point);
  report.residual = stationary_residual(sys, report.point);
  report.weak_competition = sys.weak_competition();
  report.degenerate = is_degenerate(sys);
  stability(sys, report, tol);
  return report;
}

EquilibriumReport trivial_equilibrium(const PatchSystem& sys, double tol) {
  const Index n = sys.size();
  return assess_equilibrium(sys, EquilibriumKind::Trivial, {Vector::Zero(n), Vector::Zero(n)}, tol);
}

SemitrivialPair semitrivial_equilibria(const PatchSystem& sys, double tol) {
  const Index n = sys.size();
  const Vector u = single_equilibrium(sys.graph(), sys.mu_u(), sys.p());
  const Vector v = single_equilibrium(sys.graph(), sys.mu_v(), sys.q());
  return {assess_equilibrium(sys, EquilibriumKind::SemitrivialU, {u, Vector::Zero(n)}, tol),
          assess_equilibrium(sys, EquilibriumKind::SemitrivialV, {Vector::Zero(n), v}, tol)};
}

std::optional<State> polish_coexistence(const PatchSystem& sys, const State& seed) {
  if (seed.u.size() != sys.size() || seed.v.size() != sys.size()) {
    throw Error(ErrorKind::InvalidInput, "seed has the wrong length");
  }
  if (!seed.u.allFinite() || !seed.v.allFinite() || seed.u.minCoeff() <= 0.0 || seed.v.minCoeff() <= 0.0) {
    return std::nullopt;
  }
  const auto out = coexistence_newton(sys, seed);
  if (!out.converged) return std::nullopt;
  State s = split(out.x);
  if (!interior(s, std::max(sys.p().maxCoeff(), sys.q().maxCoeff()))) return std::nullopt;
  return s;
}

std::optional<EquilibriumReport> coexistence_equilibrium(const PatchSystem& sys, const std::vector<State>& seeds,
                                                         double tol) {
  const double scale = std::max(sys.p().maxCoeff(), sys.q().maxCoeff());
  auto report = [&](const State& s) { return assess_equilibrium(sys, EquilibriumKind::Coexistence, s, tol); };

  for (const State& seed : seeds) {
    if (auto s = polish_coexistence(sys, seed)) return report(*s);
  }

  const Vector mid = (sys.p() + sys.q()) / 4.0;
  if (auto s = polish_coexistence(sys, {mid, mid})) return report(*s);

  const Vector u1 = single_equilibrium(sys.graph(), sys.mu_u(), sys.p());
  const Vector v2 = single_equilibrium(sys.graph(), sys.mu_v(), sys.q());
  if (auto s = polish_coexistence(sys, {0.9 * u1, 0.1 * v2})) return report(*s);
  if (auto s = polish_coexistence(sys, {0.1 * u1, 0.9 * v2})) return report(*s);

  if (auto h = homotopy_seed(sys)) {
    if (interior(*h, scale)) return report(*h);
  }

  StepControl control;
  control.dt = std::min(0.05, 0.25 / max_rate(sys));
  const State relaxed = integrate(sys, {mid, mid}, 200.0, control).states.back();
  if (auto s = polish_coexistence(sys, floored(relaxed, 1e-12 * scale))) return report(*s);
  return std::nullopt;
}

Order order_compare(const State& a, const State& b, double tol) {
  if (a.u.size() != b.u.size() || a.v.size() != b.v.size()) {
    throw Error(ErrorKind::InvalidInput, "states have different lengths");
  }
  // Componentwise differences oriented so that a <=_K b means all >= 0.
  Vector d(a.u.size() + a.v.size());
  d << b.u - a.u, a.v - b.v;
  const bool equal = d.size() == 0 || d.cwiseAbs().maxCoeff() <= tol;
  if (equal) return Order::EqualK;
  if (d.minCoeff() >= -tol) return Order::LessK;
  if (d.maxCoeff() <= tol) return Order::GreaterK;
  return Order::Incomparable;
}

ContinuumFamily continuum_family(const PatchSystem& sys, const std::vector<double>& rho_grid) {
  ContinuumFamily family;
  family.rho_grid = rho_grid;
  family.base = single_equilibrium(sys.graph(), sys.mu_u(), sys.p());
  family.c = sys.c();
  for (const double rho : rho_grid) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidInput, "rho must lie in [0, 1]");
    State point{rho * family.base, (1.0 - rho) * family.base / sys.c()};
    family.residuals.push_back(stationary_residual(sys, point));
    family.points.push_back(std::move(point));
  }
  return family;
}

std::vector<double> rho_grid(int count) {
  if (count < 2) throw Error(ErrorKind::InvalidInput, "rho grid needs at least two points");
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) grid[k] = static_cast<double>(k) / (count - 1);
  return grid;
}

}  // namespace patchlv
