#ifndef PATCHLV_DYNAMICS_HPP
#define PATCHLV_DYNAMICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "patchlv/digraph.hpp"
#include "patchlv/types.hpp"

namespace patchlv {

inline constexpr double kStabilityTol = 1e-7;

/// dw/dt = mu L w + w (r - w).
class SinglePatchParams {
 public:
  SinglePatchParams(Digraph graph, Vector r, double mu);

  const Digraph& graph() const { return graph_; }
  const Matrix& L() const { return L_; }
  const Vector& r() const { return r_; }
  double mu() const { return mu_; }
  Index size() const { return graph_.size(); }

 private:
  Digraph graph_;
  Matrix L_;
  Vector r_;
  double mu_;
};

/// Two competing species on a patch network:
///   du/dt = mu_u L u + u (p - u - c v)
///   dv/dt = mu_v L v + v (q - b u - v)
/// Construction enforces b, c > 0, p, q >> 0 and strong connectivity; the
/// cycle-balance certificate is computed once and kept for the classifier.
class PatchSystem {
 public:
  PatchSystem(Digraph graph, Vector p, Vector q, double b, double c, double mu_u, double mu_v);

  const Digraph& graph() const { return graph_; }
  const Matrix& L() const { return L_; }
  const Vector& p() const { return p_; }
  const Vector& q() const { return q_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double mu_u() const { return mu_u_; }
  double mu_v() const { return mu_v_; }
  Index size() const { return graph_.size(); }

  bool weak_competition() const { return b_ * c_ <= 1.0; }
  bool cycle_balanced() const { return certificate_.balanced; }
  const CycleBalanceCertificate<double>& certificate() const { return certificate_; }

  PatchSystem with_dispersal(double mu_u, double mu_v) const;
  PatchSystem with_competition(double b, double c) const;
  PatchSystem with_resources(Vector p, Vector q) const;

 private:
  void validate() const;

  Digraph graph_;
  Matrix L_;
  CycleBalanceCertificate<double> certificate_;
  Vector p_, q_;
  double b_, c_, mu_u_, mu_v_;
};

struct State {
  Vector u;
  Vector v;
};

Vector single_rhs(const SinglePatchParams& params, const Vector& w);
State two_rhs(const PatchSystem& sys, const State& state);

/// Max-norm of the stationary equations.
double stationary_residual(const PatchSystem& sys, const State& state);

struct StepControl {
  double dt = 0.0;                   // 0 picks 0.01 min(1, 1/maxrate)
  std::vector<double> sample_times;  // sorted, within [0, t_end]; empty means {0, t_end}
  int max_halvings = 12;
  double clip_tol = 1e-12;
  bool keep_partial = false;  // return the samples reached instead of throwing
};

template <typename StateT>
struct TrajectoryOf {
  std::vector<double> times;
  std::vector<StateT> states;
  double dt = 0.0;
  long clipped = 0;    // components clipped to zero at round-off level
  long halvings = 0;   // steps retried at half size
  std::optional<std::string> failure;
};

using Trajectory = TrajectoryOf<State>;
using SingleTrajectory = TrajectoryOf<Vector>;

/// Bound on the stiffest linear rate, used for the default step.
double max_rate(const PatchSystem& sys);
double max_rate(const SinglePatchParams& params);

/// Classical fixed-step RK4; a step that leaves the orthant by more than
/// clip_tol is retried as two half steps. Throws StepSizeTooLarge unless
/// keep_partial is set.
Trajectory integrate(const PatchSystem& sys, const State& init, double t_end, const StepControl& control = {});
SingleTrajectory integrate(const SinglePatchParams& params, const Vector& init, double t_end,
                           const StepControl& control = {});

/// w*(mu, r): the positive equilibrium of the single-species model. Newton
/// from the seed (default r); when it fails, the flow is integrated from the
/// seed until nearly stationary and Newton polishes the result.
Vector single_equilibrium(const SinglePatchParams& params);
Vector single_equilibrium(const SinglePatchParams& params, const Vector& seed);
Vector single_equilibrium(const Digraph& graph, double mu, const Vector& r);

/// Newton alone; absent when it fails to converge to a positive root.
std::optional<Vector> single_newton(const SinglePatchParams& params, const Vector& seed);

enum class EquilibriumKind { Trivial, SemitrivialU, SemitrivialV, Coexistence };
enum class Verdict { Stable, NeutrallyStable, Unstable };

std::string to_string(EquilibriumKind kind);
std::string to_string(Verdict verdict);

struct StabilityReport {
  double spectral_bound = 0.0;          // sigma*, from the dense eigenvalues
  std::optional<double> k_cone_bound;   // Perron root of the sign-flipped Jacobian, when irreducible
  Verdict verdict = Verdict::Unstable;
};

struct EquilibriumReport {
  EquilibriumKind kind = EquilibriumKind::Trivial;
  State point;
  double residual = 0.0;
  double jacobian_spectral_bound = 0.0;  // sigma*
  double lambda = 0.0;                   // -sigma*, the linearized decay rate
  std::optional<double> k_cone_bound;
  Verdict verdict = Verdict::Unstable;
  bool weak_competition = false;
  bool degenerate = false;  // bc = 1 and w*(mu_u, p) = c w*(mu_v, q)
};

/// [[mu_u L + diag(p - 2u - cv), -diag(cu)], [-diag(bv), mu_v L + diag(q - bu - 2v)]].
Matrix jacobian(const PatchSystem& sys, const State& state);

StabilityReport stability(const PatchSystem& sys, const State& state, double tol = kStabilityTol);
Verdict stability(const PatchSystem& sys, EquilibriumReport& report, double tol = kStabilityTol);

/// Degeneracy predicate: |bc - 1| <= 1e-9 and ||u* - c v*|| <= 1e-7 ||u*||.
bool is_degenerate(const PatchSystem& sys);

EquilibriumReport assess_equilibrium(const PatchSystem& sys, EquilibriumKind kind, State point,
                                     double tol = kStabilityTol);

EquilibriumReport trivial_equilibrium(const PatchSystem& sys, double tol = kStabilityTol);

struct SemitrivialPair {
  EquilibriumReport e1;  // (w*(mu_u, p), 0)
  EquilibriumReport e2;  // (0, w*(mu_v, q))
};

SemitrivialPair semitrivial_equilibria(const PatchSystem& sys, double tol = kStabilityTol);

/// Searches the Newton basins of `seeds` followed by the default seeds
/// ((p+q)/4, (p+q)/4), interior perturbations of E1 and E2, a dispersal
/// homotopy from the uncoupled patches, and a short integration. Absent when
/// every seed fails or lands on the boundary.
std::optional<EquilibriumReport> coexistence_equilibrium(const PatchSystem& sys,
                                                         const std::vector<State>& seeds = {},
                                                         double tol = kStabilityTol);

/// Newton polish of one state; absent unless it converges to an interior point.
std::optional<State> polish_coexistence(const PatchSystem& sys, const State& seed);

enum class Order { LessK, GreaterK, EqualK, Incomparable };

std::string to_string(Order order);

/// a <=_K b iff u_a <= u_b and v_a >= v_b componentwise.
Order order_compare(const State& a, const State& b, double tol = 0.0);

struct ContinuumFamily {
  std::vector<double> rho_grid;
  Vector base;  // w*(mu_u, p)
  double c = 0.0;
  std::vector<State> points;
  std::vector<double> residuals;
};

/// Points (rho w*, (1 - rho) w* / c) for rho on the grid.
ContinuumFamily continuum_family(const PatchSystem& sys, const std::vector<double>& rho_grid);

/// Evenly spaced rho values on [0, 1].
std::vector<double> rho_grid(int count);

}  // namespace patchlv

#endif  // PATCHLV_DYNAMICS_HPP
