#pragma once

#include <json.hpp>
#include <memory>
#include <span>
#include <vector>

#include "envs/env.hpp"
#include "gp/kernel.hpp"
#include "math/adam.hpp"
#include "math/mlp.hpp"
#include "ode/solver.hpp"

namespace odectrl::dyn {

using math::Matrix;
using math::Vector;

enum class DynamicsForm { General, LinearInAction, SecondOrder };

const char* form_name(DynamicsForm form);
DynamicsForm form_from_name(const std::string& name);

struct EnsembleConfig {
  int n_ens = 5;
  int obs_dim = 0;
  int act_dim = 0;
  DynamicsForm form = DynamicsForm::General;
  std::vector<int> hidden = {200, 200, 200};
  math::Activation activation = math::Activation::Elu;
  double init_variance = 1e-2;  // observation-noise variance at init
  double weight_decay = 1e-4;   // per-member MAP penalty standing in for the KL

  math::MLPSpec member_spec() const;
  void validate() const;
};

// Ensemble of neural differential functions plus shared trainable diagonal
// observation-noise variances (stored as log-variances). Members are
// independent MAP estimates; the ensemble spread carries the epistemic
// uncertainty.
class EnsembleDynamics {
 public:
  static EnsembleDynamics create(const EnsembleConfig& cfg, math::Rng& rng);

  const EnsembleConfig& config() const { return cfg_; }
  int members() const { return cfg_.n_ens; }

  math::ParamStore& member_params(int l) { return members_.at(std::size_t(l)); }
  const math::ParamStore& member_params(int l) const { return members_.at(std::size_t(l)); }
  math::ParamStore& noise_params() { return noise_; }
  const math::ParamStore& noise_params() const { return noise_; }
  Vector noise_variance() const;

  std::int64_t train_iterations() const { return train_iters_; }
  void add_train_iterations(std::int64_t n) { train_iters_ += n; }

  // ds/dt of member l. The form decides how the network output is assembled:
  // General feeds (s, a) straight through; LinearInAction evaluates
  // f(s) + h(s) a from a d(1+m)-headed network on s alone; SecondOrder copies
  // the position derivative from the velocity block and learns only the
  // acceleration.
  Vector field_eval(int l, const Vector& s, const Vector& a) const;
  Matrix field_eval_batch(int l, const Matrix& s, const Matrix& a) const;

  math::MLPVars member_vars(math::Tape& tape, int l, bool trainable);
  math::Var field_eval_tape(math::Tape& tape, const math::MLPVars& vars, math::Var s,
                            math::Var a) const;

  // Per-row member disagreement: variance across members of the field output,
  // summed over output dimensions.
  Vector field_variance(const Matrix& s, const Matrix& a) const;

  nlohmann::json to_json() const;
  static EnsembleDynamics from_json(const nlohmann::json& j);

 private:
  EnsembleConfig cfg_;
  std::vector<math::ParamStore> members_;
  math::ParamStore noise_;  // block "log_var", 1 x d
  std::int64_t train_iters_ = 0;
};

// A contiguous slice of one trajectory plus the kernel interpolant that
// extends its recorded actions to continuous time.
struct Subsequence {
  Vector times;    // t_s entries, strictly increasing
  Matrix states;   // t_s x d
  Matrix actions;  // t_s x m
  int traj_index = -1;
  std::shared_ptr<const gp::Interpolant> action_interp;
};

struct SubsequenceBatch {
  std::vector<Subsequence> items;
  int obs_count() const;
};

// Training-data view: trajectories with cached per-trajectory action
// interpolants.
class DynDataset {
 public:
  static DynDataset from_trajectories(std::span<const envs::Trajectory> trajs,
                                      double interp_lengthscale);

  int size() const { return int(trajs_.size()); }
  const envs::Trajectory& trajectory(int i) const { return *trajs_.at(std::size_t(i)); }
  std::shared_ptr<const gp::Interpolant> interpolant(int i) const {
    return interps_.at(std::size_t(i));
  }

  // `per_traj` subsequences of length `len` from every trajectory, start
  // indices uniform.
  SubsequenceBatch sample_batch(math::Rng& rng, int per_traj, int len) const;
  Subsequence subsequence(int traj, int start, int len) const;

 private:
  std::vector<const envs::Trajectory*> trajs_;
  std::vector<std::shared_ptr<const gp::Interpolant>> interps_;
};

struct ElboOptions {
  double substep_h = 0.05;  // target RK4 substep: 2 per 0.1 s of horizon
  int max_substeps = 8;     // cap per observation interval
};

// Negative of [per-member Gaussian trajectory log-likelihood minus the MAP
// penalty], normalized by the batch observation count. The reported scalar is
// the member mean; elbo_backward gives each member the gradient of its own
// term (ensemble = independent trainings) and the shared log-variances the
// member mean.
double elbo_loss(EnsembleDynamics& model, const SubsequenceBatch& batch,
                 const ElboOptions& opts = {});

struct ElboResult {
  double loss = 0.0;
  std::vector<double> member_loss;
  int unstable_members = 0;
};
ElboResult elbo_backward(EnsembleDynamics& model, const SubsequenceBatch& batch,
                         const ElboOptions& opts = {});

struct DynOptimizer {
  std::vector<math::Adam> members;
  math::Adam noise;

  static DynOptimizer create(const EnsembleDynamics& model, double lr = 1e-3);
  void set_lr(double lr);
  nlohmann::json to_json() const;
  static DynOptimizer from_json(const nlohmann::json& j);
};

struct DynTrainConfig {
  int iters = 1250;        // N_dyn
  int warmup_iters = 100;  // linear ramp 1e-4 -> 1e-3
  double lr_start = 1e-4;
  double lr_end = 1e-3;
  int subseq_per_traj = 5;
  int subseq_len = 5;  // t_s
  ElboOptions elbo;
  int pretrain_iters = 300;
  double pretrain_lr = 1e-3;
};

struct DynTrainResult {
  double final_loss = 0.0;
  int unstable_events = 0;
};

// Gradient-matching pretraining: regress each member's field output onto
// finite-difference targets (s_{i+1} - s_i) / (t_{i+1} - t_i).
void gradient_match_init(EnsembleDynamics& model, const DynDataset& data, int iters, double lr,
                         math::Rng& rng);

// Full dynamics phase: gradient matching on the first ever call, then Adam
// with the warmup schedule for warmup_iters + iters iterations.
DynTrainResult train_dynamics(EnsembleDynamics& model, DynOptimizer& opt, const DynDataset& data,
                              const DynTrainConfig& cfg, math::Rng& rng);

// Member-wise forward simulations from s0 under a time-indexed action signal.
struct SampledTrajectories {
  std::vector<ode::DenseTrajectory> trajs;  // entry per member (empty when failed)
  std::vector<bool> ok;
  int unstable = 0;
};
SampledTrajectories sample_trajectories(
    const EnsembleDynamics& model, const Vector& s0,
    const std::function<Vector(double)>& action_at, std::span<const double> eval_times, int count,
    const ode::SolverConfig& solver = {ode::Method::Dopri5, 1e-7, 1e-7, 1, 10'000'000});

// Mean over members and windows of the squared prediction error `lookahead`
// seconds ahead, clipped for reporting.
double predictive_mse(const EnsembleDynamics& model, std::span<const envs::Trajectory> test,
                      double lookahead_s, double interp_lengthscale, double clip = 100.0);

}  // namespace odectrl::dyn
