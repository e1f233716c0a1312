#pragma once

#include "marginlab/dataset.hpp"
#include "marginlab/geometry.hpp"
#include "marginlab/predictor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace marginlab {

enum class LRSchedule { Constant, CappedByRisk };
enum class Termination { MaxSteps, Stationarity, RiskTarget };

struct TrainConfig {
    double eta0 = 0.1;
    LRSchedule schedule = LRSchedule::Constant;
    long max_steps = 10000;
    double lambda = 0.0;
    double r = 2.0;
    LossKind loss = LossKind::Exponential;
    long snapshot_every = 0;  // 0 = powers of two plus the final step
    unsigned seed = 0;
    double stop_grad_norm = 0.0;  // 0 = disabled
    std::optional<double> stop_log_risk;
};

struct Snapshot {
    long t = 0;
    double log_risk = 0.0;
    double norm_theta = 0.0;
    double gamma_tilde = 0.0;
    bool separated = false;
    double a_t = 0.0;   // eta_t * L (unregularized)
    double b_t = 0.0;   // ||grad L|| / L
    double eta_t = 0.0;
    std::optional<double> dir_gap;     // ||theta/||theta|| - theta*||
    std::optional<double> nonsep_gap;  // ||Pi_nonsep theta - theta_tilde||
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    Vector final_theta;
    Termination termination = Termination::MaxSteps;
    long steps_taken = 0;
};

/// Oracle attachments: when present, snapshots carry dir_gap / nonsep_gap.
struct TrainAttachments {
    std::optional<MarginCertificate> certificate;
    std::optional<Matrix> nonsep_basis;
    std::optional<Vector> theta_tilde;
};

struct DivergenceError : std::runtime_error {
    Snapshot last_valid;
    explicit DivergenceError(Snapshot s)
        : std::runtime_error("gradient descent diverged (learning rate too large)"),
          last_valid(std::move(s)) {}
};

Trajectory train(const Predictor& pred, const Dataset& data, const WeightVector& w,
                 const TrainConfig& config, const TrainAttachments& attach = {});

struct PathPoint {
    double lambda = 0.0;
    Vector theta;
    double gamma_tilde = 0.0;
    double log_risk_at_opt = 0.0;
};

/// Warm-started minimization of L_lambda down a strictly decreasing lambda
/// schedule, each leg run to stationarity stop_grad_norm = 1e-8.
std::vector<PathPoint> weak_reg_path(const Predictor& pred, const Dataset& data,
                                     const WeightVector& w, const std::vector<double>& lambdas,
                                     TrainConfig config);

struct EnvelopeReport {
    bool applicable = true;   // false when a_t > 1 somewhere (precondition breach)
    std::vector<long> violations;
    double max_violation = 0.0;
};

/// Per-step boosting envelope: L(t+1) <= L(t)(1 - a_t(1 - a_t/2) b_t^2) and
/// ||theta(t+1)|| <= sum_{j<=t} a_j b_j, both in log space. Needs a
/// snapshot_every = 1, lambda = 0 linear trajectory.
EnvelopeReport boosting_envelope_check(const Trajectory& traj);

// exact header: t,log_risk,norm_theta,gamma_tilde,separated,a_t,b_t,eta_t,dir_gap,nonsep_gap
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace marginlab
