#include "marginlab/trainer.hpp"

#include "marginlab/risk.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace marginlab {

namespace {

constexpr double kParamGuard = 1e12;

struct StepEval {
    Vector margins;
    double log_data_risk = 0.0;  // unregularized
    double log_risk = 0.0;       // with lambda ||theta||^r
    Vector grad;                 // regularized gradient
    double b_t = 0.0;            // ||grad L|| / L, shared-shift ratio
};

// One fused pass: margins, log risk, gradient, and the grad/risk ratio norm.
StepEval evaluate(const Predictor& pred, const Vector& theta, const Dataset& data,
                  const WeightVector& w, const TrainConfig& cfg) {
    StepEval ev;
    const Eigen::Index n = data.size();
    ev.margins.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ev.margins(i) = data.label(i) * pred.forward(theta, data.sample(i));
    ev.log_data_risk = log_data_risk(ev.margins, w, cfg.loss);

    double log_n = std::log(static_cast<double>(n));
    ev.grad = Vector::Zero(theta.size());
    Vector ratio = Vector::Zero(theta.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        double lc = std::log(w(i)) + log_neg_dloss(cfg.loss, ev.margins(i)) - log_n;
        double c = std::exp(lc);
        double cr = std::exp(lc - ev.log_data_risk);
        if (c == 0.0 && cr == 0.0) continue;
        Vector g = pred.grad_theta(theta, data.sample(i));
        ev.grad -= (c * data.label(i)) * g;
        ratio -= (cr * data.label(i)) * g;
    }
    ev.b_t = ratio.norm();

    ev.log_risk = ev.log_data_risk;
    if (cfg.lambda > 0.0) {
        double norm = theta.norm();
        if (norm > 0.0) {
            double log_reg = std::log(cfg.lambda) + cfg.r * std::log(norm);
            double m = std::max(ev.log_risk, log_reg);
            ev.log_risk = m + std::log(std::exp(ev.log_risk - m) + std::exp(log_reg - m));
            ev.grad += (cfg.lambda * cfg.r * std::pow(norm, cfg.r - 2.0)) * theta;
        }
    }
    return ev;
}

double step_size(const TrainConfig& cfg, double log_risk, double alpha) {
    if (cfg.schedule == LRSchedule::Constant) return cfg.eta0;
    // eta = min(eta0, 1 / (L max(1, log(1/L))^{3-2/alpha})); once the risk is
    // deep under, the cap is astronomically large and eta0 wins
    if (log_risk < -690.0) return cfg.eta0;
    double L = std::exp(log_risk);
    double cap = 1.0 / (L * std::pow(std::max(1.0, -log_risk), 3.0 - 2.0 / alpha));
    return std::min(cfg.eta0, cap);
}

bool snapshot_due(long t, long snapshot_every) {
    if (snapshot_every > 0) return t % snapshot_every == 0;
    return (t & (t - 1)) == 0;  // 0, 1, 2, 4, 8, ...
}

Snapshot make_snapshot(const Predictor& pred, const Vector& theta, const Dataset& data,
                       const StepEval& ev, long t, double eta, const TrainAttachments& attach) {
    Snapshot s;
    s.t = t;
    s.log_risk = ev.log_risk;
    s.norm_theta = theta.norm();
    s.separated = (ev.margins.minCoeff() > 0.0);
    s.eta_t = eta;
    s.a_t = eta * std::exp(ev.log_data_risk);
    s.b_t = ev.b_t;
    if (s.norm_theta > 0.0) {
        double scale = std::pow(s.norm_theta, pred.alpha());
        s.gamma_tilde = ev.margins.minCoeff() / scale;
        if (attach.certificate && attach.certificate->separable)
            s.dir_gap = (theta / s.norm_theta - attach.certificate->theta_star).norm();
    } else {
        s.gamma_tilde = 0.0;
    }
    if (attach.nonsep_basis && attach.theta_tilde)
        s.nonsep_gap = (project_span(theta, *attach.nonsep_basis) - *attach.theta_tilde).norm();
    return s;
}

}  // namespace

Trajectory train(const Predictor& pred, const Dataset& data, const WeightVector& w,
                 const TrainConfig& cfg, const TrainAttachments& attach) {
    if (w.size() != data.size()) throw StructuralError("train: weight count mismatch");
    if (!(cfg.eta0 > 0.0) || cfg.max_steps < 1) throw StructuralError("train: invalid config");

    Trajectory traj;
    Vector theta = pred.initial_theta(cfg.seed);

    for (long t = 0; t <= cfg.max_steps; ++t) {
        StepEval ev = evaluate(pred, theta, data, w, cfg);
        double eta = step_size(cfg, ev.log_risk, pred.alpha());

        bool stationary = cfg.stop_grad_norm > 0.0 && ev.grad.norm() <= cfg.stop_grad_norm;
        bool risk_hit = cfg.stop_log_risk && ev.log_risk <= *cfg.stop_log_risk;
        bool last = (t == cfg.max_steps) || stationary || risk_hit;

        if (last || snapshot_due(t, cfg.snapshot_every)) {
            Snapshot s = make_snapshot(pred, theta, data, ev, t, eta, attach);
            if (!traj.snapshots.empty() && traj.snapshots.back().t == t)
                traj.snapshots.pop_back();
            traj.snapshots.push_back(std::move(s));
        }
        if (last) {
            traj.steps_taken = t;
            traj.termination = stationary  ? Termination::Stationarity
                               : risk_hit ? Termination::RiskTarget
                                          : Termination::MaxSteps;
            break;
        }

        theta -= eta * ev.grad;
        if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > kParamGuard)
            throw DivergenceError(traj.snapshots.empty() ? Snapshot{} : traj.snapshots.back());
    }
    traj.final_theta = std::move(theta);
    return traj;
}

std::vector<PathPoint> weak_reg_path(const Predictor& pred, const Dataset& data,
                                     const WeightVector& w, const std::vector<double>& lambdas,
                                     TrainConfig cfg) {
    if (lambdas.empty()) throw StructuralError("weak_reg_path: empty schedule");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw StructuralError("weak_reg_path: lambdas must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
            throw StructuralError("weak_reg_path: schedule must be strictly decreasing");
    }
    cfg.stop_grad_norm = 1e-8;

    // warm starting is done by substituting the previous solution for the
    // predictor's seeded initialization
    struct WarmStart final : Predictor {
        const Predictor* base;
        Vector theta0;
        Eigen::Index param_dim() const override { return base->param_dim(); }
        Eigen::Index input_dim() const override { return base->input_dim(); }
        double alpha() const override { return base->alpha(); }
        double forward(const Vector& th, const Eigen::RowVectorXd& x) const override {
            return base->forward(th, x);
        }
        Vector grad_theta(const Vector& th, const Eigen::RowVectorXd& x) const override {
            return base->grad_theta(th, x);
        }
        Vector initial_theta(unsigned seed) const override {
            return theta0.size() > 0 ? theta0 : base->initial_theta(seed);
        }
        std::unique_ptr<Predictor> clone() const override { return nullptr; }
    };

    WarmStart warm;
    warm.base = &pred;

    std::vector<PathPoint> path;
    for (double lambda : lambdas) {
        cfg.lambda = lambda;
        Trajectory traj;
        try {
            traj = train(warm, data, w, cfg);
        } catch (const DivergenceError&) {
            std::ostringstream msg;
            msg << "weak_reg_path: training diverged at lambda = " << lambda;
            throw NumericError(msg.str());
        }
        PathPoint pt;
        pt.lambda = lambda;
        pt.theta = traj.final_theta;
        pt.gamma_tilde = normalized_margin(pred, pt.theta, data).gamma_tilde;
        pt.log_risk_at_opt = traj.snapshots.back().log_risk;
        path.push_back(pt);
        warm.theta0 = traj.final_theta;
    }
    return path;
}

EnvelopeReport boosting_envelope_check(const Trajectory& traj) {
    EnvelopeReport rep;
    const auto& snaps = traj.snapshots;
    for (const auto& s : snaps) {
        if (s.a_t > 1.0) {
            rep.applicable = false;
            return rep;
        }
    }
    double cum_ab = 0.0;
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        const Snapshot& cur = snaps[k];
        const Snapshot& nxt = snaps[k + 1];
        if (nxt.t != cur.t + 1)
            throw StructuralError("boosting_envelope_check: needs snapshot_every = 1");
        // risk decrease, in log space
        double factor = 1.0 - cur.a_t * (1.0 - cur.a_t / 2.0) * cur.b_t * cur.b_t;
        bool bad = false;
        double excess = 0.0;
        if (factor <= 0.0) {
            bad = true;
            excess = std::numeric_limits<double>::infinity();
        } else if (nxt.log_risk > cur.log_risk + std::log(factor) + 1e-12) {
            bad = true;
            excess = nxt.log_risk - (cur.log_risk + std::log(factor));
        }
        // norm growth
        cum_ab += cur.a_t * cur.b_t;
        if (nxt.norm_theta > cum_ab + 1e-12) {
            bad = true;
            excess = std::max(excess, nxt.norm_theta - cum_ab);
        }
        if (bad) {
            rep.violations.push_back(cur.t);
            rep.max_violation = std::max(rep.max_violation, excess);
        }
    }
    return rep;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write trajectory file: " + path);
    out << std::setprecision(17);
    out << "t,log_risk,norm_theta,gamma_tilde,separated,a_t,b_t,eta_t,dir_gap,nonsep_gap\n";
    for (const auto& s : traj.snapshots) {
        out << s.t << "," << s.log_risk << "," << s.norm_theta << "," << s.gamma_tilde << ","
            << (s.separated ? 1 : 0) << "," << s.a_t << "," << s.b_t << "," << s.eta_t << ",";
        if (s.dir_gap) out << *s.dir_gap;
        out << ",";
        if (s.nonsep_gap) out << *s.nonsep_gap;
        out << "\n";
    }
}

}  // namespace marginlab
