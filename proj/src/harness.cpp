#include "marginlab/harness.hpp"

#include "marginlab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace marginlab {

std::string check_name(CheckKind k) {
    switch (k) {
        case CheckKind::Prop1: return "Prop1";
        case CheckKind::Prop2: return "Prop2";
        case CheckKind::Prop3Path: return "Prop3Path";
        case CheckKind::Theorem1: return "Theorem1";
        case CheckKind::Envelope: return "Envelope";
        case CheckKind::Claim1: return "Claim1";
    }
    return "?";
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inapplicable: return "INAPPLICABLE";
        case Verdict::Error: return "ERROR";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// scenario file parsing

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    double v;
    while (ss >> v) out.push_back(v);
    return out;
}

struct KeyValues {
    std::map<std::string, std::string> kv;
    mutable std::set<std::string> touched;

    bool has(const std::string& k) const {
        touched.insert(k);
        return kv.count(k) > 0;
    }
    std::string str(const std::string& k, const std::string& def = "") const {
        touched.insert(k);
        auto it = kv.find(k);
        return it == kv.end() ? def : it->second;
    }
    double num(const std::string& k, double def) const {
        touched.insert(k);
        auto it = kv.find(k);
        return it == kv.end() ? def : std::stod(it->second);
    }
    long integer(const std::string& k, long def) const {
        touched.insert(k);
        auto it = kv.find(k);
        return it == kv.end() ? def : std::stol(it->second);
    }
    void reject_unknown() const {
        for (const auto& [k, v] : kv)
            if (!touched.count(k)) throw StructuralError("unknown scenario key: " + k);
    }
};

GeneratorKind parse_generator(const std::string& s) {
    if (s == "symmetric_pair") return GeneratorKind::SymmetricPair;
    if (s == "planted_margin") return GeneratorKind::PlantedMargin;
    if (s == "conflict_pair") return GeneratorKind::ConflictPair;
    if (s == "mixed_sep_nonsep") return GeneratorKind::MixedSepNonsep;
    if (s == "gaussian_shift") return GeneratorKind::GaussianShift;
    throw StructuralError("unknown generator: " + s);
}

CheckKind parse_check(const std::string& s) {
    if (s == "Prop1") return CheckKind::Prop1;
    if (s == "Prop2") return CheckKind::Prop2;
    if (s == "Prop3Path") return CheckKind::Prop3Path;
    if (s == "Theorem1") return CheckKind::Theorem1;
    if (s == "Envelope") return CheckKind::Envelope;
    if (s == "Claim1") return CheckKind::Claim1;
    throw StructuralError("unknown check: " + s);
}

}  // namespace

ScenarioSpec parse_scenario_text(const std::string& text, const std::string& id) {
    KeyValues conf;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) conf.kv[key] = val;
    }

    ScenarioSpec spec;
    spec.id = id;
    spec.generator.kind = parse_generator(conf.str("generator", "symmetric_pair"));
    spec.generator.n = conf.integer("generator.n", 2);
    spec.generator.d = conf.integer("generator.d", 2);
    spec.generator.gamma_plant = conf.num("generator.gamma", 0.5);
    spec.generator.radius = conf.num("generator.radius", 1.0);
    spec.generator.mu_s = conf.num("generator.mu_s", 0.0);
    spec.generator.mu_t = conf.num("generator.mu_t", 0.0);
    spec.generator.sigma = conf.num("generator.sigma", 1.0);
    spec.generator.truncation_radius = conf.num("generator.truncation_radius", 10.0);

    std::string ws = conf.str("weights", "uniform");
    if (ws == "uniform") spec.weight_scheme = WeightScheme::Uniform;
    else if (ws == "aligned") spec.weight_scheme = WeightScheme::AlignedWithRatios;
    else if (ws == "inverted") spec.weight_scheme = WeightScheme::InvertedRatios;
    else if (ws == "random_box") spec.weight_scheme = WeightScheme::RandomBox;
    else if (ws == "explicit") spec.weight_scheme = WeightScheme::Explicit;
    else throw StructuralError("unknown weight scheme: " + ws);
    spec.weight_M = conf.num("weights.M", 1.0);
    spec.explicit_weights = split_doubles(conf.str("weights.values", ""));

    std::string pk = conf.str("predictor", "linear");
    if (pk == "mlp") {
        spec.mlp = true;
        for (double v : split_doubles(conf.str("predictor.dims", "")))
            spec.mlp_dims.push_back(static_cast<Eigen::Index>(v));
        if (spec.mlp_dims.empty()) throw StructuralError("predictor.dims required for mlp");
        spec.activation = conf.str("predictor.activation", "relu") == "square"
                              ? Activation::Square
                              : Activation::ReLU;
    } else if (pk != "linear") {
        throw StructuralError("unknown predictor: " + pk);
    }

    spec.train.eta0 = conf.num("train.eta0", 0.1);
    spec.train.schedule = conf.str("train.schedule", "constant") == "capped"
                              ? LRSchedule::CappedByRisk
                              : LRSchedule::Constant;
    spec.train.max_steps = conf.integer("train.max_steps", 10000);
    spec.train.lambda = conf.num("train.lambda", 0.0);
    spec.train.r = conf.num("train.r", 2.0);
    spec.train.loss = conf.str("train.loss", "exponential") == "logistic" ? LossKind::Logistic
                                                                          : LossKind::Exponential;
    spec.train.snapshot_every = conf.integer("train.snapshot_every", 0);
    spec.train.stop_grad_norm = conf.num("train.stop_grad_norm", 0.0);
    if (conf.has("train.stop_log_risk"))
        spec.train.stop_log_risk = conf.num("train.stop_log_risk", 0.0);

    spec.lambda_schedule = split_doubles(conf.str("lambda_schedule", ""));

    {
        std::stringstream ss(conf.str("checks", ""));
        std::string tok;
        while (ss >> tok) spec.checks.insert(parse_check(tok));
    }

    spec.seed = static_cast<unsigned>(conf.integer("seed", 0));
    if (const char* env = std::getenv("MARGINLAB_SEED"))
        spec.seed = static_cast<unsigned>(std::stoul(env));
    spec.train.seed = spec.seed;
    spec.out_dir = conf.str("out_dir", ".");
    conf.reject_unknown();
    return spec;
}

ScenarioSpec parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), fs::path(path).stem().string());
}

// ---------------------------------------------------------------------------
// data generation

GeneratedData generate_data(const ScenarioSpec& spec, unsigned seed) {
    const GeneratorSpec& g = spec.generator;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    auto random_unit = [&](Eigen::Index d) {
        Vector v(d);
        do {
            for (Eigen::Index i = 0; i < d; ++i) v(i) = gauss(rng);
        } while (v.norm() < 1e-8);
        return Vector(v / v.norm());
    };

    switch (g.kind) {
        case GeneratorKind::SymmetricPair: {
            Matrix x(2, 2);
            x << 1, 0, -1, 0;
            Vector y(2);
            y << 1, -1;
            GeneratedData out{Dataset(x, y)};
            Vector ts(2);
            ts << 1, 0;
            out.theta_plant = ts;
            out.gamma_plant = 1.0;
            return out;
        }
        case GeneratorKind::PlantedMargin: {
            if (!(g.gamma_plant > 0.0) || g.gamma_plant >= g.radius)
                throw StructuralError("planted_margin: need 0 < gamma < radius");
            if (g.n < 2) throw StructuralError("planted_margin: n >= 2 required");
            Vector theta = random_unit(g.d);
            Matrix x(g.n, g.d);
            Vector y(g.n);
            // two support points exactly at the margin
            x.row(0) = g.gamma_plant * theta.transpose();
            y(0) = 1;
            x.row(1) = -g.gamma_plant * theta.transpose();
            y(1) = -1;
            for (Eigen::Index i = 2; i < g.n; ++i) {
                for (;;) {
                    Vector v(g.d);
                    for (Eigen::Index j = 0; j < g.d; ++j) v(j) = unif(rng) * g.radius;
                    if (v.norm() > g.radius) continue;
                    double m = theta.dot(v);
                    if (std::abs(m) <= g.gamma_plant * 1.05) continue;  // strictly outside
                    x.row(i) = v.transpose();
                    y(i) = m > 0 ? 1 : -1;
                    break;
                }
            }
            GeneratedData out{Dataset(x, y)};
            out.theta_plant = theta;
            out.gamma_plant = g.gamma_plant;
            return out;
        }
        case GeneratorKind::ConflictPair: {
            Matrix x(2, 1);
            x << 1, 1;
            Vector y(2);
            y << 1, -1;
            return GeneratedData{Dataset(x, y)};
        }
        case GeneratorKind::MixedSepNonsep: {
            Matrix x(4, 2);
            x << 1, 0, -1, 0, 0, 1, 0, 1;
            Vector y(4);
            y << 1, -1, 1, -1;
            return GeneratedData{Dataset(x, y)};
        }
        case GeneratorKind::GaussianShift: {
            Vector mu_s = Vector::Zero(g.d), mu_t = Vector::Zero(g.d);
            mu_s(0) = g.mu_s;
            mu_t(0) = g.mu_t;
            DensityPair pair;
            pair.source = {mu_s, g.sigma};
            pair.target = {mu_t, g.sigma};
            chi2_divergence(pair);  // closed form (equal covariance)

            Vector theta_true = random_unit(g.d);
            Matrix x(g.n, g.d);
            Vector y(g.n), eta(g.n);
            double s2 = g.sigma * g.sigma;
            for (Eigen::Index i = 0; i < g.n; ++i) {
                Vector v(g.d);
                for (;;) {
                    for (Eigen::Index j = 0; j < g.d; ++j)
                        v(j) = mu_s(j) + g.sigma * gauss(rng);
                    if (v.norm() > g.truncation_radius) continue;
                    if (std::abs(theta_true.dot(v)) < 0.05) continue;
                    break;
                }
                x.row(i) = v.transpose();
                y(i) = theta_true.dot(v) > 0 ? 1 : -1;
                eta(i) = std::exp(
                    (-(v - mu_t).squaredNorm() + (v - mu_s).squaredNorm()) / (2.0 * s2));
            }
            GeneratedData out{Dataset(x, y, eta)};
            out.pair = pair;
            out.theta_true = theta_true;
            return out;
        }
    }
    throw StructuralError("unreachable generator kind");
}

WeightVector make_weights(const ScenarioSpec& spec, const GeneratedData& gen, unsigned seed) {
    const Eigen::Index n = gen.data.size();
    double M = std::max(1.0, spec.weight_M);
    switch (spec.weight_scheme) {
        case WeightScheme::Uniform:
            return WeightVector(Vector::Ones(n), M);
        case WeightScheme::AlignedWithRatios:
        case WeightScheme::InvertedRatios: {
            if (!gen.data.has_ratios())
                throw DomainError("ratio-based weights need a generator that emits ratios");
            Vector w(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                double e = gen.data.ratios()(i);
                if (spec.weight_scheme == WeightScheme::InvertedRatios) e = 1.0 / e;
                w(i) = std::clamp(e, 1.0 / M, M);
            }
            return WeightVector(w, M);
        }
        case WeightScheme::RandomBox: {
            std::mt19937_64 rng(seed + 0x9e3779b9u);
            std::uniform_real_distribution<double> unif(1.0 / M, M);
            Vector w(n);
            for (Eigen::Index i = 0; i < n; ++i) w(i) = unif(rng);
            return WeightVector(w, M);
        }
        case WeightScheme::Explicit: {
            if (static_cast<Eigen::Index>(spec.explicit_weights.size()) != n)
                throw StructuralError("explicit weights: wrong count");
            Vector w(n);
            double need = 1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                w(i) = spec.explicit_weights[static_cast<std::size_t>(i)];
                need = std::max({need, w(i), 1.0 / w(i)});
            }
            return WeightVector(w, std::max(M, need));
        }
    }
    throw StructuralError("unreachable weight scheme");
}

std::unique_ptr<Predictor> make_predictor(const ScenarioSpec& spec, Eigen::Index d) {
    if (!spec.mlp) return std::make_unique<LinearPredictor>(d);
    auto dims = spec.mlp_dims;
    if (dims.front() != d) throw StructuralError("predictor.dims[0] must match data dimension");
    return std::make_unique<HomogeneousMLP>(dims, spec.activation);
}

// ---------------------------------------------------------------------------
// checks

namespace {

CheckResult check_claim1(const Trajectory& traj) {
    CheckResult res{CheckKind::Claim1};
    std::size_t first_sep = traj.snapshots.size();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        if (traj.snapshots[k].separated) {
            first_sep = k;
            break;
        }
    }
    std::ostringstream d;
    if (first_sep == traj.snapshots.size()) {
        res.verdict = Verdict::Fail;
        res.detail = "data never separated during training";
        return res;
    }
    bool increasing = true;
    for (std::size_t k = first_sep + 1; k < traj.snapshots.size(); ++k)
        if (!(traj.snapshots[k].norm_theta > traj.snapshots[k - 1].norm_theta)) increasing = false;
    double final_norm = traj.snapshots.back().norm_theta;
    // the norm grows like log(t)/gamma*, so require real growth past the
    // separation point rather than a budget-dependent absolute level
    double sep_norm = traj.snapshots[first_sep].norm_theta;
    bool grew = final_norm > std::max(2.0 * sep_norm, sep_norm + 1.0);
    res.verdict = (increasing && grew) ? Verdict::Pass : Verdict::Fail;
    d << "final_norm=" << final_norm << " monotone_after_separation=" << (increasing ? 1 : 0)
      << " first_separated_t=" << traj.snapshots[first_sep].t
      << " norm_at_separation=" << sep_norm;
    res.detail = d.str();
    return res;
}

CheckResult check_prop1(const Trajectory& traj, const MarginCertificate& cert,
                        const WeightVector& w, Eigen::Index n) {
    CheckResult res{CheckKind::Prop1};
    if (!cert.separable) {
        res.verdict = Verdict::Inapplicable;
        res.detail = "data not separable";
        return res;
    }
    double kl = generalized_kl(cert.p_star, w);
    int violations = 0;
    double final_gap = -1.0, max_ratio = 0.0;
    for (const auto& s : traj.snapshots) {
        if (!s.separated || !s.dir_gap || !(s.norm_theta > 0.0)) continue;
        double bound = prop1_direction_bound(n, kl, w.bound(), s.norm_theta, cert.gamma_star);
        double lhs = (*s.dir_gap) * (*s.dir_gap);
        if (lhs > bound) ++violations;
        if (bound > 0.0) max_ratio = std::max(max_ratio, lhs / bound);
        final_gap = *s.dir_gap;
    }
    std::ostringstream d;
    d << "violations=" << violations << " max_gap2_over_bound=" << max_ratio
      << " final_dir_gap=" << final_gap << " kl=" << kl;
    res.detail = d.str();
    res.verdict = (final_gap >= 0.0 && violations == 0) ? Verdict::Pass : Verdict::Fail;
    return res;
}

CheckResult check_prop2(const Trajectory& traj, const RestrictedOptimum& opt) {
    CheckResult res{CheckKind::Prop2};
    double final_gap = -1.0;
    int envelope_violations = 0;
    int rate_violations = 0;
    double K = -1.0;
    double L_inf = std::exp(opt.log_risk);
    for (const auto& s : traj.snapshots) {
        if (!s.nonsep_gap) continue;
        double gap = *s.nonsep_gap;
        final_gap = gap;
        // strong-convexity envelope, asserted only once the gap is small
        if (gap < 0.1) {
            double rhs = (2.0 / opt.strong_convexity_omega) * (std::exp(s.log_risk) - L_inf);
            if (gap * gap > rhs + 1e-12) ++envelope_violations;
        }
        // log^2 t / t decay, constant pinned at the first snapshot past t=1e3
        if (s.t >= 1000) {
            double shape = std::log(static_cast<double>(s.t));
            shape = shape * shape / static_cast<double>(s.t);
            if (K < 0.0)
                K = gap / shape;
            else if (gap > K * shape * (1.0 + 1e-9) + 1e-9)  // 1e-9 floor: converged
                ++rate_violations;                           // gaps sit at round-off
        }
    }
    std::ostringstream d;
    d << "final_nonsep_gap=" << final_gap << " omega=" << opt.strong_convexity_omega
      << " envelope_violations=" << envelope_violations << " rate_K=" << K
      << " rate_violations=" << rate_violations;
    res.detail = d.str();
    res.verdict = (final_gap >= 0.0 && final_gap < 1e-2 && envelope_violations == 0 &&
                   rate_violations == 0)
                      ? Verdict::Pass
                      : Verdict::Fail;
    return res;
}

CheckResult check_prop3path(const std::vector<PathPoint>& path, std::optional<double> gamma_star) {
    CheckResult res{CheckKind::Prop3Path};
    if (path.empty()) {
        res.verdict = Verdict::Inapplicable;
        res.detail = "no lambda schedule configured";
        return res;
    }
    bool nondecreasing = true;
    for (std::size_t k = 1; k < path.size(); ++k)
        if (path[k].gamma_tilde < path[k - 1].gamma_tilde - 1e-3) nondecreasing = false;
    double final_gamma = path.back().gamma_tilde;
    bool reaches = !gamma_star || final_gamma >= 0.95 * *gamma_star;
    std::ostringstream d;
    d << "final_gamma=" << final_gamma << " nondecreasing=" << (nondecreasing ? 1 : 0);
    if (gamma_star) d << " gamma_star=" << *gamma_star;
    res.detail = d.str();
    res.verdict = (nondecreasing && reaches) ? Verdict::Pass : Verdict::Fail;
    return res;
}

struct Theorem1Outcome {
    CheckResult result{CheckKind::Theorem1};
    GammaSweep sweep;
};

Theorem1Outcome check_theorem1(const GeneratedData& gen, const Predictor& pred, const Vector& theta,
                               const GeneratorSpec& g, unsigned seed) {
    Theorem1Outcome out;
    CheckResult& res = out.result;
    if (!gen.data.has_ratios() || !gen.pair || !gen.theta_true) {
        res.verdict = Verdict::Inapplicable;
        res.detail = "density ratios unavailable for this generator";
        return out;
    }
    const double C = g.truncation_radius;
    out.sweep = optimal_gamma_sweep(gen.data, pred, theta, 0.05, *gen.pair, C);

    // Monte Carlo target error on fresh truncated target samples
    std::mt19937_64 rng(seed + 0x51ed2701u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const long m = 10000;
    long errors = 0;
    for (long j = 0; j < m; ++j) {
        Vector x(g.d);
        do {
            for (Eigen::Index i = 0; i < g.d; ++i)
                x(i) = gen.pair->target.mean(i) + g.sigma * gauss(rng);
        } while (x.norm() > g.truncation_radius || std::abs(gen.theta_true->dot(x)) < 0.05);
        double y = gen.theta_true->dot(x) > 0 ? 1.0 : -1.0;
        if (y * pred.forward(theta, x.transpose()) <= 0.0) ++errors;
    }
    double mc_error = static_cast<double>(errors) / static_cast<double>(m);

    int violations = 0;
    for (const auto& r : out.sweep.curve)
        if (r.total < mc_error) ++violations;

    double smallest_pos = std::numeric_limits<double>::infinity();
    double scale = std::pow(theta.norm(), pred.alpha());
    for (Eigen::Index i = 0; i < gen.data.size(); ++i) {
        double mgn = gen.data.label(i) * pred.forward(theta, gen.data.sample(i)) / scale;
        if (mgn > 0.0) smallest_pos = std::min(smallest_pos, mgn);
    }

    std::ostringstream d;
    d << "mc_target_error=" << mc_error << " bound_violations=" << violations
      << " gamma_opt=" << out.sweep.gamma_opt << " total_at_opt=" << out.sweep.total_at_opt
      << " smallest_pos_margin=" << smallest_pos << " chi2=" << gen.pair->chi2;
    res.detail = d.str();
    res.verdict = violations == 0 ? Verdict::Pass : Verdict::Fail;
    return out;
}

CheckResult check_envelope(const Trajectory& traj, const ScenarioSpec& spec) {
    CheckResult res{CheckKind::Envelope};
    if (spec.mlp || spec.train.lambda != 0.0 || spec.train.snapshot_every != 1) {
        res.verdict = Verdict::Inapplicable;
        res.detail = "needs linear predictor, lambda=0, snapshot_every=1";
        return res;
    }
    EnvelopeReport rep = boosting_envelope_check(traj);
    std::ostringstream d;
    if (!rep.applicable) {
        res.verdict = Verdict::Inapplicable;
        res.detail = "a_t exceeded 1 during the run";
        return res;
    }
    d << "violations=" << rep.violations.size() << " max_violation=" << rep.max_violation;
    res.detail = d.str();
    res.verdict = rep.violations.empty() ? Verdict::Pass : Verdict::Fail;
    return res;
}

void write_two_column(const std::string& path, const std::vector<std::pair<double, double>>& rows) {
    std::ofstream out(path);
    out << std::setprecision(17);
    for (auto& [a, b] : rows) out << a << " " << b << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// scenario orchestration

RunArtifacts run_scenario(const ScenarioSpec& spec) {
    fs::create_directories(spec.out_dir);
    RunArtifacts art;
    std::ostringstream report;
    report.precision(12);
    report << "[scenario]\nid = " << spec.id << "\nseed = " << spec.seed << "\n\n";

    GeneratedData gen = generate_data(spec, spec.seed);
    gen.data.save_csv(spec.out_dir + "/data.csv");
    WeightVector w = make_weights(spec, gen, spec.seed);
    auto pred = make_predictor(spec, gen.data.dim());

    TrainAttachments attach;
    std::optional<MarginCertificate> cert;
    std::optional<SeparabilitySplit> split;
    std::optional<RestrictedOptimum> restricted;

    auto record = [&](CheckResult r) {
        report << "[check " << check_name(r.kind) << "]\nverdict = " << verdict_name(r.verdict)
               << "\n" << r.detail << "\n\n";
        if (r.verdict == Verdict::Fail) ++art.fail_count;
        art.results.push_back(std::move(r));
    };
    auto record_error = [&](CheckKind k, const std::string& what) {
        CheckResult r{k, Verdict::Error, what};
        record(std::move(r));
    };

    bool needs_cert = spec.checks.count(CheckKind::Prop1) || spec.checks.count(CheckKind::Claim1) ||
                      spec.checks.count(CheckKind::Prop3Path);
    if (!spec.mlp && needs_cert) {
        try {
            cert = max_margin_linear(gen.data);
            report << certificate_report(*cert) << "\n";
            if (cert->separable) attach.certificate = cert;
        } catch (const std::exception& e) {
            report << "[certificate]\nerror = " << e.what() << "\n\n";
        }
    }
    if (spec.checks.count(CheckKind::Prop2)) {
        try {
            split = maximal_separable_subset(gen.data);
            report << split_report(*split) << "\n";
            if (!split->nonsep_indices.empty()) {
                restricted = nonsep_optimum(gen.data, split->nonsep_indices, w, spec.train.loss,
                                            gen.data.size());
                attach.nonsep_basis = span_basis(gen.data, split->nonsep_indices);
                attach.theta_tilde = restricted->theta_tilde;
            }
        } catch (const std::exception& e) {
            report << "[separability_split]\nerror = " << e.what() << "\n\n";
        }
    }

    std::optional<Trajectory> traj;
    try {
        traj = train(*pred, gen.data, w, spec.train, attach);
        art.trajectory_csv = spec.out_dir + "/trajectory.csv";
        save_trajectory_csv(*traj, art.trajectory_csv);
        save_parameters(*pred, traj->final_theta, spec.out_dir + "/params.txt");
    } catch (const DivergenceError& e) {
        report << "[train]\nerror = " << e.what() << "\nlast_valid_t = " << e.last_valid.t
               << "\n\n";
    }

    std::vector<PathPoint> path;
    if (!spec.lambda_schedule.empty()) {
        try {
            path = weak_reg_path(*pred, gen.data, w, spec.lambda_schedule, spec.train);
            std::ofstream pf(spec.out_dir + "/path.csv");
            pf << std::setprecision(17) << "lambda,gamma_tilde,log_risk\n";
            for (const auto& pt : path)
                pf << pt.lambda << "," << pt.gamma_tilde << "," << pt.log_risk_at_opt << "\n";
        } catch (const std::exception& e) {
            report << "[weak_reg_path]\nerror = " << e.what() << "\n\n";
        }
    }

    for (CheckKind k : spec.checks) {
        try {
            switch (k) {
                case CheckKind::Claim1:
                    if (!traj) record_error(k, "no trajectory");
                    else record(check_claim1(*traj));
                    break;
                case CheckKind::Prop1:
                    if (!traj || !cert) record_error(k, "missing trajectory or certificate");
                    else record(check_prop1(*traj, *cert, w, gen.data.size()));
                    break;
                case CheckKind::Prop2:
                    if (!traj || !restricted) record_error(k, "missing trajectory or restricted optimum");
                    else record(check_prop2(*traj, *restricted));
                    break;
                case CheckKind::Prop3Path: {
                    std::optional<double> gstar;
                    if (cert && cert->separable && !spec.mlp) gstar = cert->gamma_star;
                    record(check_prop3path(path, gstar));
                    break;
                }
                case CheckKind::Theorem1: {
                    if (!traj) {
                        record_error(k, "no trajectory");
                        break;
                    }
                    Theorem1Outcome out =
                        check_theorem1(gen, *pred, traj->final_theta, spec.generator, spec.seed);
                    if (!out.sweep.curve.empty())
                        save_sweep_csv(out.sweep, spec.out_dir + "/bound_curve.csv");
                    record(std::move(out.result));
                    break;
                }
                case CheckKind::Envelope:
                    if (!traj) record_error(k, "no trajectory");
                    else record(check_envelope(*traj, spec));
                    break;
            }
        } catch (const std::exception& e) {
            record_error(k, e.what());
        }
    }

    // plot data: two-column files plus a manifest
    if (traj) {
        std::vector<std::pair<double, double>> norm_rows, margin_rows, dirgap_rows, nonsep_rows;
        for (const auto& s : traj->snapshots) {
            norm_rows.emplace_back(static_cast<double>(s.t), s.norm_theta);
            margin_rows.emplace_back(static_cast<double>(s.t), s.gamma_tilde);
            if (s.dir_gap) dirgap_rows.emplace_back(static_cast<double>(s.t), *s.dir_gap);
            if (s.nonsep_gap) nonsep_rows.emplace_back(static_cast<double>(s.t), *s.nonsep_gap);
        }
        write_two_column(spec.out_dir + "/plot_norm.dat", norm_rows);
        write_two_column(spec.out_dir + "/plot_margin.dat", margin_rows);
        if (!dirgap_rows.empty()) write_two_column(spec.out_dir + "/plot_dirgap.dat", dirgap_rows);
        if (!nonsep_rows.empty())
            write_two_column(spec.out_dir + "/plot_nonsepgap.dat", nonsep_rows);
        std::ofstream manifest(spec.out_dir + "/plots.manifest");
        manifest << "plot_norm.dat t norm_theta\nplot_margin.dat t gamma_tilde\n";
        if (!dirgap_rows.empty()) manifest << "plot_dirgap.dat t dir_gap\n";
        if (!nonsep_rows.empty()) manifest << "plot_nonsepgap.dat t nonsep_gap\n";
    }

    art.report_text = report.str();
    std::ofstream rf(spec.out_dir + "/report.txt");
    rf << art.report_text;
    return art;
}

// ---------------------------------------------------------------------------
// verify: re-evaluate trajectory-level checks from stored artifacts

namespace {

Trajectory load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open trajectory file: " + path);
    std::string line;
    std::getline(in, line);  // header
    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cells;
        while (std::getline(ss, tok, ',')) cells.push_back(tok);
        while (cells.size() < 10) cells.push_back("");
        Snapshot s;
        s.t = std::stol(cells[0]);
        s.log_risk = std::stod(cells[1]);
        s.norm_theta = std::stod(cells[2]);
        s.gamma_tilde = std::stod(cells[3]);
        s.separated = cells[4] == "1";
        s.a_t = std::stod(cells[5]);
        s.b_t = std::stod(cells[6]);
        s.eta_t = std::stod(cells[7]);
        if (!cells[8].empty()) s.dir_gap = std::stod(cells[8]);
        if (!cells[9].empty()) s.nonsep_gap = std::stod(cells[9]);
        traj.snapshots.push_back(s);
    }
    if (traj.snapshots.empty()) throw StructuralError("trajectory file has no snapshots");
    traj.steps_taken = traj.snapshots.back().t;
    return traj;
}

}  // namespace

RunArtifacts verify_scenario(const ScenarioSpec& spec) {
    RunArtifacts art;
    std::ostringstream report;
    report.precision(12);
    report << "[verify]\nid = " << spec.id << "\n\n";

    GeneratedData gen = generate_data(spec, spec.seed);
    WeightVector w = make_weights(spec, gen, spec.seed);
    auto pred = make_predictor(spec, gen.data.dim());
    Trajectory traj = load_trajectory_csv(spec.out_dir + "/trajectory.csv");
    traj.final_theta = load_parameters(*pred, spec.out_dir + "/params.txt");

    auto record = [&](CheckResult r) {
        report << "[check " << check_name(r.kind) << "]\nverdict = " << verdict_name(r.verdict)
               << "\n" << r.detail << "\n\n";
        if (r.verdict == Verdict::Fail) ++art.fail_count;
        art.results.push_back(std::move(r));
    };

    for (CheckKind k : spec.checks) {
        try {
            switch (k) {
                case CheckKind::Claim1:
                    record(check_claim1(traj));
                    break;
                case CheckKind::Prop1: {
                    MarginCertificate cert = max_margin_linear(gen.data);
                    record(check_prop1(traj, cert, w, gen.data.size()));
                    break;
                }
                case CheckKind::Prop2: {
                    SeparabilitySplit split = maximal_separable_subset(gen.data);
                    RestrictedOptimum opt = nonsep_optimum(gen.data, split.nonsep_indices, w,
                                                           spec.train.loss, gen.data.size());
                    record(check_prop2(traj, opt));
                    break;
                }
                case CheckKind::Envelope:
                    record(check_envelope(traj, spec));
                    break;
                case CheckKind::Theorem1: {
                    Theorem1Outcome out =
                        check_theorem1(gen, *pred, traj.final_theta, spec.generator, spec.seed);
                    record(std::move(out.result));
                    break;
                }
                case CheckKind::Prop3Path: {
                    // monotonicity re-checked from the stored path
                    std::ifstream pf(spec.out_dir + "/path.csv");
                    if (!pf) throw StructuralError("path.csv not found");
                    std::string line;
                    std::getline(pf, line);
                    std::vector<PathPoint> path;
                    while (std::getline(pf, line)) {
                        std::stringstream ss(line);
                        std::string a, b, c;
                        std::getline(ss, a, ',');
                        std::getline(ss, b, ',');
                        std::getline(ss, c, ',');
                        PathPoint pt;
                        pt.lambda = std::stod(a);
                        pt.gamma_tilde = std::stod(b);
                        pt.log_risk_at_opt = std::stod(c);
                        path.push_back(pt);
                    }
                    std::optional<double> gstar;
                    if (!spec.mlp) {
                        MarginCertificate cert = max_margin_linear(gen.data);
                        if (cert.separable) gstar = cert.gamma_star;
                    }
                    record(check_prop3path(path, gstar));
                    break;
                }
            }
        } catch (const std::exception& e) {
            CheckResult r{k, Verdict::Error, e.what()};
            record(std::move(r));
        }
    }
    art.report_text = report.str();
    return art;
}

// ---------------------------------------------------------------------------
// sweep

std::vector<SweepRow> sweep(const std::vector<std::string>& spec_files, int parallelism) {
    std::vector<SweepRow> rows(spec_files.size());
    std::mutex mu;
    std::size_t next = 0;

    auto worker = [&]() {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= spec_files.size()) return;
                idx = next++;
            }
            SweepRow row;
            try {
                ScenarioSpec spec = parse_scenario_file(spec_files[idx]);
                row.id = spec.id;
                RunArtifacts art = run_scenario(spec);
                row.fail_count = art.fail_count;
                std::ostringstream verdicts;
                for (const auto& r : art.results)
                    verdicts << check_name(r.kind) << "=" << verdict_name(r.verdict) << " ";
                row.verdicts = verdicts.str();
                Trajectory traj = load_trajectory_csv(spec.out_dir + "/trajectory.csv");
                row.final_gamma = traj.snapshots.back().gamma_tilde;
                if (traj.snapshots.back().dir_gap) row.final_dir_gap = *traj.snapshots.back().dir_gap;
            } catch (const std::exception& e) {
                row.id = fs::path(spec_files[idx]).stem().string();
                row.fail_count = 1;
                row.verdicts = std::string("ERROR: ") + e.what();
            }
            rows[idx] = std::move(row);
        }
    };

    int threads = std::max(1, parallelism);
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::sort(rows.begin(), rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.id < b.id; });
    return rows;
}

std::string render_sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out.precision(8);
    out << "scenario,final_gamma,final_dir_gap,fails,verdicts\n";
    for (const auto& r : rows)
        out << r.id << "," << r.final_gamma << "," << r.final_dir_gap << "," << r.fail_count << ","
            << r.verdicts << "\n";
    return out.str();
}

}  // namespace marginlab
