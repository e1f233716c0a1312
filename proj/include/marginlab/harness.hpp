#pragma once

#include "marginlab/bounds.hpp"
#include "marginlab/dataset.hpp"
#include "marginlab/geometry.hpp"
#include "marginlab/predictor.hpp"
#include "marginlab/trainer.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace marginlab {

enum class GeneratorKind { SymmetricPair, PlantedMargin, ConflictPair, MixedSepNonsep, GaussianShift };
enum class WeightScheme { Uniform, AlignedWithRatios, InvertedRatios, RandomBox, Explicit };
enum class CheckKind { Prop1, Prop2, Prop3Path, Theorem1, Envelope, Claim1 };
enum class Verdict { Pass, Fail, Inapplicable, Error };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::SymmetricPair;
    Eigen::Index n = 2;
    Eigen::Index d = 2;
    double gamma_plant = 0.5;
    double radius = 1.0;            // PlantedMargin sampling ball
    double mu_s = 0.0, mu_t = 0.0;  // GaussianShift means on coordinate 0
    double sigma = 1.0;
    double truncation_radius = 10.0;
};

struct ScenarioSpec {
    std::string id;
    GeneratorSpec generator;
    WeightScheme weight_scheme = WeightScheme::Uniform;
    double weight_M = 1.0;
    std::vector<double> explicit_weights;
    bool mlp = false;
    std::vector<Eigen::Index> mlp_dims;
    Activation activation = Activation::ReLU;
    TrainConfig train;
    std::vector<double> lambda_schedule;
    std::set<CheckKind> checks;
    unsigned seed = 0;
    std::string out_dir = ".";
};

/// Dataset plus whatever the generator knows in closed form.
struct GeneratedData {
    Dataset data;
    std::optional<Vector> theta_plant;
    std::optional<double> gamma_plant;
    std::optional<DensityPair> pair;  // GaussianShift only
    std::optional<Vector> theta_true; // labeling direction, GaussianShift
};

struct CheckResult {
    CheckKind kind;
    Verdict verdict = Verdict::Inapplicable;
    std::string detail;
};

struct RunArtifacts {
    std::string trajectory_csv;
    std::vector<CheckResult> results;
    std::string report_text;
    int fail_count = 0;
};

// flat key-value scenario files: "train.eta0 = 0.1", one key per line,
// '#' comments. MARGINLAB_SEED overrides the seed when set.
ScenarioSpec parse_scenario_file(const std::string& path);
ScenarioSpec parse_scenario_text(const std::string& text, const std::string& id);

GeneratedData generate_data(const ScenarioSpec& spec, unsigned seed);
WeightVector make_weights(const ScenarioSpec& spec, const GeneratedData& gen, unsigned seed);
std::unique_ptr<Predictor> make_predictor(const ScenarioSpec& spec, Eigen::Index d);

RunArtifacts run_scenario(const ScenarioSpec& spec);

/// Re-evaluates the trajectory-level checks against artifacts already in
/// spec.out_dir, without retraining.
RunArtifacts verify_scenario(const ScenarioSpec& spec);

struct SweepRow {
    std::string id;
    double final_gamma = 0.0;
    double final_dir_gap = -1.0;
    int fail_count = 0;
    std::string verdicts;
};

std::vector<SweepRow> sweep(const std::vector<std::string>& spec_files, int parallelism);
std::string render_sweep_table(const std::vector<SweepRow>& rows);

std::string check_name(CheckKind k);
std::string verdict_name(Verdict v);

}  // namespace marginlab
