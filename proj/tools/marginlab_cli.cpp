// marginlab command line: scenario generation, training, verification,
// sweeps, and report re-rendering over flat key-value scenario files.

#include "marginlab/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace marginlab;

namespace {

int clamp_exit(int fails) { return std::min(fails, 125); }

int cmd_gen(const std::string& spec_path, long seed_override, const std::string& out_dir) {
    ScenarioSpec spec = parse_scenario_file(spec_path);
    if (seed_override >= 0) spec.seed = static_cast<unsigned>(seed_override);
    if (!out_dir.empty()) spec.out_dir = out_dir;
    fs::create_directories(spec.out_dir);
    GeneratedData gen = generate_data(spec, spec.seed);
    std::string path = spec.out_dir + "/data.csv";
    gen.data.save_csv(path);
    std::cout << "wrote " << path << " (n=" << gen.data.size() << ", d=" << gen.data.dim() << ")\n";
    if (gen.gamma_plant) std::cout << "planted gamma* = " << *gen.gamma_plant << "\n";
    if (gen.pair) std::cout << "chi2 = " << gen.pair->chi2 << "\n";
    return 0;
}

int cmd_train(const std::string& spec_path) {
    ScenarioSpec spec = parse_scenario_file(spec_path);
    RunArtifacts art = run_scenario(spec);
    std::cout << art.report_text;
    return clamp_exit(art.fail_count);
}

int cmd_verify(const std::string& spec_path) {
    ScenarioSpec spec = parse_scenario_file(spec_path);
    RunArtifacts art = verify_scenario(spec);
    std::cout << art.report_text;
    return clamp_exit(art.fail_count);
}

int cmd_sweep(const std::string& listfile, int jobs) {
    std::ifstream in(listfile);
    if (!in) {
        std::cerr << "cannot open sweep list: " << listfile << "\n";
        return 1;
    }
    std::vector<std::string> files;
    std::string line;
    fs::path base = fs::path(listfile).parent_path();
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        fs::path p(line);
        files.push_back(p.is_absolute() ? p.string() : (base / p).string());
    }
    auto rows = sweep(files, jobs);
    std::cout << render_sweep_table(rows);
    int fails = 0;
    for (const auto& r : rows) fails += r.fail_count;
    return clamp_exit(fails);
}

int cmd_report(const std::string& dir) {
    int fails = 0;
    bool found = false;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.path().filename() != "report.txt") continue;
        found = true;
        std::ifstream in(entry.path());
        std::string line;
        std::cout << "== " << entry.path().string() << "\n";
        while (std::getline(in, line)) {
            std::cout << line << "\n";
            if (line == "verdict = FAIL") ++fails;
        }
    }
    if (!found) {
        std::cerr << "no report.txt under " << dir << "\n";
        return 1;
    }
    return clamp_exit(fails);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"marginlab: importance-weighted gradient descent laboratory"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, listfile, report_dir;
    long seed_override = -1;
    int jobs = 1;

    auto* gen = app.add_subcommand("gen", "generate a scenario dataset");
    gen->add_option("spec", spec_path, "scenario file")->required();
    gen->add_option("--seed", seed_override, "seed override");
    gen->add_option("--out", out_dir, "output directory");

    auto* train = app.add_subcommand("train", "run a scenario end to end");
    train->add_option("spec", spec_path, "scenario file")->required();

    auto* verify = app.add_subcommand("verify", "re-check an existing trajectory");
    verify->add_option("spec", spec_path, "scenario file")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "run a list of scenarios");
    sweep_cmd->add_option("listfile", listfile, "file listing scenario files")->required();
    sweep_cmd->add_option("-j,--jobs", jobs, "parallel scenario runs")->default_val(1);

    auto* report = app.add_subcommand("report", "re-render summaries under a directory");
    report->add_option("dir", report_dir, "artifacts directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(spec_path, seed_override, out_dir);
        if (train->parsed()) return cmd_train(spec_path);
        if (verify->parsed()) return cmd_verify(spec_path);
        if (sweep_cmd->parsed()) return cmd_sweep(listfile, jobs);
        if (report->parsed()) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
