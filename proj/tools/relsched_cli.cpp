#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "relsched/certify.hpp"
#include "relsched/experiment.hpp"
#include "relsched/klimov.hpp"
#include "relsched/policy.hpp"

namespace fs = std::filesystem;
using relsched::PolicyKind;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir,
                 std::optional<std::uint64_t> seed, int jobs) {
    relsched::ExperimentConfig config;
    try {
        config = relsched::ExperimentConfig::from_json(read_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (seed) config.seed = *seed;

    relsched::ExperimentResult result = relsched::run_experiment(config, jobs);
    write_file(out_dir / "sweep.csv", result.to_csv());
    write_file(out_dir / "summary.json", result.summary_json());
    write_file(out_dir / "config.json", config.to_json());
    std::cout << "wrote " << (out_dir / "sweep.csv").string() << " ("
              << result.rows.size() << " rows)\n";
    return kExitOk;
}

int cmd_certify(const fs::path& config_path, const fs::path& out_dir,
                std::optional<std::uint64_t> seed, int jobs) {
    relsched::CertifyConfig config;
    try {
        config = relsched::CertifyConfig::from_json(read_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (seed) config.seed = *seed;

    if (config.draining && config.draining->instances == 0 &&
        (!config.average || config.average->instances == 0))
        std::cerr << "warning: zero-instance campaign, report is trivially passing\n";

    relsched::CertifyReport report = relsched::run_certification(config, jobs);
    write_file(out_dir / "certify.json", report.to_json());
    std::cout << "draining: "
              << (config.draining ? (report.draining_passed ? "pass" : "FAIL") : "skipped")
              << ", average: "
              << (config.average ? (report.average_passed ? "pass" : "FAIL") : "skipped")
              << '\n';
    std::cout << "wrote " << (out_dir / "certify.json").string() << '\n';
    return report.all_passed() ? kExitOk : kExitRuntime;
}

int cmd_indices(const fs::path& config_path, const fs::path& out_dir) {
    relsched::ExperimentConfig config;
    try {
        config = relsched::ExperimentConfig::from_json(read_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    relsched::DecodeModel model(config.system);
    relsched::Scheduler scheduler(PolicyKind::RlpaIndex, model);
    write_file(out_dir / "indices.csv",
               relsched::Scheduler::index_table_csv(scheduler.index_table()));

    // Priority order at every sweep grid point, to visualize order changes.
    std::ostringstream orders;
    orders << "grid_value,priority_order\n";
    for (double value : config.sweep.values) {
        relsched::SystemConfig cfg = config.system;
        for (const std::string& path : config.sweep.paths)
            relsched::set_parameter(cfg, path, value);
        relsched::DecodeModel m(cfg);
        relsched::KlimovInstance instance = relsched::build_rlpak(cfg, m);
        relsched::PriorityOrdering ordering = relsched::klimov_ordering(instance);
        orders << value << ",\"";
        for (std::size_t k = 0; k < ordering.order.size(); ++k) {
            if (k) orders << ' ';
            orders << relsched::to_string(instance.labels[ordering.order[k]]);
        }
        orders << "\"\n";
    }
    write_file(out_dir / "priority_orders.csv", orders.str());
    std::cout << "wrote " << (out_dir / "indices.csv").string() << " and "
              << (out_dir / "priority_orders.csv").string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relay-assisted HARQ downlink scheduling toolkit"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 1;

    if (const char* env = std::getenv("RELSCHED_OUT")) out_dir = env;
    if (const char* env = std::getenv("RELSCHED_SEED")) seed = std::strtoull(env, nullptr, 10);

    auto add_common = [&](CLI::App* cmd, bool with_jobs) {
        cmd->add_option("config", config_file, "JSON config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "master seed override");
        if (with_jobs) cmd->add_option("--jobs", jobs, "parallel runs")->check(CLI::Range(1, 256));
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run a sweep experiment");
    add_common(simulate, true);
    CLI::App* certify = app.add_subcommand("certify", "run oracle certification campaigns");
    add_common(certify, true);
    CLI::App* indices = app.add_subcommand("indices", "emit priority-index tables");
    add_common(indices, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_file, out_dir, seed, jobs);
        if (certify->parsed()) return cmd_certify(config_file, out_dir, seed, jobs);
        if (indices->parsed()) return cmd_indices(config_file, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
