#include "relsched/experiment.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace relsched {

using nlohmann::json;

namespace {

// Parses "name", "name[i]" or "name[i][j]".
struct ParsedPath {
    std::string name;
    std::vector<int> indices;
};

ParsedPath parse_path(const std::string& path) {
    ParsedPath parsed;
    std::size_t bracket = path.find('[');
    parsed.name = path.substr(0, bracket);
    while (bracket != std::string::npos) {
        std::size_t close = path.find(']', bracket);
        if (close == std::string::npos)
            throw std::invalid_argument("parameter path: unbalanced bracket in " + path);
        parsed.indices.push_back(std::stoi(path.substr(bracket + 1, close - bracket - 1)));
        bracket = path.find('[', close);
    }
    return parsed;
}

double& resolve(SystemConfig& cfg, const std::string& path) {
    ParsedPath p = parse_path(path);
    auto one_dim = [&](std::vector<double>& v) -> double& {
        if (p.indices.size() != 1 || p.indices[0] < 0 ||
            p.indices[0] >= static_cast<int>(v.size()))
            throw std::invalid_argument("parameter path: bad index in " + path);
        return v[p.indices[0]];
    };
    auto two_dim = [&](std::vector<std::vector<double>>& v) -> double& {
        if (p.indices.size() != 2 || p.indices[0] < 0 ||
            p.indices[0] >= static_cast<int>(v.size()) || p.indices[1] < 0 ||
            p.indices[1] >= static_cast<int>(v[p.indices[0]].size()))
            throw std::invalid_argument("parameter path: bad index in " + path);
        return v[p.indices[0]][p.indices[1]];
    };
    if (p.name == "arrival_rates") return one_dim(cfg.arrival_rates);
    if (p.name == "eta_bs_user") return one_dim(cfg.eta_bs_user);
    if (p.name == "eta_bs_relay") return one_dim(cfg.eta_bs_relay);
    if (p.name == "eta_relay_user") return two_dim(cfg.eta_relay_user);
    if (p.name == "cost_rates") return two_dim(cfg.cost_rates);
    if (p.name == "decode_decay" && p.indices.empty()) return cfg.decode_decay;
    throw std::invalid_argument("parameter path: unknown field " + path);
}

}  // namespace

void set_parameter(SystemConfig& cfg, const std::string& path, double value) {
    resolve(cfg, path) = value;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json doc = json::parse(text);
    ExperimentConfig cfg;
    cfg.schema_version = doc.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw std::invalid_argument("experiment config: unsupported schema_version");

    const json& sys = doc.at("system");
    cfg.system.num_users = sys.at("num_users").get<int>();
    cfg.system.num_relays = sys.at("num_relays").get<int>();
    cfg.system.arrival_rates = sys.at("arrival_rates").get<std::vector<double>>();
    cfg.system.retx_limits = sys.at("retx_limits").get<std::vector<int>>();
    cfg.system.cost_rates = sys.at("cost_rates").get<std::vector<std::vector<double>>>();
    cfg.system.eta_bs_user = sys.at("eta_bs_user").get<std::vector<double>>();
    cfg.system.eta_relay_user =
        sys.value("eta_relay_user", std::vector<std::vector<double>>{});
    cfg.system.eta_bs_relay = sys.value("eta_bs_relay", std::vector<double>{});
    cfg.system.decode_decay = sys.value("decode_decay", cfg.system.decode_decay);
    cfg.system.validate();

    const json& sweep = doc.at("sweep");
    cfg.sweep.paths = sweep.at("paths").get<std::vector<std::string>>();
    cfg.sweep.values = sweep.at("values").get<std::vector<double>>();
    if (cfg.sweep.paths.empty() || cfg.sweep.values.empty())
        throw std::invalid_argument("experiment config: empty sweep");
    SystemConfig probe = cfg.system;
    for (const std::string& path : cfg.sweep.paths)
        set_parameter(probe, path, cfg.sweep.values.front());

    for (const std::string& name : doc.at("policies").get<std::vector<std::string>>()) {
        std::optional<PolicyKind> kind = policy_from_string(name);
        if (!kind) throw std::invalid_argument("experiment config: unknown policy " + name);
        cfg.policies.push_back(*kind);
    }
    if (cfg.policies.empty())
        throw std::invalid_argument("experiment config: no policies listed");

    cfg.horizon = doc.value("horizon", cfg.horizon);
    cfg.replications = doc.value("replications", cfg.replications);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.warmup_slots = doc.value("warmup_slots", cfg.warmup_slots);
    if (doc.contains("queue_cap") && !doc["queue_cap"].is_null())
        cfg.queue_cap = doc["queue_cap"].get<int>();
    if (cfg.horizon < 1 || cfg.replications < 1)
        throw std::invalid_argument("experiment config: horizon and replications must be >= 1");
    return cfg;
}

std::string ExperimentConfig::to_json() const {
    json doc;
    doc["schema_version"] = schema_version;
    doc["system"] = {{"num_users", system.num_users},
                     {"num_relays", system.num_relays},
                     {"arrival_rates", system.arrival_rates},
                     {"retx_limits", system.retx_limits},
                     {"cost_rates", system.cost_rates},
                     {"eta_bs_user", system.eta_bs_user},
                     {"eta_relay_user", system.eta_relay_user},
                     {"eta_bs_relay", system.eta_bs_relay},
                     {"decode_decay", system.decode_decay}};
    doc["sweep"] = {{"paths", sweep.paths}, {"values", sweep.values}};
    doc["policies"] = json::array();
    for (PolicyKind kind : policies) doc["policies"].push_back(to_string(kind));
    doc["horizon"] = horizon;
    doc["replications"] = replications;
    doc["seed"] = seed;
    doc["warmup_slots"] = warmup_slots;
    if (queue_cap)
        doc["queue_cap"] = *queue_cap;
    else
        doc["queue_cap"] = nullptr;
    return doc.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& config, int jobs) {
    ExperimentResult result;
    result.config = config;

    int grid = static_cast<int>(config.sweep.values.size());
    int policies = static_cast<int>(config.policies.size());
    int total = grid * policies * config.replications;
    result.rows.resize(total);

    auto body = [&](int row) {
        int rep = row % config.replications;
        int p = (row / config.replications) % policies;
        int g = row / (config.replications * policies);

        ExperimentRow& out = result.rows[row];
        out.grid_value = config.sweep.values[g];
        out.policy = config.policies[p];
        out.replication = rep;
        out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(row));

        SimRun run_spec;
        run_spec.config = config.system;
        for (const std::string& path : config.sweep.paths)
            set_parameter(run_spec.config, path, out.grid_value);
        run_spec.policy = out.policy;
        run_spec.horizon = config.horizon;
        run_spec.seed = out.seed;
        run_spec.queue_cap = config.queue_cap;
        run_spec.warmup_slots = config.warmup_slots;
        out.metrics = run(run_spec);
    };

    if (jobs <= 1) {
        for (int row = 0; row < total; ++row) body(row);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (int row = next++; row < total; row = next++) body(row);
            });
        for (auto& worker : workers) worker.join();
    }
    return result;
}

std::string ExperimentResult::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "grid_value,policy,avg_cost,throughput,D,B,dropped,seed\n";
    for (const auto& row : rows) {
        out << row.grid_value << ',' << to_string(row.policy) << ',' << row.metrics.avg_cost
            << ',' << row.metrics.throughput << ',' << row.metrics.decoded << ','
            << row.metrics.slots << ','
            << row.metrics.dropped_retx + row.metrics.dropped_cap << ',' << row.seed << '\n';
    }
    return out.str();
}

std::string ExperimentResult::summary_json() const {
    struct Cell {
        std::vector<double> costs;
        std::vector<double> throughputs;
    };
    std::map<std::pair<double, PolicyKind>, Cell> cells;
    for (const auto& row : rows) {
        Cell& cell = cells[{row.grid_value, row.policy}];
        cell.costs.push_back(row.metrics.avg_cost);
        cell.throughputs.push_back(row.metrics.throughput);
    }

    auto stats = [](const std::vector<double>& values) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        double ci = 0.0;
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            ci = 1.96 * std::sqrt(ss / (values.size() - 1)) / std::sqrt(double(values.size()));
        }
        return json{{"mean", mean}, {"ci95", ci}};
    };

    json points = json::array();
    for (const auto& [key, cell] : cells)
        points.push_back(json{{"grid_value", key.first},
                              {"policy", to_string(key.second)},
                              {"replications", cell.costs.size()},
                              {"avg_cost", stats(cell.costs)},
                              {"throughput", stats(cell.throughputs)}});
    json doc;
    doc["points"] = points;
    return doc.dump(2);
}

}  // namespace relsched
