#include "fedsched/config.hpp"

#include <fstream>
#include <set>

#include "fedsched/errors.hpp"

namespace fedsched {

using nlohmann::json;

namespace {

// Reads keys out of one section and remembers which ones were consumed so
// leftovers can be reported.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.contains(name_)) return;
        node_ = &doc.at(name_);
        if (!node_->is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        known_.insert(key);
        if (node_ == nullptr || !node_->contains(key)) return;
        try {
            out = node_->at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config " + name_ + "." + key + ": " + e.what());
        }
    }

    void read(const char* key, Range& out) {
        std::vector<double> pair;
        read(key, pair);
        if (node_ == nullptr || !node_->contains(key)) return;
        if (pair.size() != 2) throw ConfigError("config " + name_ + "." + key + " must be [lo, hi]");
        out = {pair[0], pair[1]};
    }

    bool has(const char* key) const { return node_ != nullptr && node_->contains(key); }

    void finish() const {
        if (node_ == nullptr) return;
        for (const auto& [key, value] : node_->items()) {
            if (!known_.count(key)) throw ConfigError("config: unknown key '" + name_ + "." + key + "'");
        }
    }

private:
    std::string name_;
    const json* node_ = nullptr;
    std::set<std::string> known_;
};

DataMode parse_mode(const std::string& s) {
    if (s == "IID") return DataMode::IID;
    if (s == "NONIID") return DataMode::NONIID;
    throw ConfigError("config scenario.mode must be \"IID\" or \"NONIID\"");
}

}  // namespace

std::string to_string(DataMode mode) {
    return mode == DataMode::IID ? "IID" : "NONIID";
}

void ExperimentConfig::validate() const {
    scenario.validate();
    policy.validate();
    pedpc_params().validate(scenario.system);
    if (!(pedpc.v_growth > 0.0)) throw ConfigError("pedpc.v_growth must be positive");
    if (!(pedpc.initial_backlog >= 0.0)) throw ConfigError("pedpc.initial_backlog must be >= 0");
    if (!(barrier.t0 > 0.0) || !(barrier.mu_growth > 1.0) || !(barrier.tol > 0.0) ||
        barrier.max_newton < 1) {
        throw ConfigError("barrier: t0 > 0, mu_growth > 1, tol > 0 and max_newton >= 1 required");
    }
}

PedpcParams ExperimentConfig::pedpc_params() const {
    return pedpc_params(pedpc.v);
}

PedpcParams ExperimentConfig::pedpc_params(double v) const {
    return PedpcParams::geometric(v, pedpc.v_growth, scenario.system.num_frames, pedpc.iter_rounds);
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
    static const std::set<std::string> sections{"system", "scenario", "policy",
                                                "pedpc",  "barrier",  "output"};
    for (const auto& [key, value] : doc.items()) {
        if (!sections.count(key)) throw ConfigError("config: unknown section '" + key + "'");
    }

    ExperimentConfig cfg;
    auto& sys = cfg.scenario.system;

    Section system(doc, "system");
    system.read("num_clients", sys.num_clients);
    system.read("num_rounds", sys.num_rounds);
    system.read("frame_len", sys.frame_len);
    system.read("num_frames", sys.num_frames);
    system.read("bandwidth_hz", sys.bandwidth);
    system.read("min_ratio", sys.min_ratio);
    system.read("noise_power_w", sys.noise_power);
    system.read("accuracy_coeff", sys.accuracy_coeff);
    // With only one of frame_len/num_frames given, derive the other from R.
    if (!system.has("frame_len") && !system.has("num_frames")) {
        sys.num_frames = 1;
        sys.frame_len = sys.num_rounds;
    } else if (!system.has("frame_len") && sys.num_frames > 0) {
        sys.frame_len = sys.num_rounds / sys.num_frames;
    } else if (!system.has("num_frames") && sys.frame_len > 0) {
        sys.num_frames = sys.num_rounds / sys.frame_len;
    }
    system.finish();

    Section scenario(doc, "scenario");
    auto& sc = cfg.scenario;
    scenario.read("seed", sc.seed);
    std::string mode = to_string(sc.mode);
    scenario.read("mode", mode);
    sc.mode = parse_mode(mode);
    scenario.read("cpu_freq_hz", sc.cpu_freq);
    scenario.read("cycles_per_bit", sc.cycles_per_bit);
    scenario.read("tx_power_dbm", sc.tx_power_dbm);
    scenario.read("gain_sq", sc.gain_sq);
    scenario.read("capacitance", sc.capacitance);
    scenario.read("model_size_bits", sc.model_size);
    scenario.read("energy_budget_j", sc.energy_budget);
    scenario.read("local_iters", sc.local_iters);
    scenario.read("iid_data_bits", sc.iid_data_size);
    scenario.read("noniid_data_bits", sc.noniid_data_sizes);
    scenario.finish();

    Section policy(doc, "policy");
    std::string kind = to_string(cfg.policy.kind);
    policy.read("kind", kind);
    cfg.policy.kind = parse_policy_kind(kind);
    policy.read("random_fraction", cfg.policy.random_fraction);
    policy.read("latency_cap_s", cfg.policy.latency_cap);
    policy.finish();

    Section pedpc(doc, "pedpc");
    pedpc.read("v", cfg.pedpc.v);
    pedpc.read("v_growth", cfg.pedpc.v_growth);
    pedpc.read("iter_rounds", cfg.pedpc.iter_rounds);
    pedpc.read("initial_backlog", cfg.pedpc.initial_backlog);
    pedpc.finish();

    Section barrier(doc, "barrier");
    barrier.read("t0", cfg.barrier.t0);
    barrier.read("mu_growth", cfg.barrier.mu_growth);
    barrier.read("tol", cfg.barrier.tol);
    barrier.read("max_newton", cfg.barrier.max_newton);
    barrier.finish();

    Section output(doc, "output");
    output.read("dir", cfg.output.dir);
    output.finish();

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    const auto& s = c.scenario;
    const auto& sys = s.system;
    return json{
        {"system",
         {{"num_clients", sys.num_clients},
          {"num_rounds", sys.num_rounds},
          {"frame_len", sys.frame_len},
          {"num_frames", sys.num_frames},
          {"bandwidth_hz", sys.bandwidth},
          {"min_ratio", sys.min_ratio},
          {"noise_power_w", sys.noise_power},
          {"accuracy_coeff", sys.accuracy_coeff}}},
        {"scenario",
         {{"seed", s.seed},
          {"mode", to_string(s.mode)},
          {"cpu_freq_hz", {s.cpu_freq.lo, s.cpu_freq.hi}},
          {"cycles_per_bit", {s.cycles_per_bit.lo, s.cycles_per_bit.hi}},
          {"tx_power_dbm", {s.tx_power_dbm.lo, s.tx_power_dbm.hi}},
          {"gain_sq", {s.gain_sq.lo, s.gain_sq.hi}},
          {"capacitance", s.capacitance},
          {"model_size_bits", s.model_size},
          {"energy_budget_j", s.energy_budget},
          {"local_iters", s.local_iters},
          {"iid_data_bits", s.iid_data_size},
          {"noniid_data_bits", s.noniid_data_sizes}}},
        {"policy",
         {{"kind", to_string(c.policy.kind)},
          {"random_fraction", c.policy.random_fraction},
          {"latency_cap_s", c.policy.latency_cap}}},
        {"pedpc",
         {{"v", c.pedpc.v},
          {"v_growth", c.pedpc.v_growth},
          {"iter_rounds", c.pedpc.iter_rounds},
          {"initial_backlog", c.pedpc.initial_backlog}}},
        {"barrier",
         {{"t0", c.barrier.t0},
          {"mu_growth", c.barrier.mu_growth},
          {"tol", c.barrier.tol},
          {"max_newton", c.barrier.max_newton}}},
        {"output", {{"dir", c.output.dir}}},
    };
}

}  // namespace fedsched
