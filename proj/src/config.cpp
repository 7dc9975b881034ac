#include "atebench/config.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "atebench/errors.hpp"
#include "atebench/parallel.hpp"
#include "atebench/text.hpp"

namespace atebench {

McmcConfig ExperimentConfig::mcmc(std::uint64_t seed) const {
    McmcConfig c;
    c.steps = mcmc_steps;
    c.burn_in = mcmc_burn_in;
    c.thin = mcmc_thin.value_or(std::max(1L, (mcmc_steps - mcmc_burn_in) / std::max(1, posterior_size)));
    c.seed = seed;
    return c;
}

CiTestConfig ExperimentConfig::ci_test(int num_variables) const {
    CiTestConfig c = ci;
    if (c.max_condition_size < 0 && num_variables > 11) c.max_condition_size = 3;
    return c;
}

namespace {

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
    bool in_digest = true;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw ConfigError("invalid value '" + value + "' for " + key);
}

long long to_int(const std::string& key, const std::string& value) {
    auto v = parse_int(value);
    if (!v) bad_value(key, value);
    return *v;
}

double to_real(const std::string& key, const std::string& value) {
    auto v = parse_double(value);
    if (!v) bad_value(key, value);
    return *v;
}

bool is_auto(const std::string& v) { return v == "auto"; }

template <typename T>
std::string opt_text(const std::optional<T>& v) {
    if (!v) return "auto";
    if constexpr (std::is_floating_point_v<T>) return format_double(*v);
    else return std::to_string(*v);
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

std::vector<std::string> list_cells(const std::string& value) {
    std::vector<std::string> out;
    for (const auto& c : split(value, ',')) {
        auto t = trim(c);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"d",
         [](auto& c, const auto& v) { c.d = is_auto(v) ? std::nullopt : std::optional<int>(to_int("d", v)); },
         [](const auto& c) { return opt_text(c.d); }},
        {"n",
         [](auto& c, const auto& v) { c.n = is_auto(v) ? std::nullopt : std::optional<int>(to_int("n", v)); },
         [](const auto& c) { return opt_text(c.n); }},
        {"num_seeds", [](auto& c, const auto& v) { c.num_seeds = static_cast<int>(to_int("num_seeds", v)); },
         [](const auto& c) { return std::to_string(c.num_seeds); }},
        {"posterior_size",
         [](auto& c, const auto& v) { c.posterior_size = static_cast<int>(to_int("posterior_size", v)); },
         [](const auto& c) { return std::to_string(c.posterior_size); }},
        {"methods", [](auto& c, const auto& v) { c.methods = list_cells(v); },
         [](const auto& c) { return join(c.methods); }},
        {"er_expected_edges",
         [](auto& c, const auto& v) {
             c.er_expected_edges = is_auto(v) ? std::nullopt : std::optional<double>(to_real("er_expected_edges", v));
         },
         [](const auto& c) { return opt_text(c.er_expected_edges); }},
        {"weight_low", [](auto& c, const auto& v) { c.weights.low = to_real("weight_low", v); },
         [](const auto& c) { return format_double(c.weights.low); }},
        {"weight_high", [](auto& c, const auto& v) { c.weights.high = to_real("weight_high", v); },
         [](const auto& c) { return format_double(c.weights.high); }},
        {"ci_alpha", [](auto& c, const auto& v) { c.ci.alpha = to_real("ci_alpha", v); },
         [](const auto& c) { return format_double(c.ci.alpha); }},
        {"max_condition_size",
         [](auto& c, const auto& v) {
             c.ci.max_condition_size = is_auto(v) ? -1 : static_cast<int>(to_int("max_condition_size", v));
             if (!is_auto(v) && c.ci.max_condition_size < 0) bad_value("max_condition_size", v);
         },
         [](const auto& c) {
             return c.ci.max_condition_size < 0 ? std::string("auto") : std::to_string(c.ci.max_condition_size);
         }},
        {"mcmc_steps", [](auto& c, const auto& v) { c.mcmc_steps = to_int("mcmc_steps", v); },
         [](const auto& c) { return std::to_string(c.mcmc_steps); }},
        {"mcmc_burn_in", [](auto& c, const auto& v) { c.mcmc_burn_in = to_int("mcmc_burn_in", v); },
         [](const auto& c) { return std::to_string(c.mcmc_burn_in); }},
        {"mcmc_thin",
         [](auto& c, const auto& v) {
             c.mcmc_thin = is_auto(v) ? std::nullopt : std::optional<long>(to_int("mcmc_thin", v));
         },
         [](const auto& c) { return opt_text(c.mcmc_thin); }},
        {"regroup_rtol", [](auto& c, const auto& v) { c.regroup.rtol = to_real("regroup_rtol", v); },
         [](const auto& c) { return format_double(c.regroup.rtol); }},
        {"regroup_atol", [](auto& c, const auto& v) { c.regroup.atol = to_real("regroup_atol", v); },
         [](const auto& c) { return format_double(c.regroup.atol); }},
        {"filter_grid",
         [](auto& c, const auto& v) {
             c.filter_grid.clear();
             for (const auto& cell : list_cells(v)) c.filter_grid.push_back(to_real("filter_grid", cell));
         },
         [](const auto& c) {
             std::vector<std::string> cells;
             for (double t : c.filter_grid) cells.push_back(format_double(t));
             return join(cells);
         }},
        {"treatment_value_a", [](auto& c, const auto& v) { c.treatment_value_a = to_real("treatment_value_a", v); },
         [](const auto& c) { return format_double(c.treatment_value_a); }},
        {"treatment_value_b", [](auto& c, const auto& v) { c.treatment_value_b = to_real("treatment_value_b", v); },
         [](const auto& c) { return format_double(c.treatment_value_b); }},
        {"mec_cap",
         [](auto& c, const auto& v) {
             auto cap = to_int("mec_cap", v);
             if (cap < 1) bad_value("mec_cap", v);
             c.mec_cap = static_cast<std::size_t>(cap);
         },
         [](const auto& c) { return std::to_string(c.mec_cap); }},
        {"workers",
         [](auto& c, const auto& v) {
             if (is_auto(v)) {
                 c.workers = default_workers();
                 return;
             }
             auto w = to_int("workers", v);
             if (w < 1) bad_value("workers", v);
             c.workers = static_cast<unsigned>(w);
         },
         [](const auto& c) { return std::to_string(c.workers); }, false},
        {"output_root", [](auto& c, const auto& v) { c.output_root = v; },
         [](const auto& c) { return c.output_root.string(); }, false},
        {"dataset_path",
         [](auto& c, const auto& v) {
             c.dataset_path = v.empty() || is_auto(v) ? std::nullopt : std::optional<std::filesystem::path>(v);
         },
         [](const auto& c) { return c.dataset_path ? c.dataset_path->string() : std::string("auto"); }},
        {"graph_path",
         [](auto& c, const auto& v) {
             c.graph_path = v.empty() || is_auto(v) ? std::nullopt : std::optional<std::filesystem::path>(v);
         },
         [](const auto& c) { return c.graph_path ? c.graph_path->string() : std::string("auto"); }},
        {"master_seed",
         [](auto& c, const auto& v) {
             auto s = to_int("master_seed", v);
             if (s < 0) bad_value("master_seed", v);
             c.master_seed = static_cast<std::uint64_t>(s);
         },
         [](const auto& c) { return std::to_string(c.master_seed); }},
        {"standardize",
         [](auto& c, const auto& v) {
             if (v == "true" || v == "1") c.standardize = true;
             else if (v == "false" || v == "0") c.standardize = false;
             else bad_value("standardize", v);
         },
         [](const auto& c) { return std::string(c.standardize ? "true" : "false"); }},
    };
    return table;
}

const Field& field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    field(key).set(cfg, trim(value));
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> seen;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no);
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError(where + ": duplicate key '" + key + "'");
        seen.push_back(key);
        try {
            set_config_value(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path), path.string()); }

void validate(const ExperimentConfig& cfg) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    if (cfg.real_data()) {
        require(cfg.graph_path.has_value(), "dataset_path requires graph_path");
        require(!cfg.n || *cfg.n >= 1, "n must be >= 1");
    } else {
        require(!cfg.graph_path, "graph_path requires dataset_path");
        require(cfg.synthetic_d() >= 2 && cfg.synthetic_d() <= kMaxNodes,
                "d must lie in [2, " + std::to_string(kMaxNodes) + "]");
        require(cfg.synthetic_n() >= 1, "n must be >= 1");
        const double pairs = cfg.synthetic_d() * (cfg.synthetic_d() - 1) / 2.0;
        require(cfg.expected_edges() >= 0 && cfg.expected_edges() <= pairs,
                "er_expected_edges must lie in [0, d(d-1)/2]");
    }
    require(cfg.num_seeds >= 1, "num_seeds must be >= 1");
    require(cfg.posterior_size >= 1, "posterior_size must be >= 1");
    require(!cfg.methods.empty(), "methods must not be empty");
    for (const auto& m : cfg.methods)
        require(m == kMethodBootstrapPc || m == kMethodBootstrapGes || m == kMethodStructureMcmc,
                "unknown method '" + m + "'");
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.methods.size(); ++j)
            require(cfg.methods[i] != cfg.methods[j], "method '" + cfg.methods[i] + "' listed twice");
    require(cfg.weights.low > 0 && cfg.weights.low < cfg.weights.high, "need 0 < weight_low < weight_high");
    require(cfg.ci.alpha > 0 && cfg.ci.alpha < 1, "ci_alpha must lie in (0, 1)");
    require(cfg.mcmc_burn_in >= 0, "mcmc_burn_in must be >= 0");
    require(!cfg.mcmc_thin || *cfg.mcmc_thin >= 1, "mcmc_thin must be >= 1");
    if (std::find(cfg.methods.begin(), cfg.methods.end(), kMethodStructureMcmc) != cfg.methods.end()) {
        const auto m = cfg.mcmc(0);
        require(m.steps > m.burn_in && (m.steps - m.burn_in) / m.thin >= 1,
                "mcmc_steps leaves no samples after burn-in and thinning");
    }
    try {
        validate(cfg.regroup);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    for (double t : cfg.filter_grid) require(t >= 0 && t < 1, "filter_grid tolerances must lie in [0, 1)");
    require(std::is_sorted(cfg.filter_grid.begin(), cfg.filter_grid.end()), "filter_grid must be increasing");
    require(std::adjacent_find(cfg.filter_grid.begin(), cfg.filter_grid.end()) == cfg.filter_grid.end(),
            "filter_grid has duplicates");
    require(cfg.treatment_value_a != cfg.treatment_value_b, "treatment values must differ");
    require(cfg.workers >= 1, "workers must be >= 1");
}

std::string format_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
    return out;
}

std::string config_digest(const ExperimentConfig& cfg) {
    std::string canonical;
    for (const auto& f : fields())
        if (f.in_digest) canonical += f.key + "=" + f.get(cfg) + "\n";
    return fnv1a_hex(canonical);
}

}  // namespace atebench
