#include "atebench/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "atebench/errors.hpp"
#include "atebench/ges.hpp"
#include "atebench/graph_io.hpp"
#include "atebench/parallel.hpp"
#include "atebench/pc.hpp"
#include "atebench/random.hpp"
#include "atebench/text.hpp"

namespace atebench {

void validate(const PosteriorSample& sample) {
    if (sample.dags.empty()) throw ValidationError("posterior sample is empty");
    if (sample.dags.size() != sample.weights.size())
        throw ValidationError("posterior sample has " + std::to_string(sample.dags.size()) + " DAGs but " +
                              std::to_string(sample.weights.size()) + " weights");
    double total = 0.0;
    for (double w : sample.weights) {
        if (!(w > 0) || !std::isfinite(w)) throw ValidationError("posterior weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) throw ValidationError("posterior weights do not sum to 1");
    const auto& labels = sample.dags.front().labels();
    for (const auto& g : sample.dags)
        if (!(g.labels() == labels)) throw SchemaError("posterior DAGs disagree on node labels");
}

PosteriorSample uniform_posterior(std::vector<Dag> dags, std::string method_tag, std::uint64_t seed) {
    PosteriorSample s;
    const double w = dags.empty() ? 0.0 : 1.0 / static_cast<double>(dags.size());
    s.weights.assign(dags.size(), w);
    s.dags = std::move(dags);
    s.method_tag = std::move(method_tag);
    s.seed = seed;
    return s;
}

std::string to_string(DiscoveryMethod m) { return m == DiscoveryMethod::pc ? "bootstrap-pc" : "bootstrap-ges"; }

Dataset resample_rows(const Dataset& data, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, data.rows() - 1);
    Dataset out;
    out.values.resize(data.rows(), data.cols());
    for (int r = 0; r < data.rows(); ++r) out.values.row(r) = data.values.row(pick(rng));
    out.column_labels = data.column_labels;
    out.provenance = data.provenance + ":bootstrap";
    return out;
}

Dag relaxed_extension(const Cpdag& p) {
    const auto order = *topological_order(p.directed());
    std::vector<int> rank(p.size());
    for (int i = 0; i < p.size(); ++i) rank[order[i]] = i;
    BoolMatrix adj = p.directed();
    for (int a = 0; a < p.size(); ++a)
        for (int b : to_node_set(p.undirected().row(a)))
            if (rank[a] < rank[b]) adj.set(a, b);
    return Dag(p.labels(), std::move(adj));
}

BootstrapResult bootstrap(DiscoveryMethod method, const Dataset& data, int m, std::uint64_t seed,
                          const BootstrapOptions& options) {
    if (m < 1) throw ParameterError("bootstrap needs m >= 1");
    validate(data);
    validate(options.ci);
    const auto rep_count = static_cast<std::size_t>(m);
    std::vector<Dag> dags(rep_count);
    std::vector<ReplicateDiagnostics> diagnostics(rep_count);

    parallel_for(rep_count, options.workers, [&](std::size_t r) {
        ReplicateDiagnostics& diag = diagnostics[r];
        diag.index = static_cast<int>(r);
        std::string last_error;
        for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
            diag.attempts = attempt + 1;
            const Dataset resampled = resample_rows(data, derive_seed(seed, {r, static_cast<std::uint64_t>(attempt)}));
            Cpdag learned;
            try {
                if (method == DiscoveryMethod::pc) {
                    auto res = pc_search(resampled, options.ci);
                    diag.ci_tests = res.ci_tests;
                    diag.conflicts = static_cast<int>(res.conflicts.size());
                    learned = std::move(res.cpdag);
                } else {
                    auto res = ges_search(resampled);
                    diag.score = res.score;
                    learned = std::move(res.cpdag);
                }
            } catch (const DegenerateDataError& e) {
                last_error = e.what();
                continue;
            }
            try {
                dags[r] = consistent_extension(learned, derive_seed(seed, {r, 0xe87e5105ULL}));
            } catch (const ExtensionError&) {
                dags[r] = relaxed_extension(learned);
                diag.relaxed_extension = true;
            }
            return;
        }
        throw DiscoveryError("bootstrap replicate " + std::to_string(r) + " failed after " +
                             std::to_string(options.max_attempts) + " draws: " + last_error);
    });

    BootstrapResult out;
    out.sample = uniform_posterior(std::move(dags), to_string(method), seed);
    out.diagnostics = std::move(diagnostics);
    return out;
}

// ---------------------------------------------------------------------------
// External posteriors

namespace {

struct ManifestRow {
    std::string file;
    std::optional<double> weight;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<ManifestRow> rows;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line, ',');
        if (!header_seen) {
            header_seen = true;
            if (trim(cells[0]) == "file") continue;
        }
        ManifestRow row{trim(cells[0]), std::nullopt};
        if (cells.size() > 2) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": too many fields");
        if (cells.size() == 2) {
            row.weight = parse_double(cells[1]);
            if (!row.weight) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad weight");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Dag load_single_dag(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open posterior graph " + file.string());
    return to_dag(parse_edge_list(in, file.string()), file.string());
}

void finalize_weights(std::vector<std::optional<double>> raw, const std::string& source, ExternalPosterior& out) {
    const bool any = std::any_of(raw.begin(), raw.end(), [](const auto& w) { return w.has_value(); });
    const bool all = std::all_of(raw.begin(), raw.end(), [](const auto& w) { return w.has_value(); });
    const std::size_t m = raw.size();
    if (!any) {
        out.sample.weights.assign(m, 1.0 / static_cast<double>(m));
        return;
    }
    if (!all) throw SchemaError(source + ": weights given for some graphs but not all");
    double total = 0.0;
    out.sample.weights.clear();
    for (const auto& w : raw) {
        if (!(*w > 0) || !std::isfinite(*w)) throw ValidationError(source + ": weights must be positive");
        out.sample.weights.push_back(*w);
        total += *w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) {
        out.warnings.push_back(source + ": weights sum to " + format_double(total) + "; normalized");
        for (double& w : out.sample.weights) w /= total;
    }
}

}  // namespace

ExternalPosterior load_external_posterior(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    ExternalPosterior out;
    out.sample.method_tag = "external:" + path.filename().string();
    std::vector<std::optional<double>> raw_weights;

    if (fs::is_directory(path)) {
        const fs::path manifest = path / kManifestName;
        if (fs::exists(manifest)) {
            for (const auto& row : read_manifest(manifest)) {
                out.sample.dags.push_back(load_single_dag(path / row.file));
                raw_weights.push_back(row.weight);
            }
        } else {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(path)) {
                const auto name = entry.path().filename().string();
                if (entry.is_regular_file() && !name.empty() && name[0] != '.') files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                out.sample.dags.push_back(load_single_dag(f));
                raw_weights.emplace_back();
            }
        }
    } else if (fs::is_regular_file(path)) {
        std::ifstream in(path);
        auto graphs = parse_edge_lists(in, path.string());
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            out.sample.dags.push_back(to_dag(graphs[i], path.string() + " (graph " + std::to_string(i + 1) + ")"));
            raw_weights.push_back(graphs[i].weight);
        }
    } else {
        throw ValidationError("posterior path " + path.string() + " does not exist");
    }
    if (out.sample.dags.empty()) throw ValidationError("posterior at " + path.string() + " contains no graphs");
    const auto& labels = out.sample.dags.front().labels();
    for (const auto& g : out.sample.dags)
        if (!(g.labels() == labels)) throw SchemaError(path.string() + ": graphs disagree on node labels");
    finalize_weights(std::move(raw_weights), path.string(), out);
    validate(out.sample);
    return out;
}

void write_dag_directory(const std::filesystem::path& dir, const std::vector<Dag>& dags,
                         const std::vector<double>& weights) {
    if (dags.size() != weights.size()) throw ParameterError("one weight per DAG required");
    std::filesystem::create_directories(dir);
    std::string manifest = "# members=" + std::to_string(dags.size()) + "\nfile,weight\n";
    for (std::size_t i = 0; i < dags.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "dag_%06zu.graph", i);
        write_dag(dir / name, dags[i]);
        manifest += std::string(name) + "," + format_double(weights[i]) + "\n";
    }
    write_file_atomic(dir / kManifestName, manifest);
}

std::string format_posterior(const PosteriorSample& sample) {
    std::string out = "# method=" + sample.method_tag + " seed=" + std::to_string(sample.seed) +
                      " graphs=" + std::to_string(sample.dags.size()) + "\n";
    for (std::size_t i = 0; i < sample.dags.size(); ++i) {
        std::string body = format_edge_list(sample.dags[i]);
        auto nl = body.find('\n');
        out += body.substr(0, nl + 1);
        out += "weight: " + format_double(sample.weights[i]) + "\n";
        out += body.substr(nl + 1);
    }
    return out;
}

void write_posterior(const std::filesystem::path& path, const PosteriorSample& sample) {
    write_file_atomic(path, format_posterior(sample));
}

}  // namespace atebench
