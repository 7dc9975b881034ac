#include "atebench/graph_io.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include "atebench/errors.hpp"
#include "atebench/text.hpp"

namespace atebench {

namespace {

int lookup(const NodeLabels& labels, const std::string& name, const std::string& where) {
    int idx = labels.index_of(name);
    if (idx < 0) throw SchemaError(where + ": unknown node '" + name + "'");
    return idx;
}

}  // namespace

std::vector<EdgeListGraph> parse_edge_lists(std::istream& in, const std::string& source) {
    std::vector<EdgeListGraph> graphs;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const std::string where = source + ":" + std::to_string(line_no);

        if (starts_with(line, "nodes:")) {
            std::vector<std::string> names;
            for (auto& part : split(line.substr(6), ',')) names.push_back(trim(part));
            try {
                graphs.push_back(EdgeListGraph{NodeLabels(std::move(names)), {}, {}, std::nullopt});
            } catch (const StructuralError& e) {
                throw SchemaError(where + ": " + e.what());
            }
            continue;
        }
        if (graphs.empty()) throw SchemaError(where + ": expected a 'nodes:' header first");
        auto& g = graphs.back();

        if (starts_with(line, "weight:")) {
            auto w = parse_double(trim(line.substr(7)));
            if (!w) throw SchemaError(where + ": bad weight");
            g.weight = *w;
            continue;
        }
        bool directed = true;
        auto pos = line.find("->");
        if (pos == std::string::npos) {
            pos = line.find("--");
            directed = false;
        }
        if (pos == std::string::npos) throw SchemaError(where + ": expected 'a -> b' or 'a -- b'");
        int a = lookup(g.labels, trim(line.substr(0, pos)), where);
        int b = lookup(g.labels, trim(line.substr(pos + 2)), where);
        if (a == b) throw ValidationError(where + ": self-loop on '" + g.labels[a] + "'");
        (directed ? g.directed : g.undirected).emplace_back(a, b);
    }
    return graphs;
}

EdgeListGraph parse_edge_list(std::istream& in, const std::string& source) {
    auto graphs = parse_edge_lists(in, source);
    if (graphs.size() != 1)
        throw SchemaError(source + ": expected exactly one graph, found " + std::to_string(graphs.size()));
    return std::move(graphs.front());
}

Dag to_dag(const EdgeListGraph& g, const std::string& source) {
    if (!g.undirected.empty()) throw ValidationError(source + ": undirected edge in a DAG file");
    BoolMatrix adj(g.labels.size());
    for (auto [a, b] : g.directed) adj.set(a, b);
    try {
        return Dag(g.labels, std::move(adj));
    } catch (const StructuralError& e) {
        throw ValidationError(source + ": " + e.what());
    }
}

Cpdag to_cpdag(const EdgeListGraph& g, const std::string& source) {
    const int d = g.labels.size();
    BoolMatrix directed(d), undirected(d);
    for (auto [a, b] : g.directed) directed.set(a, b);
    for (auto [a, b] : g.undirected) {
        undirected.set(a, b);
        undirected.set(b, a);
    }
    try {
        return Cpdag(g.labels, std::move(directed), std::move(undirected));
    } catch (const StructuralError& e) {
        throw ValidationError(source + ": " + e.what());
    }
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    return in;
}

}  // namespace

Dag read_dag(const std::filesystem::path& path) {
    auto in = open_input(path);
    return to_dag(parse_edge_list(in, path.string()), path.string());
}

Cpdag read_cpdag(const std::filesystem::path& path) {
    auto in = open_input(path);
    return to_cpdag(parse_edge_list(in, path.string()), path.string());
}

namespace {

std::string header(const NodeLabels& labels) {
    std::string out = "nodes: ";
    for (int i = 0; i < labels.size(); ++i) {
        if (i) out += ',';
        out += labels[i];
    }
    return out + '\n';
}

}  // namespace

std::string format_edge_list(const Dag& g) {
    std::string out = header(g.labels());
    for (int i = 0; i < g.size(); ++i)
        for (int j : children(g, i)) out += g.labels()[i] + " -> " + g.labels()[j] + '\n';
    return out;
}

std::string format_edge_list(const Cpdag& p) {
    std::string out = header(p.labels());
    for (int i = 0; i < p.size(); ++i)
        for (int j = 0; j < p.size(); ++j) {
            if (p.has_directed(i, j)) out += p.labels()[i] + " -> " + p.labels()[j] + '\n';
            if (i < j && p.has_undirected(i, j)) out += p.labels()[i] + " -- " + p.labels()[j] + '\n';
        }
    return out;
}

void write_dag(const std::filesystem::path& path, const Dag& g) { write_file_atomic(path, format_edge_list(g)); }

}  // namespace atebench
