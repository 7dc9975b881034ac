#include "atebench/ate.hpp"

#include <sstream>

#include "atebench/errors.hpp"
#include "atebench/parallel.hpp"
#include "atebench/text.hpp"

namespace atebench {

namespace {

void check_query(const Dag& g, const AteQuery& q) {
    if (q.treatment < 0 || q.outcome < 0 || q.treatment >= g.size() || q.outcome >= g.size())
        throw ParameterError("ATE query index out of range");
    if (q.treatment == q.outcome) throw ParameterError("treatment and outcome must differ");
}

struct Factorization {
    NodeSet design;  // treatment first, then adjustment set
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    bool ridge = false;
};

// Rank check on the pivoted LDLT diagonal. Eigen's rcond() misses exact zero
// pivots, so the smallest pivot is compared with the largest instead.
constexpr double kMinPivotRatio = 1e-12;

bool well_conditioned(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const auto d = ldlt.vectorD().array();
    return d.minCoeff() > kMinPivotRatio * d.maxCoeff();
}

Factorization factorize(const GramCache& gram, int treatment, const NodeSet& adjustment) {
    Factorization f;
    f.design.push_back(treatment);
    f.design.insert(f.design.end(), adjustment.begin(), adjustment.end());
    const int k = static_cast<int>(f.design.size());
    if (gram.num_samples() < k + 2)
        throw SampleSizeError("ATE regression needs n >= |adjustment set| + 2");
    Eigen::MatrixXd block(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) block(a, b) = gram.gram()(f.design[a], f.design[b]);
    f.ldlt.compute(block);
    if (!well_conditioned(f.ldlt)) {
        block.diagonal().array() += kRidgeLambda;
        f.ldlt.compute(block);
        f.ridge = true;
    }
    return f;
}

double slope(const Factorization& f, const GramCache& gram, int outcome) {
    const int k = static_cast<int>(f.design.size());
    Eigen::VectorXd rhs(k);
    for (int a = 0; a < k; ++a) rhs(a) = gram.gram()(f.design[a], outcome);
    return f.ldlt.solve(rhs)(0);
}

}  // namespace

NodeSet backdoor_adjustment_set(const Dag& g, const AteQuery& q) {
    check_query(g, q);
    return parents(g, q.treatment);
}

GramCache::GramCache(const Dataset& data) : n_(data.rows()), labels_(data.column_labels) {
    validate(data);
    Eigen::MatrixXd centred = data.values.rowwise() - data.values.colwise().mean();
    gram_ = centred.transpose() * centred;
}

AteEstimate estimate_ate(const Dag& g, const GramCache& gram, const AteQuery& q) {
    check_query(g, q);
    if (!(descendants_mask(g, q.treatment) & bit(q.outcome))) return {0.0, false};
    const auto f = factorize(gram, q.treatment, parents(g, q.treatment));
    return {slope(f, gram, q.outcome) * (q.treatment_value_b - q.reference_value_a), f.ridge};
}

double estimate_ate(const Dag& g, const Dataset& data, const AteQuery& q) {
    if (!(g.labels() == data.column_labels)) throw SchemaError("graph labels do not match dataset columns");
    return estimate_ate(g, GramCache(data), q).value;
}

std::size_t pair_index(int d, int treatment, int outcome) {
    return static_cast<std::size_t>(treatment) * (d - 1) + (outcome < treatment ? outcome : outcome - 1);
}

const AteSampleSet& AteSweep::at(int treatment, int outcome) const {
    return sets.at(pair_index(labels.size(), treatment, outcome));
}

AteSweep sweep(std::span<const Dag> dags, std::span<const double> weights, const std::string& source_tag,
               const Dataset& data, const SweepOptions& options) {
    if (dags.empty()) throw ParameterError("sweep needs at least one DAG");
    if (dags.size() != weights.size()) throw ParameterError("sweep needs one weight per DAG");
    for (const auto& g : dags)
        if (!(g.labels() == data.column_labels))
            throw SchemaError("DAG labels do not match dataset columns");
    const GramCache gram(data);
    const int d = data.cols();
    const std::size_t m = dags.size();
    const double contrast = options.treatment_value_b - options.reference_value_a;

    AteSweep out;
    out.labels = data.column_labels;
    out.source_tag = source_tag;
    for (int t = 0; t < d; ++t)
        for (int y = 0; y < d; ++y) {
            if (t == y) continue;
            AteSampleSet s;
            s.query = AteQuery{t, y, options.treatment_value_b, options.reference_value_a};
            s.values.assign(m, 0.0);
            s.weights.assign(weights.begin(), weights.end());
            s.source_tag = source_tag;
            out.sets.push_back(std::move(s));
        }

    std::vector<char> ridge(m, 0);
    parallel_for(m, options.workers, [&](std::size_t k) {
        const Dag& g = dags[k];
        const BoolMatrix reach = reachability(g);
        for (int t = 0; t < d; ++t) {
            const NodeMask desc = reach.row(t);
            if (!desc) continue;
            const auto f = factorize(gram, t, parents(g, t));
            if (f.ridge) ridge[k] = 1;
            for (int y : to_node_set(desc)) out.sets[pair_index(d, t, y)].values[k] = slope(f, gram, y) * contrast;
        }
    });
    for (char r : ridge) out.ridge_fallbacks += r;
    return out;
}

AteSweep sweep(const PosteriorSample& sample, const Dataset& data, const SweepOptions& options) {
    validate(sample);
    return sweep(sample.dags, sample.weights, sample.method_tag, data, options);
}

AteSweep sweep(const MecEnumeration& mec, const Dataset& data, const SweepOptions& options) {
    std::vector<double> w(mec.members.size(), 1.0 / static_cast<double>(mec.members.size()));
    return sweep(mec.members, w, kTrueMecTag, data, options);
}

// ---------------------------------------------------------------------------
// Columnar file

std::string format_ate_samples(const AteSweep& s, const std::string& digest) {
    double a = 0.0, b = 1.0;
    if (!s.sets.empty()) {
        a = s.sets.front().query.reference_value_a;
        b = s.sets.front().query.treatment_value_b;
    }
    std::string out = "# ate-samples source=" + s.source_tag + " digest=" + digest + " a=" + format_double(a) +
                      " b=" + format_double(b) + "\n# nodes: ";
    for (int i = 0; i < s.labels.size(); ++i) {
        if (i) out += ',';
        out += s.labels[i];
    }
    out += "\ntreatment,outcome,dag_index,ate_value,weight\n";
    for (const auto& set : s.sets) {
        const std::string prefix = s.labels[set.query.treatment] + "," + s.labels[set.query.outcome] + ",";
        for (std::size_t k = 0; k < set.values.size(); ++k)
            out += prefix + std::to_string(k) + "," + format_double(set.values[k]) + "," +
                   format_double(set.weights[k]) + "\n";
    }
    return out;
}

void write_ate_samples(const std::filesystem::path& path, const AteSweep& s, const std::string& digest) {
    write_file_atomic(path, format_ate_samples(s, digest));
}

AteSamplesFile read_ate_samples(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    const std::string src = path.string();
    std::string line;
    AteSamplesFile out;

    auto expect = [&](const std::string& prefix) {
        if (!std::getline(in, line) || !starts_with(line, prefix)) throw SchemaError(src + ": expected '" + prefix + "'");
        return line.substr(prefix.size());
    };
    const std::string meta = expect("# ate-samples ");
    SweepOptions values;
    for (const auto& kv : split(meta, ' ')) {
        if (starts_with(kv, "source=")) out.sweep.source_tag = kv.substr(7);
        if (starts_with(kv, "digest=")) out.digest = kv.substr(7);
        if (starts_with(kv, "a=")) values.reference_value_a = parse_double(kv.substr(2)).value_or(0.0);
        if (starts_with(kv, "b=")) values.treatment_value_b = parse_double(kv.substr(2)).value_or(1.0);
    }
    std::vector<std::string> names;
    for (auto& n : split(expect("# nodes: "), ',')) names.push_back(trim(n));
    out.sweep.labels = NodeLabels(names);
    expect("treatment,outcome,dag_index,ate_value,weight");

    const int d = out.sweep.labels.size();
    for (int t = 0; t < d; ++t)
        for (int y = 0; y < d; ++y)
            if (t != y) {
                AteSampleSet s;
                s.query = AteQuery{t, y, values.treatment_value_b, values.reference_value_a};
                s.source_tag = out.sweep.source_tag;
                out.sweep.sets.push_back(std::move(s));
            }
    int line_no = 3;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        const std::string where = src + ":" + std::to_string(line_no);
        if (cells.size() != 5) throw SchemaError(where + ": expected 5 fields");
        const int t = out.sweep.labels.index_of(trim(cells[0]));
        const int y = out.sweep.labels.index_of(trim(cells[1]));
        const auto k = parse_int(cells[2]);
        const auto v = parse_double(cells[3]);
        const auto w = parse_double(cells[4]);
        if (t < 0 || y < 0 || t == y || !k || !v || !w) throw SchemaError(where + ": malformed row");
        auto& set = out.sweep.sets[pair_index(d, t, y)];
        if (*k != static_cast<long long>(set.values.size())) throw SchemaError(where + ": rows out of order");
        set.values.push_back(*v);
        set.weights.push_back(*w);
    }
    const std::size_t m = out.sweep.sets.front().values.size();
    for (const auto& s : out.sweep.sets)
        if (s.values.size() != m || m == 0) throw SchemaError(src + ": incomplete ATE sample file");
    return out;
}

}  // namespace atebench
