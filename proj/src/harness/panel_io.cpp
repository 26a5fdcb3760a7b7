#include "netpolicy/harness/panel_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "netpolicy/errors.hpp"
#include "netpolicy/harness/config.hpp"

namespace netpolicy::harness {

namespace {

std::string exact(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string policy_name(PolicyVariant v) {
    switch (v) {
        case PolicyVariant::constant_prob: return "constant_prob";
        case PolicyVariant::per_type_prob: return "per_type_prob";
        case PolicyVariant::budget_complement: return "budget_complement";
    }
    return "constant_prob";
}

std::string list(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + exact(v[i]);
    return out + "]";
}

void write_sample(std::ostream& csv, int cluster, int period, const ClusterSample& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        csv << cluster << ',' << period << ',' << i << ',' << static_cast<int>(s.d[i]) << ',' << exact(s.y[i]) << ','
            << exact(s.x[i]) << '\n';
    }
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double number(const std::string& cell, const std::string& column, std::size_t row) {
    double v = 0.0;
    auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw InvalidArgument("panel row " + std::to_string(row) + ": column " + column + " is not a number ('" +
                              cell + "')");
    return v;
}

int integer(const std::string& cell, const std::string& column, std::size_t row) {
    int v = 0;
    auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw InvalidArgument("panel row " + std::to_string(row) + ": column " + column + " is not an integer ('" +
                              cell + "')");
    return v;
}

std::vector<std::array<int, 2>> read_pairs(const ConfigDocument& doc) {
    const auto& raw = doc.raw("pairs");
    auto outer = std::get_if<ConfigArray>(&raw.data);
    if (!outer || outer->empty()) throw ConfigError("pairs", "expected a non-empty array of [first, second] ids");
    std::vector<std::array<int, 2>> pairs;
    for (const auto& e : *outer) {
        auto inner = std::get_if<ConfigArray>(&e.data);
        if (!inner || inner->size() != 2) throw ConfigError("pairs", "each pair is [first, second]");
        std::array<int, 2> p{};
        for (int h = 0; h < 2; ++h) {
            auto d = std::get_if<double>(&(*inner)[static_cast<std::size_t>(h)].data);
            if (!d || *d != static_cast<int>(*d)) throw ConfigError("pairs", "cluster ids must be integers");
            p[static_cast<std::size_t>(h)] = static_cast<int>(*d);
        }
        pairs.push_back(p);
    }
    return pairs;
}

}  // namespace

void export_panels(const std::vector<PairPanel>& panels, std::ostream& csv, std::ostream& design) {
    require(!panels.empty(), "nothing to export");
    const auto& first = panels.front();
    const bool baseline = first.baseline[0].has_value();
    std::vector<double> coords;
    csv << "cluster,period,unit,d,y,x\n";
    design << "policy = \"" << policy_name(first.policy.variant) << "\"\n";
    design << "lower = " << list(first.policy.lower) << "\n";
    design << "upper = " << list(first.policy.upper) << "\n";
    design << "beta = " << list(first.design.base_beta) << "\n";
    design << "eta = " << exact(first.design.eta) << "\n";
    std::string pairs = "[";
    for (std::size_t g = 0; g < panels.size(); ++g) {
        const auto& p = panels[g];
        require(p.design.base_beta == first.design.base_beta && p.design.eta == first.design.eta,
                "exported panels must share beta and eta");
        require(p.baseline[0].has_value() == baseline && p.baseline[1].has_value() == baseline,
                "exported panels must agree on baselines");
        require(p.design.signs == std::array<int, 2>{+1, -1}, "only paired designs can be exported");
        coords.push_back(static_cast<double>(p.design.coordinate));
        pairs += (g ? ", [" : "[") + std::to_string(p.design.cluster_ids[0]) + ", " +
                 std::to_string(p.design.cluster_ids[1]) + "]";
        for (int h = 0; h < 2; ++h) {
            const int id = p.design.cluster_ids[static_cast<std::size_t>(h)];
            if (baseline) write_sample(csv, id, 0, *p.baseline[static_cast<std::size_t>(h)]);
            write_sample(csv, id, 1, p.outcome[static_cast<std::size_t>(h)]);
        }
    }
    design << "coordinates = " << list(coords) << "\n";
    design << "pairs = " << pairs << "]\n";
    design << "baseline = " << (baseline ? "true" : "false") << "\n";
}

std::vector<PairPanel> ingest_panels(std::istream& csv, std::istream& design_in) {
    std::stringstream design_text;
    design_text << design_in.rdbuf();
    const auto doc = ConfigDocument::parse(design_text.str());

    PolicyClass policy;
    const std::string variant = doc.string_or("policy", "constant_prob");
    if (variant == "constant_prob") {
        policy = PolicyClass::constant();
    } else if (variant == "budget_complement") {
        policy = PolicyClass::budget_complement();
    } else if (variant == "per_type_prob") {
        policy = PolicyClass::per_type(2);
    } else {
        throw ConfigError("policy", "unknown policy '" + variant + "'");
    }
    policy.lower = doc.numbers_or("lower", policy.lower);
    policy.upper = doc.numbers_or("upper", policy.upper);
    const Beta beta = doc.numbers("beta");
    const double eta = doc.number("eta");
    const bool baseline = doc.boolean_or("baseline", false);
    const auto pairs = read_pairs(doc);
    std::vector<double> coords;
    if (doc.has("coordinates")) {
        coords = doc.numbers("coordinates");
        if (coords.size() != pairs.size()) throw ConfigError("coordinates", "need one coordinate per pair");
    } else {
        coords.assign(pairs.size(), static_cast<double>(doc.integer_or("coordinate", 0)));
    }
    doc.check_all_used();

    // (cluster, period) -> sample
    std::map<std::pair<int, int>, ClusterSample> samples;
    std::string line;
    if (!std::getline(csv, line) || split(line).empty() || split(line).front().empty())
        throw InvalidArgument("panel file is empty");
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"cluster", "period", "unit", "d", "y", "x"}) {
        if (!col.count(name)) throw InvalidArgument(std::string("panel file lacks column '") + name + "'");
    }
    std::size_t row = 1;
    while (std::getline(csv, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = split(line);
        if (f.size() != header.size())
            throw InvalidArgument("panel row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                  " fields");
        const int cluster = integer(f[col["cluster"]], "cluster", row);
        const int period = integer(f[col["period"]], "period", row);
        integer(f[col["unit"]], "unit", row);
        const int d = integer(f[col["d"]], "d", row);
        if (d != 0 && d != 1) throw InvalidArgument("panel row " + std::to_string(row) + ": d must be 0 or 1");
        if (period != 0 && period != 1)
            throw InvalidArgument("panel row " + std::to_string(row) + ": period must be 0 (baseline) or 1");
        if (period == 0 && !baseline)
            throw InvalidArgument("panel row " + std::to_string(row) + ": baseline row but the design has none");
        auto& s = samples[{cluster, period}];
        s.y.push_back(number(f[col["y"]], "y", row));
        s.d.push_back(static_cast<std::uint8_t>(d));
        s.x.push_back(number(f[col["x"]], "x", row));
    }
    if (samples.empty()) throw InvalidArgument("panel file has no rows");

    std::vector<PairPanel> panels;
    std::map<int, int> seen;
    for (std::size_t g = 0; g < pairs.size(); ++g) {
        const auto [a, b] = pairs[g];
        for (int id : {a, b}) {
            if (seen.count(id)) throw InvalidArgument("cluster " + std::to_string(id) + " appears in two pairs");
            seen[id] = static_cast<int>(g);
        }
        auto design = make_pair_design(static_cast<int>(g), {a, b}, beta, eta, static_cast<std::size_t>(coords[g]),
                                       policy);
        PairPanel panel{policy, design, {}, {}};
        for (int h = 0; h < 2; ++h) {
            const int id = h == 0 ? a : b;
            auto it = samples.find({id, 1});
            if (it == samples.end())
                throw InvalidArgument("pair " + std::to_string(g) + ": cluster " + std::to_string(id) +
                                      " has no period-1 rows");
            panel.outcome[static_cast<std::size_t>(h)] = it->second;
            if (baseline) {
                auto base = samples.find({id, 0});
                if (base == samples.end())
                    throw InvalidArgument("pair " + std::to_string(g) + ": cluster " + std::to_string(id) +
                                          " has no baseline rows");
                panel.baseline[static_cast<std::size_t>(h)] = base->second;
            }
        }
        for (auto& s : panel.outcome) s.validate();
        panels.push_back(std::move(panel));
    }
    for (const auto& [key, s] : samples) {
        if (!seen.count(key.first))
            throw InvalidArgument("cluster " + std::to_string(key.first) + " is not part of any pair");
    }
    return panels;
}

std::vector<PairPanel> ingest_panel(const std::string& csv_path, const std::string& design_path) {
    std::ifstream csv(csv_path);
    if (!csv) throw InvalidArgument("cannot open panel file " + csv_path);
    std::ifstream design(design_path);
    if (!design) throw InvalidArgument("cannot open design file " + design_path);
    return ingest_panels(csv, design);
}

}  // namespace netpolicy::harness
