#include "netpolicy/harness/results.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "netpolicy/errors.hpp"

namespace netpolicy::harness {

namespace {

// Shortest representation that parses back to the same double.
std::string exact(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        if (s == "nan") return std::nan("");
        throw InvalidArgument("results line " + std::to_string(line) + ": invalid number '" + s + "'");
    }
    return v;
}

}  // namespace

std::string format_beta(const std::vector<double>& beta) {
    std::string out;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (j) out += ';';
        out += exact(beta[j]);
    }
    return out;
}

void write_rows_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << "scenario,rep,metric,value,K,n,T,beta,coord\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.rep << ',' << r.metric << ',' << exact(r.value) << ',' << r.K << ',' << r.n
            << ',' << r.T << ',' << r.beta << ',';
        if (r.coord >= 0) out << r.coord;
        out << '\n';
    }
}

std::vector<ResultRow> read_rows_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "scenario,rep,metric,value,K,n,T,beta,coord")
        throw InvalidArgument("results file lacks the expected header");
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 9) throw InvalidArgument("results line " + std::to_string(line_no) + ": expected 9 fields");
        ResultRow r;
        r.scenario = f[0];
        r.rep = std::stoull(f[1]);
        r.metric = f[2];
        r.value = parse_double(f[3], line_no);
        r.K = std::stoi(f[4]);
        r.n = std::stoull(f[5]);
        r.T = std::stoi(f[6]);
        r.beta = f[7];
        r.coord = f[8].empty() ? -1 : std::stoi(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

nlohmann::json summarize(const std::string& scenario, const std::string& study, std::size_t replications,
                         const std::vector<ResultRow>& rows) {
    std::map<std::pair<std::string, int>, std::vector<double>> values;
    std::size_t degenerate = 0;
    for (const auto& r : rows) {
        if (r.metric == "degenerate") {
            degenerate += r.value != 0.0;
            continue;
        }
        if (std::isfinite(r.value)) values[{r.metric, r.coord}].push_back(r.value);
    }
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [key, v] : values) {
        const double n = static_cast<double>(v.size());
        double mean = 0.0, ss = 0.0;
        for (double x : v) mean += x;
        mean /= n;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
        std::string name = key.second >= 0 ? key.first + "[" + std::to_string(key.second) + "]" : key.first;
        metrics[name] = {{"mean", mean}, {"mc_se", std::sqrt(var / n)}, {"count", v.size()}};
    }
    nlohmann::json out{{"scenario", scenario},
                       {"study", study},
                       {"replications", replications},
                       {"degenerate", degenerate},
                       {"metrics", metrics}};
    if (metrics.contains("reject")) out["rejection_rate"] = metrics["reject"]["mean"];
    return out;
}

}  // namespace netpolicy::harness
