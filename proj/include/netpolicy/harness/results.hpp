#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace netpolicy::harness {

struct ResultRow {
    std::string scenario;
    std::size_t rep = 0;
    std::string metric;
    double value = 0.0;
    int K = 0;
    std::size_t n = 0;
    int T = 0;
    std::string beta;  // ';'-joined coordinates, empty when not applicable
    int coord = -1;    // -1 when the metric is not tied to a coordinate

    bool operator==(const ResultRow&) const = default;
};

std::string format_beta(const std::vector<double>& beta);

// Header: scenario,rep,metric,value,K,n,T,beta,coord
void write_rows_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> read_rows_csv(std::istream& in);

// Per (metric, coord): mean, Monte Carlo standard error and count; the
// rejection rate is the mean of the "reject" metric.
nlohmann::json summarize(const std::string& scenario, const std::string& study, std::size_t replications,
                         const std::vector<ResultRow>& rows);

}  // namespace netpolicy::harness
