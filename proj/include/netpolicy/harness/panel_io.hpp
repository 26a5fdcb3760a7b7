#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "netpolicy/estimators.hpp"

namespace netpolicy::harness {

// Panel CSV: cluster,period,unit,d,y,x with period 0 the baseline and period 1
// the perturbed period. The design sidecar is a TOML document:
//
//   policy = "constant_prob"     # or per_type_prob, budget_complement
//   lower = [0.0]
//   upper = [1.0]
//   beta = [0.3]
//   eta = 0.1
//   coordinates = [0, 0]         # one per pair; or `coordinate = 0` for all
//   pairs = [[0, 1], [2, 3]]     # cluster ids, +eta arm first
//   baseline = true
void export_panels(const std::vector<PairPanel>& panels, std::ostream& csv, std::ostream& design);

std::vector<PairPanel> ingest_panels(std::istream& csv, std::istream& design);
std::vector<PairPanel> ingest_panel(const std::string& csv_path, const std::string& design_path);

}  // namespace netpolicy::harness
