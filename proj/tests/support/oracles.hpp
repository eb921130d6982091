#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library code they check.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Modified Z-score from a full sort; MAD = 0 maps non-median values to +inf.
std::vector<double> modified_zscore(std::vector<double> values);

// Population z-score by two-pass summation.
std::vector<double> zscore(const std::vector<double>& values);

using Dangling = std::set<std::pair<std::string, std::string>>;  // (from id, missing name)

// Name resolution by scanning raw config text: every referencing line is
// matched against every definition line. Device text keyed by file stem.
Dangling dangling_references(const std::map<std::string, std::string>& device_texts);

// Reads every *.cfg under `dir`, plus *.json rendered to line form.
std::map<std::string, std::string> read_device_texts(const std::filesystem::path& dir);

// Number of nodes that can reach `target` along `edges` (from -> to), by BFS on a fresh adjacency scan.
std::size_t reverse_reachable(std::size_t node_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                              std::size_t target);

// Sum over components of w_k * prod_d N(x_d; mu_kd, var_kd), evaluated in plain double arithmetic.
double mixture_density(const std::vector<double>& weights, const std::vector<std::vector<double>>& means,
                       const std::vector<std::vector<double>>& variances, const std::vector<double>& x);

// Kendall tau-a by counting all pairs.
double kendall_tau(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace oracle
