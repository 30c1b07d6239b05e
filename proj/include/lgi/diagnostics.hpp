#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lgi/draws.hpp"

namespace lgi {

// Cumulative means of selected interaction indicators, one series per chain.
// Requires a fit that kept L snapshots. Recorded cells produce a warning on
// stderr (their series is constant 1).
struct RunningMeanSeries {
  int row = 0, col = 0;
  std::vector<std::vector<double>> per_chain;
};

std::vector<RunningMeanSeries> running_means(
    const PosteriorDraws& draws, const InteractionData& data,
    const std::vector<std::pair<int, int>>& cells);

// Between/within spread of each tracked scalar series across chains:
// sqrt(1 + var(chain means) / mean within-chain variance). 1.0 for identical
// chains, large when chains disagree. Needs at least two chains.
std::map<std::string, double> chain_agreement(const PosteriorDraws& draws);

// Default cells for the running-means export: unrecorded pairs among the
// tracked species.
std::vector<std::pair<int, int>> default_diagnostic_cells(
    const PosteriorDraws& draws, const InteractionData& data);

}  // namespace lgi
