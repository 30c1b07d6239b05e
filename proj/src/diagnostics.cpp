#include "lgi/diagnostics.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace lgi {

std::vector<RunningMeanSeries> running_means(
    const PosteriorDraws& draws, const InteractionData& data,
    const std::vector<std::pair<int, int>>& cells) {
  if (draws.l_draws.empty())
    throw std::runtime_error("running_means: fit kept no L snapshots");
  std::vector<RunningMeanSeries> out;
  for (auto [i, j] : cells) {
    if (i < 0 || i >= draws.n_rows || j < 0 || j >= draws.n_cols)
      throw std::out_of_range("running_means: cell out of range");
    if (data.adjacency(i, j) == 1)
      std::cerr << "warning: cell (" << i << "," << j
                << ") is recorded; its running mean is constant 1\n";
    RunningMeanSeries series;
    series.row = i;
    series.col = j;
    for (const auto& chain : draws.l_draws) {
      std::vector<double> means;
      means.reserve(chain.size());
      double acc = 0.0;
      for (std::size_t r = 0; r < chain.size(); ++r) {
        acc += chain[r].get(i, j) ? 1.0 : 0.0;
        means.push_back(acc / static_cast<double>(r + 1));
      }
      series.per_chain.push_back(std::move(means));
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::map<std::string, double> chain_agreement(const PosteriorDraws& draws) {
  if (draws.series.size() < 2)
    throw std::invalid_argument("chain_agreement: needs at least two chains");

  std::map<std::string, double> out;
  for (const auto& [name, first] : draws.series.front()) {
    (void)first;
    std::vector<double> means, vars;
    bool complete = true;
    for (const auto& chain : draws.series) {
      auto it = chain.find(name);
      if (it == chain.end() || it->second.empty()) {
        complete = false;
        break;
      }
      const auto& v = it->second;
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double s2 = 0.0;
      for (double x : v) s2 += (x - m) * (x - m);
      s2 /= std::max<std::size_t>(v.size() - 1, 1);
      means.push_back(m);
      vars.push_back(s2);
    }
    if (!complete) continue;

    double within = 0.0;
    for (double v : vars) within += v;
    within /= static_cast<double>(vars.size());
    double grand = 0.0;
    for (double m : means) grand += m;
    grand /= static_cast<double>(means.size());
    double between = 0.0;
    for (double m : means) between += (m - grand) * (m - grand);
    between /= static_cast<double>(means.size() - 1);

    double ratio;
    if (within > 0.0)
      ratio = std::sqrt(1.0 + between / within);
    else
      ratio = between > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    out[name] = ratio;
  }
  return out;
}

std::vector<std::pair<int, int>> default_diagnostic_cells(
    const PosteriorDraws& draws, const InteractionData& data) {
  std::vector<std::pair<int, int>> cells;
  for (int i : draws.tracked_rows)
    for (int j : draws.tracked_cols)
      if (data.adjacency(i, j) == 0) cells.emplace_back(i, j);
  return cells;
}

}  // namespace lgi
