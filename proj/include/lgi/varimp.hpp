#pragma once

#include <string>
#include <vector>

#include "lgi/draws.hpp"
#include "lgi/network_data.hpp"
#include "lgi/rng.hpp"

namespace lgi {

// Permutation importance of one trait. The observed statistic averages, over
// kept draws and opposite-side species, the squared correlation between the
// interaction logits and the trait column; B permutations of the observed
// trait values give the null. Species with a missing value of the trait are
// excluded from every correlation. z-scores are comparable within the
// continuous group and within the binary group, not across.
struct ImportanceRow {
  std::string trait;
  TraitKind group = TraitKind::kContinuous;
  double t_obs = 0.0;
  double perm_mean = 0.0;
  double perm_sd = 0.0;
  double z = 0.0;
  int B = 0;
};

ImportanceRow variable_importance(const PosteriorDraws& draws,
                                  const TraitMatrix& traits, bool row_side,
                                  int trait_index, int B, Rng& rng);

// All traits of one side, sharing one permutation budget per trait.
std::vector<ImportanceRow> variable_importance_all(const PosteriorDraws& draws,
                                                   const TraitMatrix& traits,
                                                   bool row_side, int B, Rng& rng);

}  // namespace lgi
