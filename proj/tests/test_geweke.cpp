#include <doctest.h>

#include "support/geweke.hpp"

using namespace lgi;
using namespace lgi::testing;

// Joint-distribution check of the full sweep on a small system. The acceptance
// suite runs the long version; this keeps a shorter run in the unit tests so
// kernel regressions surface quickly.
TEST_CASE("geweke: successive-conditional matches the prior" *
          doctest::timeout(300)) {
  GewekeSystem g = make_geweke_system();
  const int cycles = 6000;

  std::vector<double> mc_l0, mc_s2x, mc_s2p, mc_rho;
  {
    Rng rng(2024);
    for (int k = 0; k < cycles; ++k) {
      ParamState s = draw_state_from_prior(g, rng);
      mc_l0.push_back(s.lambda0);
      mc_s2x.push_back(s.sigma2_x(0));
      mc_s2p.push_back(s.sigma2_p_rows);
      mc_rho.push_back(s.rho_rows);
    }
  }

  std::vector<double> sc_l0, sc_s2x, sc_s2p, sc_rho;
  {
    Rng rng(4048);
    GewekeSystem sys = make_geweke_system();
    ParamState s = draw_state_from_prior(sys, rng);
    redraw_observables(sys, s, rng);
    GibbsContext ctx{sys.data, sys.traits_rows, sys.traits_cols, sys.C_rows,
                     sys.C_cols, sys.prior};
    SweepScratch scratch;
    for (int k = 0; k < cycles; ++k) {
      gibbs_sweep(s, ctx, scratch, rng);
      redraw_observables(sys, s, rng);
      sc_l0.push_back(s.lambda0);
      sc_s2x.push_back(s.sigma2_x(0));
      sc_s2p.push_back(s.sigma2_p_rows);
      sc_rho.push_back(s.rho_rows);
    }
  }

  // short run: gate at 5 standard errors to keep flakiness low while still
  // catching genuinely wrong kernels (those blow past 10 quickly)
  CHECK(geweke_z(iid_summary(mc_l0), batch_summary(sc_l0)) < 5.0);
  CHECK(geweke_z(iid_summary(mc_s2x), batch_summary(sc_s2x)) < 5.0);
  CHECK(geweke_z(iid_summary(mc_s2p), batch_summary(sc_s2p)) < 5.0);
  CHECK(geweke_z(iid_summary(mc_rho), batch_summary(sc_rho)) < 5.0);
}
