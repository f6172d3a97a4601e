#pragma once

#include "flexsat/sim.h"

namespace flexsat {

// Built-in three-phase demonstration run: a rest-to-rest manoeuvre of a
// four-mode flexible spacecraft with one uncertain inertia parameter and one
// unknown disturbance frequency. Timeline: adaptation off with correct
// assumed parameters, a parameter/frequency jump at 200 s, adaptation on at
// 400 s, parameters reverted at 600 s, end at 800 s.
Scenario example_scenario();

// Small single-mode configuration whose gains pass the sufficient stability
// conditions (the demonstration scenario's gains do not; the conditions are
// conservative). Used to exercise the Lyapunov monotonicity certificate.
Scenario gain_demo_scenario();

}  // namespace flexsat
