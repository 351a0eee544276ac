#pragma once

#include "atomchip/chip_model.hpp"
#include "atomchip/sta_design.hpp"

namespace testfix {

// Shared, lazily built inputs reused across test files (the bias sweep is the
// only expensive fixture).
const atomchip::AtomSpecies& rb();
const atomchip::TrapTables& tables();

// Chirped-default 75 ms ramp between the 21.5 G and 4.5 G trap positions.
const atomchip::RampSchedule& preset75();

// Same ansatz toward the shallow 1.35 mm lensing trap.
const atomchip::RampSchedule& preset_dkc();

atomchip::TrajectoryAnsatz preset_ansatz(double t_f = 75e-3);

} // namespace testfix
