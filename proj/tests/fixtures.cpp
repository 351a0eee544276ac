#include "fixtures.hpp"

namespace testfix {

using namespace atomchip;

const AtomSpecies& rb() {
  static AtomSpecies s = rb87_f2m2();
  return s;
}

const TrapTables& tables() {
  static TrapTables t = trap_tables(quantus_z_chip(5.0, 21.5e-4), rb(),
                                    4.3e-4, 22.0e-4, 60, 4);
  return t;
}

TrajectoryAnsatz preset_ansatz(double t_f) {
  TrajectoryAnsatz an;
  an.kind = AnsatzKind::ChirpedSine;
  an.chirp_a = default_chirp_a;
  an.chirp_b = default_chirp_b;
  an.z_i = tables().zt_of_bias(21.5e-4);
  an.z_f = tables().zt_of_bias(4.5e-4);
  an.t_f = t_f;
  return an;
}

const RampSchedule& preset75() {
  static RampSchedule s = design_ramp(preset_ansatz(), tables(), 7501);
  return s;
}

const RampSchedule& preset_dkc() {
  static RampSchedule s = [] {
    TrajectoryAnsatz an = preset_ansatz();
    an.z_f = 1.35e-3;
    return design_ramp(an, tables(), 7501);
  }();
  return s;
}

} // namespace testfix
