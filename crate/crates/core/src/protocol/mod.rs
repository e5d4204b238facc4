//! The quantum cooling round: Kraus operators on a truncated Fock space, the
//! displacement-sum calculus on thermal inputs, closed-form energies and
//! multi-round schedules.

mod charfn;
mod energy;
mod kraus;
mod schedule;

pub use charfn::{
    char_func, expand_round_to_displacement_sum, mean_occupation_finite_difference,
    mean_occupation_from_char, DisplacementSum, DisplacementTerm,
};
pub use energy::{optimal_alpha_given_epsilon, optimize_epsilon, quantum_energy, EpsilonOptimum};
pub use kraus::{
    apply_round, build_kraus, CoolingRound, KrausPair, MeasurementObservable, Quadrature,
    RoundOrder,
};
pub use schedule::{
    run_schedule, NbarEstimator, ParameterSchedule, RoundSettings, ScheduleMode, ScheduleOptions,
    ScheduleRow, ScheduleRun, FOCK_DIM_FACTOR,
};
