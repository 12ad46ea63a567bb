//! Measure and integral on the fragment.

pub mod antideriv;
pub mod checks;
pub mod integrate;

pub use antideriv::antiderivative;

pub use integrate::{integrate_interval, integrate_region, integrate_set, measure_1d, measure_region, MeasureValue};
pub use checks::{check_ftc, check_transformation, differentiate_under_integral, standard_part_measure};
