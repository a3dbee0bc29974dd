//! Building blocks shared by the glyph, ornamentation and baseline networks.

pub mod arch;
pub mod log;
pub mod losses;
pub mod runner;
pub mod stack_gan;

pub use arch::{generator_spec, DiscriminatorArch, DiscriminatorSpec, GeneratorArch};
pub use log::LossLog;
pub use losses::PatchOutputs;
pub use stack_gan::{mask_network_stack, run_generator, run_generator_in, ObservedCounts, StackGan, StackGanConfig, StepReport};
