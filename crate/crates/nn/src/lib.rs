//! Minimal convolutional network toolkit: `f64` tensors, a reverse-mode
//! tape, declarative layer specs, Adam, and a checkpoint container.

pub mod checkpoint;
pub mod error;
pub mod forward;
pub mod gradcheck;
pub mod graph;
pub mod kernels;
pub mod optim;
pub mod params;
pub mod spec;
pub mod tensor;

pub use checkpoint::Checkpoint;
pub use error::{NnError, Result};
pub use forward::{forward, forward_layers, ForwardCtx};
pub use graph::{Gradients, Graph, Var};
pub use optim::{Adam, AdamConfig};
pub use params::{Bound, Mode, ParamSet};
pub use spec::{receptive_field, LayerSpec, NetworkSpec, Resample};
pub use tensor::Tensor;
