//! Generator and discriminator layer lists.

use mcgan_nn::{LayerSpec, NetworkSpec, Resample};
use serde::{Deserialize, Serialize};

use crate::error::{McganError, Result};

/// Encoder/decoder generator with a ResNet trunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorArch {
    /// Channels after the first full convolution; the encoder then widens
    /// to 3× and 9× this.
    pub width: usize,
    /// Kernel of the input-side and output-side convolutions.
    pub outer_kernel: usize,
    /// Kernel of the resampling convolutions and ResNet blocks.
    pub inner_kernel: usize,
    /// ResNet blocks on each side of the bottleneck.
    pub blocks_per_side: usize,
    pub dropout: f64,
}

impl GeneratorArch {
    /// 64-192-576 with six ResNet blocks.
    pub fn full() -> Self {
        GeneratorArch {
            width: 64,
            outer_kernel: 7,
            inner_kernel: 3,
            blocks_per_side: 3,
            dropout: 0.5,
        }
    }

    /// Same topology at desk scale.
    pub fn reduced() -> Self {
        GeneratorArch {
            width: 8,
            outer_kernel: 3,
            inner_kernel: 3,
            blocks_per_side: 1,
            dropout: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.width == 0 {
            errs.push("generator width must be positive".to_string());
        }
        for (name, k) in [("outer", self.outer_kernel), ("inner", self.inner_kernel)] {
            if k % 2 == 0 {
                errs.push(format!("{name} kernel {k} must be odd"));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            errs.push(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McganError::Config(errs))
        }
    }
}

/// Builds a generator mapping `channels` to `channels_out`. With
/// `first_groups`, a grouped convolution-batchnorm-ReLU over the input
/// channels comes first, each group convolved with its own filters.
pub fn generator_spec(
    name: &str,
    channels: usize,
    channels_out: usize,
    first_groups: Option<usize>,
    arch: &GeneratorArch,
) -> NetworkSpec {
    let (w, ko, ki) = (arch.width, arch.outer_kernel, arch.inner_kernel);
    let mut layers = Vec::new();
    let cbr = |layers: &mut Vec<LayerSpec>, conv: LayerSpec, c: usize| {
        layers.push(conv);
        layers.push(LayerSpec::BatchNorm { channels: c });
        layers.push(LayerSpec::Relu);
    };
    if let Some(groups) = first_groups {
        cbr(&mut layers, LayerSpec::grouped_conv(channels, channels, ko, groups), channels);
    }
    cbr(&mut layers, LayerSpec::conv(channels, w, ko, Resample::Keep), w);
    cbr(&mut layers, LayerSpec::conv(w, 3 * w, ki, Resample::Down(2)), 3 * w);
    cbr(&mut layers, LayerSpec::conv(3 * w, 9 * w, ki, Resample::Down(2)), 9 * w);
    for _ in 0..2 * arch.blocks_per_side {
        layers.push(LayerSpec::ResnetBlock {
            channels: 9 * w,
            kernel: ki,
            dropout: arch.dropout,
        });
    }
    cbr(&mut layers, LayerSpec::conv(9 * w, 3 * w, ki, Resample::Up(2)), 3 * w);
    cbr(&mut layers, LayerSpec::conv(3 * w, w, ki, Resample::Up(2)), w);
    layers.push(LayerSpec::conv(w, channels_out, ko, Resample::Keep));
    layers.push(LayerSpec::Tanh);
    NetworkSpec::new(name, layers)
}

/// Local (PatchGAN) discriminator with a global extension sharing its
/// weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorArch {
    /// Widths of the two leaky-ReLU layers of the local path.
    pub widths: [usize; 2],
    pub kernel: usize,
    pub slope: f64,
    /// Stride-2 conv-batchnorm-ReLU blocks prepended for the global path.
    pub global_blocks: usize,
}

impl DiscriminatorArch {
    pub fn full() -> Self {
        DiscriminatorArch {
            widths: [64, 128],
            kernel: 5,
            slope: 0.2,
            global_blocks: 2,
        }
    }

    pub fn reduced() -> Self {
        DiscriminatorArch {
            widths: [8, 16],
            kernel: 3,
            slope: 0.2,
            global_blocks: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.widths.contains(&0) {
            errs.push("discriminator widths must be positive".to_string());
        }
        if self.kernel.is_multiple_of(2) {
            errs.push(format!("discriminator kernel {} must be odd", self.kernel));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(McganError::Config(errs))
        }
    }
}

/// A discriminator over `channels`-channel inputs. Layers
/// `local_start..` form the local path; the whole list is the global path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    pub spec: NetworkSpec,
    pub local_start: usize,
}

impl DiscriminatorSpec {
    pub fn new(name: &str, channels: usize, arch: &DiscriminatorArch) -> Self {
        let k = arch.kernel;
        let [w1, w2] = arch.widths;
        let mut layers = Vec::new();
        for _ in 0..arch.global_blocks {
            layers.push(LayerSpec::conv(channels, channels, k, Resample::Down(2)));
            layers.push(LayerSpec::BatchNorm { channels });
            layers.push(LayerSpec::Relu);
        }
        let local_start = layers.len();
        layers.push(LayerSpec::conv(channels, w1, k, Resample::Down(2)));
        layers.push(LayerSpec::LeakyRelu { slope: arch.slope });
        layers.push(LayerSpec::conv(w1, w2, k, Resample::Keep));
        layers.push(LayerSpec::LeakyRelu { slope: arch.slope });
        layers.push(LayerSpec::conv(w2, 1, k, Resample::Keep));
        DiscriminatorSpec {
            spec: NetworkSpec::new(name, layers),
            local_start,
        }
    }

    /// The local path alone, as its own spec.
    pub fn local(&self) -> NetworkSpec {
        NetworkSpec::new(
            format!("{}-local", self.spec.name),
            self.spec.layers[self.local_start..].to_vec(),
        )
    }

    /// The layers prepended for the global path.
    pub fn global_extension(&self) -> NetworkSpec {
        NetworkSpec::new(
            format!("{}-global-extension", self.spec.name),
            self.spec.layers[..self.local_start].to_vec(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcgan_nn::receptive_field;

    #[test]
    fn full_generator_resampling_pattern() {
        let spec = generator_spec("g", 26, 26, Some(26), &GeneratorArch::full());
        spec.validate().unwrap();
        let factors: Vec<(usize, bool)> = spec
            .layers
            .iter()
            .filter_map(|l| match l {
                LayerSpec::Conv { resample, .. } => {
                    Some(vec![(resample.factor(), matches!(resample, Resample::Up(_)))])
                }
                LayerSpec::ResnetBlock { .. } => Some(vec![(1, false); 2]),
                _ => None,
            })
            .flatten()
            .collect();
        // Encoder: four convolutions then three blocks of two.
        let enc: Vec<usize> = factors[..10].iter().map(|f| f.0).collect();
        assert_eq!(enc, [1, 1, 2, 2, 1, 1, 1, 1, 1, 1]);
        let dec: Vec<usize> = factors[10..18].iter().map(|f| f.0).collect();
        assert_eq!(dec, [1, 1, 1, 1, 1, 1, 2, 2]);
        assert!(factors[16].1 && factors[17].1);
        assert_eq!(spec.output_size(64), 64);
    }

    #[test]
    fn local_discriminator_receptive_field() {
        let d = DiscriminatorSpec::new("d", 52, &DiscriminatorArch::full());
        assert_eq!(receptive_field(&d.local()).unwrap(), 21);
        assert!(receptive_field(&d.spec).unwrap() > 64);
        d.spec.validate().unwrap();
    }
}
