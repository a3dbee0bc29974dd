//! Declarative network specifications.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{NnError, Result};

/// Spatial resampling performed by a convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resample {
    Keep,
    /// Strided convolution.
    Down(usize),
    /// Transposed (fractionally strided) convolution.
    Up(usize),
}

impl Resample {
    pub fn factor(self) -> usize {
        match self {
            Resample::Keep => 1,
            Resample::Down(f) | Resample::Up(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    /// Zero-padded "same" convolution; `groups > 1` convolves each channel
    /// group with its own filters.
    Conv {
        channels_in: usize,
        channels_out: usize,
        kernel: usize,
        resample: Resample,
        groups: usize,
    },
    BatchNorm {
        channels: usize,
    },
    Relu,
    LeakyRelu {
        slope: f64,
    },
    Dropout {
        rate: f64,
    },
    Tanh,
    Sigmoid,
    /// `x + bn(conv(dropout(relu(bn(conv(x))))))`, all convolutions stride 1.
    ResnetBlock {
        channels: usize,
        kernel: usize,
        dropout: f64,
    },
}

impl LayerSpec {
    pub fn conv(channels_in: usize, channels_out: usize, kernel: usize, resample: Resample) -> Self {
        LayerSpec::Conv {
            channels_in,
            channels_out,
            kernel,
            resample,
            groups: 1,
        }
    }

    pub fn grouped_conv(channels: usize, channels_out: usize, kernel: usize, groups: usize) -> Self {
        LayerSpec::Conv {
            channels_in: channels,
            channels_out,
            kernel,
            resample: Resample::Keep,
            groups,
        }
    }

    pub fn is_conv(&self) -> bool {
        matches!(self, LayerSpec::Conv { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>) -> Self {
        NetworkSpec {
            name: name.into(),
            layers,
        }
    }

    /// Channels expected by the first channel-aware layer.
    pub fn input_channels(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match l {
            LayerSpec::Conv { channels_in, .. } => Some(*channels_in),
            LayerSpec::BatchNorm { channels } | LayerSpec::ResnetBlock { channels, .. } => {
                Some(*channels)
            }
            _ => None,
        })
    }

    /// Channels produced by the last channel-aware layer.
    pub fn output_channels(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| match l {
            LayerSpec::Conv { channels_out, .. } => Some(*channels_out),
            LayerSpec::BatchNorm { channels } | LayerSpec::ResnetBlock { channels, .. } => {
                Some(*channels)
            }
            _ => None,
        })
    }

    /// Checks channel agreement, resampling factors, kernel parity and rates.
    pub fn validate(&self) -> Result<()> {
        let err = |i: usize, msg: String| NnError::Spec(format!("{} layer {}: {}", self.name, i, msg));
        let mut channels: Option<usize> = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let expect = |c: usize, channels: Option<usize>| -> Result<()> {
                match channels {
                    Some(prev) if prev != c => Err(err(
                        i,
                        format!("expects {c} input channels but previous layer produces {prev}"),
                    )),
                    _ => Ok(()),
                }
            };
            match *layer {
                LayerSpec::Conv {
                    channels_in,
                    channels_out,
                    kernel,
                    resample,
                    groups,
                } => {
                    expect(channels_in, channels)?;
                    if kernel % 2 == 0 || kernel == 0 {
                        return Err(err(i, format!("kernel {kernel} must be odd")));
                    }
                    if !matches!(resample, Resample::Keep | Resample::Down(2) | Resample::Up(2)) {
                        return Err(err(i, format!("resampling {resample:?} not in {{1, 2}}")));
                    }
                    if groups == 0 || channels_in % groups != 0 || channels_out % groups != 0 {
                        return Err(err(
                            i,
                            format!("{groups} groups do not divide {channels_in}->{channels_out}"),
                        ));
                    }
                    if groups > 1 && matches!(resample, Resample::Up(_)) {
                        return Err(err(i, "grouped transposed convolution unsupported".into()));
                    }
                    channels = Some(channels_out);
                }
                LayerSpec::BatchNorm { channels: c } => {
                    expect(c, channels)?;
                    channels = Some(c);
                }
                LayerSpec::ResnetBlock {
                    channels: c,
                    kernel,
                    dropout,
                } => {
                    expect(c, channels)?;
                    if kernel % 2 == 0 {
                        return Err(err(i, format!("kernel {kernel} must be odd")));
                    }
                    if !(0.0..1.0).contains(&dropout) {
                        return Err(err(i, format!("dropout rate {dropout} outside [0, 1)")));
                    }
                    channels = Some(c);
                }
                LayerSpec::Dropout { rate } if !(0.0..1.0).contains(&rate) => {
                    return Err(err(i, format!("dropout rate {rate} outside [0, 1)")));
                }
                LayerSpec::LeakyRelu { slope } if !slope.is_finite() => {
                    return Err(err(i, "non-finite leaky slope".into()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Product of downsampling factors divided by upsampling factors, as a
    /// rational `(down, up)`.
    pub fn stride_product(&self) -> (usize, usize) {
        self.layers.iter().fold((1, 1), |(d, u), l| match l {
            LayerSpec::Conv {
                resample: Resample::Down(f),
                ..
            } => (d * f, u),
            LayerSpec::Conv {
                resample: Resample::Up(f),
                ..
            } => (d, u * f),
            _ => (d, u),
        })
    }

    /// Output spatial size for a square input of side `size`.
    pub fn output_size(&self, size: usize) -> usize {
        self.layers.iter().fold(size, |s, l| match l {
            LayerSpec::Conv {
                resample: Resample::Down(f),
                ..
            } => s.div_ceil(*f),
            LayerSpec::Conv {
                resample: Resample::Up(f),
                ..
            } => s * f,
            _ => s,
        })
    }

    /// Stable content hash, used to tie checkpoints to architectures.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Receptive field (in input pixels) of one output unit of a pure
/// convolution chain, via `r <- r + (k - 1) * jump; jump <- jump * stride`.
pub fn receptive_field(spec: &NetworkSpec) -> Result<usize> {
    let mut field = 1;
    let mut jump = 1;
    for (i, layer) in spec.layers.iter().enumerate() {
        match *layer {
            LayerSpec::Conv {
                kernel, resample, ..
            } => match resample {
                Resample::Keep | Resample::Down(_) => {
                    field += (kernel - 1) * jump;
                    jump *= resample.factor();
                }
                Resample::Up(_) => {
                    return Err(NnError::Spec(format!(
                        "{} layer {i}: transposed convolution in receptive-field chain",
                        spec.name
                    )))
                }
            },
            LayerSpec::ResnetBlock { .. } => {
                return Err(NnError::Spec(format!(
                    "{} layer {i}: residual block in receptive-field chain",
                    spec.name
                )))
            }
            _ => {}
        }
    }
    Ok(field)
}
