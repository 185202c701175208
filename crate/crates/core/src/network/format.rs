//! Network file formats: the JSON layout used throughout this crate and the
//! plain-text `.nnet` format.

use std::str::FromStr;

use ndarray::{Array1, Array2};

use super::{rows_to_matrix, Layer, Network, NetworkJson};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    Json,
    Nnet,
}

impl NetworkFormat {
    /// Guess the format from a file extension; anything other than `.nnet` is JSON.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("nnet") => NetworkFormat::Nnet,
            _ => NetworkFormat::Json,
        }
    }
}

impl FromStr for NetworkFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(NetworkFormat::Json),
            "nnet" => Ok(NetworkFormat::Nnet),
            other => Err(Error::Parse(format!("unknown network format `{other}`"))),
        }
    }
}

pub fn load_network(source: &[u8], format: NetworkFormat) -> Result<Network> {
    match format {
        NetworkFormat::Json => load_json(source),
        NetworkFormat::Nnet => Ok(load_nnet(source)?.network),
    }
}

fn load_json(source: &[u8]) -> Result<Network> {
    let repr: NetworkJson =
        serde_json::from_slice(source).map_err(|e| Error::Parse(e.to_string()))?;
    let mut layers = Vec::with_capacity(repr.layers.len());
    let mut cols = repr.input_dim;
    for (i, l) in repr.layers.iter().enumerate() {
        let width = l.weights.first().map(Vec::len).unwrap_or(0);
        if width != cols {
            return Err(Error::Shape(format!(
                "layer {} has {} columns, expected {}",
                i + 1,
                width,
                cols
            )));
        }
        let weights = rows_to_matrix(&l.weights, cols)?;
        layers.push(Layer::new(weights, Array1::from(l.bias.clone()))?);
        cols = l.weights.len();
    }
    Network::new(repr.input_dim, layers, repr.final_relu)
}

/// A network read from `.nnet`, with input normalization folded into the
/// first layer and output de-normalization folded into the last.
#[derive(Debug, Clone)]
pub struct NnetModel {
    pub network: Network,
    /// Declared input minimums (raw, un-normalized units).
    pub input_lower: Array1<f64>,
    /// Declared input maximums.
    pub input_upper: Array1<f64>,
}

/// Parse the `.nnet` text format.
///
/// Layout after `//` comment lines: layer count, input size, output size, max
/// width; the `layer_count + 1` layer sizes; a legacy flag line; input mins;
/// input maxes; means (inputs then output); ranges (inputs then output); then
/// for every layer its weight rows followed by its biases. Hidden layers are
/// ReLU, the output layer is linear.
pub fn load_nnet(source: &[u8]) -> Result<NnetModel> {
    let text = std::str::from_utf8(source).map_err(|e| Error::Parse(e.to_string()))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"));

    let mut header_line = |what: &str| -> Result<Vec<f64>> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} line")))?;
        parse_numbers(line)
    };

    let head = header_line("header")?;
    if head.len() < 3 {
        return Err(Error::Parse("header needs layer count, input and output size".into()));
    }
    let layer_count = as_count(head[0])?;
    let input_size = as_count(head[1])?;
    let output_size = as_count(head[2])?;
    let sizes: Vec<usize> = header_line("layer sizes")?
        .into_iter()
        .map(as_count)
        .collect::<Result<_>>()?;
    if sizes.len() < layer_count + 1 {
        return Err(Error::Parse(format!(
            "expected {} layer sizes, found {}",
            layer_count + 1,
            sizes.len()
        )));
    }
    let sizes = &sizes[..layer_count + 1];
    if sizes[0] != input_size || sizes[layer_count] != output_size {
        return Err(Error::Shape("layer sizes disagree with header input/output sizes".into()));
    }
    let _legacy_flag = header_line("flag")?;
    let mins = header_line("input minimum")?;
    let maxs = header_line("input maximum")?;
    let means = header_line("mean")?;
    let ranges = header_line("range")?;
    if mins.len() < input_size || maxs.len() < input_size {
        return Err(Error::Shape("input bounds shorter than the input size".into()));
    }
    if means.len() < input_size + 1 || ranges.len() < input_size + 1 {
        return Err(Error::Shape("normalization vectors shorter than input size + 1".into()));
    }

    let body: Vec<f64> = lines
        .map(parse_numbers)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut cursor = body.into_iter();
    let mut layers = Vec::with_capacity(layer_count);
    for l in 0..layer_count {
        let (rows, cols) = (sizes[l + 1], sizes[l]);
        let w: Vec<f64> = cursor.by_ref().take(rows * cols).collect();
        let b: Vec<f64> = cursor.by_ref().take(rows).collect();
        if w.len() != rows * cols || b.len() != rows {
            return Err(Error::Parse(format!("layer {} is truncated", l + 1)));
        }
        let weights = Array2::from_shape_vec((rows, cols), w)
            .map_err(|e| Error::Shape(e.to_string()))?;
        layers.push(Layer::new(weights, Array1::from(b))?);
    }
    if cursor.next().is_some() {
        return Err(Error::Parse("trailing values after the last layer".into()));
    }

    // (x - mean) / range folded into layer 1
    let in_mean = Array1::from(means[..input_size].to_vec());
    let in_range = Array1::from(ranges[..input_size].to_vec());
    if in_range.iter().any(|&r| r == 0.0) {
        return Err(Error::Value("zero input range in normalization".into()));
    }
    let first = &layers[0];
    let scaled = first.weights() / &in_range.view().insert_axis(ndarray::Axis(0));
    let bias = first.bias() - &scaled.dot(&in_mean);
    layers[0] = Layer::new(scaled, bias)?;

    // z * range + mean folded into the output layer
    let (out_mean, out_range) = (means[input_size], ranges[input_size]);
    let last = layers.len() - 1;
    let weights = layers[last].weights() * out_range;
    let bias = layers[last].bias() * out_range + out_mean;
    layers[last] = Layer::new(weights, bias)?;

    Ok(NnetModel {
        network: Network::new(input_size, layers, false)?,
        input_lower: Array1::from(mins[..input_size].to_vec()),
        input_upper: Array1::from(maxs[..input_size].to_vec()),
    })
}

fn parse_numbers(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{t}` is not a number")))
        })
        .collect()
}

fn as_count(v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(Error::Parse(format!("`{v}` is not a valid count")))
    }
}
