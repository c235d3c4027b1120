//! Value encodings and the three query unitaries.
//!
//! * Boolean query: `|j>|b> -> |j>|b ⊕ f(j)>`.
//! * Bit query: `|j>|x> -> |j>|(x + β(f(τ(j)))) mod 2^m>`.
//! * Phase query: a rotation of one qubit by `θ_j = arcsin √β(f(τ(j)))`.
//!
//! Register layouts are `[index n, target 1]` for the phase query and
//! `[index n, value m]` for the bit query.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::linalg::{Operator, PermutationMap, QubitRotationMap};

/// A tabulated function `f : {0..N-1} -> [0,1]` with input decoder `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFunction {
    values: Vec<f64>,
    tau: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OracleJson {
    Values(Vec<f64>),
    Full {
        values: Vec<f64>,
        #[serde(default)]
        tau: Option<Vec<usize>>,
    },
}

impl OracleFunction {
    /// Values are padded with zeros up to the next power of two.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(contract("oracle needs at least one value"));
        }
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(contract(format!(
                "oracle value f({j}) = {v} outside [0, 1]"
            )));
        }
        let mut values = values;
        values.resize(values.len().next_power_of_two(), 0.0);
        let tau = (0..values.len()).collect();
        Ok(Self { values, tau })
    }

    pub fn constant(n_bits: u32, value: f64) -> Result<Self> {
        Self::new(vec![value; 1 << n_bits])
    }

    pub fn with_tau(mut self, tau: Vec<usize>) -> Result<Self> {
        if tau.len() != self.values.len() {
            return Err(contract(format!(
                "tau has {} entries for {} values",
                tau.len(),
                self.values.len()
            )));
        }
        let mut seen = vec![false; tau.len()];
        for &t in &tau {
            if t >= tau.len() || std::mem::replace(&mut seen[t], true) {
                return Err(contract("tau is not a permutation"));
            }
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<OracleJson>(text)? {
            OracleJson::Values(values) => Self::new(values),
            OracleJson::Full { values, tau } => {
                let f = Self::new(values)?;
                match tau {
                    Some(tau) => f.with_tau(tau),
                    None => Ok(f),
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("oracle serializes")
    }

    /// Table size `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `log2 N`, the index register width.
    pub fn index_bits(&self) -> u32 {
        self.values.len().trailing_zeros()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    /// `f(τ(j))`, the value seen by the query on index `j`.
    pub fn queried(&self, j: usize) -> f64 {
        self.values[self.tau[j]]
    }

    /// New oracle with every value mapped through `g`, same `τ`.
    pub fn map_values(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::new(self.values.iter().map(|&v| g(v)).collect())?;
        out.tau = self.tau.clone();
        Ok(out)
    }
}

/// `⌊x 2^m⌋`, with `x = 1` clamped into the top cell.
pub fn bit_encode(x: f64, m: u32) -> Result<usize> {
    check_bits(m)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(contract(format!("cannot encode {x}: outside [0, 1]")));
    }
    let cells = 1usize << m;
    Ok(((x * cells as f64).floor() as usize).min(cells - 1))
}

/// Cell midpoint `v 2^-m + 2^-(m+1)`.
pub fn bit_decode(v: usize, m: u32) -> Result<f64> {
    check_bits(m)?;
    if v >> m != 0 {
        return Err(contract(format!("code {v} out of range for {m} bits")));
    }
    let cell = (-(m as f64)).exp2();
    Ok(v as f64 * cell + cell / 2.0)
}

fn check_bits(m: u32) -> Result<()> {
    if m == 0 || m > 30 {
        return Err(contract(format!("bit count {m} outside 1..=30")));
    }
    Ok(())
}

type EncodeFn = Arc<dyn Fn(f64) -> usize + Send + Sync>;
type DecodeFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum BitCodec {
    FloorMidpoint,
    Boolean,
    Custom { encode: EncodeFn, decode: DecodeFn },
}

/// An `m`-bit encoding `[0,1] -> {0..2^m-1}` with a right inverse decode.
#[derive(Clone)]
pub struct BitEncoding {
    bits: u32,
    codec: BitCodec,
}

impl fmt::Debug for BitEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.codec {
            BitCodec::FloorMidpoint => "floor-midpoint",
            BitCodec::Boolean => "boolean",
            BitCodec::Custom { .. } => "custom",
        };
        f.debug_struct("BitEncoding")
            .field("bits", &self.bits)
            .field("kind", &kind)
            .finish()
    }
}

impl BitEncoding {
    /// Floor encode, midpoint decode.
    pub fn floor_midpoint(bits: u32) -> Result<Self> {
        check_bits(bits)?;
        Ok(Self {
            bits,
            codec: BitCodec::FloorMidpoint,
        })
    }

    /// One bit, identity on `{0, 1}`.
    pub fn boolean() -> Self {
        Self {
            bits: 1,
            codec: BitCodec::Boolean,
        }
    }

    /// User-supplied pair. Rejected unless `encode(decode(v)) = v` for every code.
    pub fn custom(
        bits: u32,
        encode: impl Fn(f64) -> usize + Send + Sync + 'static,
        decode: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_bits(bits)?;
        if bits > 16 {
            return Err(contract(
                "custom encodings are validated exhaustively; use at most 16 bits",
            ));
        }
        for v in 0..1usize << bits {
            let y = decode(v);
            if !(0.0..=1.0).contains(&y) {
                return Err(contract(format!("decode({v}) = {y} outside [0, 1]")));
            }
            let back = encode(y);
            if back != v {
                return Err(contract(format!(
                    "encode(decode({v})) = {back}, expected {v}"
                )));
            }
        }
        Ok(Self {
            bits,
            codec: BitCodec::Custom {
                encode: Arc::new(encode),
                decode: Arc::new(decode),
            },
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn encode(&self, x: f64) -> Result<usize> {
        match &self.codec {
            BitCodec::FloorMidpoint => bit_encode(x, self.bits),
            BitCodec::Boolean => {
                if x == 0.0 {
                    Ok(0)
                } else if x == 1.0 {
                    Ok(1)
                } else {
                    Err(contract(format!(
                        "Boolean encoding got non-Boolean value {x}"
                    )))
                }
            }
            BitCodec::Custom { encode, .. } => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(contract(format!("cannot encode {x}: outside [0, 1]")));
                }
                let v = encode(x);
                if v >> self.bits != 0 {
                    return Err(contract(format!(
                        "custom encode({x}) = {v} overflows {} bits",
                        self.bits
                    )));
                }
                Ok(v)
            }
        }
    }

    pub fn decode(&self, v: usize) -> Result<f64> {
        if v >> self.bits != 0 {
            return Err(contract(format!(
                "code {v} out of range for {} bits",
                self.bits
            )));
        }
        match &self.codec {
            BitCodec::FloorMidpoint => bit_decode(v, self.bits),
            BitCodec::Boolean => Ok(v as f64),
            BitCodec::Custom { decode, .. } => Ok(decode(v)),
        }
    }

    /// `decode(encode(x))`.
    pub fn quantize(&self, x: f64) -> Result<f64> {
        self.decode(self.encode(x)?)
    }
}

/// Largest `|decode(encode(y)) - y|` over the grid `y = i / grid_size`, `i = 0..=grid_size`.
///
/// A lower estimate of the supremum over `[0,1]`; exact for floor/midpoint
/// when `grid_size` is a multiple of `2^m`, since the gap peaks at left cell edges.
pub fn roundtrip_error(enc: &BitEncoding, grid_size: usize) -> Result<f64> {
    if grid_size < 1usize << enc.bits() {
        return Err(contract(format!(
            "grid of {grid_size} points cannot sample all {} cells",
            1usize << enc.bits()
        )));
    }
    let mut worst: f64 = 0.0;
    for i in 0..=grid_size {
        let y = i as f64 / grid_size as f64;
        worst = worst.max((enc.quantize(y)? - y).abs());
    }
    Ok(worst)
}

/// [`roundtrip_error`] for an arbitrary, unvalidated encode/decode pair.
pub fn roundtrip_error_fn(
    encode: impl Fn(f64) -> usize,
    decode: impl Fn(usize) -> f64,
    grid_size: usize,
) -> f64 {
    (0..=grid_size)
        .map(|i| {
            let y = i as f64 / grid_size.max(1) as f64;
            (decode(encode(y)) - y).abs()
        })
        .fold(0.0, f64::max)
}

/// Encoding of a value as a rotation probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseEncoding {
    #[default]
    Identity,
    Square,
}

impl PhaseEncoding {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            PhaseEncoding::Identity => x,
            PhaseEncoding::Square => x * x,
        }
    }

    /// Rotation angle `arcsin √β(x)` in `[0, π/2]`.
    pub fn angle(self, x: f64) -> f64 {
        self.apply(x).clamp(0.0, 1.0).sqrt().asin()
    }
}

/// `θ_j = arcsin √β(f(τ(j)))`.
pub fn theta_of(f: &OracleFunction, j: usize, beta: PhaseEncoding) -> Result<f64> {
    if j >= f.len() {
        return Err(contract(format!("index {j} out of range {}", f.len())));
    }
    Ok(beta.angle(f.queried(j)))
}

/// Phase query on `[index n, target 1]` with rotation angles given directly.
pub fn build_phase_query_from_angles(angles: &[f64]) -> Result<Operator> {
    if !angles.len().is_power_of_two() {
        return Err(contract(format!(
            "{} angles is not a power of two",
            angles.len()
        )));
    }
    let angles = angles.to_vec();
    let map = QubitRotationMap::from_fn(2 * angles.len(), 0, move |i0| angles[i0 >> 1])?;
    Ok(Arc::new(map))
}

/// Phase query on `[index n, target 1]`.
pub fn build_phase_query(f: &OracleFunction, beta: PhaseEncoding) -> Result<Operator> {
    let angles: Vec<f64> = (0..f.len()).map(|j| beta.angle(f.queried(j))).collect();
    build_phase_query_from_angles(&angles)
}

/// Bit query on `[index n, value m]`.
pub fn build_bit_query(f: &OracleFunction, enc: &BitEncoding) -> Result<Operator> {
    let m = enc.bits();
    let codes = (0..f.len())
        .map(|j| enc.encode(f.queried(j)))
        .collect::<Result<Vec<_>>>()?;
    let mask = (1usize << m) - 1;
    let map = PermutationMap::from_fn(f.len() << m, |i| {
        let (j, x) = (i >> m, i & mask);
        (j << m) | ((x + codes[j]) & mask)
    })?;
    Ok(Arc::new(map))
}

/// Boolean query on `[index n, target 1]`: the one-bit query with identity encoding.
pub fn build_boolean_query(f: &OracleFunction) -> Result<Operator> {
    build_bit_query(f, &BitEncoding::boolean())
}
