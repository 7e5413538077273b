use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Storage dtypes understood by the safetensors container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dtype {
    F32,
    F16,
    BF16,
    F64,
    I64,
    I32,
    I16,
    I8,
    U8,
    Bool,
}

impl Dtype {
    pub const ALL: [Dtype; 10] = [
        Dtype::F32,
        Dtype::F16,
        Dtype::BF16,
        Dtype::F64,
        Dtype::I64,
        Dtype::I32,
        Dtype::I16,
        Dtype::I8,
        Dtype::U8,
        Dtype::Bool,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::F32 => "F32",
            Dtype::F16 => "F16",
            Dtype::BF16 => "BF16",
            Dtype::F64 => "F64",
            Dtype::I64 => "I64",
            Dtype::I32 => "I32",
            Dtype::I16 => "I16",
            Dtype::I8 => "I8",
            Dtype::U8 => "U8",
            Dtype::Bool => "BOOL",
        }
    }

    pub fn byte_width(self) -> usize {
        match self {
            Dtype::F64 | Dtype::I64 => 8,
            Dtype::F32 | Dtype::I32 => 4,
            Dtype::F16 | Dtype::BF16 | Dtype::I16 => 2,
            Dtype::I8 | Dtype::U8 | Dtype::Bool => 1,
        }
    }

    /// Float tensors are weights and take part in merges; everything else is
    /// an index or mask.
    pub fn is_float(self) -> bool {
        matches!(self, Dtype::F32 | Dtype::F16 | Dtype::BF16 | Dtype::F64)
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dtype::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::MalformedHeader(format!("unknown dtype `{s}`")))
    }
}

/// F32 -> BF16 with round-to-nearest-even on the dropped 16 mantissa bits.
pub fn f32_to_bf16_bits(value: f32) -> u16 {
    let bits = value.to_bits();
    if value.is_nan() {
        // keep the sign and force a quiet NaN so truncation cannot produce inf
        return ((bits >> 16) as u16) | 0x0040;
    }
    let rounding_bias = 0x7FFF + ((bits >> 16) & 1);
    (bits.wrapping_add(rounding_bias) >> 16) as u16
}

pub fn bf16_bits_to_f32(bits: u16) -> f32 {
    f32::from_bits((bits as u32) << 16)
}

/// F32 -> IEEE-754 binary16, round-to-nearest-even, overflow to infinity.
pub fn f32_to_f16_bits(value: f32) -> u16 {
    let x = value.to_bits();
    let sign = ((x >> 16) & 0x8000) as u16;
    let exp = ((x >> 23) & 0xFF) as i32;
    let man = x & 0x007F_FFFF;

    if exp == 0xFF {
        if man == 0 {
            return sign | 0x7C00;
        }
        return sign | 0x7E00 | (man >> 13) as u16;
    }

    let half_exp = exp - 127 + 15;
    if half_exp >= 0x1F {
        return sign | 0x7C00;
    }

    if half_exp <= 0 {
        // subnormal half (or zero): value = m * 2^(exp - 150), unit 2^-24
        let shift = (14 - half_exp) as u32;
        if shift > 24 {
            return sign;
        }
        let m = man | 0x0080_0000;
        let q = m >> shift;
        let rem = m & ((1 << shift) - 1);
        let halfway = 1 << (shift - 1);
        let round_up = rem > halfway || (rem == halfway && (q & 1) == 1);
        return sign | (q + round_up as u32) as u16;
    }

    let mut h = ((half_exp as u32) << 10) | (man >> 13);
    let rem = man & 0x1FFF;
    if rem > 0x1000 || (rem == 0x1000 && (h & 1) == 1) {
        // a carry out of the mantissa bumps the exponent, up to infinity
        h += 1;
    }
    sign | h as u16
}

pub fn f16_bits_to_f32(bits: u16) -> f32 {
    let sign = ((bits & 0x8000) as u32) << 16;
    let exp = ((bits >> 10) & 0x1F) as u32;
    let man = (bits & 0x03FF) as u32;

    let out = match (exp, man) {
        (0, 0) => sign,
        (0, _) => {
            // subnormal: normalise into an f32 exponent
            let mut e: i32 = -14;
            let mut m = man;
            while m & 0x0400 == 0 {
                m <<= 1;
                e -= 1;
            }
            sign | (((e + 127) as u32) << 23) | ((m & 0x03FF) << 13)
        }
        (0x1F, 0) => sign | 0x7F80_0000,
        (0x1F, _) => sign | 0x7FC0_0000 | (man << 13),
        _ => sign | ((exp + 127 - 15) << 23) | (man << 13),
    };
    f32::from_bits(out)
}

/// Narrow a working-precision value to the bit pattern stored for `target`.
///
/// Float targets only; the result is zero-extended to 64 bits.
pub fn convert_dtype(value: f32, target: Dtype) -> Result<u64> {
    Ok(match target {
        Dtype::F32 => value.to_bits() as u64,
        Dtype::F16 => f32_to_f16_bits(value) as u64,
        Dtype::BF16 => f32_to_bf16_bits(value) as u64,
        Dtype::F64 => (value as f64).to_bits(),
        other => {
            return Err(Error::UnsupportedDtype {
                name: String::new(),
                dtype: other.to_string(),
            })
        }
    })
}

/// Decode little-endian storage bytes into working precision, appending to `out`.
/// `bytes.len()` must be a multiple of the dtype width.
pub(crate) fn decode_into(dtype: Dtype, bytes: &[u8], out: &mut Vec<f32>) {
    debug_assert_eq!(bytes.len() % dtype.byte_width(), 0);
    match dtype {
        Dtype::F32 => out.extend(
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])),
        ),
        Dtype::F16 => out.extend(
            bytes
                .chunks_exact(2)
                .map(|c| f16_bits_to_f32(u16::from_le_bytes([c[0], c[1]]))),
        ),
        Dtype::BF16 => out.extend(
            bytes
                .chunks_exact(2)
                .map(|c| bf16_bits_to_f32(u16::from_le_bytes([c[0], c[1]]))),
        ),
        Dtype::F64 => out.extend(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()) as f32),
        ),
        Dtype::I64 => out.extend(
            bytes
                .chunks_exact(8)
                .map(|c| i64::from_le_bytes(c.try_into().unwrap()) as f32),
        ),
        Dtype::I32 => out.extend(
            bytes
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()) as f32),
        ),
        Dtype::I16 => out.extend(
            bytes
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32),
        ),
        Dtype::I8 => out.extend(bytes.iter().map(|&b| b as i8 as f32)),
        Dtype::U8 => out.extend(bytes.iter().map(|&b| b as f32)),
        Dtype::Bool => out.extend(bytes.iter().map(|&b| (b != 0) as u8 as f32)),
    }
}

/// Encode working-precision values into little-endian storage bytes.
pub(crate) fn encode_into(dtype: Dtype, values: &[f32], out: &mut Vec<u8>) {
    out.reserve(values.len() * dtype.byte_width());
    match dtype {
        Dtype::F32 => values
            .iter()
            .for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        Dtype::F16 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&f32_to_f16_bits(v).to_le_bytes())),
        Dtype::BF16 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&f32_to_bf16_bits(v).to_le_bytes())),
        Dtype::F64 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as f64).to_le_bytes())),
        Dtype::I64 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as i64).to_le_bytes())),
        Dtype::I32 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as i32).to_le_bytes())),
        Dtype::I16 => values
            .iter()
            .for_each(|&v| out.extend_from_slice(&(v as i16).to_le_bytes())),
        Dtype::I8 => values.iter().for_each(|&v| out.push(v as i8 as u8)),
        Dtype::U8 => values.iter().for_each(|&v| out.push(v as u8)),
        Dtype::Bool => values.iter().for_each(|&v| out.push((v != 0.0) as u8)),
    }
}
