//! File formats: the `DYEX` binary dump, coupling table files and numeric grids.

use std::io::{Read, Write};
use std::path::Path;

use dyson_core::model::{CouplingFamily, TailRule};

use crate::error::{LabError, LabResult};

pub const DYEX_MAGIC: &[u8; 4] = b"DYEX";
pub const DYEX_VERSION: u32 = 1;
const DYEX_HEADER_BYTES: usize = 4 + 4 + 4 + 8 + 8;

/// Header and payload of a `DYEX` dump: `2^n` little-endian reals indexed by packed bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub n: u32,
    pub beta: f64,
    pub mask_id: i64,
    pub values: Vec<f64>,
}

impl Dump {
    pub fn new(n: usize, beta: f64, mask_id: i64, values: Vec<f64>) -> LabResult<Dump> {
        if n >= 64 || values.len() != 1usize << n {
            return Err(LabError::Format(format!(
                "a DYEX payload for n = {n} needs 2^n values, got {}",
                values.len()
            )));
        }
        Ok(Dump {
            n: n as u32,
            beta,
            mask_id,
            values,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(DYEX_HEADER_BYTES + 8 * self.values.len());
        out.extend_from_slice(DYEX_MAGIC);
        out.extend_from_slice(&DYEX_VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.beta.to_le_bytes());
        out.extend_from_slice(&self.mask_id.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> LabResult<Dump> {
        if bytes.len() < DYEX_HEADER_BYTES || &bytes[..4] != DYEX_MAGIC {
            return Err(LabError::Format("not a DYEX dump".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != DYEX_VERSION {
            return Err(LabError::Format(format!(
                "unsupported DYEX version {version}"
            )));
        }
        let n = u32_at(8);
        let beta = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let mask_id = i64::from_le_bytes(bytes[20..28].try_into().unwrap());
        if n >= 40 {
            return Err(LabError::Format(format!(
                "DYEX dimension n = {n} is implausible"
            )));
        }
        let len = 1usize << n;
        if bytes.len() != DYEX_HEADER_BYTES + 8 * len {
            return Err(LabError::Format(format!(
                "DYEX payload has {} bytes, expected {}",
                bytes.len() - DYEX_HEADER_BYTES,
                8 * len
            )));
        }
        let values = bytes[DYEX_HEADER_BYTES..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Dump {
            n,
            beta,
            mask_id,
            values,
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn read_from(r: &mut impl Read) -> LabResult<Dump> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| LabError::io("reading DYEX dump", e))?;
        Dump::from_bytes(&bytes)
    }
}

/// Parses a coupling table file.
///
/// The first non-comment line declares the tail rule, either `tail zero` or
/// `tail power-law <alpha> <scale>`. Every following line is a `k value` pair with
/// `k = 1, 2, ...` in order. `#` starts a comment.
pub fn parse_coupling_table(text: &str, path: &Path) -> LabResult<CouplingFamily> {
    let err = |line: usize, message: String| LabError::Input {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut tail: Option<TailRule> = None;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if tail.is_none() {
            tail = Some(match fields.as_slice() {
                ["tail", "zero"] => TailRule::Zero,
                ["tail", "power-law", a, s] => TailRule::PowerLaw {
                    alpha: a
                        .parse()
                        .map_err(|_| err(line, format!("malformed alpha `{a}`")))?,
                    scale: s
                        .parse()
                        .map_err(|_| err(line, format!("malformed scale `{s}`")))?,
                },
                _ => {
                    return Err(err(
                        line,
                        "expected a header `tail zero` or `tail power-law <alpha> <scale>`".into(),
                    ))
                }
            });
            continue;
        }
        let [k, v] = fields.as_slice() else {
            return Err(err(line, format!("expected `k value`, found `{content}`")));
        };
        let k: usize = k
            .parse()
            .map_err(|_| err(line, format!("malformed distance `{k}`")))?;
        if k != values.len() + 1 {
            return Err(err(
                line,
                format!("distance {k} out of order, expected {}", values.len() + 1),
            ));
        }
        let v: f64 = v
            .parse()
            .map_err(|_| err(line, format!("malformed coupling `{v}`")))?;
        values.push(v);
    }
    let tail = tail.ok_or_else(|| err(1, "missing tail header".into()))?;
    if values.is_empty() {
        return Err(err(1, "the table has no entries".into()));
    }
    Ok(CouplingFamily::table(values, tail)?)
}

/// Parses `a:b:h` (inclusive grid), `a..b` (inclusive integer range) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let a = parse_num(a)?;
        let b = parse_num(b.trim_start_matches('='))?;
        if a.fract() != 0.0 || b.fract() != 0.0 {
            return Err(format!("range `{t}` needs integer endpoints"));
        }
        let (a, b) = (a as i64, b as i64);
        if b < a {
            return Err(format!("empty range `{t}`"));
        }
        return Ok((a..=b).map(|v| v as f64).collect());
    }
    let parts: Vec<&str> = t.split(':').collect();
    match parts.as_slice() {
        [a, b, h] => {
            let (a, b, h) = (parse_num(a)?, parse_num(b)?, parse_num(h)?);
            if !(h > 0.0) || b < a {
                return Err(format!(
                    "grid `{t}` needs start <= stop and a positive step"
                ));
            }
            let steps = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=steps).map(|i| a + i as f64 * h).collect())
        }
        [_] => t.split(',').map(parse_num).collect(),
        _ => Err(format!(
            "cannot parse grid `{t}`; use start:stop:step, a..b or a comma list"
        )),
    }
}

/// Like [`parse_grid`], for nonnegative integers.
pub fn parse_usize_grid(text: &str) -> Result<Vec<usize>, String> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(format!("`{v}` is not a nonnegative integer"))
            }
        })
        .collect()
}

fn parse_num(s: &str) -> Result<f64, String> {
    let s = s.trim();
    s.parse::<f64>()
        .map_err(|_| format!("malformed number `{s}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let d = Dump::new(3, 0.25, -1, (0..8).map(|i| i as f64 / 7.0).collect()).unwrap();
        let bytes = d.to_bytes();
        assert_eq!(&bytes[..4], b"DYEX");
        assert_eq!(bytes.len(), 28 + 64);
        assert_eq!(Dump::from_bytes(&bytes).unwrap(), d);
        assert!(Dump::from_bytes(&bytes[..40]).is_err());
        assert!(Dump::new(3, 0.0, 0, vec![0.0; 7]).is_err());
    }

    #[test]
    fn coupling_table_parses() {
        let j = parse_coupling_table(
            "# nn plus next\ntail zero\n1 1.0\n2 0.5 # second\n",
            Path::new("t"),
        )
        .unwrap();
        assert_eq!(j.j(2), 0.5);
        assert_eq!(j.j(3), 0.0);
        let j = parse_coupling_table("tail power-law 2 1\n1 1\n", Path::new("t")).unwrap();
        assert!((j.j(4) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn coupling_table_errors_carry_lines() {
        let e = parse_coupling_table("tail zero\n1 1.0\n3 0.2\n", Path::new("t")).unwrap_err();
        assert!(matches!(e, LabError::Input { line: 3, .. }), "{e:?}");
        let e = parse_coupling_table("tail zero\n1 x\n", Path::new("t")).unwrap_err();
        assert!(matches!(e, LabError::Input { line: 2, .. }));
        let e = parse_coupling_table("1 1.0\n", Path::new("t")).unwrap_err();
        assert!(matches!(e, LabError::Input { line: 1, .. }));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:0.6:0.1").unwrap().len(), 7);
        assert!((parse_grid("0:0.6:0.1").unwrap()[6] - 0.6).abs() < 1e-15);
        assert_eq!(
            parse_usize_grid("4..12").unwrap(),
            (4..=12).collect::<Vec<_>>()
        );
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_usize_grid("1.5").is_err());
    }
}
