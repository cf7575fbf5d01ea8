//! Operator files: one JSON header line, then `x,y,re,im[,re,im...]` rows.
//! Floats are written in shortest round-trip form, so reading back is exact.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::BandOperator;
use crate::error::{Error, Result};
use crate::space::Space;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorHeader {
    pub space: String,
    pub block_dim: usize,
    pub p: f64,
}

pub fn write_operator(a: &BandOperator, p: f64) -> String {
    let header = OperatorHeader { space: a.space().name().to_string(), block_dim: a.block_dim(), p };
    let mut out = serde_json::to_string(&header).expect("header serialises");
    out.push('\n');
    for (x, y, b) in a.entries() {
        write!(out, "{x},{y}").unwrap();
        for z in b {
            write!(out, ",{:?},{:?}", z.re, z.im).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_operator(text: &str, space: Arc<Space>) -> Result<(OperatorHeader, BandOperator)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::Parse("empty operator file".into()))?;
    let header: OperatorHeader = serde_json::from_str(head)?;
    if header.space != space.name() {
        return Err(Error::SpaceMismatch);
    }
    let k = header.block_dim;
    let mut trip = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 2));
        if fields.len() != 2 + 2 * k * k {
            return Err(bad(&format!("expected {} fields, found {}", 2 + 2 * k * k, fields.len())));
        }
        let x: usize = fields[0].parse().map_err(|_| bad("bad row index"))?;
        let y: usize = fields[1].parse().map_err(|_| bad("bad column index"))?;
        let mut block = Vec::with_capacity(k * k);
        for pair in fields[2..].chunks(2) {
            let re: f64 = pair[0].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = pair[1].parse().map_err(|_| bad("bad imaginary part"))?;
            block.push(C64::new(re, im));
        }
        trip.push((x, y, block));
    }
    Ok((header, BandOperator::from_blocks(space, k, trip)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::gen;
    use crate::space::{Descriptor, Norm};

    #[test]
    fn exact_round_trip() {
        let s = Arc::new(Space::build("z", Descriptor::Lattice { lo: vec![0], hi: vec![15], norm: Norm::L1 }).unwrap());
        for k in [1, 3] {
            let a = gen::random_band(s.clone(), k, 2, 11);
            let text = write_operator(&a, 2.0);
            let (h, b) = read_operator(&text, s.clone()).unwrap();
            assert_eq!(h.block_dim, k);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn wrong_space_rejected() {
        let s = Arc::new(Space::build("z", Descriptor::NatWindow { max: 3 }).unwrap());
        let t = Arc::new(Space::build("other", Descriptor::NatWindow { max: 3 }).unwrap());
        let text = write_operator(&BandOperator::identity(s, 1), 2.0);
        assert_eq!(read_operator(&text, t).unwrap_err(), Error::SpaceMismatch);
    }
}
