//! Space and operator arguments: inline generator specs or files.

use std::path::Path;
use std::sync::Arc;

use limitop::operator::{gen, read_operator, BandOperator};
use limitop::space::{Descriptor, Norm, Space, SpaceFile};
use limitop::{Error, Result, C64};

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_norm(s: &str) -> Result<Norm> {
    match s {
        "l1" => Ok(Norm::L1),
        "l2" => Ok(Norm::L2),
        "linf" => Ok(Norm::Linf),
        _ => Err(bad(format!("unknown norm `{s}` (l1, l2, linf)"))),
    }
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| bad(format!("expected LO..HI, got `{s}`")))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|_| bad(format!("bad bound `{t}`")));
    Ok((p(a)?, p(b)?))
}

/// `nat:MAX`, `lattice:LO..HI[,LO..HI...][:norm]`, `quadrant:MAX[:norm]`,
/// `box:M1xM2[,...][:SEP]`, or a path to a space file.
pub fn space_descriptor(spec: &str) -> Result<Descriptor> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad(format!("bad space spec `{spec}`")))?;
    let mut parts = rest.split(':');
    let first = parts.next().unwrap_or("");
    let second = parts.next();
    if parts.next().is_some() {
        return Err(bad(format!("too many fields in `{spec}`")));
    }
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad(format!("bad integer `{t}`")));
    match kind {
        "nat" if second.is_none() => Ok(Descriptor::NatWindow { max: int(first)? }),
        "lattice" => {
            let (lo, hi): (Vec<i64>, Vec<i64>) = first.split(',').map(parse_range).collect::<Result<Vec<_>>>()?.into_iter().unzip();
            Ok(Descriptor::Lattice { lo, hi, norm: second.map_or(Ok(Norm::L1), parse_norm)? })
        }
        "quadrant" => Ok(Descriptor::Quadrant { max: int(first)?, norm: second.map_or(Ok(Norm::L1), parse_norm)? }),
        "box" => {
            let components = first
                .split(',')
                .map(|c| c.split('x').map(int).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let separation = second.map_or(Ok(10), |s| s.parse::<u32>().map_err(|_| bad(format!("bad separation `{s}`"))))?;
            Ok(Descriptor::BoxSpace { components, separation })
        }
        _ => Err(bad(format!("unknown space spec `{spec}`"))),
    }
}

pub fn load_space(spec: &str) -> Result<Space> {
    if Path::new(spec).is_file() {
        return SpaceFile::load(spec);
    }
    Space::build(spec, space_descriptor(spec)?)
}

fn complex(s: &str) -> Result<C64> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once('/') {
        let p = |t: &str| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}`")));
        return Ok(C64::new(p(re)?, p(im)?));
    }
    s.parse::<f64>().map(|v| C64::new(v, 0.0)).map_err(|_| bad(format!("bad number `{s}`")))
}

/// Generator spec or operator file. Generators: `identity`, `zero`,
/// `scalar:C`, `shift[:STEP]`, `shift-minus-one`, `tridiag:DIAG:OFF`,
/// `stencil:H=V;H=V...` (offset coordinates joined by `:`, complex values
/// as `re/im`), `parity`, `ghost`, `sin-log`, `random:PROP[:K[:DENSITY]]`
/// (seeded by `seed`).
pub fn load_operator(spec: &str, space: Arc<Space>, seed: u64) -> Result<BandOperator> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return Ok(read_operator(&text, space)?.1);
    }
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let fields: Vec<&str> = if args.is_empty() { Vec::new() } else { args.split(':').collect() };
    let need = |n: usize| if fields.len() == n { Ok(()) } else { Err(bad(format!("`{name}` takes {n} argument(s)"))) };
    match name {
        "identity" => Ok(BandOperator::identity(space, 1)),
        "zero" => Ok(BandOperator::zero(space, 1)),
        "scalar" => {
            need(1)?;
            Ok(BandOperator::scalar_identity(space, 1, complex(fields[0])?))
        }
        "shift" => {
            let step = match fields.as_slice() {
                [] => 1,
                [s] => s.parse().map_err(|_| bad(format!("bad step `{s}`")))?,
                _ => return Err(bad("`shift` takes at most one argument")),
            };
            Ok(gen::shift(space, step))
        }
        "shift-minus-one" => {
            need(0)?;
            Ok(gen::shift(space, 1).shift_by(C64::new(-1.0, 0.0)))
        }
        "tridiag" => {
            need(2)?;
            Ok(gen::tridiagonal(space, complex(fields[0])?, complex(fields[1])?))
        }
        "stencil" => {
            let taps = args
                .split(';')
                .map(|t| {
                    let (h, v) = t.split_once('=').ok_or_else(|| bad(format!("bad tap `{t}`")))?;
                    let h = h.split(':').map(|c| c.trim().parse::<i64>().map_err(|_| bad(format!("bad offset `{h}`")))).collect::<Result<Vec<_>>>()?;
                    Ok((h, complex(v)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(gen::stencil(space, &taps))
        }
        "parity" => Ok(gen::parity(space)),
        "ghost" => Ok(gen::ghost(space)),
        "sin-log" => Ok(gen::sin_log(space)),
        "random" => {
            if fields.is_empty() || fields.len() > 3 {
                return Err(bad("`random` takes PROP[:K[:DENSITY]]"));
            }
            let prop = fields[0].parse().map_err(|_| bad("bad propagation"))?;
            let k = fields.get(1).map_or(Ok(1), |s| s.parse().map_err(|_| bad("bad block size")))?;
            let density = fields.get(2).map_or(Ok(1.0), |s| s.parse().map_err(|_| bad("bad density")))?;
            if !(1..=limitop::operator::MAX_BLOCK).contains(&k) {
                return Err(Error::BlockDim(k));
            }
            Ok(gen::random_sparse_band(space, k, prop, density, seed))
        }
        _ => Err(bad(format!("unknown operator `{spec}`"))),
    }
}
