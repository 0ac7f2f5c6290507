//! Parsers for the small textual specs taken on the command line: coset
//! points, torsion pair distributions, and level group elements.

use std::str::FromStr;

use anyhow::{bail, Context, Result};
use num_rational::BigRational;
use polyeis_core::cusp::LevelGroupElement;
use polyeis_core::field::{rat, FieldElement, TotallyRealField};
use polyeis_core::nori::TorsionPairDistribution;

fn parse_ints(s: &str, expect: usize, what: &str) -> Result<Vec<i64>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != expect {
        bail!("{} needs {} comma-separated integers, got {}", what, expect, parts.len());
    }
    parts
        .iter()
        .map(|p| p.parse::<i64>().with_context(|| format!("bad integer '{}' in {}", p, what)))
        .collect()
}

/// "c0,c1": the torsion point (c0 + c1 w) / level.
pub fn parse_coset(f: &TotallyRealField, level: u32, s: &str) -> Result<FieldElement> {
    let n = level as i64;
    let c = parse_ints(s, 2, "coset")?;
    if f.degree() == 1 && c[1] != 0 {
        bail!("degree-one fields have no second coordinate");
    }
    Ok(f.el(rat(c[0], n), rat(c[1], n)))
}

/// "a0,a1,b0,b1:w;..." with integer pair coordinates over the level and
/// rational weights summing to zero.
pub fn parse_alpha(
    f: &TotallyRealField,
    level: u32,
    s: &str,
) -> Result<TorsionPairDistribution> {
    let n = level as i64;
    let mut raw = Vec::new();
    for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (coords, weight) = term
            .split_once(':')
            .with_context(|| format!("alpha term '{}' needs coords:weight", term))?;
        let c = parse_ints(coords, 4, "alpha coordinates")?;
        if f.degree() == 1 && (c[1] != 0 || c[3] != 0) {
            bail!("degree-one fields have no second coordinate");
        }
        let w = BigRational::from_str(weight.trim())
            .with_context(|| format!("bad rational weight '{}'", weight))?;
        raw.push((
            [f.el(rat(c[0], n), rat(c[1], n)), f.el(rat(c[2], n), rat(c[3], n))],
            w,
        ));
    }
    if raw.is_empty() {
        bail!("alpha needs at least one term");
    }
    TorsionPairDistribution::new(f, level, raw)
        .map_err(|e| anyhow::anyhow!("invalid alpha distribution: {}", e))
}

/// Eight integers row-major: [[a0+a1 w, b0+b1 w], [c0+c1 w, d0+d1 w]]
/// reduced mod the level; the determinant must be invertible.
pub fn parse_cusp(f: &TotallyRealField, level: u32, s: &str) -> Result<LevelGroupElement> {
    let c = parse_ints(s, 8, "cusp")?;
    let entries = [(c[0], c[1]), (c[2], c[3]), (c[4], c[5]), (c[6], c[7])];
    LevelGroupElement::new(f, level, entries)
        .map_err(|e| anyhow::anyhow!("invalid level group element: {}", e))
}

/// Compact display of a field element in the power basis.
pub fn el_str(x: &FieldElement) -> String {
    use num_traits::Zero;
    let c0 = &x.c0;
    let c1 = &x.c1;
    if c1.is_zero() {
        return format!("{}", c0);
    }
    let wpart = if c1 == &rat(1, 1) {
        "w".to_string()
    } else if c1 == &rat(-1, 1) {
        "-w".to_string()
    } else {
        format!("{}w", c1)
    };
    if c0.is_zero() {
        wpart
    } else if wpart.starts_with('-') {
        format!("{}{}", c0, wpart)
    } else {
        format!("{}+{}", c0, wpart)
    }
}

pub fn group_element_str(h: &LevelGroupElement) -> String {
    let e = |p: (i64, i64)| {
        let w = match p.1 {
            0 => String::new(),
            1 => String::from("w"),
            c => format!("{}w", c),
        };
        if w.is_empty() {
            format!("{}", p.0)
        } else if p.0 == 0 {
            w
        } else {
            format!("{}+{}", p.0, w)
        }
    };
    format!(
        "[{}, {}; {}, {}]",
        e(h.entries[0]),
        e(h.entries[1]),
        e(h.entries[2]),
        e(h.entries[3])
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_and_alpha_parse() {
        let f = TotallyRealField::qsqrt2();
        let x = parse_coset(&f, 3, "1, 2").unwrap();
        assert_eq!(el_str(&x), "1/3+2/3w");
        let a = parse_alpha(&f, 3, "1,0,0,0:1; 0,0,0,1:-1").unwrap();
        assert_eq!(a.pairs().len(), 2);
        assert!(parse_alpha(&f, 3, "1,0,0,0:1").is_err());
        assert!(parse_alpha(&f, 3, "1,0,0,0:x").is_err());
        assert!(parse_coset(&f, 3, "1").is_err());
    }

    #[test]
    fn cusp_parse_validates_determinant() {
        let f = TotallyRealField::qsqrt2();
        assert!(parse_cusp(&f, 3, "0,0,0,1,0,1,0,0").is_ok());
        // zero determinant
        assert!(parse_cusp(&f, 3, "1,0,1,0,1,0,1,0").is_err());
    }
}
