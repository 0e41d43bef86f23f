use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use super::format::{fmt_f64, parse_f64, TableText};
use super::{read_text, write_text, TableError};

/// Bins per angle; each bin spans 5 degrees starting at -180.
pub const BINS: usize = 72;
pub const BIN_DEGREES: f64 = 360.0 / BINS as f64;

const RENORMALIZE_TOLERANCE: f64 = 1e-6;
const EXACT_TOLERANCE: f64 = 1e-12;

/// Empirical (φ, ψ) bin masses of one amino acid, row index φ, plus the
/// normal distribution of ω.
#[derive(Debug, Clone, PartialEq)]
pub struct DihedralDistribution {
    mass: Vec<f64>,
    cumulative: Vec<f64>,
    pub omega_mean: f64,
    pub omega_sd: f64,
}

impl DihedralDistribution {
    /// Validates and, within the tolerance, renormalizes `mass` (row-major,
    /// `BINS * BINS` entries).
    pub fn new(residue: &str, mass: Vec<f64>, omega_mean: f64, omega_sd: f64) -> Result<Self, TableError> {
        if mass.len() != BINS * BINS {
            return Err(TableError::Dimension(format!("{residue}: {} cells, expected {}", mass.len(), BINS * BINS)));
        }
        if let Some(v) = mass.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(TableError::Dimension(format!("{residue}: invalid bin mass {v}")));
        }
        if !(omega_sd > 0.0 && omega_sd.is_finite() && omega_mean.is_finite()) {
            return Err(TableError::Dimension(format!(
                "{residue}: invalid omega parameters ({omega_mean}, {omega_sd})"
            )));
        }
        let sum: f64 = mass.iter().sum();
        let mass = if (sum - 1.0).abs() <= EXACT_TOLERANCE {
            mass
        } else if (sum - 1.0).abs() < RENORMALIZE_TOLERANCE {
            mass.into_iter().map(|v| v / sum).collect()
        } else {
            return Err(TableError::Normalization { residue: residue.to_string(), sum });
        };
        let mut acc = 0.0;
        let cumulative = mass
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Ok(Self { mass, cumulative, omega_mean, omega_sd })
    }

    pub fn uniform() -> Self {
        Self::new("uniform", vec![1.0 / (BINS * BINS) as f64; BINS * BINS], 180.0, 3.0).expect("uniform table")
    }

    pub fn mass(&self, phi_bin: usize, psi_bin: usize) -> f64 {
        self.mass[phi_bin * BINS + psi_bin]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Flat bin index for a uniform `u` in [0, 1); zero-mass bins are never
    /// returned.
    pub fn bin_for_uniform(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let target = u * total;
        let i = self.cumulative.partition_point(|&c| c <= target).min(BINS * BINS - 1);
        // Skip trailing zero-mass bins that share the last cumulative value.
        if self.mass[i] > 0.0 {
            i
        } else {
            (0..=i).rev().find(|&j| self.mass[j] > 0.0).expect("positive mass")
        }
    }
}

/// Bin of an angle in degrees; 180 shares bin 0 with -180.
pub fn angle_bin(a: f64) -> usize {
    (((a + 180.0) / BIN_DEGREES).floor() as i64).rem_euclid(BINS as i64) as usize
}

/// Dihedral distributions keyed by three-letter residue name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DihedralDistributionSet {
    tables: BTreeMap<String, DihedralDistribution>,
}

impl DihedralDistributionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, residue: impl Into<String>, dist: DihedralDistribution) {
        self.tables.insert(residue.into(), dist);
    }

    pub fn get(&self, residue: &str) -> Option<&DihedralDistribution> {
        self.tables.get(residue)
    }

    pub fn residues(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

/// Body: for each residue a line `> RES omega_mean omega_sd` followed by
/// 72 rows (φ bins) of 72 masses (ψ bins).
pub fn load_dihedral_tables(path: &Path) -> Result<DihedralDistributionSet, TableError> {
    parse_dihedral(&read_text(path)?)
}

pub(crate) fn parse_dihedral(text: &str) -> Result<DihedralDistributionSet, TableError> {
    let doc = TableText::parse(text, "dihedral")?;
    if let Some((n, b)) = doc.get("bins") {
        if b != BINS.to_string() {
            return Err(TableError::parse(n, format!("only {BINS} bins per angle are supported, found {b}")));
        }
    }
    let mut set = DihedralDistributionSet::new();
    let mut lines = doc.body.iter().peekable();
    while let Some(&(n, line)) = lines.next() {
        let head = line
            .strip_prefix('>')
            .ok_or_else(|| TableError::parse(n, format!("expected `> RES omega_mean omega_sd`, found `{line}`")))?;
        let cols: Vec<&str> = head.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(TableError::parse(n, "expected `> RES omega_mean omega_sd`"));
        }
        let residue = cols[0];
        if set.get(residue).is_some() {
            return Err(TableError::parse(n, format!("residue {residue} listed twice")));
        }
        let (mean, sd) = (parse_f64(n, cols[1])?, parse_f64(n, cols[2])?);
        let mut mass = Vec::with_capacity(BINS * BINS);
        for row in 0..BINS {
            let &(rn, rline) = match lines.peek() {
                Some(l) if !l.1.starts_with('>') => lines.next().unwrap(),
                _ => return Err(TableError::Dimension(format!("{residue}: {row} rows, expected {BINS}"))),
            };
            let before = mass.len();
            for v in rline.split_whitespace() {
                mass.push(parse_f64(rn, v)?);
            }
            if mass.len() - before != BINS {
                return Err(TableError::Dimension(format!(
                    "{residue}: line {rn} has {} columns, expected {BINS}",
                    mass.len() - before
                )));
            }
        }
        if let Some(&&(rn, l)) = lines.peek() {
            if !l.starts_with('>') {
                return Err(TableError::Dimension(format!("{residue}: extra row at line {rn}, expected {BINS} rows")));
            }
        }
        set.insert(residue, DihedralDistribution::new(residue, mass, mean, sd)?);
    }
    Ok(set)
}

pub(crate) fn format_dihedral(set: &DihedralDistributionSet) -> String {
    let mut out = format!("#! updown dihedral v1\nbins: {BINS}\ndata:\n");
    for (residue, d) in &set.tables {
        writeln!(out, "> {residue} {} {}", fmt_f64(d.omega_mean), fmt_f64(d.omega_sd)).unwrap();
        for row in d.mass.chunks(BINS) {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn write_dihedral_tables(set: &DihedralDistributionSet, path: &Path) -> Result<(), TableError> {
    write_text(path, &format_dihedral(set))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(entries: &[(&str, f64)]) -> String {
        let mut s = String::from("#! updown dihedral v1\nbins: 72\ndata:\n");
        for (res, cell) in entries {
            s.push_str(&format!("> {res} 180 3\n"));
            for _ in 0..BINS {
                s.push_str(&vec![cell.to_string(); BINS].join(" "));
                s.push('\n');
            }
        }
        s
    }

    #[test]
    fn uniform_file_loads_as_uniform() {
        let set = parse_dihedral(&file(&[("ALA", 1.0 / 5184.0), ("GLY", 1.0 / 5184.0)])).unwrap();
        assert_eq!(set.len(), 2);
        let d = set.get("GLY").unwrap();
        assert!(d.masses().iter().all(|&v| (v - 1.0 / 5184.0).abs() < 1e-18));
    }

    #[test]
    fn small_deficit_is_renormalized_large_is_rejected() {
        let set = parse_dihedral(&file(&[("ALA", 0.9999995 / 5184.0)])).unwrap();
        let sum: f64 = set.get("ALA").unwrap().masses().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let err = parse_dihedral(&file(&[("ALA", 0.99 / 5184.0)])).unwrap_err();
        assert!(matches!(err, TableError::Normalization { .. }));
    }

    #[test]
    fn wrong_dimensions_are_rejected() {
        let mut text = file(&[("ALA", 1.0 / 5184.0)]);
        text.push_str("0.0\n");
        assert!(matches!(parse_dihedral(&text), Err(TableError::Dimension(_))));
        let short: String = file(&[("ALA", 1.0 / 5184.0)]).lines().take(40).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_dihedral(&short), Err(TableError::Dimension(_))));
    }

    #[test]
    fn angle_bins() {
        assert_eq!(angle_bin(-180.0), 0);
        assert_eq!(angle_bin(180.0), 0);
        assert_eq!(angle_bin(-175.0), 1);
        assert_eq!(angle_bin(0.0), 36);
        assert_eq!(angle_bin(4.999), 36);
        assert_eq!(angle_bin(179.9), 71);
    }

    #[test]
    fn bin_lookup_skips_empty_bins() {
        let mut mass = vec![0.0; BINS * BINS];
        mass[100] = 0.25;
        mass[2000] = 0.75;
        let d = DihedralDistribution::new("X", mass, 180.0, 3.0).unwrap();
        assert_eq!(d.bin_for_uniform(0.0), 100);
        assert_eq!(d.bin_for_uniform(0.2499), 100);
        assert_eq!(d.bin_for_uniform(0.25), 2000);
        assert_eq!(d.bin_for_uniform(0.999_999_999), 2000);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut set = DihedralDistributionSet::new();
        let raw: Vec<f64> = (0..BINS * BINS).map(|i| ((i * 7919) % 101) as f64 + 0.5).collect();
        let sum: f64 = raw.iter().sum();
        set.insert("LEU", DihedralDistribution::new("LEU", raw.iter().map(|v| v / sum).collect(), 179.5, 2.5).unwrap());
        set.insert("ALA", DihedralDistribution::uniform());
        assert_eq!(parse_dihedral(&format_dihedral(&set)).unwrap(), set);
    }
}
