use rand::Rng;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};
use updown_core::protein::{eval_h_theta, sample_dihedral, wrap_degrees, BackboneGeometry, DihedralTriple};
use updown_core::rng::{Domain, StreamKey};
use updown_core::tables::*;

#[test]
fn synthetic_files_round_trip_through_loaders() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec::default();
    let files = generate_synthetic_tables(&spec, 11, dir.path()).unwrap();
    let loaded = EnergyTables::load(&files.potential, &files.dihedrals, &files.closure).unwrap();
    assert_eq!(loaded, spec.tables(11).unwrap());
    assert_eq!(parse_pdb(&files.pdb).unwrap(), synthetic_mini_protein(&spec).clone_rounded());

    // Same seed, same bytes.
    let again = tempfile::tempdir().unwrap();
    generate_synthetic_tables(&spec, 11, again.path()).unwrap();
    for name in ["potential.tbl", "dihedral.tbl", "closure.tbl", "mini.pdb"] {
        assert_eq!(std::fs::read(dir.path().join(name)).unwrap(), std::fs::read(again.path().join(name)).unwrap());
    }
}

trait Rounded {
    fn clone_rounded(&self) -> Self;
}

impl Rounded for ProteinStructure {
    /// Coordinates as written with three decimals.
    fn clone_rounded(&self) -> Self {
        let mut s = self.clone();
        for a in &mut s.atoms {
            a.pos = a.pos.map(|v| format!("{v:.3}").parse().unwrap());
        }
        s
    }
}

#[test]
fn closure_max_is_steps_times_single_step_reach() {
    let g = BackboneGeometry::default();
    // Planar trans peptide, computed in 2-D.
    let (t1, t2) = (g.angle_ca_c_n.to_radians(), g.angle_c_n_ca.to_radians());
    let dx = g.c_n - g.n_ca * t2.cos() - g.ca_c * t1.cos();
    let dy = -g.n_ca * t2.sin() - g.ca_c * t1.sin();
    let single = (dx * dx + dy * dy).sqrt();
    let table = SyntheticSpec::default().closure().unwrap();
    for (k, row) in table.rows().iter().enumerate() {
        assert!((row.max_ca - (k + 1) as f64 * single).abs() < 1e-6, "row {k}");
        assert!(row.min_ca <= row.max_ca && row.min_c <= row.max_c);
    }
}

#[test]
fn loader_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tbl");
    std::fs::write(&path, "#! updown closure v1\ndata:\n0 1 2 3 4\n1 5 2 3 4\n").unwrap();
    assert!(matches!(load_closure_ranges(&path), Err(TableError::NonMonotoneRange { steps: 1, .. })));
    std::fs::write(
        &path,
        "#! updown potential v1\ntypes: C N\nbin_width: 0.5\nmax_distance: 5\ndata:\nC N 3 8\nN C 3 7\n",
    )
    .unwrap();
    assert!(matches!(load_potential_table(&path), Err(TableError::Asymmetry { .. })));
    assert!(matches!(load_dihedral_tables(&dir.path().join("missing")), Err(TableError::Io { .. })));
    std::fs::write(&path, "REMARK only\n").unwrap();
    assert!(matches!(parse_pdb(&path), Err(TableError::EmptyStructure)));
}

#[test]
fn omega_draws_have_the_table_mean_and_sd() {
    let d = DihedralDistribution::uniform();
    let mut rng = StreamKey::new(5).rng(Domain::Audit, 0, 0, 0);
    let n = 100_000;
    let offsets: Vec<f64> = (0..n).map(|_| wrap_degrees(sample_dihedral(&d, &mut rng).omega - 180.0)).collect();
    let mean = offsets.iter().sum::<f64>() / n as f64;
    let sd = (offsets.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!(mean.abs() <= 0.05, "mean offset {mean}");
    assert!((sd - 3.0).abs() <= 0.05, "sd {sd}");
}

#[test]
fn bin_frequencies_pass_chi_square() {
    let set = SyntheticSpec::default().dihedrals(3).unwrap();
    let d = set.get("LEU").unwrap();
    let mut rng = StreamKey::new(9).rng(Domain::Audit, 1, 0, 0);
    let n = 100_000;
    let mut counts = vec![0usize; BINS * BINS];
    for _ in 0..n {
        let t = sample_dihedral(d, &mut rng);
        counts[angle_bin(t.phi) * BINS + angle_bin(t.psi)] += 1;
    }
    // Bins expecting fewer than 5 draws are pooled.
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (i, &c) in counts.iter().enumerate() {
        let e = d.masses()[i] * n as f64;
        if e >= 5.0 {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pooled_obs += c as f64;
            pooled_exp += e;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi2 {stat} on {cells} cells, p = {p}");
}

#[test]
fn h_theta_matches_values_read_from_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let files = generate_synthetic_tables(&SyntheticSpec::default(), 21, dir.path()).unwrap();
    let set = load_dihedral_tables(&files.dihedrals).unwrap();

    // Independent reading of the raw text: the header line of ALA, then row φ.
    let text = std::fs::read_to_string(&files.dihedrals).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let head = lines.iter().position(|l| l.starts_with("> ALA")).unwrap();
    let cols: Vec<f64> = lines[head].split_whitespace().skip(2).map(|v| v.parse().unwrap()).collect();
    let omega = Normal::new(cols[0], cols[1]).unwrap();

    let mut rng = StreamKey::new(4).rng(Domain::Audit, 2, 0, 0);
    for _ in 0..500 {
        let t = DihedralTriple::new(
            rng.random_range(-180.0..180.0),
            rng.random_range(-180.0..180.0),
            rng.random_range(170.0..190.0),
        );
        let (p, q) = (((t.phi + 180.0) / 5.0).floor() as usize % 72, ((t.psi + 180.0) / 5.0).floor() as usize % 72);
        let mass: f64 = lines[head + 1 + p].split_whitespace().nth(q).unwrap().parse().unwrap();
        let omega_value = cols[0] + wrap_degrees(t.omega - cols[0]);
        let expected = -(mass / 25.0).ln() - omega.pdf(omega_value).ln();
        let got = eval_h_theta(&t, set.get("ALA").unwrap());
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{got} vs {expected}");
    }
}

#[test]
fn uniform_table_gives_constant_dihedral_term() {
    let d = DihedralDistribution::uniform();
    let first = eval_h_theta(&DihedralTriple::new(-60.0, -40.0, 180.0), &d);
    for (phi, psi) in [(0.0, 0.0), (179.0, -179.0), (-120.0, 130.0)] {
        assert_eq!(eval_h_theta(&DihedralTriple::new(phi, psi, 180.0), &d), first);
    }
}
