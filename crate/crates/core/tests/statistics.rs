use nalgebra::{Rotation3, Unit};
use rand::Rng;
use updown_core::models::{enumerate_exact, HmmStatistic, ToyHmm};
use updown_core::protein::*;
use updown_core::rng::{Domain, StreamKey, StreamRng};
use updown_core::smc::FnStatistic;
use updown_core::statistics::*;
use updown_core::tables::{synthetic_mini_protein, SyntheticSpec};
use updown_core::*;

fn rng(a: u64) -> StreamRng {
    StreamKey::new(77).rng(Domain::Audit, a, 0, 0)
}

fn cloud(r: &mut StreamRng, n: usize) -> Vec<SiteAtom> {
    let roles = [BackboneRole::N, BackboneRole::CA, BackboneRole::C, BackboneRole::O, BackboneRole::Other];
    (0..n)
        .map(|i| SiteAtom {
            pos: Vec3::new(r.random_range(0.0..25.0), r.random_range(0.0..25.0), r.random_range(0.0..25.0)),
            kind: 0,
            chain: 'A',
            res_seq: (i / 5) as i32,
            role: roles[i % 5],
        })
        .collect()
}

#[test]
fn grid_contacts_equal_brute_force() {
    for seed in 0..100 {
        let mut r = rng(seed);
        let atoms = cloud(&mut r, 1000);
        let counter = ContactCounter::new(atoms.clone(), 7.0);
        for res in [0, 17, 101, 199] {
            let spec = ContactSpec::new('A', res);
            assert_eq!(counter.contacts(&spec).unwrap(), atomic_contacts(&atoms, &spec).unwrap());
        }
    }
}

#[test]
fn contacts_grow_with_radius_and_ignore_rigid_motion() {
    let mut r = rng(500);
    let atoms = cloud(&mut r, 600);
    let spec = ContactSpec::new('A', 40);
    let mut last = 0;
    for radius in [0.5, 2.0, 4.0, 7.0, 9.0, 15.0] {
        let n = atomic_contacts(&atoms, &ContactSpec { radius, ..spec }).unwrap();
        assert!(n >= last);
        last = n;
    }
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(0.3, -1.0, 0.5)), 1.1);
    let shift = Vec3::new(5.0, -20.0, 3.0);
    let moved: Vec<SiteAtom> = atoms.iter().map(|a| SiteAtom { pos: rot * a.pos + shift, ..*a }).collect();
    assert_eq!(atomic_contacts(&atoms, &spec).unwrap(), atomic_contacts(&moved, &spec).unwrap());
    let (d0, d1) = (ca_distance(&atoms, 'A', 3, 90).unwrap(), ca_distance(&moved, 'A', 3, 90).unwrap());
    assert!((d0 - d1).abs() < 1e-9);
}

#[test]
fn ca_distances_match_a_distance_matrix() {
    let spec = SyntheticSpec::default();
    let s = synthetic_mini_protein(&spec);
    let cas: Vec<_> = s.atoms.iter().filter(|a| a.name == "CA").collect();
    let atoms: Vec<SiteAtom> = s
        .atoms
        .iter()
        .map(|a| SiteAtom {
            pos: a.pos,
            kind: 0,
            chain: a.chain,
            res_seq: a.res_seq,
            role: BackboneRole::from_name(&a.name),
        })
        .collect();
    for a in &cas {
        for b in &cas {
            let d = ((a.pos.x - b.pos.x).powi(2) + (a.pos.y - b.pos.y).powi(2) + (a.pos.z - b.pos.z).powi(2)).sqrt();
            assert!((ca_distance(&atoms, 'A', a.res_seq, b.res_seq).unwrap() - d).abs() < 1e-12);
        }
    }
}

fn mini_model() -> ProteinModel {
    let spec = SyntheticSpec::default();
    let tables = spec.tables(1).unwrap();
    let problem =
        SegmentProblem::from_structure(&synthetic_mini_protein(&spec), 'A', 10, 6, &HostOptions::default()).unwrap();
    ProteinModel::new(problem, &tables, BackboneGeometry::default()).unwrap()
}

#[test]
fn segment_contacts_count_host_and_segment_atoms() {
    let model = mini_model();
    let run = run_updown_smc(&model, 200, 20, 4).unwrap();
    let mut stats = SegmentStatistics::placed_contacts(&model, 7.0);
    assert_eq!(stats.labels(), ["n(CA_11)", "n(CA_12)", "n(CA_13)", "n(CA_14)", "n(CA_15)", "n(CA_16)"]);
    for p in run.ensemble.particles().iter().take(20) {
        let all: Vec<SiteAtom> =
            model.segment_atoms(&p.path).into_iter().chain(model.host_atoms().iter().copied()).collect();
        let got = stats.eval(&p.path);
        for (k, res) in (11..=16).enumerate() {
            assert_eq!(got[k], atomic_contacts(&all, &ContactSpec::new('A', res)).unwrap() as f64);
        }
    }
    stats.include_segment = false;
    let p = &run.ensemble.particles()[0];
    let host_only = stats.eval(&p.path);
    let with_segment = SegmentStatistics::placed_contacts(&model, 7.0).eval(&p.path);
    assert!(host_only.iter().zip(&with_segment).all(|(a, b)| a <= b));
    assert!(host_only.iter().zip(&with_segment).any(|(a, b)| a < b));
}

#[test]
fn averages_are_linear_and_exact_for_constants() {
    let model = mini_model();
    let run = run_updown_smc(&model, 200, 20, 8).unwrap();
    let stats = SegmentStatistics::new(&model, "d", vec![SegmentQuantity::CaDistance(11, 17)], 7.0);
    let scaled = FnStatistic::new("2d+3", |p: &[ProteinStep]| vec![2.0 * stats.eval(p)[0] + 3.0]);
    let constant = FnStatistic::new("c", |_: &[ProteinStep]| vec![4.25]);
    let reports = boltzmann_average(run.ensemble.particles(), &[&stats, &scaled, &constant]).unwrap();
    assert!((reports[1].point[0] - (2.0 * reports[0].point[0] + 3.0)).abs() < 1e-12);
    assert_eq!(reports[2].point[0], 4.25);
}

#[test]
fn path_sum_average_matches_enumeration() {
    let model = ToyHmm::three_state_demo();
    let stat = HmmStatistic::PathSum.named();
    let exact = enumerate_exact(&model, &stat).unwrap()[0];
    let values: Vec<f64> = (0..500)
        .map(|r| {
            let run = run_updown_smc(&model, 200, 5, 10_000 + r).unwrap();
            boltzmann_average(run.ensemble.particles(), &[&stat]).unwrap()[0].point[0]
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let se = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
}
