use dynmap::c64;
use dynmap::chainmap::ChainCoefficients;
use dynmap::lattice::fock::hopping_operator;
use dynmap::lattice::{
    assemble_quadratic, build_interacting_hamiltonian, many_body_operator, tight_binding, BathAttachment, BathChains,
    FockBasis, InteractionTerms, ModeLayout, ModeRole, OperatorKind, Ordering, Side,
};
use dynmap::linalg::{self, CMat};
use dynmap::spectral::Branch;
use dynmap::Error;
use proptest::prelude::*;

fn chain(bath: usize, branch: Branch, site: usize) -> ModeRole {
    ModeRole::Chain { bath, branch, site }
}

fn coeffs(gamma: &[f64], beta: &[f64]) -> ChainCoefficients {
    ChainCoefficients { gamma: gamma.to_vec(), beta: beta.to_vec() }
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

#[test]
fn separated_single_bath() {
    let att = [BathAttachment { bath: 0, sites: 2, side: Side::Left }];
    let lay = ModeLayout::new(3, &att, Ordering::Separated).unwrap();
    assert_eq!(lay.n_modes(), 10);
    assert_eq!(lay.system_modes(), vec![0, 1, 2]);
    assert_eq!(lay.replica_modes(), vec![3, 4, 5]);
    assert_eq!(lay.index_of(chain(0, Branch::Empty, 0)).unwrap(), 6);
    assert_eq!(lay.index_of(chain(0, Branch::Empty, 1)).unwrap(), 7);
    assert_eq!(lay.index_of(chain(0, Branch::Filled, 0)).unwrap(), 8);
    assert_eq!(lay.index_of(chain(0, Branch::Filled, 1)).unwrap(), 9);
    for (i, r) in lay.roles().iter().enumerate() {
        assert_eq!(lay.index_of(*r).unwrap(), i);
    }
}

#[test]
fn bare_system() {
    let lay = ModeLayout::new(1, &[], Ordering::Separated).unwrap();
    assert_eq!(lay.roles(), &[ModeRole::System(0), ModeRole::Replica(0)]);
}

#[test]
fn interleaved_two_baths() {
    let att = [
        BathAttachment { bath: 0, sites: 1, side: Side::Left },
        BathAttachment { bath: 1, sites: 1, side: Side::Right },
    ];
    let lay = ModeLayout::new(2, &att, Ordering::Interleaved).unwrap();
    let expect = vec![
        chain(0, Branch::Filled, 0),
        chain(0, Branch::Empty, 0),
        ModeRole::System(0),
        ModeRole::Replica(0),
        ModeRole::System(1),
        ModeRole::Replica(1),
        chain(1, Branch::Empty, 0),
        chain(1, Branch::Filled, 0),
    ];
    assert_eq!(lay.roles(), expect.as_slice());
    assert_eq!(lay.sa_range(), 2..6);
}

#[test]
fn separated_two_baths_surround_system() {
    let att = [
        BathAttachment { bath: 0, sites: 2, side: Side::Left },
        BathAttachment { bath: 1, sites: 1, side: Side::Right },
    ];
    let lay = ModeLayout::new(2, &att, Ordering::Separated).unwrap();
    assert_eq!(lay.system_modes(), vec![4, 5]);
    assert_eq!(lay.replica_modes(), vec![6, 7]);
    assert_eq!(lay.index_of(chain(1, Branch::Filled, 0)).unwrap(), 9);
}

#[test]
fn attachment_errors() {
    let dup = [
        BathAttachment { bath: 0, sites: 1, side: Side::Left },
        BathAttachment { bath: 0, sites: 1, side: Side::Right },
    ];
    assert!(matches!(ModeLayout::new(2, &dup, Ordering::Separated), Err(Error::Config(_))));
    let same_side = [
        BathAttachment { bath: 0, sites: 1, side: Side::Left },
        BathAttachment { bath: 1, sites: 1, side: Side::Left },
    ];
    assert!(matches!(ModeLayout::new(2, &same_side, Ordering::Separated), Err(Error::Config(_))));
}

#[test]
fn bare_hopping_block() {
    let lay = ModeLayout::new(2, &[], Ordering::Separated).unwrap();
    let hq = assemble_quadratic(&lay, &tight_binding(&[0.0, 0.0], &[0.02]), &[]).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = if (i, j) == (0, 1) || (i, j) == (1, 0) { 0.02 } else { 0.0 };
            assert_eq!(hq.h[(i, j)], c64::new(want, 0.0));
        }
    }
}

#[test]
fn head_coupling_entry() {
    let att = [BathAttachment { bath: 0, sites: 1, side: Side::Left }];
    let lay = ModeLayout::new(1, &att, Ordering::Separated).unwrap();
    let rho0 = 0.3;
    let bc = BathChains {
        bath: 0,
        coupled_mode: 0,
        branches: [coeffs(&[0.1], &[rho0 * rho0]), coeffs(&[-0.1], &[0.04])],
    };
    let hq = assemble_quadratic(&lay, &tight_binding(&[0.0], &[]), &[bc]).unwrap();
    let s = lay.index_of(ModeRole::System(0)).unwrap();
    let head = lay.index_of(chain(0, Branch::Empty, 0)).unwrap();
    assert!((hq.h[(s, head)].norm() - rho0).abs() < 1e-15);
    assert!(linalg::is_hermitian(&hq.h, 0.0));
}

#[test]
fn dimension_mismatch() {
    let lay = ModeLayout::new(2, &[], Ordering::Separated).unwrap();
    assert!(matches!(assemble_quadratic(&lay, &tight_binding(&[0.0], &[]), &[]), Err(Error::Config(_))));
}

#[test]
fn capacity_limit() {
    assert!(matches!(FockBasis::full(15), Err(Error::Capacity(_))));
}

#[test]
fn canonical_anticommutation() {
    let n = 4;
    let basis = FockBasis::full(n).unwrap();
    let id = linalg::identity(basis.dim());
    let ops: Vec<(CMat, CMat)> = (0..n)
        .map(|k| {
            (
                many_body_operator(&basis, OperatorKind::Annihilation, k).unwrap(),
                many_body_operator(&basis, OperatorKind::Creation, k).unwrap(),
            )
        })
        .collect();
    for k in 0..n {
        for j in 0..n {
            let (dk, _) = &ops[k];
            let (dj, cj) = &ops[j];
            let ac = dk * cj + cj * dk;
            let want = if k == j { id.clone() } else { linalg::zeros(16, 16) };
            assert!(linalg::max_abs(&(&ac - &want)) < 1e-15);
            assert!(linalg::max_abs(&(dk * dj + dj * dk)) < 1e-15);
        }
        let num = many_body_operator(&basis, OperatorKind::Number, k).unwrap();
        assert!(linalg::max_abs(&(&num - &(&ops[k].1 * &ops[k].0))) < 1e-15);
    }
}

#[test]
fn sector_rejects_ladder_operators() {
    let basis = FockBasis::sector(4, 2).unwrap();
    assert_eq!(basis.dim(), 6);
    assert!(many_body_operator(&basis, OperatorKind::Creation, 0).is_err());
}

fn small_model(ordering: Ordering) -> (ModeLayout, BathChains, BathChains) {
    let att = [
        BathAttachment { bath: 0, sites: 1, side: Side::Left },
        BathAttachment { bath: 1, sites: 1, side: Side::Right },
    ];
    let lay = ModeLayout::new(2, &att, ordering).unwrap();
    let b0 = BathChains { bath: 0, coupled_mode: 0, branches: [coeffs(&[0.2], &[0.03]), coeffs(&[-0.3], &[0.02])] };
    let b1 = BathChains { bath: 1, coupled_mode: 1, branches: [coeffs(&[0.1], &[0.05]), coeffs(&[-0.2], &[0.01])] };
    (lay, b0, b1)
}

#[test]
fn quadratic_many_body_matches_bilinears() {
    let (lay, b0, b1) = small_model(Ordering::Separated);
    let mut hs = tight_binding(&[0.1, -0.05], &[0.25]);
    hs[(0, 1)] = c64::new(0.25, 0.1);
    hs[(1, 0)] = c64::new(0.25, -0.1);
    let hq = assemble_quadratic(&lay, &hs, &[b0, b1]).unwrap();
    let n = lay.n_modes();
    let basis = FockBasis::full(n).unwrap();
    let h = build_interacting_hamiltonian(&hq, &InteractionTerms::default(), &basis).unwrap();
    let mut want = linalg::zeros(basis.dim(), basis.dim());
    for i in 0..n {
        for j in 0..n {
            if hq.h[(i, j)].norm() > 0.0 {
                want += linalg::scale(&hopping_operator(&basis, i, j), hq.h[(i, j)]);
            }
        }
    }
    assert!(linalg::max_abs(&(&h - &want)) < 1e-14);
    let num: CMat = (0..n).fold(linalg::zeros(basis.dim(), basis.dim()), |acc, k| {
        acc + many_body_operator(&basis, OperatorKind::Number, k).unwrap()
    });
    assert!(linalg::max_abs(&commutator(&h, &num)) < 1e-14);
}

#[test]
fn ordering_does_not_change_spectrum() {
    let (sep, b0, b1) = small_model(Ordering::Separated);
    let (inter, _, _) = small_model(Ordering::Interleaved);
    let hs = tight_binding(&[0.1, -0.05], &[0.25]);
    let e1 = linalg::hermitian_eigen(&assemble_quadratic(&sep, &hs, &[b0.clone(), b1.clone()]).unwrap().h).unwrap().0;
    let e2 = linalg::hermitian_eigen(&assemble_quadratic(&inter, &hs, &[b0, b1]).unwrap().h).unwrap().0;
    for (a, b) in e1.iter().zip(&e2) {
        assert!((a - b).abs() < 1e-13);
    }
}

/// Particle-hole symmetric Anderson impurity: the spectrum in sector `n`
/// equals the spectrum in sector `N − n`.
#[test]
fn anderson_particle_hole_symmetry() {
    let att = [
        BathAttachment { bath: 0, sites: 2, side: Side::Left },
        BathAttachment { bath: 1, sites: 2, side: Side::Right },
    ];
    let lay = ModeLayout::new(2, &att, Ordering::Separated).unwrap();
    let branch = coeffs(&[0.0, 0.0], &[0.06, 0.25]);
    let chains = [
        BathChains { bath: 0, coupled_mode: 0, branches: [branch.clone(), branch.clone()] },
        BathChains { bath: 1, coupled_mode: 1, branches: [branch.clone(), branch] },
    ];
    let u = 0.8;
    let hq = assemble_quadratic(&lay, &tight_binding(&[0.0, 0.0], &[0.0]), &chains).unwrap();
    let terms = InteractionTerms { density_density: vec![(0, 1, u)], onsite: vec![(0, -u / 2.0), (1, -u / 2.0)] };
    let n = lay.n_modes();
    for p in 0..=n / 2 {
        let ha = build_interacting_hamiltonian(&hq, &terms, &FockBasis::sector(n, p).unwrap()).unwrap();
        let hb = build_interacting_hamiltonian(&hq, &terms, &FockBasis::sector(n, n - p).unwrap()).unwrap();
        let ea = linalg::hermitian_eigen(&ha).unwrap().0;
        let eb = linalg::hermitian_eigen(&hb).unwrap().0;
        assert_eq!(ea.len(), eb.len());
        for (a, b) in ea.iter().zip(&eb) {
            assert!((a - b).abs() < 1e-12, "sector {p}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn roles_round_trip(l in 1usize..4, ml in 0usize..4, mr in 0usize..4, inter in any::<bool>()) {
        let mut att = Vec::new();
        if ml > 0 {
            att.push(BathAttachment { bath: 0, sites: ml, side: Side::Left });
        }
        if mr > 0 {
            att.push(BathAttachment { bath: 1, sites: mr, side: Side::Right });
        }
        let ord = if inter { Ordering::Interleaved } else { Ordering::Separated };
        let lay = ModeLayout::new(l, &att, ord).unwrap();
        prop_assert_eq!(lay.n_modes(), 2 * l + 2 * (ml + mr));
        for (i, r) in lay.roles().iter().enumerate() {
            prop_assert_eq!(lay.index_of(*r).unwrap(), i);
        }
        let range = lay.sa_range();
        prop_assert_eq!(range.len(), 2 * l);
        prop_assert_eq!(lay.filled_modes().len(), ml + mr);
    }
}
