use heatflux::mesh::{
    build_uniform_mesh, shape_ratio, vertex_patches, Forest, MeshLevel, PatchKind,
};
use proptest::prelude::*;

fn total_area(m: &MeshLevel) -> f64 {
    (0..m.n_elements()).map(|t| m.area(t)).sum()
}

#[test]
fn uniform_mesh_counts() {
    for (n, tris, verts) in [(1, 2, 4), (2, 8, 9), (4, 32, 25)] {
        let (_, m) = build_uniform_mesh(n).unwrap();
        assert_eq!(m.n_elements(), tris);
        assert_eq!(m.n_vertices(), verts);
        m.audit_conformity().unwrap();
        assert!((total_area(&m) - 1.0).abs() < 1e-14);
    }
    let (_, m) = build_uniform_mesh(4).unwrap();
    let r0 = shape_ratio(&m.element_points(0));
    for t in 0..m.n_elements() {
        assert!((shape_ratio(&m.element_points(t)) - r0).abs() < 1e-12);
        assert!(m.area(t) > 0.0);
    }
    assert!(build_uniform_mesh(0).is_err());
}

#[test]
fn refine_nothing_is_identity() {
    let (mut f, m) = build_uniform_mesh(2).unwrap();
    let r = f.refine(&m, &[]).unwrap();
    assert_eq!(r.leaves(), m.leaves());
}

#[test]
fn refine_one_macro_triangle_closes() {
    let (mut f, m) = build_uniform_mesh(1).unwrap();
    let r = f.refine(&m, &[0]).unwrap();
    assert!(r.n_elements() >= 4);
    r.audit_conformity().unwrap();
    assert!((total_area(&r) - 1.0).abs() < 1e-14);
}

#[test]
fn refine_all_bisects_every_element() {
    let (mut f, m) = build_uniform_mesh(3).unwrap();
    let all: Vec<usize> = (0..m.n_elements()).collect();
    let r = f.refine(&m, &all).unwrap();
    assert!(r.n_elements() >= 2 * m.n_elements());
    let map = f.containment(&r, &m).unwrap();
    let mut children = vec![0; m.n_elements()];
    for &c in &map {
        children[c] += 1;
    }
    assert!(children.iter().all(|&c| c >= 2));
}

#[test]
fn common_refinement_cases() {
    let (mut f, m) = build_uniform_mesh(1).unwrap();
    let (same, a, b) = f.common_refinement(&m, &m).unwrap();
    assert_eq!(same.leaves(), m.leaves());
    assert_eq!(a, vec![0, 1]);
    assert_eq!(b, vec![0, 1]);

    let fine = f.refine(&m, &[0, 1]).unwrap();
    let (c, _, to_next) = f.common_refinement(&m, &fine).unwrap();
    assert_eq!(c.leaves(), fine.leaves());
    assert_eq!(to_next, (0..fine.n_elements()).collect::<Vec<_>>());

    let (mut f, m) = build_uniform_mesh(2).unwrap();
    let r0 = f.refine(&m, &[0]).unwrap();
    let r1 = f.refine(&m, &[5]).unwrap();
    let (c, to_prev, to_next) = f.common_refinement(&r0, &r1).unwrap();
    c.audit_conformity().unwrap();
    assert!(c.n_elements() >= r0.n_elements().max(r1.n_elements()));
    for t in 0..c.n_elements() {
        let x = heatflux::mesh::centroid(&c.element_points(t));
        assert_eq!(r0.locate(x).unwrap().0, to_prev[t]);
        assert_eq!(r1.locate(x).unwrap().0, to_next[t]);
    }

    let (_, other) = build_uniform_mesh(2).unwrap();
    assert!(f.common_refinement(&r0, &other).is_err());
}

fn patches_of(n: usize, p: usize) -> (MeshLevel, Vec<heatflux::mesh::Patch>) {
    let (_, m) = build_uniform_mesh(n).unwrap();
    let map: Vec<usize> = (0..m.n_elements()).collect();
    let patches = vertex_patches(&m, &m, &map, &vec![p; m.n_elements()]).unwrap();
    (m, patches)
}

#[test]
fn interior_and_corner_patches() {
    let (m, patches) = patches_of(4, 1);
    let centre = (0..m.n_vertices())
        .find(|&v| m.vertices()[v] == [0.5, 0.5])
        .unwrap();
    let pc = &patches[centre];
    assert_eq!(pc.kind, PatchKind::Interior);
    assert_eq!(pc.elements.len(), 6);
    assert_eq!(pc.gamma_edges, pc.boundary_edges);
    assert_eq!(pc.boundary_edges.len(), 6);

    let corner = (0..m.n_vertices())
        .find(|&v| m.vertices()[v] == [0.0, 0.0])
        .unwrap();
    let pk = &patches[corner];
    assert_eq!(pk.kind, PatchKind::Boundary);
    assert!(pk.gamma_edges.len() < pk.boundary_edges.len());
    for e in &pk.gamma_edges {
        assert!(!m.is_boundary_edge(*e));
    }
    assert!(patches.iter().all(|p| p.degree == 2));
}

#[test]
fn patch_degree_is_max_plus_one() {
    let (_, m) = build_uniform_mesh(2).unwrap();
    let map: Vec<usize> = (0..m.n_elements()).collect();
    let degrees: Vec<usize> = (0..m.n_elements()).map(|t| 1 + t % 3).collect();
    let patches = vertex_patches(&m, &m, &map, &degrees).unwrap();
    for p in &patches {
        let want = p.elements.iter().map(|&t| degrees[t] + 1).max().unwrap();
        assert_eq!(p.degree, want);
    }
}

/// Sum of all hat functions at `x`.
fn hat_sum(m: &MeshLevel, patches: &[heatflux::mesh::Patch], x: [f64; 2]) -> f64 {
    let (t, lam) = m.locate(x).unwrap();
    patches
        .iter()
        .filter_map(|p| p.local_index(t).map(|i| p.hat_at(i, lam)))
        .sum()
}

fn random_mesh(forest: &mut Forest, base: &MeshLevel, ops: &[(bool, u32)]) -> MeshLevel {
    let mut m = base.clone();
    for &(refine, seed) in ops {
        let marked: Vec<usize> = (0..m.n_elements())
            .filter(|t| (t * 7 + seed as usize).is_multiple_of(3))
            .collect();
        m = if refine {
            forest.refine(&m, &marked).unwrap()
        } else {
            forest.coarsen(&m, &marked).unwrap()
        };
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hats_form_a_partition_of_unity(ops in prop::collection::vec((any::<bool>(), 0u32..100), 0..4),
                                      pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 100)) {
        let (mut f, base) = build_uniform_mesh(3).unwrap();
        let coarse = random_mesh(&mut f, &base, &ops);
        let fine = f.refine_uniform(&coarse, 1).unwrap();
        let map = f.containment(&fine, &coarse).unwrap();
        let patches = vertex_patches(&coarse, &fine, &map, &vec![1; fine.n_elements()]).unwrap();
        for (x, y) in pts {
            prop_assert!((hat_sum(&fine, &patches, [x, y]) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn refinement_sequences_stay_conforming(ops in prop::collection::vec((any::<bool>(), 0u32..100), 1..6)) {
        let (mut f, base) = build_uniform_mesh(2).unwrap();
        let mut prev = base.clone();
        for k in 1..=ops.len() {
            let m = random_mesh(&mut f, &base, &ops[..k]);
            prop_assert!(m.audit_conformity().is_ok());
            prop_assert!((total_area(&m) - 1.0).abs() <= 1e-12);
            let (c, to_prev, to_next) = f.common_refinement(&prev, &m).unwrap();
            prop_assert!(c.audit_conformity().is_ok());
            let mut a_prev = vec![0.0; prev.n_elements()];
            let mut a_next = vec![0.0; m.n_elements()];
            for t in 0..c.n_elements() {
                a_prev[to_prev[t]] += c.area(t);
                a_next[to_next[t]] += c.area(t);
            }
            for (t, a) in a_prev.iter().enumerate() {
                prop_assert!((a - prev.area(t)).abs() <= 1e-12 * prev.area(t));
            }
            for (t, a) in a_next.iter().enumerate() {
                prop_assert!((a - m.area(t)).abs() <= 1e-12 * m.area(t));
            }
            prev = m;
        }
    }
}
