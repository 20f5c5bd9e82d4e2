//! Binomial generators of tree toric ideals, lattice membership and the
//! toric fiber product check for gluing a star onto a leaf.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{GroebnerError, ToricError};
use crate::field::{Field, PrimeField, PRIME_A};
use crate::groebner::{ideal_equal, GroebnerOptions};
use crate::matrix::{integer_kernel, IntegerMatrix};
use crate::model::{num_pairs, p_var_names, pair_index, pairs, path_b};
use crate::poly::{Monomial, MonomialOrder, PolyRing, Polynomial, VarTable, MAX_VARS};
use crate::tree::{glue_with_labels, QuartetKind, RootedTree, Vertex};

/// `p^plus - p^minus` with `plus != minus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binomial {
    plus: Monomial,
    minus: Monomial,
}

impl Binomial {
    pub fn new(plus: Monomial, minus: Monomial) -> Result<Self, ToricError> {
        if plus == minus {
            return Err(ToricError::ZeroBinomial);
        }
        Ok(Binomial { plus, minus })
    }

    pub fn plus(&self) -> &Monomial {
        &self.plus
    }

    pub fn minus(&self) -> &Monomial {
        &self.minus
    }

    /// `-self`.
    pub fn flipped(&self) -> Self {
        Binomial { plus: self.minus, minus: self.plus }
    }

    /// `"plus - minus"` in the variable names of `ring`.
    pub fn to_text<F: Field>(&self, ring: &PolyRing<F>) -> String {
        let f = ring.field();
        let side = |m: &Monomial| ring.to_text(&ring.monomial(*m, f.one()));
        alloc::format!("{} - {}", side(&self.plus), side(&self.minus))
    }

    pub fn to_polynomial<F: Field>(&self, ring: &PolyRing<F>) -> Polynomial<F::Elem> {
        let f = ring.field();
        ring.from_terms(vec![(self.plus, f.one()), (self.minus, f.neg(&f.one()))])
    }
}

fn pvar(n: usize, i: usize, j: usize) -> Monomial {
    Monomial::var(pair_index(n, i, j))
}

fn quad(n: usize, a: (usize, usize), b: (usize, usize), c: (usize, usize), d: (usize, usize)) -> Binomial {
    Binomial::new(pvar(n, a.0, a.1).mul(&pvar(n, b.0, b.1)), pvar(n, c.0, c.1).mul(&pvar(n, d.0, d.1)))
        .expect("distinct quartet products differ")
}

fn quartets(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                for l in k + 1..=n {
                    out.push([i, j, k, l]);
                }
            }
        }
    }
    out
}

/// Quadrics generating the toric ideal of `t`, one or two per quartet of
/// leaves (including the root leaf).
pub fn tree_binomials(t: &RootedTree) -> Vec<Binomial> {
    let n = t.n();
    let mut out = Vec::new();
    for q in quartets(n) {
        let topo = t.quartet_topology(q).expect("quartet leaves are distinct");
        match topo.kind {
            QuartetKind::Resolved([a, b], [c, d]) => out.push(quad(n, (a, c), (b, d), (a, d), (b, c))),
            QuartetKind::Unresolved => {
                let [i, j, k, l] = q;
                out.push(quad(n, (i, j), (k, l), (i, k), (j, l)));
                out.push(quad(n, (i, k), (j, l), (i, l), (j, k)));
            }
        }
    }
    out
}

/// All differences of the three products `p_ij p_kl`, `p_ik p_jl`,
/// `p_il p_jk` over quartets of `{0, ..., n}`.
pub fn hypersimplex_binomials(n: usize) -> Vec<Binomial> {
    let mut out = Vec::new();
    for [i, j, k, l] in quartets(n) {
        out.push(quad(n, (i, j), (k, l), (i, k), (j, l)));
        out.push(quad(n, (i, k), (j, l), (i, l), (j, k)));
        out.push(quad(n, (i, j), (k, l), (i, l), (j, k)));
    }
    out
}

/// Whether `design * (plus - minus) = 0`.
pub fn lattice_member(b: &Binomial, design: &IntegerMatrix) -> Result<bool, ToricError> {
    let cols = design.cols();
    for v in cols..MAX_VARS {
        if b.plus.exponent(v) != 0 || b.minus.exponent(v) != 0 {
            return Err(ToricError::DimensionMismatch { expected: cols, found: v + 1 });
        }
    }
    let diff: Vec<BigInt> =
        (0..cols).map(|c| BigInt::from(b.plus.exponent(c)) - BigInt::from(b.minus.exponent(c))).collect();
    let img = design.mul_vec(&diff).expect("lengths agree");
    Ok(img.iter().all(Zero::is_zero))
}

/// Polynomial ring in `p01, p02, ...` for a tree with leaves `0..=n`.
pub fn p_ring<F: Field>(field: F, n: usize) -> Result<PolyRing<F>, GroebnerError> {
    let vars = VarTable::new(p_var_names(n))?;
    Ok(PolyRing::new(field, vars, MonomialOrder::Grevlex))
}

/// A star `S_m` glued onto leaf `ell` of `t_prime`.
#[derive(Clone, Debug)]
pub struct TfpGluing {
    t_prime: RootedTree,
    star: RootedTree,
    ell: usize,
    glued: RootedTree,
    prime_map: Vec<Option<usize>>,
    star_map: Vec<Option<usize>>,
}

/// Outcome of [`tfp_kernel_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TfpReport {
    pub glued_newick: String,
    pub kernel_rank_psi: usize,
    pub kernel_rank_b: usize,
    pub equal: bool,
    /// `None` when the ideal comparison was skipped.
    pub ideal_equal: Option<bool>,
}

impl TfpReport {
    pub fn passed(&self) -> bool {
        self.equal && self.ideal_equal != Some(false)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TfpOptions {
    /// Largest glued tree (counting leaf 0) for which ideals are compared.
    pub ideal_leaf_cap: usize,
    pub groebner: GroebnerOptions,
}

impl Default for TfpOptions {
    fn default() -> Self {
        TfpOptions { ideal_leaf_cap: 7, groebner: GroebnerOptions::default() }
    }
}

impl TfpGluing {
    pub fn new(t_prime: &RootedTree, ell: usize, m: usize) -> Result<Self, ToricError> {
        let (glued, (prime_map, star_map)) = glue_with_labels(t_prime, ell, m)?;
        let star = crate::tree::star_tree(m)?;
        Ok(TfpGluing { t_prime: t_prime.clone(), star, ell, glued, prime_map, star_map })
    }

    pub fn t_prime(&self) -> &RootedTree {
        &self.t_prime
    }

    pub fn star(&self) -> &RootedTree {
        &self.star
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn m(&self) -> usize {
        self.star.n()
    }

    pub fn glued(&self) -> &RootedTree {
        &self.glued
    }

    fn star_leaves(&self) -> Vec<usize> {
        self.star_map.iter().flatten().copied().collect()
    }

    /// Vertex of the glued tree carrying the edge `e(v)` of `t_prime`.
    fn prime_edge(&self, v: Vertex) -> Vertex {
        let mut leaves: Vec<usize> = Vec::new();
        for k in self.t_prime.leaf_set(v) {
            match self.prime_map[k] {
                Some(x) => leaves.push(x),
                None => leaves.extend(self.star_leaves()),
            }
        }
        leaves.sort_unstable();
        self.glued.vertex_with_leaf_set(&leaves).expect("edge survives gluing")
    }

    /// Vertex of the glued tree carrying the edge `e(v)` of the star.
    fn star_edge(&self, v: Vertex) -> Vertex {
        let mut leaves: Vec<usize> =
            self.star.leaf_set(v).into_iter().map(|k| self.star_map[k].expect("non-root leaf")).collect();
        leaves.sort_unstable();
        self.glued.vertex_with_leaf_set(&leaves).expect("edge survives gluing")
    }

    /// Side of a glued leaf: `Ok(k)` for leaf `k` of `t_prime`, `Err(k)` for
    /// leaf `k` of the star.
    fn origin(&self, x: usize) -> Result<usize, usize> {
        if let Some(k) = self.prime_map.iter().position(|&y| y == Some(x)) {
            Ok(k)
        } else {
            Err(self.star_map.iter().position(|&y| y == Some(x)).expect("every leaf has an origin"))
        }
    }

    /// Exponent matrix of the parametrization in `t_*` (last row) and the
    /// edge parameters of the glued tree (rows in vertex order), with the
    /// `t_*` and `t_{e(ell)}` rows halved.
    pub fn psi_matrix(&self) -> Result<IntegerMatrix, ToricError> {
        let n = self.glued.n();
        let rows = self.glued.num_vertices() - 1;
        let mut m = IntegerMatrix::zeros(rows + 1, num_pairs(n));
        let bump = |m: &mut IntegerMatrix, r: usize, c: usize| {
            let v = m.get(r, c) + 1;
            m.set(r, c, v);
        };
        for (c, (x, y)) in pairs(n).into_iter().enumerate() {
            bump(&mut m, rows, c);
            bump(&mut m, rows, c);
            let (prime_end, star_end) = match (self.origin(x), self.origin(y)) {
                (Ok(a), Ok(b)) => (Some((a, b)), None),
                (Err(a), Err(b)) => (None, Some((a, b))),
                (Ok(a), Err(b)) | (Err(b), Ok(a)) => (Some((a, self.ell)), Some((0, b))),
            };
            if let Some((a, b)) = prime_end {
                for e in self.t_prime.path_edges(a, b)? {
                    bump(&mut m, self.prime_edge(e) - 1, c);
                }
            }
            if let Some((a, b)) = star_end {
                for e in self.star.path_edges(a, b)? {
                    bump(&mut m, self.star_edge(e) - 1, c);
                }
            }
        }
        let shared = self.star_edge(self.star.top());
        for r in [rows, shared - 1] {
            for c in 0..m.cols() {
                let (q, rem) = m.get(r, c).div_rem(&BigInt::from(2));
                if !rem.is_zero() {
                    return Err(ToricError::OddExponent(r));
                }
                m.set(r, c, q);
            }
        }
        Ok(m)
    }

    /// Generators of the fiber product: lifts of the quartet binomials of
    /// both factors, plus the quadrics exchanging star leaves across the
    /// glued edge. All are expressed in the `p` variables of the glued tree.
    pub fn lifted_generators(&self) -> Vec<Binomial> {
        let n = self.glued.n();
        let star_side = self.star_leaves();
        let prime_side: Vec<usize> = self.prime_map.iter().flatten().copied().collect();
        let mut out = BTreeSet::new();

        let lift_prime = |k: usize, j: usize| self.prime_map[k].unwrap_or(j);
        for b in tree_binomials(&self.t_prime) {
            let np = self.t_prime.n();
            let touches = |mono: &Monomial| {
                pairs(np)
                    .iter()
                    .any(|&(a, c)| mono.exponent(pair_index(np, a, c)) > 0 && (a == self.ell || c == self.ell))
            };
            let choices: Vec<usize> = if touches(&b.plus) || touches(&b.minus) { star_side.clone() } else { vec![0] };
            for j in choices {
                let map = |mono: &Monomial| map_monomial(mono, np, n, |a| lift_prime(a, j));
                if let Ok(l) = Binomial::new(map(&b.plus), map(&b.minus)) {
                    out.insert(l);
                }
            }
        }

        let lift_star = |k: usize, i: usize| if k == 0 { i } else { self.star_map[k].expect("non-root") };
        for b in tree_binomials(&self.star) {
            let ns = self.star.n();
            let touches = |mono: &Monomial| (1..=ns).any(|c| mono.exponent(pair_index(ns, 0, c)) > 0);
            let choices: Vec<usize> = if touches(&b.plus) || touches(&b.minus) { prime_side.clone() } else { vec![0] };
            for i in choices {
                let map = |mono: &Monomial| map_monomial(mono, ns, n, |a| lift_star(a, i));
                if let Ok(l) = Binomial::new(map(&b.plus), map(&b.minus)) {
                    out.insert(l);
                }
            }
        }

        for (x, &i) in prime_side.iter().enumerate() {
            for &i2 in &prime_side[x + 1..] {
                for (y, &j) in star_side.iter().enumerate() {
                    for &j2 in &star_side[y + 1..] {
                        out.insert(quad(n, (i, j), (i2, j2), (i, j2), (i2, j)));
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

fn map_monomial(mono: &Monomial, n_from: usize, n_to: usize, f: impl Fn(usize) -> usize) -> Monomial {
    let mut out = Monomial::one();
    for (c, (a, b)) in pairs(n_from).into_iter().enumerate() {
        for _ in 0..mono.exponent(c) {
            out = out.mul(&pvar(n_to, f(a), f(b)));
        }
    }
    out
}

/// Compare the saturated kernels of the gluing parametrization and of
/// `B_T`, and for small trees compare the ideals generated by the quartet
/// binomials of the glued tree and by the lifted generators.
pub fn tfp_kernel_check(g: &TfpGluing, opts: &TfpOptions) -> Result<TfpReport, ToricError> {
    let psi = g.psi_matrix()?;
    let b = path_b(g.glued());
    let kp = integer_kernel(&psi);
    let kb = integer_kernel(&b);
    let vanishes = |m: &IntegerMatrix, basis: &[Vec<BigInt>]| {
        basis.iter().all(|v| m.mul_vec(v).expect("lengths agree").iter().all(Zero::is_zero))
    };
    let equal = kp.len() == kb.len() && vanishes(&psi, &kb) && vanishes(&b, &kp);

    let ideal_equal = if g.glued().num_leaves() <= opts.ideal_leaf_cap {
        let ring = p_ring(PrimeField::new(PRIME_A), g.glued().n())?;
        let lhs: Vec<_> = tree_binomials(g.glued()).iter().map(|x| x.to_polynomial(&ring)).collect();
        let rhs: Vec<_> = g.lifted_generators().iter().map(|x| x.to_polynomial(&ring)).collect();
        Some(ideal_equal(&ring, &lhs, &rhs, &opts.groebner)?)
    } else {
        None
    };
    Ok(TfpReport {
        glued_newick: g.glued().to_newick(),
        kernel_rank_psi: kp.len(),
        kernel_rank_b: kb.len(),
        equal,
        ideal_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::design_a;
    use crate::tree::{enumerate_topologies, parse_newick, star_tree};

    fn text(n: usize, b: &Binomial) -> String {
        let ring = p_ring(crate::field::Rationals, n).unwrap();
        b.to_text(&ring)
    }

    #[test]
    fn star3_has_two_binomials() {
        let b = tree_binomials(&star_tree(3).unwrap());
        assert_eq!(b.len(), 2);
        assert!(tree_binomials(&star_tree(2).unwrap()).is_empty());
    }

    #[test]
    fn nested_tree_quartet_binomial() {
        let t = parse_newick("(1,2,(3,4,5));").unwrap();
        let bs = tree_binomials(&t);
        let want = quad(5, (1, 3), (2, 4), (1, 4), (2, 3));
        assert!(bs.contains(&want));
        assert_eq!(text(5, &want), "p13*p24 - p14*p23");
        let a = design_a(&t);
        assert!(bs.iter().all(|b| lattice_member(b, &a).unwrap()));
        let wrong = quad(5, (1, 2), (3, 4), (1, 3), (2, 4));
        assert!(!lattice_member(&wrong, &a).unwrap());
    }

    #[test]
    fn zero_binomial_rejected() {
        let m = pvar(3, 0, 1).mul(&pvar(3, 2, 3));
        assert_eq!(Binomial::new(m, m), Err(ToricError::ZeroBinomial));
    }

    #[test]
    fn lattice_member_checks_width() {
        let a = design_a(&star_tree(2).unwrap());
        let b = Binomial::new(Monomial::var(5), Monomial::var(0)).unwrap();
        assert!(matches!(lattice_member(&b, &a), Err(ToricError::DimensionMismatch { .. })));
    }

    #[test]
    fn binomials_in_both_lattices() {
        for n in 3..=5 {
            for t in enumerate_topologies(n) {
                let (a, b) = (design_a(&t), path_b(&t));
                for x in tree_binomials(&t) {
                    assert!(lattice_member(&x, &a).unwrap());
                    assert!(lattice_member(&x, &b).unwrap());
                }
            }
        }
    }

    #[test]
    fn star_generators_match_hypersimplex() {
        let opts = GroebnerOptions::default();
        for n in 3..=5 {
            let ring = p_ring(PrimeField::new(PRIME_A), n).unwrap();
            let a: Vec<_> = tree_binomials(&star_tree(n).unwrap()).iter().map(|b| b.to_polynomial(&ring)).collect();
            let h: Vec<_> = hypersimplex_binomials(n).iter().map(|b| b.to_polynomial(&ring)).collect();
            assert!(ideal_equal(&ring, &a, &h, &opts).unwrap());
        }
    }

    #[test]
    fn star_onto_star_gluing() {
        let g = TfpGluing::new(&star_tree(3).unwrap(), 3, 3).unwrap();
        assert_eq!(g.glued().canonical_newick(), parse_newick("(1,2,(3,4,5));").unwrap().canonical_newick());
        let r = tfp_kernel_check(&g, &TfpOptions::default()).unwrap();
        assert!(r.equal);
        assert_eq!(r.ideal_equal, Some(true));
        assert_eq!(r.kernel_rank_b, 15 - 7);
    }

    #[test]
    fn caterpillar_gluing_kernel_rank_one() {
        let g = TfpGluing::new(&star_tree(2).unwrap(), 2, 2).unwrap();
        let r = tfp_kernel_check(&g, &TfpOptions::default()).unwrap();
        assert!(r.passed());
        assert_eq!((r.kernel_rank_psi, r.kernel_rank_b), (1, 1));
    }

    #[test]
    fn gluing_at_root_rejected() {
        assert!(TfpGluing::new(&star_tree(2).unwrap(), 0, 2).is_err());
    }

    #[test]
    fn all_small_gluings_pass() {
        for np in 2..=4 {
            for tp in enumerate_topologies(np) {
                for ell in 1..=np {
                    for m in 2..=(6 - np) {
                        let g = TfpGluing::new(&tp, ell, m).unwrap();
                        let r = tfp_kernel_check(&g, &TfpOptions { ideal_leaf_cap: 6, ..Default::default() }).unwrap();
                        assert!(r.passed(), "{} at {ell} with m={m}", tp.to_newick());
                    }
                }
            }
        }
    }
}
