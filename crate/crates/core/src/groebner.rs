//! Buchberger's algorithm with the Gebauer-Moeller pair criteria, normal
//! forms, and standard-monomial counting for zero-dimensional ideals.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::GroebnerError;
use crate::field::Field;
use crate::poly::{Monomial, MonomialOrder, PolyRing, Polynomial};

/// Default cap on the number of S-pair reductions per run.
pub const DEFAULT_MAX_PAIRS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroebnerOptions {
    pub max_pairs: usize,
}

impl Default for GroebnerOptions {
    fn default() -> Self {
        GroebnerOptions { max_pairs: DEFAULT_MAX_PAIRS }
    }
}

/// Reduced, monic Groebner basis sorted by decreasing leading monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct GroebnerBasis<E> {
    generators: Vec<Polynomial<E>>,
    order: MonomialOrder,
    nvars: usize,
    zero_dimensional: bool,
    standard_monomial_count: Option<u64>,
    pairs_reduced: usize,
}

impl<E> GroebnerBasis<E> {
    pub fn generators(&self) -> &[Polynomial<E>] {
        &self.generators
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn zero_dimensional(&self) -> bool {
        self.zero_dimensional
    }

    /// `None` when the quotient ring is infinite-dimensional.
    pub fn standard_monomial_count(&self) -> Option<u64> {
        self.standard_monomial_count
    }

    pub fn pairs_reduced(&self) -> usize {
        self.pairs_reduced
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.generators.iter().filter_map(|g| g.leading_monomial().copied()).collect()
    }

    /// Whether the basis is `{1}`.
    pub fn is_unit(&self) -> bool {
        self.generators.iter().any(|g| g.leading_monomial().is_some_and(Monomial::is_one))
    }
}

/// Remainder of multivariate division; no term of the result is divisible by
/// a leading monomial of `basis`.
pub fn normal_form<F: Field>(
    ring: &PolyRing<F>,
    f: &Polynomial<F::Elem>,
    basis: &[Polynomial<F::Elem>],
) -> Polynomial<F::Elem> {
    let refs: Vec<&Polynomial<F::Elem>> = basis.iter().filter(|g| !g.is_zero()).collect();
    reduce_full(ring, f, &refs)
}

fn reduce_full<F: Field>(
    ring: &PolyRing<F>,
    f: &Polynomial<F::Elem>,
    basis: &[&Polynomial<F::Elem>],
) -> Polynomial<F::Elem> {
    let field = ring.field();
    let mut live: Vec<(Monomial, F::Elem)> = f.terms().to_vec();
    let mut start = 0;
    let mut rem: Vec<(Monomial, F::Elem)> = Vec::new();
    while start < live.len() {
        let (lm, lc) = &live[start];
        let reducer = basis.iter().find(|g| g.leading_monomial().is_some_and(|m| m.divides(lm)));
        match reducer {
            Some(g) => {
                let (glm, glc) = g.leading().expect("nonzero reducer");
                let q = glm.quotient_of(lm);
                let c = field.neg(&field.div(lc, glc).expect("nonzero leading coefficient"));
                let next = ring.merge_slices(&live[start + 1..], &g.terms()[1..], Some((&c, &q)));
                live = next.into_terms();
                start = 0;
            }
            None => {
                rem.push(live[start].clone());
                start += 1;
            }
        }
    }
    ring.from_terms(rem)
}

/// Division with recorded quotients: `f = sum q_i * basis_i + r`.
pub fn divide<F: Field>(
    ring: &PolyRing<F>,
    f: &Polynomial<F::Elem>,
    basis: &[Polynomial<F::Elem>],
) -> (Vec<Polynomial<F::Elem>>, Polynomial<F::Elem>) {
    let field = ring.field();
    let mut quotients = vec![Polynomial::zero(); basis.len()];
    let mut p = f.clone();
    let mut rem = Polynomial::zero();
    while let Some((lm, lc)) = p.leading().cloned() {
        let hit = basis.iter().position(|g| g.leading_monomial().is_some_and(|m| m.divides(&lm)));
        match hit {
            Some(k) => {
                let (glm, glc) = basis[k].leading().expect("nonzero divisor");
                let q = glm.quotient_of(&lm);
                let c = field.div(&lc, glc).expect("nonzero leading coefficient");
                quotients[k] = ring.add(&quotients[k], &ring.monomial(q, c.clone()));
                p = ring.sub(&p, &ring.mul_term(&basis[k], &c, &q));
            }
            None => {
                let lt = ring.monomial(lm, lc);
                rem = ring.add(&rem, &lt);
                p = ring.sub(&p, &lt);
            }
        }
    }
    (quotients, rem)
}

pub fn s_polynomial<F: Field>(
    ring: &PolyRing<F>,
    f: &Polynomial<F::Elem>,
    g: &Polynomial<F::Elem>,
) -> Polynomial<F::Elem> {
    let field = ring.field();
    let (fm, fc) = f.leading().expect("nonzero polynomial");
    let (gm, gc) = g.leading().expect("nonzero polynomial");
    let l = fm.lcm(gm);
    let a = ring.mul_term(f, &field.inv(fc).expect("nonzero"), &fm.quotient_of(&l));
    let b = ring.mul_term(g, &field.inv(gc).expect("nonzero"), &gm.quotient_of(&l));
    ring.sub(&a, &b)
}

#[derive(Clone, Copy, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

struct Engine<'a, F: Field> {
    ring: &'a PolyRing<F>,
    polys: Vec<Polynomial<F::Elem>>,
    active: Vec<bool>,
    pairs: Vec<Pair>,
}

impl<F: Field> Engine<'_, F> {
    fn lm(&self, k: usize) -> &Monomial {
        self.polys[k].leading_monomial().expect("stored polynomials are nonzero")
    }

    fn active_refs(&self) -> Vec<&Polynomial<F::Elem>> {
        self.polys.iter().zip(&self.active).filter(|(_, a)| **a).map(|(p, _)| p).collect()
    }

    /// Gebauer-Moeller update after adding polynomial `h`.
    fn insert(&mut self, h: Polynomial<F::Elem>) {
        let hk = self.polys.len();
        self.polys.push(h);
        self.active.push(false);
        let hlm = *self.lm(hk);

        let candidates: Vec<(usize, Monomial)> =
            (0..hk).filter(|&g| self.active[g]).map(|g| (g, hlm.lcm(self.lm(g)))).collect();
        let mut kept: Vec<(usize, Monomial)> = Vec::new();
        for (k, &(g, l)) in candidates.iter().enumerate() {
            let coprime = hlm.coprime(self.lm(g));
            let dominated =
                candidates[k + 1..].iter().any(|(_, l2)| l2.divides(&l)) || kept.iter().any(|(_, l2)| l2.divides(&l));
            if coprime || !dominated {
                kept.push((g, l));
            }
        }
        let new_pairs: Vec<Pair> = kept
            .into_iter()
            .filter(|(g, _)| !hlm.coprime(self.lm(*g)))
            .map(|(g, l)| Pair { i: g, j: hk, lcm: l })
            .collect();

        let polys = &self.polys;
        let lm = |k: usize| polys[k].leading_monomial().expect("nonzero");
        self.pairs.retain(|p| !hlm.divides(&p.lcm) || lm(p.i).lcm(&hlm) == p.lcm || hlm.lcm(lm(p.j)) == p.lcm);
        self.pairs.extend(new_pairs);

        for g in 0..hk {
            if self.active[g] && hlm.divides(self.lm(g)) {
                self.active[g] = false;
            }
        }
        self.active[hk] = true;
    }

    fn next_pair(&mut self) -> Option<Pair> {
        let order = self.ring.order();
        let best = self
            .pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.lcm
                    .degree()
                    .cmp(&b.lcm.degree())
                    .then_with(|| order.cmp(&a.lcm, &b.lcm))
                    .then_with(|| (a.j, a.i).cmp(&(b.j, b.i)))
            })
            .map(|(k, _)| k)?;
        Some(self.pairs.swap_remove(best))
    }
}

/// Reduced Groebner basis of the ideal generated by `gens`.
pub fn buchberger<F: Field>(
    ring: &PolyRing<F>,
    gens: &[Polynomial<F::Elem>],
    opts: &GroebnerOptions,
) -> Result<GroebnerBasis<F::Elem>, GroebnerError> {
    if gens.is_empty() {
        return Err(GroebnerError::NoGenerators);
    }
    let mut eng = Engine { ring, polys: Vec::new(), active: Vec::new(), pairs: Vec::new() };
    let mut unit = false;
    for g in gens {
        let basis = eng.active_refs();
        let h = reduce_full(ring, g, &basis);
        if h.is_zero() {
            continue;
        }
        if h.leading_monomial().is_some_and(Monomial::is_one) {
            unit = true;
            break;
        }
        eng.insert(ring.monic(&h));
    }
    let mut reduced = 0usize;
    while !unit {
        let Some(pair) = eng.next_pair() else { break };
        reduced += 1;
        if reduced > opts.max_pairs {
            return Err(GroebnerError::ResourceCap(opts.max_pairs));
        }
        let s = s_polynomial(ring, &eng.polys[pair.i], &eng.polys[pair.j]);
        let basis = eng.active_refs();
        let h = reduce_full(ring, &s, &basis);
        if h.is_zero() {
            continue;
        }
        if h.leading_monomial().is_some_and(Monomial::is_one) {
            unit = true;
            break;
        }
        eng.insert(ring.monic(&h));
    }

    let generators = if unit {
        vec![ring.constant(ring.field().one())]
    } else {
        let minimal: Vec<Polynomial<F::Elem>> =
            eng.polys.into_iter().zip(eng.active).filter(|(_, a)| *a).map(|(p, _)| p).collect();
        let mut out = Vec::with_capacity(minimal.len());
        for (k, g) in minimal.iter().enumerate() {
            let others: Vec<&Polynomial<F::Elem>> =
                minimal.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, p)| p).collect();
            out.push(ring.monic(&reduce_full(ring, g, &others)));
        }
        out.sort_by(|a, b| ring.cmp(b.leading_monomial().expect("nonzero"), a.leading_monomial().expect("nonzero")));
        out
    };
    Ok(finish(ring, generators, reduced))
}

fn finish<F: Field>(
    ring: &PolyRing<F>,
    generators: Vec<Polynomial<F::Elem>>,
    pairs_reduced: usize,
) -> GroebnerBasis<F::Elem> {
    let lms: Vec<Monomial> = generators.iter().filter_map(|g| g.leading_monomial().copied()).collect();
    let nvars = ring.nvars();
    let unit = lms.iter().any(Monomial::is_one);
    let zero_dimensional = unit || (0..nvars).all(|v| lms.iter().any(|m| m.pure_power_var() == Some(v)));
    let standard_monomial_count = if zero_dimensional { Some(count_standard(&lms, nvars)) } else { None };
    GroebnerBasis { generators, order: ring.order(), nvars, zero_dimensional, standard_monomial_count, pairs_reduced }
}

/// Monomials divisible by none of `lms`; the caller guarantees finiteness.
fn standard_monomials(lms: &[Monomial], nvars: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    if lms.iter().any(Monomial::is_one) {
        return out;
    }
    // each standard monomial is reached once, by raising variables in
    // non-decreasing index order
    let mut stack = vec![(Monomial::one(), 0usize)];
    while let Some((m, first)) = stack.pop() {
        out.push(m);
        for v in first..nvars {
            let next = m.mul(&Monomial::var(v));
            if !lms.iter().any(|l| l.divides(&next)) {
                stack.push((next, v));
            }
        }
    }
    out
}

fn count_standard(lms: &[Monomial], nvars: usize) -> u64 {
    standard_monomials(lms, nvars).len() as u64
}

impl<E> GroebnerBasis<E> {
    /// Standard monomials of a zero-dimensional basis, sorted by degree.
    pub fn standard_monomials(&self) -> Option<Vec<Monomial>> {
        if !self.zero_dimensional {
            return None;
        }
        let mut out = standard_monomials(&self.leading_monomials(), self.nvars);
        out.sort_by(|a, b| MonomialOrder::Grevlex.cmp(a, b));
        Some(out)
    }
}

/// Dimension of the quotient ring, i.e. the number of solutions counted
/// with multiplicity.
pub fn quotient_degree<E>(gb: &GroebnerBasis<E>) -> Result<u64, GroebnerError> {
    gb.standard_monomial_count.ok_or(GroebnerError::NotZeroDimensional)
}

/// Whether two generating sets define the same ideal.
pub fn ideal_equal<F: Field>(
    ring: &PolyRing<F>,
    gens_a: &[Polynomial<F::Elem>],
    gens_b: &[Polynomial<F::Elem>],
    opts: &GroebnerOptions,
) -> Result<bool, GroebnerError> {
    let contained = |xs: &[Polynomial<F::Elem>], ys: &[Polynomial<F::Elem>]| -> Result<bool, GroebnerError> {
        let ys: Vec<Polynomial<F::Elem>> = ys.iter().filter(|p| !p.is_zero()).cloned().collect();
        if ys.is_empty() {
            return Ok(xs.iter().all(Polynomial::is_zero));
        }
        let gb = buchberger(ring, &ys, opts)?;
        Ok(xs.iter().all(|x| normal_form(ring, x, gb.generators()).is_zero()))
    };
    Ok(contained(gens_a, gens_b)? && contained(gens_b, gens_a)?)
}

/// Check the Buchberger criterion directly: every S-polynomial of the basis
/// reduces to zero.
pub fn is_groebner_basis<F: Field>(ring: &PolyRing<F>, basis: &[Polynomial<F::Elem>]) -> bool {
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let s = s_polynomial(ring, &basis[i], &basis[j]);
            if !normal_form(ring, &s, basis).is_zero() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals, PRIME_A};
    use crate::poly::VarTable;
    use alloc::string::String;
    use proptest::prelude::*;

    fn ring_q(names: &[&str]) -> PolyRing<Rationals> {
        let vars = VarTable::new(names.iter().map(|s| String::from(*s)).collect()).unwrap();
        PolyRing::new(Rationals, vars, MonomialOrder::Grevlex)
    }

    fn ring_p(names: &[&str]) -> PolyRing<PrimeField> {
        let vars = VarTable::new(names.iter().map(|s| String::from(*s)).collect()).unwrap();
        PolyRing::new(PrimeField::new(PRIME_A), vars, MonomialOrder::Grevlex)
    }

    fn gens<F: Field>(r: &PolyRing<F>, texts: &[&str]) -> Vec<Polynomial<F::Elem>> {
        texts.iter().map(|t| r.parse(t).unwrap()).collect()
    }

    #[test]
    fn monomial_ideal_counts() {
        let r = ring_q(&["x", "y"]);
        let gb = buchberger(&r, &gens(&r, &["x^2", "y^3"]), &GroebnerOptions::default()).unwrap();
        assert_eq!(quotient_degree(&gb).unwrap(), 6);
        let gb = buchberger(&r, &gens(&r, &["x^2", "y^2"]), &GroebnerOptions::default()).unwrap();
        let sm: Vec<String> =
            gb.standard_monomials().unwrap().iter().map(|m| r.to_text(&r.monomial(*m, Rationals.one()))).collect();
        assert_eq!(sm, ["1", "y", "x", "x*y"]);
    }

    #[test]
    fn normal_form_example() {
        let r = ring_q(&["x", "y"]);
        let f = r.parse("x^2 + y").unwrap();
        let g = gens(&r, &["x^2 - y"]);
        assert_eq!(r.to_text(&normal_form(&r, &f, &g)), "2*y");
        let (q, rem) = divide(&r, &f, &g);
        assert_eq!(r.to_text(&q[0]), "1");
        assert_eq!(r.to_text(&rem), "2*y");
    }

    #[test]
    fn positive_dimensional() {
        let r = ring_q(&["x", "y", "z"]);
        let gb = buchberger(&r, &gens(&r, &["x*y - z^2"]), &GroebnerOptions::default()).unwrap();
        assert!(!gb.zero_dimensional());
        assert!(quotient_degree(&gb).is_err());
    }

    #[test]
    fn unit_ideal() {
        let r = ring_q(&["x", "y"]);
        let gb = buchberger(&r, &gens(&r, &["x*y - 1", "x", "y"]), &GroebnerOptions::default()).unwrap();
        assert!(gb.is_unit());
        assert_eq!(quotient_degree(&gb).unwrap(), 0);
    }

    #[test]
    fn circle_and_line() {
        // x^2 + y^2 = 1, x = y: two points
        let r = ring_q(&["x", "y"]);
        let g = gens(&r, &["x^2 + y^2 - 1", "x - y"]);
        let gb = buchberger(&r, &g, &GroebnerOptions::default()).unwrap();
        assert_eq!(quotient_degree(&gb).unwrap(), 2);
        assert!(is_groebner_basis(&r, gb.generators()));
    }

    #[test]
    fn cyclic3_over_fp() {
        let r = ring_p(&["a", "b", "c"]);
        let g = gens(&r, &["a + b + c", "a*b + b*c + c*a", "a*b*c - 1"]);
        let gb = buchberger(&r, &g, &GroebnerOptions::default()).unwrap();
        assert_eq!(quotient_degree(&gb).unwrap(), 6);
    }

    #[test]
    fn pair_cap_reported() {
        let r = ring_p(&["x", "y"]);
        let g = gens(&r, &["x^2 - y", "x*y - 1"]);
        let err = buchberger(&r, &g, &GroebnerOptions { max_pairs: 0 }).unwrap_err();
        assert_eq!(err, GroebnerError::ResourceCap(0));
        let gb = buchberger(&r, &g, &GroebnerOptions::default()).unwrap();
        assert_eq!(quotient_degree(&gb).unwrap(), 3);
    }

    #[test]
    fn ideal_equality() {
        let r = ring_q(&["x", "y"]);
        let a = gens(&r, &["x - y", "y^2 - 1"]);
        let b = gens(&r, &["x^2 - 1", "x - y"]);
        assert!(ideal_equal(&r, &a, &b, &GroebnerOptions::default()).unwrap());
        let c = gens(&r, &["x - y", "y - 1"]);
        assert!(!ideal_equal(&r, &a, &c, &GroebnerOptions::default()).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn basis_is_groebner_and_reduces_inputs(
            cs in proptest::collection::vec(-3i64..4, 9),
        ) {
            let r = ring_p(&["x", "y", "z"]);
            let f = r.field();
            let terms = |o: usize, mons: [[u16; 3]; 3]| -> Polynomial<u64> {
                r.from_terms(mons.iter().enumerate()
                    .map(|(k, e)| (Monomial::from_exponents(e).unwrap(), f.from_i64(cs[o + k])))
                    .filter(|t| t.1 != 0)
                    .collect())
            };
            let g = vec![
                terms(0, [[2, 0, 0], [0, 1, 1], [0, 0, 0]]),
                terms(3, [[0, 2, 0], [1, 0, 1], [1, 0, 0]]),
                terms(6, [[1, 1, 0], [0, 0, 2], [0, 1, 0]]),
            ];
            prop_assume!(g.iter().any(|p| !p.is_zero()));
            let gb = buchberger(&r, &g, &GroebnerOptions::default()).unwrap();
            prop_assert!(is_groebner_basis(&r, gb.generators()));
            for p in &g {
                prop_assert!(normal_form(&r, p, gb.generators()).is_zero());
            }
        }
    }
}
