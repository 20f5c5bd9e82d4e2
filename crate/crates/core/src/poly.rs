//! Sparse multivariate polynomials with exponent-vector monomials.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use crate::error::GroebnerError;
use crate::field::{parse_rational, Field};

/// Largest supported number of variables.
pub const MAX_VARS: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: [u16; MAX_VARS],
    degree: u32,
    // bit i set iff x_i occurs
    support: u32,
}

impl core::fmt::Debug for Monomial {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let last = self.exps.iter().rposition(|&e| e != 0).map_or(0, |p| p + 1);
        write!(f, "Monomial({:?})", &self.exps[..last])
    }
}

impl Default for Monomial {
    fn default() -> Self {
        Self::one()
    }
}

impl Monomial {
    pub const fn one() -> Self {
        Monomial { exps: [0; MAX_VARS], degree: 0, support: 0 }
    }

    pub fn var(i: usize) -> Self {
        let mut m = Self::one();
        m.exps[i] = 1;
        m.degree = 1;
        m.support = 1 << i;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Result<Self, GroebnerError> {
        if exps.len() > MAX_VARS {
            return Err(GroebnerError::TooManyVariables(exps.len()));
        }
        let mut m = Self::one();
        m.exps[..exps.len()].copy_from_slice(exps);
        m.degree = exps.iter().map(|&e| u32::from(e)).sum();
        m.support = support_of(&m.exps);
        Ok(m)
    }

    pub fn exponent(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn exponents(&self, nvars: usize) -> &[u16] {
        &self.exps[..nvars]
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.exps.iter_mut().zip(&other.exps) {
            *a = a.checked_add(*b).expect("exponent overflow");
        }
        out.degree += other.degree;
        out.support |= other.support;
        out
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.degree <= other.degree
            && self.support & !other.support == 0
            && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Self) -> Self {
        let mut out = *other;
        for (a, b) in out.exps.iter_mut().zip(&self.exps) {
            *a -= *b;
        }
        out.degree -= self.degree;
        out.support = support_of(&out.exps);
        out
    }

    pub fn lcm(&self, other: &Self) -> Self {
        let mut out = *self;
        let mut deg = 0;
        for (a, b) in out.exps.iter_mut().zip(&other.exps) {
            *a = (*a).max(*b);
            deg += u32::from(*a);
        }
        out.degree = deg;
        out.support |= other.support;
        out
    }

    pub fn coprime(&self, other: &Self) -> bool {
        self.support & other.support == 0
    }

    /// Index of the variable if this is a pure power `x_i^k` with `k >= 1`.
    pub fn pure_power_var(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.exps.iter().enumerate() {
            if e != 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }
}

fn support_of(exps: &[u16; MAX_VARS]) -> u32 {
    exps.iter().enumerate().fold(0, |acc, (i, &e)| if e != 0 { acc | 1 << i } else { acc })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic, `x_0 > x_1 > ...`.
    #[default]
    Grevlex,
    /// Lexicographic, `x_0 > x_1 > ...`.
    Lex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Grevlex => a.degree.cmp(&b.degree).then_with(|| {
                for k in (0..MAX_VARS).rev() {
                    match a.exps[k].cmp(&b.exps[k]) {
                        Ordering::Equal => continue,
                        other => return other.reverse(),
                    }
                }
                Ordering::Equal
            }),
            MonomialOrder::Lex => a.exps.cmp(&b.exps),
        }
    }
}

/// Ordered table of variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    pub fn new(names: Vec<String>) -> Result<Self, GroebnerError> {
        if names.len() > MAX_VARS {
            return Err(GroebnerError::TooManyVariables(names.len()));
        }
        Ok(VarTable { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Terms sorted strictly decreasing by the ring's monomial order, no zero
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<E> {
    terms: Vec<(Monomial, E)>,
}

impl<E> Polynomial<E> {
    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, E)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Monomial, E)> {
        self.terms.first()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|t| &t.0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0.degree()).max().unwrap_or(0)
    }

    pub(crate) fn into_terms(self) -> Vec<(Monomial, E)> {
        self.terms
    }
}

/// Polynomial ring `F[x_0, ..., x_{k-1}]` with a fixed monomial order.
#[derive(Clone, Debug)]
pub struct PolyRing<F: Field> {
    field: F,
    vars: VarTable,
    order: MonomialOrder,
}

impl<F: Field> PolyRing<F> {
    pub fn new(field: F, vars: VarTable, order: MonomialOrder) -> Self {
        PolyRing { field, vars, order }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.order.cmp(a, b)
    }

    /// Normalize arbitrary terms: sort, merge equal monomials, drop zeros.
    pub fn from_terms(&self, mut terms: Vec<(Monomial, F::Elem)>) -> Polynomial<F::Elem> {
        terms.sort_by(|a, b| self.cmp(&b.0, &a.0));
        let mut out: Vec<(Monomial, F::Elem)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = self.field.add(&last.1, &c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| !self.field.is_zero(&t.1));
        Polynomial { terms: out }
    }

    pub fn constant(&self, c: F::Elem) -> Polynomial<F::Elem> {
        self.from_terms(alloc::vec![(Monomial::one(), c)])
    }

    pub fn var(&self, i: usize) -> Polynomial<F::Elem> {
        self.from_terms(alloc::vec![(Monomial::var(i), self.field.one())])
    }

    pub fn monomial(&self, m: Monomial, c: F::Elem) -> Polynomial<F::Elem> {
        self.from_terms(alloc::vec![(m, c)])
    }

    /// Linear form `sum coeffs[i] * x_i + constant`.
    pub fn linear(&self, coeffs: &[F::Elem], constant: F::Elem) -> Polynomial<F::Elem> {
        let mut terms: Vec<_> = coeffs.iter().enumerate().map(|(i, c)| (Monomial::var(i), c.clone())).collect();
        terms.push((Monomial::one(), constant));
        self.from_terms(terms)
    }

    pub fn add(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        self.merge(a, b, None)
    }

    pub fn sub(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        let minus_one = self.field.neg(&self.field.one());
        self.merge(a, b, Some((&minus_one, &Monomial::one())))
    }

    pub fn neg(&self, a: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        Polynomial { terms: a.terms.iter().map(|(m, c)| (*m, self.field.neg(c))).collect() }
    }

    pub fn scale(&self, a: &Polynomial<F::Elem>, c: &F::Elem) -> Polynomial<F::Elem> {
        if self.field.is_zero(c) {
            return Polynomial::zero();
        }
        Polynomial { terms: a.terms.iter().map(|(m, x)| (*m, self.field.mul(x, c))).collect() }
    }

    pub fn mul_term(&self, a: &Polynomial<F::Elem>, c: &F::Elem, m: &Monomial) -> Polynomial<F::Elem> {
        if self.field.is_zero(c) {
            return Polynomial::zero();
        }
        // multiplying by a monomial preserves any monomial order
        Polynomial { terms: a.terms.iter().map(|(x, k)| (x.mul(m), self.field.mul(k, c))).collect() }
    }

    pub fn mul(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        let mut acc = Polynomial::zero();
        for (m, c) in &b.terms {
            acc = self.add(&acc, &self.mul_term(a, c, m));
        }
        acc
    }

    /// `a + c * m * b`, or `a` plus `b` when `scale` is `None`.
    pub(crate) fn merge(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
        scale: Option<(&F::Elem, &Monomial)>,
    ) -> Polynomial<F::Elem> {
        self.merge_slices(&a.terms, &b.terms, scale)
    }

    pub(crate) fn merge_slices(
        &self,
        a: &[(Monomial, F::Elem)],
        b: &[(Monomial, F::Elem)],
        scale: Option<(&F::Elem, &Monomial)>,
    ) -> Polynomial<F::Elem> {
        let f = &self.field;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let map_b = |t: &(Monomial, F::Elem)| match scale {
            Some((c, m)) => (t.0.mul(m), f.mul(&t.1, c)),
            None => (t.0, t.1.clone()),
        };
        let (mut i, mut j) = (0, 0);
        let mut pending_b = b.first().map(map_b);
        while i < a.len() {
            let Some(tb) = pending_b.as_ref() else { break };
            match self.cmp(&a[i].0, &tb.0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(pending_b.take().unwrap());
                    j += 1;
                    pending_b = b.get(j).map(map_b);
                }
                Ordering::Equal => {
                    let s = f.add(&a[i].1, &tb.1);
                    if !f.is_zero(&s) {
                        out.push((a[i].0, s));
                    }
                    i += 1;
                    j += 1;
                    pending_b = b.get(j).map(map_b);
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        if let Some(t) = pending_b {
            out.push(t);
            out.extend(b[j + 1..].iter().map(map_b));
        }
        Polynomial { terms: out }
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self, a: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        match a.leading() {
            None => Polynomial::zero(),
            Some((_, c)) => {
                let inv = self.field.inv(c).expect("leading coefficient is nonzero");
                self.scale(a, &inv)
            }
        }
    }

    pub fn eval(&self, a: &Polynomial<F::Elem>, point: &[F::Elem]) -> F::Elem {
        let f = &self.field;
        a.terms.iter().fold(f.zero(), |acc, (m, c)| {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate().take(self.nvars()) {
                for _ in 0..m.exponent(i) {
                    t = f.mul(&t, x);
                }
            }
            f.add(&acc, &t)
        })
    }

    /// Re-express a polynomial from another ring over the same variables.
    pub fn convert_from<G: Field>(
        &self,
        other: &PolyRing<G>,
        p: &Polynomial<G::Elem>,
        map: impl Fn(&G::Elem) -> Option<F::Elem>,
    ) -> Result<Polynomial<F::Elem>, GroebnerError> {
        let _ = other;
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in &p.terms {
            terms.push((*m, map(c).ok_or(GroebnerError::NotRepresentable)?));
        }
        Ok(self.from_terms(terms))
    }

    /// Canonical text: `c*x*y^2 - z + 3`.
    pub fn to_text(&self, a: &Polynomial<F::Elem>) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let f = &self.field;
        let mut out = String::new();
        for (k, (m, c)) in a.terms.iter().enumerate() {
            let negative = f.is_negative_repr(c);
            let abs = if negative { f.neg(c) } else { c.clone() };
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !f.is_one(&abs) || m.is_one() {
                factors.push(f.elem_to_string(&abs));
            }
            for i in 0..self.nvars() {
                match m.exponent(i) {
                    0 => {}
                    1 => factors.push(self.vars.name(i).to_string()),
                    e => {
                        let mut s = self.vars.name(i).to_string();
                        let _ = write!(s, "^{e}");
                        factors.push(s);
                    }
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Parse the canonical text form. Accepts `-` or `\u{2212}` for minus and
    /// integer or `a/b` coefficients.
    pub fn parse(&self, text: &str) -> Result<Polynomial<F::Elem>, GroebnerError> {
        let normalized = text.replace('\u{2212}', "-");
        let src = normalized.as_str();
        let mut terms = Vec::new();
        let mut pos = 0;
        let bytes = src.as_bytes();
        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        let err = |pos: usize, msg: &str| GroebnerError::Parse { pos, msg: msg.to_string() };
        skip_ws(&mut pos);
        if pos == bytes.len() {
            return Err(err(pos, "empty polynomial"));
        }
        let mut first = true;
        while pos < bytes.len() {
            let mut negative = false;
            if bytes[pos] == b'+' || bytes[pos] == b'-' {
                negative = bytes[pos] == b'-';
                pos += 1;
                skip_ws(&mut pos);
            } else if !first {
                return Err(err(pos, "expected '+' or '-'"));
            }
            first = false;
            let mut coeff = self.field.one();
            let mut mono = Monomial::one();
            let mut expect_factor = true;
            while expect_factor {
                skip_ws(&mut pos);
                let start = pos;
                if pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'/') {
                        pos += 1;
                    }
                    let q = parse_rational(&src[start..pos]).ok_or_else(|| err(start, "bad coefficient"))?;
                    let c = self.field.from_rational(&q).ok_or(GroebnerError::NotRepresentable)?;
                    coeff = self.field.mul(&coeff, &c);
                } else {
                    while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                        pos += 1;
                    }
                    if start == pos {
                        return Err(err(pos, "expected a coefficient or variable"));
                    }
                    let name = &src[start..pos];
                    let idx = self.vars.index(name).ok_or_else(|| GroebnerError::UnknownVariable(name.to_string()))?;
                    let mut e: u16 = 1;
                    skip_ws(&mut pos);
                    if pos < bytes.len() && bytes[pos] == b'^' {
                        pos += 1;
                        skip_ws(&mut pos);
                        let s = pos;
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                        e = src[s..pos].parse().map_err(|_| err(s, "bad exponent"))?;
                    }
                    let mut exps = [0u16; MAX_VARS];
                    exps[idx] = e;
                    let factor = Monomial::from_exponents(&exps[..self.nvars().max(idx + 1)])?;
                    mono = mono.mul(&factor);
                }
                skip_ws(&mut pos);
                expect_factor = pos < bytes.len() && bytes[pos] == b'*';
                if expect_factor {
                    pos += 1;
                }
            }
            if negative {
                coeff = self.field.neg(&coeff);
            }
            terms.push((mono, coeff));
            skip_ws(&mut pos);
        }
        Ok(self.from_terms(terms))
    }
}
