//! Path-integral route: expand the free generating functional in Green-graded
//! sources and take left functional derivatives.
//!
//! Green indices are carried as block ids. For one set partition of the
//! insertions into blocks, every derivative in a block shares one index and
//! distinct blocks have distinct indices; the partition then stands for
//! `falling_factorial(#blocks)` concrete index assignments.
//!
//! A monomial keeps its untouched bilinears `J*(u) Δ(u−v) J(v)` as counts per
//! (field, block) sector. A bilinear is even under every exchange rule, so
//! these counts can sit in front of the ordered list of half-contracted
//! sources without changing any sign.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{falling_factorial, PPoly};
use crate::correlator::{
    CorrelatorError, CorrelatorResult, FieldSpec, Kernel, KernelKind, Mode, ProductSpec,
    RelativeRules, SignTable, Term,
};
use crate::partition::for_each_set_partition;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenfunError {
    #[error("the generating functional only produces time-ordered products")]
    NotTimeOrdered,
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error("internal: derivative result {0} is not an integer multiple of the kernel i-units")]
    NonIntegral(String),
}

/// Exact complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Scalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::real(BigRational::one())
    }

    pub fn real(re: BigRational) -> Self {
        Scalar {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn i_pow(k: u32) -> Self {
        let one = BigRational::one();
        let zero = BigRational::zero();
        match k % 4 {
            0 => Scalar { re: one, im: zero },
            1 => Scalar { re: zero, im: one },
            2 => Scalar { re: -one, im: zero },
            _ => Scalar { re: zero, im: -one },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        Scalar {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

/// One Green component of a source, sitting at a formal integration point
/// whose propagator already reaches the external point `partner`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceComponent {
    pub field: usize,
    pub block: usize,
    /// `J*` or `η̄` when set, `J` or `η` otherwise.
    pub starred: bool,
    pub partner: String,
}

/// `δ/δS^(block)(point)` for the source `S` of `field`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceDerivative {
    pub field: usize,
    pub block: usize,
    pub starred: bool,
    pub point: String,
}

/// Source-dependent part of one monomial; its scalar lives in the owning
/// [`FunctionalState`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceMonomial {
    /// Untouched bilinears per (field, block).
    pub bilinears: BTreeMap<(usize, usize), u32>,
    /// Half-contracted sources, kept in canonical order.
    pub factors: Vec<SourceComponent>,
    /// Completed propagators, sorted.
    pub kernels: Vec<Kernel>,
}

impl SourceMonomial {
    pub fn is_source_free(&self) -> bool {
        self.bilinears.is_empty() && self.factors.is_empty()
    }
}

/// A sum of monomials with like terms merged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionalState {
    terms: BTreeMap<SourceMonomial, Scalar>,
}

impl FunctionalState {
    pub fn unit() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(SourceMonomial::default(), Scalar::one());
        FunctionalState { terms }
    }

    pub fn add(&mut self, monomial: SourceMonomial, scalar: Scalar) {
        if scalar.is_zero() {
            return;
        }
        let slot = self.terms.entry(monomial).or_default();
        *slot = &*slot + &scalar;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SourceMonomial, &Scalar)> {
        self.terms.iter().filter(|(_, s)| !s.is_zero())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The value at zero sources.
    pub fn at_zero_sources(&self) -> FunctionalState {
        let mut out = FunctionalState::default();
        for (m, s) in self.iter().filter(|(m, _)| m.is_source_free()) {
            out.add(m.clone(), s.clone());
        }
        out
    }
}

/// Free generating functional of a set of fields with their exchange rules.
#[derive(Clone, Debug)]
pub struct FreeFunctional {
    fields: Vec<FieldSpec>,
    signs: SignTable,
}

impl FreeFunctional {
    pub fn new(fields: Vec<FieldSpec>, relative: &RelativeRules) -> Self {
        let signs = SignTable::new(&fields, relative);
        FreeFunctional { fields, signs }
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    fn neutral(&self, field: usize) -> bool {
        !self.fields[field].pairs_with_adjoint()
    }

    /// Sign from moving a source of `(field, block)` past one of `(other, other_block)`.
    pub fn grading_sign(
        &self,
        field: usize,
        block: usize,
        other: usize,
        other_block: usize,
    ) -> Result<i32, GenfunError> {
        Ok(self.signs.sign(field, other, block == other_block)?)
    }

    /// Sorts `factors` by adjacent transpositions, returning the accumulated
    /// grading sign, or `None` if two identical odd components meet.
    pub fn canonicalize(
        &self,
        mut factors: Vec<SourceComponent>,
    ) -> Result<Option<(Vec<SourceComponent>, i32)>, GenfunError> {
        let mut sign = 1;
        let n = factors.len();
        for end in (1..n).rev() {
            for j in 0..end {
                let (a, b) = (&factors[j], &factors[j + 1]);
                if a > b {
                    sign *= self.grading_sign(a.field, a.block, b.field, b.block)?;
                    factors.swap(j, j + 1);
                }
            }
        }
        for w in factors.windows(2) {
            if w[0] == w[1]
                && self.grading_sign(w[0].field, w[0].block, w[1].field, w[1].block)? < 0
            {
                return Ok(None);
            }
        }
        Ok(Some((factors, sign)))
    }

    /// Order-`half_order` term of `exp(−i Σ bilinears)` over fields and
    /// `blocks` Green-index classes.
    pub fn w_free_expansion(&self, blocks: usize, half_order: usize) -> FunctionalState {
        let sectors: Vec<(usize, usize)> = (0..self.fields.len())
            .flat_map(|f| (0..blocks).map(move |b| (f, b)))
            .collect();
        self.expansion_over(&sectors, half_order)
    }

    /// Same as [`Self::w_free_expansion`] restricted to the listed sectors.
    /// Bilinears commute, so the multinomial expansion of
    /// `(1/m!) (−i Σ_s Y_s)^m` is `(−i)^m Σ Π_s Y_s^{k_s} / k_s!`, with an extra
    /// `1/2` per neutral bilinear.
    pub fn expansion_over(&self, sectors: &[(usize, usize)], half_order: usize) -> FunctionalState {
        let mut state = FunctionalState::default();
        let mut counts = vec![0u32; sectors.len()];
        self.compositions(sectors, half_order as u32, 0, &mut counts, &mut state);
        state
    }

    fn compositions(
        &self,
        sectors: &[(usize, usize)],
        left: u32,
        at: usize,
        counts: &mut [u32],
        out: &mut FunctionalState,
    ) {
        if at == sectors.len() {
            if left > 0 {
                return;
            }
            let mut denom = BigInt::one();
            let mut monomial = SourceMonomial::default();
            let mut total = 0;
            for (&(f, b), &k) in sectors.iter().zip(counts.iter()) {
                if k == 0 {
                    continue;
                }
                total += k;
                for j in 1..=k {
                    denom *= j;
                }
                if self.neutral(f) {
                    denom *= BigInt::from(2u32).pow(k);
                }
                monomial.bilinears.insert((f, b), k);
            }
            let mut scalar = Scalar::i_pow(3 * total);
            scalar.re /= BigRational::from_integer(denom.clone());
            scalar.im /= BigRational::from_integer(denom);
            out.add(monomial, scalar);
            return;
        }
        for k in 0..=left {
            counts[at] = k;
            self.compositions(sectors, left - k, at + 1, counts, out);
        }
        counts[at] = 0;
    }

    fn complete(&self, field: usize, starred_point: &str, plain_point: &str) -> Kernel {
        match self.fields[field].kernel() {
            KernelKind::FermionFeynman => Kernel::fermion(starred_point, plain_point),
            _ => {
                // symmetric symbol; orientation fixed later against the product
                let (a, b) = if starred_point <= plain_point {
                    (starred_point, plain_point)
                } else {
                    (plain_point, starred_point)
                };
                Kernel {
                    kind: KernelKind::ScalarFeynman,
                    args: [a.to_string(), b.to_string()],
                }
            }
        }
    }

    /// Applies the left-acting derivative `d` to every monomial.
    ///
    /// The derivative moves left to right; passing a source multiplies by the
    /// grading sign, hitting a matching source removes it and binds its
    /// formal point to `d.point`. Nothing left to hit means zero.
    pub fn apply_derivative(
        &self,
        state: &FunctionalState,
        d: &SourceDerivative,
    ) -> Result<FunctionalState, GenfunError> {
        let mut out = FunctionalState::default();
        for (mono, scalar) in state.iter() {
            self.derive_monomial(mono, scalar, d, &mut out)?;
        }
        Ok(out)
    }

    fn derive_monomial(
        &self,
        mono: &SourceMonomial,
        scalar: &Scalar,
        d: &SourceDerivative,
        out: &mut FunctionalState,
    ) -> Result<(), GenfunError> {
        let sector = (d.field, d.block);
        if let Some(&k) = mono.bilinears.get(&sector) {
            let same = self.grading_sign(d.field, d.block, d.field, d.block)?;
            // weight and the component left behind
            let hit = if self.neutral(d.field) {
                (!d.starred).then_some((1 + same, false))
            } else if d.starred {
                Some((1, false))
            } else {
                Some((same, true))
            };
            if let Some((weight, remaining_starred)) = hit {
                let mut next = mono.clone();
                if k == 1 {
                    next.bilinears.remove(&sector);
                } else {
                    next.bilinears.insert(sector, k - 1);
                }
                let mut factors = Vec::with_capacity(next.factors.len() + 1);
                factors.push(SourceComponent {
                    field: d.field,
                    block: d.block,
                    starred: remaining_starred,
                    partner: d.point.clone(),
                });
                factors.append(&mut next.factors);
                if let Some((factors, sign)) = self.canonicalize(factors)? {
                    next.factors = factors;
                    out.add(next, scalar.scale(weight as i64 * k as i64 * sign as i64));
                }
            }
        }
        let mut sign = 1;
        for (j, fac) in mono.factors.iter().enumerate() {
            if fac.field == d.field && fac.block == d.block && fac.starred == d.starred {
                let mut next = mono.clone();
                let fac = next.factors.remove(j);
                let kernel = if fac.starred {
                    self.complete(d.field, &d.point, &fac.partner)
                } else {
                    self.complete(d.field, &fac.partner, &d.point)
                };
                let at = next.kernels.partition_point(|k| k < &kernel);
                next.kernels.insert(at, kernel);
                out.add(next, scalar.scale(sign as i64));
            }
            sign *= self.grading_sign(d.field, d.block, fac.field, fac.block)?;
        }
        Ok(())
    }
}

/// The source derivative standing for insertion `position` and its
/// `(1/i)`-type prefactor exponent of `i`.
fn derivative_for(product: &ProductSpec, position: usize, block: usize) -> (SourceDerivative, u32) {
    let ins = &product.insertions()[position];
    let field = product.field_of(position);
    let starred = field.pairs_with_adjoint() && !ins.adjoint;
    // (1/i) = i^3 per derivative; the psibar derivative has to pass the
    // Grassmann field in the source term psibar·eta, giving i instead
    let i_power = if field.kernel() == KernelKind::FermionFeynman && ins.adjoint {
        1
    } else {
        3
    };
    (
        SourceDerivative {
            field: ins.field,
            block,
            starred,
            point: ins.label.clone(),
        },
        i_power,
    )
}

/// Vacuum expectation value of a time-ordered product from the generating
/// functional. Output has the same canonical form as
/// [`crate::correlator::evaluate`].
pub fn n_point(product: &ProductSpec) -> Result<CorrelatorResult, GenfunError> {
    n_point_at_order(product, product.len() / 2)
}

/// Like [`n_point`] but expanding the free functional to `half_order`
/// regardless of the number of insertions.
pub fn n_point_at_order(
    product: &ProductSpec,
    half_order: usize,
) -> Result<CorrelatorResult, GenfunError> {
    if product.mode() != Mode::TimeOrdered {
        return Err(GenfunError::NotTimeOrdered);
    }
    let n = product.len();
    let order = product.label_order();
    if n % 2 == 1 {
        return Ok(CorrelatorResult::zero());
    }
    let functional = FreeFunctional::new(product.fields().to_vec(), product.relative_rules());
    let mut collected: BTreeMap<Vec<Kernel>, PPoly> = BTreeMap::new();
    let mut failure = None;
    for_each_set_partition(n, |labels, blocks| {
        if failure.is_some() {
            return;
        }
        match partition_value(product, &functional, labels, half_order) {
            Ok(values) => {
                let weight = falling_factorial(blocks);
                for (kernels, c) in values {
                    *collected.entry(kernels).or_default() += &weight.scale(c);
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let terms = collected.into_iter().map(|(kernels, coefficient)| {
        let factors: Vec<Kernel> = kernels
            .into_iter()
            .map(|k| match k.kind {
                KernelKind::ScalarFeynman => Kernel::scalar(&k.args[0], &k.args[1], &order),
                _ => k,
            })
            .collect();
        let i_power = (factors.len() % 4) as u8;
        Term::new(coefficient, i_power, factors)
    });
    Ok(CorrelatorResult::from_terms(terms, &order))
}

/// Derivatives for one block assignment, as integer coefficients of the
/// `i`-unit kernels.
fn partition_value(
    product: &ProductSpec,
    functional: &FreeFunctional,
    labels: &[usize],
    half_order: usize,
) -> Result<Vec<(Vec<Kernel>, BigInt)>, GenfunError> {
    let n = product.len();
    let mut derivatives = Vec::with_capacity(n);
    let mut prefactor = 0u32;
    let mut sectors = BTreeSet::new();
    // balance per sector: neutral counts must be even, charged ones must pair up
    let mut balance: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
    for (pos, &block) in labels.iter().enumerate() {
        let (d, ip) = derivative_for(product, pos, block);
        prefactor += ip;
        sectors.insert((d.field, d.block));
        let e = balance.entry((d.field, d.block)).or_default();
        if d.starred {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
        derivatives.push(d);
    }
    let viable = balance.iter().all(|(&(f, _), &(starred, plain))| {
        if product.fields()[f].pairs_with_adjoint() {
            starred == plain
        } else {
            plain % 2 == 0
        }
    });
    if !viable {
        return Ok(Vec::new());
    }
    let sectors: Vec<_> = sectors.into_iter().collect();
    let mut state = functional.expansion_over(&sectors, half_order);
    for d in derivatives.iter().rev() {
        state = functional.apply_derivative(&state, d)?;
        if state.is_empty() {
            return Ok(Vec::new());
        }
    }
    let prefactor = Scalar::i_pow(prefactor);
    let mut out = Vec::new();
    for (mono, scalar) in state.at_zero_sources().iter() {
        let value = &prefactor * scalar;
        // strip one i per propagator
        let units = Scalar::i_pow(4 - (mono.kernels.len() % 4) as u32);
        let value = &value * &units;
        if !value.im.is_zero() || !value.re.is_integer() {
            return Err(GenfunError::NonIntegral(format!("{:?}", value)));
        }
        out.push((mono.kernels.clone(), value.re.to_integer()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
