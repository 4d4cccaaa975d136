//! Presentation of the circular-unit module attached to a good tuple, the
//! non-freeness argument run as a chain of exact checks, and the certificate.
//!
//! Generators are ordered `e_Q, e_1, ..., e_(p+1), e_K`. The working ring is
//! `(Z/p^k)[T]/(T^(d-1))[G]` with `G = (Z/p)^2`: one `T`-degree is spent on
//! the division by `gamma - 1 = T` in the second family of relations.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::ilog;
use crate::error::{Error, Result};
use crate::fields::{build_counterexample_field, CounterexampleField};
use crate::iwasawa::{
    formal_identity_check, one_minus_frob_inv, trace_element, FiniteAbelianGroup, GroupRingElt, ModulusPoly,
    RingSpec,
};
use crate::modules::{FPModule, Scalars, Tower};
use crate::padic::{frobenius_exponent, PadicInt};

pub const SCHEMA: &str = "sinnott-cert/1";
pub const TOPOLOGICAL_GENERATOR: &str = "1+p";

const EXACT: &str = "exact";
const AT_PRECISION: &str = "holds modulo (p^k, T^d)";
const LIFTS: &str = "non-membership and non-vanishing lift to the infinite level (quotient argument)";
const PROXY: &str = "finite-precision model statement";

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub k: u32,
    /// truncation degree before the division by `T`
    pub d: usize,
    /// tower levels `0..=levels`; `0` skips the tower
    pub levels: u32,
    /// coset generator lifts tried per line; `None` tries all of them, `Some(0)` skips
    pub basis_lifts: Option<usize>,
    /// negative control: perturb the unit in the first relation of this line
    pub corrupt_unit: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { k: crate::padic::DEFAULT_PRECISION, d: 16, levels: 0, basis_lifts: None, corrupt_unit: None }
    }
}

/// The model `R^(p+3) / Rel` with its coefficient data.
#[derive(Debug, Clone)]
pub struct CounterexamplePresentation {
    pub p: u64,
    pub k: u32,
    pub build_degree: usize,
    pub field: CounterexampleField,
    /// `c_l` at the precision the units were built with
    pub exponents: Vec<PadicInt>,
    /// `h_i`, generating line `i`
    pub line_generators: Vec<usize>,
    /// `g_i`, generating `G / H_i`
    pub coset_generators: Vec<usize>,
    /// working ring, truncation `d - 1`
    pub spec: RingSpec,
    /// `u_i = 1 - Frob_(l_i)^-1`
    pub units: Vec<GroupRingElt>,
    /// `w_i = (prod_(j != i) u_j) / T`
    pub partial: Vec<GroupRingElt>,
    /// `(prod_i u_i) / T`
    pub total: GroupRingElt,
    pub corrupted: Option<usize>,
    module: FPModule,
    s_model: FPModule,
}

/// Frobenius exponents, `u`, `w` and the total product.
type UnitSeries = (Vec<PadicInt>, Vec<GroupRingElt>, Vec<GroupRingElt>, GroupRingElt);

/// `u`, `w` and the total product at truncation `degree - 1`, built from
/// series at truncation `degree`.
fn unit_series(
    primes: &[u64],
    p: u64,
    k: u32,
    degree: usize,
    group: &FiniteAbelianGroup,
) -> Result<UnitSeries> {
    let build = RingSpec::new(p, k, ModulusPoly::Truncation(degree), group.clone())?;
    let precision = k + ilog(degree.saturating_sub(1).max(1) as u64, p);
    let exponents = primes.iter().map(|&l| frobenius_exponent(l, p, precision)).collect::<Result<Vec<_>>>()?;
    let full = exponents.iter().map(|c| one_minus_frob_inv(c, &build)).collect::<Result<Vec<_>>>()?;
    let product = |skip: Option<usize>| {
        full.iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .fold(GroupRingElt::one(&build), |acc, (_, u)| acc.mul(u))
    };
    let partial = (0..primes.len()).map(|i| product(Some(i)).divide_by_t()).collect::<Result<Vec<_>>>()?;
    let total = product(None).divide_by_t()?;
    let working = total.spec().clone();
    let units = full
        .iter()
        .map(|u| u.truncate(k, working.modulus()))
        .collect::<Result<Vec<_>>>()?;
    Ok((exponents, units, partial, total))
}

/// Default lift of a generator of `G / H`: the first group element outside `H`
/// among the two coordinate generators.
fn default_coset_generator(group: &FiniteAbelianGroup, line: &[usize]) -> usize {
    let e1 = group.index(&[1, 0]);
    if line.contains(&e1) {
        group.index(&[0, 1])
    } else {
        e1
    }
}

fn coset_sum(spec: &RingSpec, g: usize, p: u64) -> GroupRingElt {
    let group = spec.group();
    let mut acc = GroupRingElt::zero(spec);
    let mut x = 0;
    for _ in 0..p {
        acc = acc.add(&GroupRingElt::group_element(spec, x));
        x = group.add(x, g);
    }
    acc
}

struct RelationData<'a> {
    p: u64,
    spec: &'a RingSpec,
    line_generators: &'a [usize],
    coset_generators: &'a [usize],
    units: &'a [GroupRingElt],
    partial: &'a [GroupRingElt],
    corrupted: Option<usize>,
}

impl RelationData<'_> {
    /// Fixedness and second-family relations on `e_Q, e_1, ..., e_(p+1)`.
    fn s_relations(&self) -> Vec<Vec<GroupRingElt>> {
        let spec = self.spec;
        let n = self.p as usize + 2;
        let zero = || vec![GroupRingElt::zero(spec); n];
        let one = GroupRingElt::one(spec);
        let group = spec.group();
        let mut rels = Vec::new();
        for g in [group.index(&[1, 0]), group.index(&[0, 1])] {
            let mut r = zero();
            r[0] = GroupRingElt::group_element(spec, g).sub(&one);
            rels.push(r);
        }
        for (i, &h) in self.line_generators.iter().enumerate() {
            let mut r = zero();
            r[1 + i] = GroupRingElt::group_element(spec, h).sub(&one);
            rels.push(r);
        }
        for (i, &g) in self.coset_generators.iter().enumerate() {
            let mut r = zero();
            r[1 + i] = coset_sum(spec, g, self.p);
            r[0] = self.partial[i].neg();
            rels.push(r);
        }
        rels
    }

    /// All relations on `e_Q, e_1, ..., e_(p+1), e_K`.
    fn relations(&self) -> Result<Vec<Vec<GroupRingElt>>> {
        let spec = self.spec;
        let lines = spec.group().lines()?;
        let mut rels: Vec<Vec<GroupRingElt>> = self
            .s_relations()
            .into_iter()
            .map(|mut r| {
                r.push(GroupRingElt::zero(spec));
                r
            })
            .collect();
        for (i, line) in lines.iter().enumerate() {
            let mut r = vec![GroupRingElt::zero(spec); self.p as usize + 3];
            let mut u = self.units[i].clone();
            if self.corrupted == Some(i) {
                u = u.add(&GroupRingElt::t(spec));
            }
            r[self.p as usize + 2] = trace_element(line, spec);
            r[1 + i] = u.neg();
            rels.push(r);
        }
        Ok(rels)
    }
}

/// Builds the presentation at truncation `opts.d`, working at `opts.d - 1`.
pub fn build_presentation(field: &CounterexampleField, opts: &CertifyOptions) -> Result<CounterexamplePresentation> {
    let p = field.p;
    field.verify()?;
    if opts.d < 3 {
        return Err(Error::PrecisionExhausted { required: 3, got: opts.d });
    }
    let group = FiniteAbelianGroup::elementary_rank2(p);
    let (exponents, units, partial, total) = unit_series(&field.primes, p, opts.k, opts.d, &group)?;
    let spec = total.spec().clone();
    for (i, u) in units.iter().enumerate() {
        if (0..spec.group_order()).any(|g| u.component(g)[0] != 0) {
            return Err(Error::Construction(format!("unit {i} is not divisible by T")));
        }
    }
    let line_generators = group.line_generators()?;
    let lines = group.lines()?;
    let coset_generators: Vec<usize> = lines.iter().map(|l| default_coset_generator(&group, l)).collect();
    if let Some(i) = opts.corrupt_unit {
        if i > p as usize {
            return Err(Error::InvalidArgument(format!("no line {i}")));
        }
    }
    let data = RelationData {
        p,
        spec: &spec,
        line_generators: &line_generators,
        coset_generators: &coset_generators,
        units: &units,
        partial: &partial,
        corrupted: opts.corrupt_unit,
    };
    let module = FPModule::new(&spec, p as usize + 3, data.relations()?)?;
    let s_model = FPModule::new(&spec, p as usize + 2, data.s_relations())?;
    Ok(CounterexamplePresentation {
        p,
        k: opts.k,
        build_degree: opts.d,
        field: field.clone(),
        exponents,
        line_generators,
        coset_generators,
        spec,
        units,
        partial,
        total,
        corrupted: opts.corrupt_unit,
        module,
        s_model,
    })
}

impl CounterexamplePresentation {
    pub fn module(&self) -> &FPModule {
        &self.module
    }

    pub fn s_model(&self) -> &FPModule {
        &self.s_model
    }

    pub fn working_degree(&self) -> usize {
        self.build_degree - 1
    }

    pub fn ngens(&self) -> usize {
        self.p as usize + 3
    }

    pub fn index_q(&self) -> usize {
        0
    }

    pub fn index_line(&self, i: usize) -> usize {
        1 + i
    }

    pub fn index_k(&self) -> usize {
        self.p as usize + 2
    }

    fn vector(&self, entries: &[(usize, GroupRingElt)]) -> Vec<GroupRingElt> {
        let mut v = self.module.zero_vector();
        for (j, x) in entries {
            v[*j] = v[*j].add(x);
        }
        v
    }

    fn group_element(&self, g: usize) -> GroupRingElt {
        GroupRingElt::group_element(&self.spec, g)
    }

    /// `{e_Q} ∪ {g_i^j e_i : j <= p - 2}` on the generators of the model
    /// of width `width`.
    fn sfree_basis(&self, coset_generators: &[usize], width: usize) -> Vec<Vec<GroupRingElt>> {
        let zero = || vec![GroupRingElt::zero(&self.spec); width];
        let mut out = Vec::new();
        let mut eq = zero();
        eq[0] = GroupRingElt::one(&self.spec);
        out.push(eq);
        let group = self.spec.group();
        for (i, &g) in coset_generators.iter().enumerate() {
            let mut x = 0;
            for _ in 0..self.p - 1 {
                let mut v = zero();
                v[1 + i] = self.group_element(x);
                out.push(v);
                x = group.add(x, g);
            }
        }
        out
    }

    /// The `S`-generators `e_Q, e_1, ..., e_(p+1)` inside the full model.
    fn s_generators(&self, scale: i128) -> Vec<Vec<GroupRingElt>> {
        (0..self.p as usize + 2).map(|j| self.vector(&[(j, GroupRingElt::scalar(&self.spec, scale))])).collect()
    }

    /// Same relations with other lifts of the coset generators.
    fn s_model_with(&self, coset_generators: &[usize]) -> Result<FPModule> {
        let data = RelationData {
            p: self.p,
            spec: &self.spec,
            line_generators: &self.line_generators,
            coset_generators,
            units: &self.units,
            partial: &self.partial,
            corrupted: None,
        };
        FPModule::new(&self.spec, self.p as usize + 2, data.s_relations())
    }

    /// The model at finite level `n`, from series known mod `T^(k p^n)`.
    pub fn at_level(&self, n: u32) -> Result<FPModule> {
        let group = self.spec.group().clone();
        let degree = self.k as usize * (self.p as usize).pow(n);
        let (_, units, partial, _) = unit_series(&self.field.primes, self.p, self.k, degree + 1, &group)?;
        let lower = |x: &GroupRingElt| x.to_level(n);
        let units = units.iter().map(lower).collect::<Result<Vec<_>>>()?;
        let partial = partial.iter().map(lower).collect::<Result<Vec<_>>>()?;
        let spec = units[0].spec().clone();
        let data = RelationData {
            p: self.p,
            spec: &spec,
            line_generators: &self.line_generators,
            coset_generators: &self.coset_generators,
            units: &units,
            partial: &partial,
            corrupted: self.corrupted,
        };
        FPModule::new(&spec, self.ngens(), data.relations()?)
    }

    /// The `S`-model at finite level `n`.
    pub fn s_model_at_level(&self, n: u32) -> Result<FPModule> {
        let full = self.at_level(n)?;
        let width = self.p as usize + 2;
        let rels = full
            .relations()
            .iter()
            .filter(|r| r[width].is_zero())
            .map(|r| r[..width].to_vec())
            .collect();
        FPModule::new(full.spec(), width, rels)
    }
}

/// One verified step, with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub k: u32,
    /// truncation degree; absent for exact group-ring identities and towers
    pub d: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: bool,
    pub witness: Value,
    pub precision: Precision,
    pub soundness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub p: u64,
    pub k: u32,
    pub d: usize,
    pub tuple: Vec<u64>,
    pub field: Value,
    pub topological_generator: String,
    pub checks: Vec<CheckRecord>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub schema: String,
    pub p: u64,
    pub k: u32,
    pub d: usize,
    pub tuple: Vec<u64>,
    pub status: String,
    pub first_failed: String,
    pub reason: String,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Certified(Certificate),
    Failed(FailureReport),
}

impl Outcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, Outcome::Certified(_))
    }

    pub fn to_json(&self) -> String {
        let s = match self {
            Outcome::Certified(c) => serde_json::to_string_pretty(c),
            Outcome::Failed(f) => serde_json::to_string_pretty(f),
        };
        s.expect("plain data serializes") + "\n"
    }
}

fn record(name: &str, verdict: bool, witness: Value, k: u32, d: Option<usize>, soundness: &str) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        verdict,
        witness,
        precision: Precision { k, d },
        soundness: soundness.into(),
    }
}

fn leading_t_coefficient(x: &GroupRingElt) -> u64 {
    let spec = x.spec();
    (0..spec.group_order()).fold(0, |acc, g| (acc + x.component(g).get(1).copied().unwrap_or(0)) % spec.q())
}

fn t_valuation(x: &GroupRingElt) -> usize {
    let spec = x.spec();
    (0..spec.degree())
        .find(|&t| (0..spec.group_order()).any(|g| x.component(g)[t] != 0))
        .unwrap_or(spec.degree())
}

fn support_json(m: &FPModule, v: &[GroupRingElt]) -> Value {
    let e = m.element(v);
    json!({ "nonzero_entries": e.support().len(), "residue_support": e.support() })
}

pub fn check_field_conditions(field: &CounterexampleField, k: u32) -> CheckRecord {
    let result = field.verify();
    let frob: Vec<Value> = field
        .primes
        .iter()
        .zip(&field.subfields)
        .map(|(&l, sub)| {
            let trivial = sub.frobenius_class(l).map(|c| c.is_trivial()).unwrap_or(false);
            json!({ "l": l, "subfield_conductor": sub.conductor(), "frobenius_trivial": trivial })
        })
        .collect();
    let witness = json!({
        "conductor": field.field.conductor(),
        "degree": field.field.degree(),
        "subfields": frob,
        "error": result.as_ref().err().map(|e| e.to_string()),
    });
    record("field_conditions", result.is_ok(), witness, k, None, EXACT)
}

pub fn check_presentation(pres: &CounterexamplePresentation) -> CheckRecord {
    let p = pres.p;
    let mut ok = true;
    let mut units = Vec::new();
    for (i, (u, c)) in pres.units.iter().zip(&pres.exponents).enumerate() {
        let lead = leading_t_coefficient(u);
        let expected = c.value() % pres.spec.q();
        let constant_free = t_valuation(u) >= 1;
        ok &= constant_free && lead == expected;
        units.push(json!({
            "line": i,
            "l": pres.field.primes[i],
            "c_l": c.value(),
            "c_l_precision": c.precision(),
            "t_coefficient": lead,
            "u": u.to_json(),
        }));
    }
    let mut partial = Vec::new();
    for (i, w) in pres.partial.iter().enumerate() {
        let v = t_valuation(w);
        ok &= v as u64 >= p - 1;
        partial.push(json!({ "line": i, "t_valuation": v }));
    }
    let structural = 2 * (p as usize + 1);
    let fixedness = pres.module.relations().len() - structural;
    let mut names = vec!["e_Q".to_string()];
    names.extend((1..=p + 1).map(|i| format!("e_{i}")));
    names.push("e_K".into());
    let witness = json!({
        "generators": names,
        "relations": { "structural": structural, "fixedness": fixedness },
        "units": units,
        "partial_products": partial,
        "working_truncation": pres.working_degree(),
    });
    record("presentation", ok, witness, pres.k, Some(pres.working_degree()), AT_PRECISION)
}

pub fn check_formal_identity(pres: &CounterexamplePresentation) -> Result<CheckRecord> {
    let spec = pres.spec.with_modulus(ModulusPoly::Truncation(1))?;
    let holds = formal_identity_check(&spec)?;
    let cyclic = RingSpec::new(pres.p, pres.k, ModulusPoly::Truncation(1), FiniteAbelianGroup::cyclic(pres.p * pres.p))?;
    let rejected = formal_identity_check(&cyclic).is_err();
    Ok(record(
        "formal_identity",
        holds && rejected,
        json!({ "identity_holds": holds, "cyclic_group_rejected": rejected }),
        pres.k,
        None,
        EXACT,
    ))
}

/// The third relation through each line, and the fourth relation, reduced
/// against the relation span.
pub fn derive_r3_r4(pres: &CounterexamplePresentation) -> CheckRecord {
    let m = &pres.module;
    let all: Vec<usize> = (0..pres.spec.group_order()).collect();
    let tr_g = trace_element(&all, &pres.spec);
    let r3 = pres.vector(&[(pres.index_k(), tr_g), (pres.index_q(), pres.total.neg())]);
    let r3_holds = m.is_zero(&r3);
    // the product u_i w_i must not depend on the line used
    let via: Vec<bool> = pres.units.iter().zip(&pres.partial).map(|(u, w)| u.mul(w) == pres.total).collect();
    let mut r4 = vec![(pres.index_k(), GroupRingElt::scalar(&pres.spec, pres.p as i128)), (pres.index_q(), pres.total.clone())];
    for (i, u) in pres.units.iter().enumerate() {
        r4.push((pres.index_line(i), u.neg()));
    }
    let r4 = pres.vector(&r4);
    let r4_holds = m.is_zero(&r4);
    let witness = json!({
        "r3_reduces_to_zero": r3_holds,
        "r3_line_independent": via,
        "r4_reduces_to_zero": r4_holds,
        "r4_residue": if r4_holds { Value::Null } else { support_json(m, &r4) },
    });
    let ok = r3_holds && r4_holds && via.iter().all(|&b| b);
    record("derive_R3_R4", ok, witness, pres.k, Some(pres.working_degree()), AT_PRECISION)
}

/// Conjugates of `e_Q` and `e_i` lie in the `T`-span of the basis, in the
/// `S`-model with coset generators `cosets`; `lines` restricts to some lines.
fn conjugates_in_basis(pres: &CounterexamplePresentation, model: &FPModule, basis: &[Vec<GroupRingElt>], lines: &[usize]) -> bool {
    let span = model.span_with(basis, Scalars::Lambda);
    let order = pres.spec.group_order();
    let mut targets = vec![0usize];
    targets.extend(lines.iter().map(|&i| 1 + i));
    targets.iter().all(|&j| {
        (0..order).all(|g| {
            let mut v = model.zero_vector();
            v[j] = pres.group_element(g);
            span.contains(&model.flatten(&v))
        })
    })
}

pub fn check_sfree_basis(pres: &CounterexamplePresentation) -> Result<CheckRecord> {
    let p = pres.p as usize;
    let width = p + 2;
    let basis = pres.sfree_basis(&pres.coset_generators, width);
    let lines: Vec<usize> = (0..=p).collect();
    let generates = conjugates_in_basis(pres, &pres.s_model, &basis, &lines);
    // the dropped conjugate g_i^(p-1) e_i, recovered through the second relation
    let group = pres.spec.group();
    let span = pres.s_model.span_with(&basis, Scalars::Lambda);
    let recovered: Vec<bool> = pres
        .coset_generators
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let mut x = 0;
            for _ in 0..p - 1 {
                x = group.add(x, g);
            }
            let mut v = pres.s_model.zero_vector();
            v[1 + i] = pres.group_element(x);
            span.contains(&pres.s_model.flatten(&v))
        })
        .collect();
    let restricted = pres.s_model.restrict_scalars();
    let rank = restricted.nakayama_rank()?;
    let free = restricted.is_free_local()?;
    let ok = basis.len() == p * p && generates && recovered.iter().all(|&b| b) && rank == p * p && free;
    let witness = json!({
        "basis_size": basis.len(),
        "coset_generators": pres.coset_generators.iter().map(|&g| group.coords(g)).collect::<Vec<_>>(),
        "conjugates_generated": generates,
        "dropped_conjugate_recovered": recovered,
        "lambda_nakayama_rank": rank,
        "lambda_free": free,
        "log_p_cardinality": restricted.log_card(),
    });
    Ok(record("sfree_basis", ok, witness, pres.k, Some(pres.working_degree()), PROXY))
}

pub fn check_q_nonzero(pres: &CounterexamplePresentation) -> CheckRecord {
    let m = &pres.module;
    let prime_to_p: Vec<bool> = pres.units.iter().map(|u| u.is_prime_to_p()).collect();
    let ek = m.generator(pres.index_k());
    let s = pres.s_generators(1);
    let outside = !m.in_span(&ek, &s, Scalars::Full);
    let p_ek: Vec<GroupRingElt> = ek.iter().map(|x| x.scale(pres.p as i128)).collect();
    let p_in_s = m.in_span(&p_ek, &s, Scalars::Full);
    let p_outside_ps = !m.in_span(&p_ek, &pres.s_generators(pres.p as i128), Scalars::Full);
    let residue = m.span_with(&s, Scalars::Full).reduce(&m.flatten(&ek));
    let support: Vec<(usize, u64)> = residue.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect();
    let ok = prime_to_p.iter().all(|&b| b) && outside && p_in_s && p_outside_ps;
    let witness = json!({
        "units_prime_to_p": prime_to_p,
        "e_K_outside_S": outside,
        "e_K_residue_support": support,
        "p_e_K_in_S": p_in_s,
        "p_e_K_outside_pS": p_outside_ps,
    });
    record("Q_nonzero", ok, witness, pres.k, Some(pres.working_degree()), LIFTS)
}

pub fn certify_torsion(pres: &CounterexamplePresentation) -> CheckRecord {
    // right side of the fourth relation is divisible by T
    let t_divisible = t_valuation(&pres.total) >= 1 && pres.units.iter().all(|u| t_valuation(u) >= 1);
    let coinv = pres.module.coinvariants();
    let ek = coinv.generator(pres.index_k());
    let nonzero = !coinv.is_zero(&ek);
    let p_ek: Vec<GroupRingElt> = ek.iter().map(|x| x.scale(pres.p as i128)).collect();
    let killed = coinv.is_zero(&p_ek);
    let order_log = coinv.order_log(&ek);
    let witness = json!({
        "r4_right_side_divisible_by_T": t_divisible,
        "e_K_nonzero_in_coinvariants": nonzero,
        "e_K_residue": support_json(&coinv, &ek),
        "p_e_K_zero_in_coinvariants": killed,
        "order": pres.p.pow(order_log),
        "coinvariants_log_p_cardinality": coinv.log_card(),
    });
    record(
        "torsion_order_p",
        t_divisible && nonzero && killed && order_log == 1,
        witness,
        pres.k,
        Some(pres.working_degree()),
        LIFTS,
    )
}

pub fn not_free_local(pres: &CounterexamplePresentation) -> Result<CheckRecord> {
    let restricted = pres.module.restrict_scalars();
    let rank = restricted.nakayama_rank()?;
    let free = restricted.is_free_local()?;
    let witness = json!({
        "lambda_nakayama_rank": rank,
        "lambda_rank_if_free": pres.p * pres.p,
        "log_p_cardinality": restricted.log_card(),
        "log_p_cardinality_if_free": rank as u64 * pres.k as u64 * restricted.spec().rank() as u64,
        "is_free_local": free,
    });
    Ok(record("not_free_local", !free, witness, pres.k, Some(pres.working_degree()), PROXY))
}

/// Every lift of every coset generator gives a generating basis and the
/// same coset traces.
pub fn check_basis_choice_invariance(pres: &CounterexamplePresentation, lifts: Option<usize>) -> Result<CheckRecord> {
    let group = pres.spec.group();
    let lines = group.lines()?;
    let width = pres.p as usize + 2;
    let mut tried = 0usize;
    let mut ok = true;
    for (i, line) in lines.iter().enumerate() {
        let candidates: Vec<usize> = (0..group.order()).filter(|g| !line.contains(g)).take(lifts.unwrap_or(usize::MAX)).collect();
        for g in candidates {
            let mut cosets = pres.coset_generators.clone();
            cosets[i] = g;
            let model = pres.s_model_with(&cosets)?;
            let same_trace = {
                let mut v = pres.s_model.zero_vector();
                v[1 + i] = coset_sum(&pres.spec, g, pres.p).sub(&coset_sum(&pres.spec, pres.coset_generators[i], pres.p));
                pres.s_model.is_zero(&v)
            };
            let basis: Vec<Vec<GroupRingElt>> = pres
                .sfree_basis(&cosets, width)
                .into_iter()
                .filter(|v| !v[0].is_zero() || !v[1 + i].is_zero())
                .collect();
            ok &= same_trace && conjugates_in_basis(pres, &model, &basis, &[i]);
            tried += 1;
        }
    }
    let witness = json!({
        "lifts_tried": tried,
        "lifts_per_line": lifts.map_or(Value::from("all"), Value::from),
        "combinations_covered": if lifts.is_none() { Value::from(((pres.p * pres.p - pres.p) as u128).pow(pres.p as u32 + 1).to_string()) } else { Value::Null },
    });
    Ok(record("basis_choice_invariance", ok, witness, pres.k, Some(pres.working_degree()), PROXY))
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerReport {
    pub levels: u32,
    pub axioms_pass: bool,
    /// descent verdicts of the model, per step `n -> n + 1`
    pub descent: Vec<crate::modules::DescentReport>,
    /// the same for the free sub-model, as a control
    pub control: Vec<crate::modules::DescentReport>,
    pub control_axioms_pass: bool,
}

impl TowerReport {
    /// Axioms hold, descent fails at every step and the control descends.
    pub fn consistent(&self) -> bool {
        self.axioms_pass
            && self.control_axioms_pass
            && self.descent.iter().all(|r| !r.holds)
            && self.control.iter().all(|r| r.holds)
    }
}

pub fn build_tower_and_descend(pres: &CounterexamplePresentation, levels: u32) -> Result<TowerReport> {
    if levels < 1 {
        return Err(Error::InvalidArgument("a tower needs at least two levels".into()));
    }
    let modules = (0..=levels).map(|n| pres.at_level(n)).collect::<Result<Vec<_>>>()?;
    let tower = Tower::canonical(modules)?;
    let axioms = tower.axioms_check()?;
    if let Some(bad) = axioms.first_failure() {
        return Err(Error::Axiom(format!("{} between levels {} and {}", bad.condition, bad.lower, bad.upper)));
    }
    let descent = (0..levels as usize).map(|a| tower.descent_check(a)).collect::<Result<Vec<_>>>()?;
    let control_modules = (0..=levels).map(|n| pres.s_model_at_level(n)).collect::<Result<Vec<_>>>()?;
    let control_tower = Tower::canonical(control_modules)?;
    let control_axioms = control_tower.axioms_check()?;
    let control = (0..levels as usize).map(|a| control_tower.descent_check(a)).collect::<Result<Vec<_>>>()?;
    Ok(TowerReport { levels, axioms_pass: axioms.passed(), descent, control, control_axioms_pass: control_axioms.passed() })
}

fn tower_record(pres: &CounterexamplePresentation, levels: u32) -> Result<CheckRecord> {
    let report = build_tower_and_descend(pres, levels)?;
    Ok(record(
        "descent_tower",
        report.consistent(),
        serde_json::to_value(&report).expect("plain data"),
        pres.k,
        None,
        PROXY,
    ))
}

fn field_json(field: &CounterexampleField) -> Value {
    json!({
        "conductor": field.field.conductor(),
        "degree": field.field.degree(),
        "field": field.field,
        "line_vectors": field.vectors,
        "subfield_conductors": field.subfields.iter().map(|s| s.conductor()).collect::<Vec<_>>(),
    })
}

/// Runs the whole chain and emits a certificate, or a report naming the
/// first failed check.
pub fn certify(tuple: &[u64], p: u64, opts: &CertifyOptions) -> Result<Outcome> {
    let field = build_counterexample_field(tuple, p)?;
    let mut checks = vec![check_field_conditions(&field, opts.k)];
    let fail = |checks: Vec<CheckRecord>, name: &str, reason: String| {
        Outcome::Failed(FailureReport {
            schema: SCHEMA.into(),
            p,
            k: opts.k,
            d: opts.d,
            tuple: tuple.to_vec(),
            status: "failed".into(),
            first_failed: name.into(),
            reason,
            checks,
        })
    };
    if !checks[0].verdict {
        return Ok(fail(checks, "field_conditions", "field conditions do not hold".into()));
    }
    let pres = match build_presentation(&field, opts) {
        Ok(pres) => pres,
        Err(e) => return Ok(fail(checks, "presentation", e.to_string())),
    };
    type Step<'a> = Box<dyn Fn(&CounterexamplePresentation) -> Result<CheckRecord> + 'a>;
    let mut steps: Vec<(&str, Step)> = vec![
        ("presentation", Box::new(|p| Ok(check_presentation(p)))),
        ("formal_identity", Box::new(check_formal_identity)),
        ("derive_R3_R4", Box::new(|p| Ok(derive_r3_r4(p)))),
        ("sfree_basis", Box::new(check_sfree_basis)),
        ("Q_nonzero", Box::new(|p| Ok(check_q_nonzero(p)))),
        ("torsion_order_p", Box::new(|p| Ok(certify_torsion(p)))),
        ("not_free_local", Box::new(not_free_local)),
    ];
    if opts.basis_lifts != Some(0) {
        steps.push(("basis_choice_invariance", Box::new(|p| check_basis_choice_invariance(p, opts.basis_lifts))));
    }
    if opts.levels > 0 {
        steps.push(("descent_tower", Box::new(|p| tower_record(p, opts.levels))));
    }
    for (name, step) in steps {
        match step(&pres) {
            Ok(rec) => {
                let passed = rec.verdict;
                checks.push(rec);
                if !passed {
                    return Ok(fail(checks, name, format!("check {name} failed")));
                }
            }
            Err(e) => return Ok(fail(checks, name, e.to_string())),
        }
    }
    Ok(Outcome::Certified(emit_certificate(&pres, tuple, opts, checks)?))
}

/// Assembles the certificate; refuses when a required check is missing or failed.
pub fn emit_certificate(
    pres: &CounterexamplePresentation,
    tuple: &[u64],
    opts: &CertifyOptions,
    checks: Vec<CheckRecord>,
) -> Result<Certificate> {
    for name in REQUIRED_CHECKS {
        match checks.iter().find(|c| c.name == *name) {
            Some(c) if c.verdict => {}
            Some(_) => return Err(Error::Construction(format!("check {name} failed"))),
            None => return Err(Error::Construction(format!("check {name} is missing"))),
        }
    }
    Ok(Certificate {
        schema: SCHEMA.into(),
        p: pres.p,
        k: opts.k,
        d: opts.d,
        tuple: tuple.to_vec(),
        field: field_json(&pres.field),
        topological_generator: TOPOLOGICAL_GENERATOR.into(),
        checks,
        verdict: format!(
            "not Λ-free (non-freeness chain verified at precision k={}, d={})",
            opts.k,
            pres.working_degree()
        ),
    })
}

pub const REQUIRED_CHECKS: &[&str] = &[
    "field_conditions",
    "presentation",
    "formal_identity",
    "derive_R3_R4",
    "sfree_basis",
    "Q_nonzero",
    "torsion_order_p",
    "not_free_local",
];

#[cfg(test)]
mod tests {
    use super::*;

    pub const FIXTURE: [u64; 4] = [139, 199, 661, 1303];

    fn small() -> CertifyOptions {
        CertifyOptions { k: 3, d: 6, ..Default::default() }
    }

    #[test]
    fn presentation_shape() {
        let field = build_counterexample_field(&FIXTURE, 3).unwrap();
        let pres = build_presentation(&field, &small()).unwrap();
        assert_eq!(pres.module().relations().len(), 2 + 4 + 2 * 4);
        assert!(check_presentation(&pres).verdict);
        assert!(derive_r3_r4(&pres).verdict);
    }

    #[test]
    fn corrupted_unit_breaks_r4() {
        let field = build_counterexample_field(&FIXTURE, 3).unwrap();
        let opts = CertifyOptions { corrupt_unit: Some(1), ..small() };
        let pres = build_presentation(&field, &opts).unwrap();
        assert!(!derive_r3_r4(&pres).verdict);
    }

    #[test]
    fn small_precision_chain() {
        let outcome = certify(&FIXTURE, 3, &CertifyOptions { basis_lifts: Some(1), ..small() }).unwrap();
        match outcome {
            Outcome::Certified(c) => assert_eq!(c.checks.len(), 9),
            Outcome::Failed(f) => panic!("{f:?}"),
        }
    }
}
