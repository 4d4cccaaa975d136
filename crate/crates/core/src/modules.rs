//! Finitely presented modules over the rings of [`crate::iwasawa`], decided by
//! Howell forms over `Z/p^k`.
//!
//! A module `R^n / Rel` is flattened to `(Z/p^k)^(n * rank R)` with column
//! `(t * |G| + g) * n + j` for the monomial `g T^t` in generator `j`. The
//! relation span is the `Z/p^k`-span of all monomial multiples of the relations.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::howell::{kernel_mod, Howell};
use crate::iwasawa::{layer_trace, FiniteAbelianGroup, GroupRingElt, ModulusPoly, RingSpec};

/// Which scalars a span is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalars {
    /// the full group ring `R`
    Full,
    /// the `T`-part only, i.e. the Iwasawa algebra without `G`
    Lambda,
}

#[derive(Debug, Clone)]
pub struct FPModule {
    spec: RingSpec,
    ngens: usize,
    relations: Vec<Vec<GroupRingElt>>,
    howell: OnceLock<Howell>,
}

/// The class of a vector in a module, as its canonical residue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModElement {
    residue: Vec<u64>,
}

impl ModElement {
    pub fn is_zero(&self) -> bool {
        self.residue.iter().all(|&c| c == 0)
    }

    pub fn residue(&self) -> &[u64] {
        &self.residue
    }

    /// Indices and values of the nonzero residue coordinates.
    pub fn support(&self) -> Vec<(usize, u64)> {
        self.residue.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect()
    }
}

impl FPModule {
    pub fn new(spec: &RingSpec, ngens: usize, relations: Vec<Vec<GroupRingElt>>) -> Result<Self> {
        for r in &relations {
            if r.len() != ngens {
                return Err(Error::InvalidArgument(format!("relation of length {} for {ngens} generators", r.len())));
            }
            if let Some(x) = r.iter().find(|x| x.spec() != spec) {
                return Err(Error::SpecMismatch(format!("{:?} in a module over {:?}", x.spec(), spec)));
            }
        }
        Ok(FPModule { spec: spec.clone(), ngens, relations, howell: OnceLock::new() })
    }

    pub fn free(spec: &RingSpec, rank: usize) -> Self {
        FPModule { spec: spec.clone(), ngens: rank, relations: Vec::new(), howell: OnceLock::new() }
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn relations(&self) -> &[Vec<GroupRingElt>] {
        &self.relations
    }

    pub fn ncols(&self) -> usize {
        self.ngens * self.spec.rank()
    }

    /// Same module with extra relations.
    pub fn quotient(&self, extra: Vec<Vec<GroupRingElt>>) -> Result<Self> {
        let mut rel = self.relations.clone();
        rel.extend(extra);
        Self::new(&self.spec, self.ngens, rel)
    }

    pub fn generator(&self, j: usize) -> Vec<GroupRingElt> {
        (0..self.ngens)
            .map(|i| if i == j { GroupRingElt::one(&self.spec) } else { GroupRingElt::zero(&self.spec) })
            .collect()
    }

    pub fn zero_vector(&self) -> Vec<GroupRingElt> {
        vec![GroupRingElt::zero(&self.spec); self.ngens]
    }

    pub fn flatten(&self, v: &[GroupRingElt]) -> Vec<u64> {
        flatten(&self.spec, v)
    }

    pub fn unflatten(&self, x: &[u64]) -> Vec<GroupRingElt> {
        let (deg, order, n) = (self.spec.degree(), self.spec.group_order(), self.ngens);
        (0..n)
            .map(|j| {
                let mut coeffs = vec![0u64; self.spec.rank()];
                for t in 0..deg {
                    for g in 0..order {
                        coeffs[g * deg + t] = x[(t * order + g) * n + j];
                    }
                }
                GroupRingElt::from_coeffs(&self.spec, coeffs).expect("matching rank")
            })
            .collect()
    }

    pub fn relation_rows(&self) -> Vec<Vec<u64>> {
        span_rows(&self.spec, &self.relations, Scalars::Full)
    }

    pub fn howell(&self) -> &Howell {
        self.howell
            .get_or_init(|| Howell::new(self.spec.p(), self.spec.k(), self.ncols(), self.relation_rows()))
    }

    /// `log_p |M|`.
    pub fn log_card(&self) -> u64 {
        self.ncols() as u64 * self.spec.k() as u64 - self.howell().log_card()
    }

    pub fn element(&self, v: &[GroupRingElt]) -> ModElement {
        ModElement { residue: self.howell().reduce(&self.flatten(v)) }
    }

    pub fn is_zero(&self, v: &[GroupRingElt]) -> bool {
        self.howell().contains(&self.flatten(v))
    }

    /// Howell form of `Rel + (span of extra over the given scalars)`.
    pub fn span_with(&self, extra: &[Vec<GroupRingElt>], scalars: Scalars) -> Howell {
        if extra.is_empty() {
            return self.howell().clone();
        }
        self.howell().extend(span_rows(&self.spec, extra, scalars))
    }

    /// `v in Rel + (span of extra over the given scalars)`.
    pub fn in_span(&self, v: &[GroupRingElt], extra: &[Vec<GroupRingElt>], scalars: Scalars) -> bool {
        self.span_with(extra, scalars).contains(&self.flatten(v))
    }

    /// `log_p` of the order of the class of `v`: the least `e` with `p^e v = 0`.
    pub fn order_log(&self, v: &[GroupRingElt]) -> u32 {
        let mut x = self.flatten(v);
        let (p, q) = (self.spec.p(), self.spec.q());
        for e in 0..=self.spec.k() {
            if self.howell().contains(&x) {
                return e;
            }
            x.iter_mut().for_each(|c| *c = crate::arith::mul_mod(*c, p, q));
        }
        self.spec.k()
    }

    /// `M / T M`, over `(Z/p^k)[G]`.
    pub fn coinvariants(&self) -> Self {
        let spec = self.spec.with_modulus(ModulusPoly::Truncation(1)).expect("valid spec");
        let relations = self.relations.iter().map(|r| r.iter().map(|x| x.at_t_zero()).collect()).collect();
        FPModule { spec, ngens: self.ngens, relations, howell: OnceLock::new() }
    }

    /// The same module over the `T`-part alone, on generators `g e_j`
    /// (indexed `g * n + j`).
    pub fn restrict_scalars(&self) -> Self {
        let order = self.spec.group_order();
        let spec = self.spec.with_group(FiniteAbelianGroup::trivial()).expect("valid spec");
        let n = self.ngens;
        let mut relations = Vec::with_capacity(self.relations.len() * order);
        for r in &self.relations {
            for g in 0..order {
                let mut v = vec![GroupRingElt::zero(&spec); n * order];
                for (j, x) in r.iter().enumerate() {
                    let moved = x.translate(g);
                    for h in 0..order {
                        v[h * n + j] = GroupRingElt::from_poly(&spec, 0, moved.component(h));
                    }
                }
                relations.push(v);
            }
        }
        let howell = OnceLock::new();
        if let Some(h) = self.howell.get() {
            // the flattened relation span is literally the same
            let _ = howell.set(h.clone());
        }
        FPModule { spec, ngens: n * order, relations, howell }
    }

    fn require_local(&self) -> Result<()> {
        let p = self.spec.p();
        let mut order = self.spec.group_order() as u64;
        while order.is_multiple_of(p) {
            order /= p;
        }
        if order != 1 {
            return Err(Error::UnsupportedGroup(format!("group of order {} is not a {p}-group", self.spec.group_order())));
        }
        Ok(())
    }

    /// Minimal number of generators: `dim_{F_p} M / m M`.
    pub fn nakayama_rank(&self) -> Result<usize> {
        self.require_local()?;
        let p = self.spec.p();
        let rows: Vec<Vec<u64>> =
            self.relations.iter().map(|r| r.iter().map(|x| x.augmentation() % p).collect()).collect();
        Ok(self.ngens - rank_mod_p(rows, p))
    }

    /// `|M| = |R|^(nakayama rank)`, which over a finite local ring holds
    /// exactly for free modules.
    pub fn is_free_local(&self) -> Result<bool> {
        let r = self.nakayama_rank()? as u64;
        Ok(self.log_card() == r * self.spec.k() as u64 * self.spec.rank() as u64)
    }

    /// Generators (as vectors) of `M^H`, where `H` acts through `acting`:
    /// the kernel of `x -> ((h - 1) x)_h` on `M`.
    pub fn subgroup_invariants(&self, acting: &[GroupRingElt]) -> Vec<Vec<GroupRingElt>> {
        let ncols = self.ncols();
        let s = acting.len();
        if s == 0 {
            return (0..self.ngens).map(|j| self.generator(j)).collect();
        }
        let minus_one: Vec<GroupRingElt> = acting.iter().map(|h| h.sub(&GroupRingElt::one(&self.spec))).collect();
        let basis = monomial_basis(self);
        let images: Vec<Vec<u64>> = basis
            .iter()
            .map(|v| {
                let mut row = Vec::with_capacity(s * ncols);
                for hm in &minus_one {
                    let w: Vec<GroupRingElt> = v.iter().map(|x| hm.mul(x)).collect();
                    row.extend(self.flatten(&w));
                }
                row
            })
            .collect();
        let rel = self.relation_rows();
        let mut stacked = Vec::with_capacity(s * rel.len());
        for b in 0..s {
            for r in &rel {
                let mut row = vec![0u64; s * ncols];
                row[b * ncols..(b + 1) * ncols].copy_from_slice(r);
                stacked.push(row);
            }
        }
        kernel_mod(self.spec.p(), self.spec.k(), &images, s * ncols, &stacked)
            .into_iter()
            .filter(|x| !self.howell().contains(x))
            .map(|x| self.unflatten(&x))
            .collect()
    }

    /// `log_p |M^H|` for `H` acting through `acting`, from `|M| / |(h - 1) M|`
    /// when `H` is cyclic, or from the kernel otherwise.
    pub fn log_invariants(&self, acting: &[GroupRingElt]) -> u64 {
        match acting {
            [] => self.log_card(),
            [h] => {
                let hm = h.sub(&GroupRingElt::one(&self.spec));
                let images: Vec<Vec<GroupRingElt>> = (0..self.ngens)
                    .map(|j| self.generator(j).iter().map(|x| hm.mul(x)).collect())
                    .collect();
                let image_log = self.span_with(&images, Scalars::Full).log_card() - self.howell().log_card();
                self.log_card() - image_log
            }
            _ => {
                let gens = self.subgroup_invariants(acting);
                self.span_with(&gens, Scalars::Full).log_card() - self.howell().log_card()
            }
        }
    }
}

fn flatten(spec: &RingSpec, v: &[GroupRingElt]) -> Vec<u64> {
    let (deg, order, n) = (spec.degree(), spec.group_order(), v.len());
    let mut out = vec![0u64; n * deg * order];
    for (j, x) in v.iter().enumerate() {
        debug_assert_eq!(x.spec(), spec);
        for g in 0..order {
            for (t, &c) in x.component(g).iter().enumerate() {
                out[(t * order + g) * n + j] = c;
            }
        }
    }
    out
}

/// Flattened monomial multiples of the given vectors.
fn span_rows(spec: &RingSpec, vectors: &[Vec<GroupRingElt>], scalars: Scalars) -> Vec<Vec<u64>> {
    let order = match scalars {
        Scalars::Full => spec.group_order(),
        Scalars::Lambda => 1,
    };
    let mut rows = Vec::with_capacity(vectors.len() * spec.degree() * order);
    for v in vectors {
        let mut cur: Vec<GroupRingElt> = v.clone();
        for _ in 0..spec.degree() {
            for g in 0..order {
                let moved: Vec<GroupRingElt> = cur.iter().map(|x| x.translate(g)).collect();
                let row = flatten(spec, &moved);
                if row.iter().any(|&c| c != 0) {
                    rows.push(row);
                }
            }
            cur = cur.iter().map(|x| x.times_t()).collect();
            if cur.iter().all(|x| x.is_zero()) {
                break;
            }
        }
    }
    rows
}

fn monomial_basis(m: &FPModule) -> Vec<Vec<GroupRingElt>> {
    let spec = m.spec();
    let mut out = Vec::with_capacity(m.ncols());
    for t in 0..spec.degree() {
        for g in 0..spec.group_order() {
            for j in 0..m.ngens() {
                let mut v = m.zero_vector();
                v[j] = GroupRingElt::monomial(spec, g, t, 1);
                out.push(v);
            }
        }
    }
    out
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pos) = (rank..rows.len()).find(|&i| !rows[i][col].is_multiple_of(p)) else { continue };
        rows.swap(rank, pos);
        let inv = crate::arith::inv_mod(rows[rank][col] % p, p).expect("nonzero mod p");
        let pivot: Vec<u64> = rows[rank].iter().map(|&x| x * inv % p).collect();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && r[col] % p != 0 {
                let f = r[col] % p;
                for (x, &y) in r.iter_mut().zip(&pivot) {
                    *x = (*x % p + p * p - f * y % p) % p;
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank
}

/// Membership of `x` in the `R`-span of `span`.
pub fn howell_membership(span: &[Vec<GroupRingElt>], x: &[GroupRingElt]) -> Result<bool> {
    let Some(first) = x.first() else { return Ok(true) };
    let spec = first.spec().clone();
    for v in span.iter().chain(std::iter::once(&x.to_vec())) {
        if v.len() != x.len() {
            return Err(Error::InvalidArgument("vectors of different lengths".into()));
        }
        if v.iter().any(|e| e.spec() != &spec) {
            return Err(Error::SpecMismatch("span and element live over different rings".into()));
        }
    }
    let m = FPModule::new(&spec, x.len(), span.to_vec())?;
    Ok(m.is_zero(x))
}

/// For `X` inside a free `Y`: `Ok(true)` when `X = Y`, `Ok(false)` when `X` is
/// a proper submodule of finite index, and an error when the index is not
/// finite, i.e. no `p^N` and `T^N` with `N` below the truncation kill `Y/X`.
pub fn finite_index_freeness(x_span: &[Vec<GroupRingElt>], y: &FPModule) -> Result<bool> {
    if y.relations().iter().any(|r| r.iter().any(|x| !x.is_zero())) {
        return Err(Error::InvalidArgument("the ambient module must be free".into()));
    }
    let spec = y.spec();
    let x = y.span_with(x_span, Scalars::Full);
    if x.log_card() == y.ncols() as u64 * spec.k() as u64 {
        return Ok(true);
    }
    let bound = (spec.k() as usize).min(spec.degree());
    let p = spec.p() as i128;
    for n in 1..bound {
        let killed = (0..y.ngens()).all(|j| {
            let e = y.generator(j);
            let pn: Vec<GroupRingElt> = e.iter().map(|c| c.scale(p.pow(n as u32))).collect();
            let tn: Vec<GroupRingElt> = e.iter().map(|c| c.shift(n)).collect();
            x.contains(&y.flatten(&pn)) && x.contains(&y.flatten(&tn))
        });
        if killed {
            return Ok(false);
        }
    }
    Err(Error::IndexNotFinite)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransferKind {
    /// coefficients lifted to the higher level (extension maps)
    Lift,
    /// coefficients reduced to the lower level (norm maps)
    Projection,
}

/// A map between finite-level modules, given by generator images.
#[derive(Debug, Clone)]
pub struct TowerMap {
    pub kind: TransferKind,
    pub images: Vec<Vec<GroupRingElt>>,
}

impl TowerMap {
    pub fn apply(&self, x: &[GroupRingElt]) -> Result<Vec<GroupRingElt>> {
        let target_spec = self.images[0][0].spec().clone();
        let level = target_spec.level_index().ok_or_else(|| Error::SpecMismatch("tower maps need finite levels".into()))?;
        let mut out = vec![GroupRingElt::zero(&target_spec); self.images[0].len()];
        for (c, image) in x.iter().zip(&self.images) {
            if c.is_zero() {
                continue;
            }
            let c = match self.kind {
                TransferKind::Lift => c.lift_to_level(level)?,
                TransferKind::Projection => c.to_level(level)?,
            };
            for (o, y) in out.iter_mut().zip(image) {
                *o = o.add(&c.mul(y));
            }
        }
        Ok(out)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &TowerMap) -> Result<TowerMap> {
        let images = self.images.iter().map(|v| other.apply(v)).collect::<Result<_>>()?;
        Ok(TowerMap { kind: self.kind, images })
    }
}

/// Modules `M_0, M_1, ...` at finite levels with extension maps
/// `M_i -> M_(i+1)` and norm maps `M_(i+1) -> M_i`.
#[derive(Debug, Clone)]
pub struct Tower {
    pub modules: Vec<FPModule>,
    pub ext: Vec<TowerMap>,
    pub norm: Vec<TowerMap>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomEntry {
    pub condition: String,
    pub lower: u32,
    pub upper: u32,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn first_failure(&self) -> Option<&AxiomEntry> {
        self.entries.iter().find(|e| !e.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    pub lower: u32,
    pub upper: u32,
    /// `log_p |M_upper^H|`
    pub log_invariants: u64,
    /// `log_p |i(M_lower)|`
    pub log_image: u64,
    pub image_is_invariant: bool,
    pub holds: bool,
}

fn level_of(m: &FPModule) -> Result<u32> {
    m.spec().level_index().ok_or_else(|| Error::SpecMismatch("towers live at finite levels".into()))
}

impl Tower {
    pub fn new(modules: Vec<FPModule>, ext: Vec<TowerMap>, norm: Vec<TowerMap>) -> Result<Self> {
        if modules.is_empty() || ext.len() + 1 != modules.len() || norm.len() + 1 != modules.len() {
            return Err(Error::InvalidArgument("a tower needs one extension and one norm map per step".into()));
        }
        for w in modules.windows(2) {
            if level_of(&w[1])? < level_of(&w[0])? {
                return Err(Error::InvalidArgument("levels must be non-decreasing".into()));
            }
        }
        Ok(Tower { modules, ext, norm })
    }

    /// Extension `e_j -> nu e_j` and norm `e_j -> e_j`, where `nu` is the
    /// layer trace; the modules must share their generator lists.
    pub fn canonical(modules: Vec<FPModule>) -> Result<Self> {
        let mut ext = Vec::new();
        let mut norm = Vec::new();
        for w in modules.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            if lo.ngens() != hi.ngens() {
                return Err(Error::InvalidArgument("levels must share generators".into()));
            }
            let nu = layer_trace(hi.spec(), level_of(lo)?)?;
            ext.push(TowerMap {
                kind: TransferKind::Lift,
                images: (0..hi.ngens()).map(|j| hi.generator(j).iter().map(|x| x.mul(&nu)).collect()).collect(),
            });
            norm.push(TowerMap { kind: TransferKind::Projection, images: (0..lo.ngens()).map(|j| lo.generator(j)).collect() });
        }
        Self::new(modules, ext, norm)
    }

    /// Free modules of the given rank over `spec` at levels `0..=levels`.
    pub fn free(spec: &RingSpec, rank: usize, levels: u32) -> Result<Self> {
        let modules = (0..=levels)
            .map(|n| Ok(FPModule::free(&spec.with_modulus(ModulusPoly::FiniteLevel(n))?, rank)))
            .collect::<Result<_>>()?;
        Self::canonical(modules)
    }

    /// A single module, repeated, with identity maps.
    pub fn identity(m: &FPModule) -> Result<Self> {
        Self::canonical(vec![m.clone(), m.clone()])
    }

    pub fn levels(&self) -> usize {
        self.modules.len()
    }

    fn composite_ext(&self, a: usize, b: usize) -> Result<TowerMap> {
        let mut map = self.ext[a].clone();
        for i in a + 1..b {
            map = map.then(&self.ext[i])?;
        }
        Ok(map)
    }

    fn composite_norm(&self, a: usize, b: usize) -> Result<TowerMap> {
        let mut map = self.norm[b - 1].clone();
        for i in (a..b - 1).rev() {
            map = map.then(&self.norm[i])?;
        }
        Ok(map)
    }

    /// Well-definedness of each step, then `i∘N = Tr` and `N∘i = p^(m-n)`
    /// for every pair of levels.
    pub fn axioms_check(&self) -> Result<AxiomReport> {
        let mut entries = Vec::new();
        for a in 0..self.modules.len() - 1 {
            let (lo, hi) = (&self.modules[a], &self.modules[a + 1]);
            let (ln, hn) = (level_of(lo)?, level_of(hi)?);
            let mut ok = true;
            for r in lo.relations() {
                ok &= hi.is_zero(&self.ext[a].apply(r)?);
            }
            entries.push(AxiomEntry { condition: "extension respects relations".into(), lower: ln, upper: hn, passed: ok });
            let mut ok = true;
            for r in hi.relations() {
                ok &= lo.is_zero(&self.norm[a].apply(r)?);
            }
            entries.push(AxiomEntry { condition: "norm respects relations".into(), lower: ln, upper: hn, passed: ok });
        }
        for a in 0..self.modules.len() {
            for b in a + 1..self.modules.len() {
                entries.extend(self.pair_axioms(a, b)?);
            }
        }
        Ok(AxiomReport { entries })
    }

    fn pair_axioms(&self, a: usize, b: usize) -> Result<Vec<AxiomEntry>> {
        let (lo, hi) = (&self.modules[a], &self.modules[b]);
        let (ln, hn) = (level_of(lo)?, level_of(hi)?);
        let ext = self.composite_ext(a, b)?;
        let norm = self.composite_norm(a, b)?;
        let tr = layer_trace(hi.spec(), ln)?;
        let mut ok = true;
        for j in 0..hi.ngens() {
            let lhs = ext.apply(&norm.apply(&hi.generator(j))?)?;
            let diff: Vec<GroupRingElt> =
                lhs.iter().zip(hi.generator(j)).map(|(x, e)| x.sub(&e.mul(&tr))).collect();
            ok &= hi.is_zero(&diff);
        }
        let trace_entry = AxiomEntry { condition: "i∘N = Tr".into(), lower: ln, upper: hn, passed: ok };
        let scale = (lo.spec().p() as i128).pow(hn - ln);
        let mut ok = true;
        for j in 0..lo.ngens() {
            let lhs = norm.apply(&ext.apply(&lo.generator(j))?)?;
            let diff: Vec<GroupRingElt> =
                lhs.iter().zip(lo.generator(j)).map(|(x, e)| x.sub(&e.scale(scale))).collect();
            ok &= lo.is_zero(&diff);
        }
        let power_entry = AxiomEntry { condition: "N∘i = p^(m-n)".into(), lower: ln, upper: hn, passed: ok };
        Ok(vec![trace_entry, power_entry])
    }

    /// Galois descent between steps `a` and `a + 1`: the invariants of
    /// `M_(a+1)` under `gamma^(p^n)` equal the image of the extension map.
    pub fn descent_check(&self, a: usize) -> Result<DescentReport> {
        if a + 1 >= self.modules.len() {
            return Err(Error::InvalidArgument(format!("no level above step {a}")));
        }
        for entry in self.pair_axioms(a, a + 1)? {
            if !entry.passed {
                return Err(Error::Axiom(format!("{} fails between levels {} and {}", entry.condition, entry.lower, entry.upper)));
            }
        }
        let (lo, hi) = (&self.modules[a], &self.modules[a + 1]);
        let ln = level_of(lo)?;
        let spec = hi.spec();
        let h = GroupRingElt::one(spec).add(&GroupRingElt::t(spec)).pow(spec.p().pow(ln));
        descent_check(lo, hi, &self.ext[a], &[h])
    }
}

/// `M_upper^H = ext(M_lower)`, decided by checking that the image is
/// invariant and that both have the same cardinality.
pub fn descent_check(lower: &FPModule, upper: &FPModule, ext: &TowerMap, acting: &[GroupRingElt]) -> Result<DescentReport> {
    let images: Vec<Vec<GroupRingElt>> =
        (0..lower.ngens()).map(|j| ext.apply(&lower.generator(j))).collect::<Result<_>>()?;
    let mut invariant = true;
    for h in acting {
        let hm = h.sub(&GroupRingElt::one(upper.spec()));
        for v in &images {
            let moved: Vec<GroupRingElt> = v.iter().map(|x| hm.mul(x)).collect();
            invariant &= upper.is_zero(&moved);
        }
    }
    let log_image = upper.span_with(&images, Scalars::Full).log_card() - upper.howell().log_card();
    let log_invariants = upper.log_invariants(acting);
    Ok(DescentReport {
        lower: level_of(lower)?,
        upper: level_of(upper)?,
        log_invariants,
        log_image,
        image_is_invariant: invariant,
        holds: invariant && log_image == log_invariants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(k: u32) -> RingSpec {
        RingSpec::truncated(3, k, 1).unwrap()
    }

    fn s(spec: &RingSpec, c: i128) -> GroupRingElt {
        GroupRingElt::scalar(spec, c)
    }

    #[test]
    fn membership_toy() {
        let r = toy(2);
        assert!(howell_membership(&[vec![s(&r, 3)]], &[s(&r, 6)]).unwrap());
        assert!(!howell_membership(&[vec![s(&r, 3)]], &[s(&r, 1)]).unwrap());
        assert!(howell_membership(&[vec![s(&r, 3)]], &[s(&r, 0)]).unwrap());
    }

    #[test]
    fn freeness_proxies() {
        let spec = RingSpec::truncated(3, 3, 4).unwrap();
        assert!(FPModule::free(&spec, 2).is_free_local().unwrap());
        // R/(p) + R
        let torsion = FPModule::new(&spec, 2, vec![vec![s(&spec, 3), s(&spec, 0)]]).unwrap();
        assert_eq!(torsion.nakayama_rank().unwrap(), 2);
        assert!(!torsion.is_free_local().unwrap());
        // a unit relation kills a generator and leaves a free module
        let unit = FPModule::new(&spec, 2, vec![vec![s(&spec, 1), GroupRingElt::t(&spec)]]).unwrap();
        assert_eq!(unit.nakayama_rank().unwrap(), 1);
        assert!(unit.is_free_local().unwrap());
    }

    #[test]
    fn finite_index() {
        let spec = RingSpec::truncated(3, 3, 4).unwrap();
        let y = FPModule::free(&spec, 1);
        let e = y.generator(0);
        assert!(finite_index_freeness(std::slice::from_ref(&e), &y).unwrap());
        let m = vec![vec![s(&spec, 3)], vec![GroupRingElt::t(&spec)]];
        assert!(!finite_index_freeness(&m, &y).unwrap());
        assert_eq!(finite_index_freeness(&[vec![s(&spec, 3)]], &y), Err(Error::IndexNotFinite));
    }

    #[test]
    fn coinvariants_keep_t_killed_generators() {
        let spec = RingSpec::truncated(3, 2, 3).unwrap();
        let m = FPModule::new(&spec, 1, vec![vec![GroupRingElt::t(&spec)]]).unwrap();
        let c = m.coinvariants();
        assert_eq!(c.log_card(), 2);
        assert!(!c.is_zero(&c.generator(0)));
    }

    #[test]
    fn invariants_of_free_cyclic_are_traces() {
        let spec = RingSpec::new(3, 2, ModulusPoly::Truncation(1), FiniteAbelianGroup::cyclic(3)).unwrap();
        let m = FPModule::free(&spec, 1);
        let g = GroupRingElt::group_element(&spec, 1);
        let inv = m.subgroup_invariants(std::slice::from_ref(&g));
        let tr = crate::iwasawa::trace_element(&[0, 1, 2], &spec);
        let a = m.span_with(&inv, Scalars::Full);
        let b = m.span_with(&[vec![tr]], Scalars::Full);
        assert_eq!(a, b);
        assert_eq!(m.log_invariants(&[g]), 2);
    }

    #[test]
    fn free_tower_descends() {
        let spec = RingSpec::level(3, 3, 0).unwrap();
        let tower = Tower::free(&spec, 2, 3).unwrap();
        assert!(tower.axioms_check().unwrap().passed());
        for a in 0..3 {
            assert!(tower.descent_check(a).unwrap().holds, "step {a}");
        }
    }

    #[test]
    fn identity_tower() {
        let spec = RingSpec::level(3, 2, 1).unwrap();
        let m = FPModule::new(&spec, 1, vec![vec![s(&spec, 3)]]).unwrap();
        let tower = Tower::identity(&m).unwrap();
        assert!(tower.axioms_check().unwrap().passed());
        assert!(tower.descent_check(0).unwrap().holds);
    }

    #[test]
    fn corrupted_norm_is_caught() {
        let spec = RingSpec::level(3, 3, 0).unwrap();
        let mut tower = Tower::free(&spec, 1, 2).unwrap();
        tower.norm[1].images[0][0] = tower.norm[1].images[0][0].scale(2);
        let report = tower.axioms_check().unwrap();
        assert!(!report.passed());
        assert_eq!(report.first_failure().unwrap().condition, "i∘N = Tr");
        assert!(matches!(tower.descent_check(1), Err(Error::Axiom(_))));
    }
}
