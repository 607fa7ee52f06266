//! The layered decision procedure.
//!
//! 1. Chern gate: the Milnor fiber has stably trivial tangent bundle, so
//!    `c_1(xi)` must vanish; by the vanishing theorem this forces `r = 0`,
//!    and with it every `a_i` even.
//! 2. Registry: the two families known to bound Milnor fibers.
//! 3. Theorem layer: the two-coefficient case and the case of all `a_i >= 4`,
//!    where the isometry group of the plumbing lattice is known and has no
//!    element of trace `-1`.
//! 4. Computational layer: enumerate the isometry group and look for a
//!    trace `-1` element, as the monodromy on `H^2` of the fiber must be one.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::contact::{
    chern_residue, classify_structure, enumerate_structures, ChernResidue, RotationVector,
    TightClass,
};
use crate::contfrac::{evaluate, expand_lens, lens_q_squared_is_one, CFExpansion, LensSpace};
use crate::error::{Error, Result};
use crate::lattice::{find_isometry_with_trace, gram, Isometry, TraceSearch, DEFAULT_GROUP_CAP};

/// Trace the monodromy on `H^2` must have: `1 + trace = 0`.
pub const MONODROMY_TRACE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Obstructed,
    KnownRealizable,
    Inconclusive,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Obstructed => "Obstructed",
            Outcome::KnownRealizable => "KnownRealizable",
            Outcome::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    ChernNonzero,
    TheoremB,
    TheoremCi,
    TheoremCii,
    ComputedNoTraceMinusOne,
    RegistryHirzebruch,
    RegistryAn,
    TraceWitnessExists,
    /// No theorem case applies and the computational layer was not run.
    TheoremSilent,
    /// The isometry search hit its cap.
    SearchCapped,
}

impl Reason {
    pub fn name(&self) -> &'static str {
        match self {
            Reason::ChernNonzero => "ChernNonzero",
            Reason::TheoremB => "TheoremB",
            Reason::TheoremCi => "TheoremCi",
            Reason::TheoremCii => "TheoremCii",
            Reason::ComputedNoTraceMinusOne => "ComputedNoTraceMinusOne",
            Reason::RegistryHirzebruch => "RegistryHirzebruch",
            Reason::RegistryAn => "RegistryAn",
            Reason::TraceWitnessExists => "TraceWitnessExists",
            Reason::TheoremSilent => "TheoremSilent",
            Reason::SearchCapped => "SearchCapped",
        }
    }

    pub fn outcome(&self) -> Outcome {
        match self {
            Reason::ChernNonzero
            | Reason::TheoremB
            | Reason::TheoremCi
            | Reason::TheoremCii
            | Reason::ComputedNoTraceMinusOne => Outcome::Obstructed,
            Reason::RegistryHirzebruch | Reason::RegistryAn => Outcome::KnownRealizable,
            Reason::TraceWitnessExists | Reason::TheoremSilent | Reason::SearchCapped => {
                Outcome::Inconclusive
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Nonzero `c_1`, with the first odd coefficient (1-based) if there is one.
    Chern {
        residue: ChernResidue,
        odd_coefficient: Option<usize>,
    },
    /// An isometry of trace `-1`.
    Witness(Isometry),
    /// Trace histogram of the complete isometry group.
    Traces(BTreeMap<i64, u64>),
    /// A singularity whose Milnor fiber bounds this structure.
    Citation(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: Reason,
    pub certificate: Option<Certificate>,
    /// Order of the isometry group, when it was enumerated completely.
    pub group_order: Option<u64>,
    /// False when a cap prevented a definitive computational answer.
    pub complete: bool,
}

impl Verdict {
    fn new(reason: Reason, certificate: Option<Certificate>) -> Self {
        Verdict {
            outcome: reason.outcome(),
            reason,
            certificate,
            group_order: None,
            complete: true,
        }
    }

    pub fn witness(&self) -> Option<&Isometry> {
        match &self.certificate {
            Some(Certificate::Witness(a)) => Some(a),
            _ => None,
        }
    }

    /// One-line human-readable justification.
    pub fn explanation(&self) -> String {
        match (self.reason, &self.certificate) {
            (Reason::ChernNonzero, Some(Certificate::Chern { residue, odd_coefficient })) => {
                let mut s = format!(
                    "c1(xi) = {residue} is nonzero, but a Milnor fiber has stably trivial tangent bundle"
                );
                if let Some(i) = odd_coefficient {
                    s.push_str(&format!("; a_{i} is odd, so no structure here has r = 0"));
                }
                s
            }
            (Reason::TheoremB, _) => {
                "two even coefficients: the lattice has no isometry of trace -1".to_string()
            }
            (Reason::TheoremCi, _) => {
                "all x_i > 1 and q^2 != 1 mod p: the isometry group is {±id}".to_string()
            }
            (Reason::TheoremCii, _) => {
                "all x_i > 1, q^2 = 1 mod p, n even: the isometry group is {±id,±rho}, traces 0 and ±n"
                    .to_string()
            }
            (Reason::ComputedNoTraceMinusOne, _) => match self.group_order {
                Some(o) => format!("the isometry group (order {o}) has no element of trace -1"),
                None => "the isometry group has no element of trace -1".to_string(),
            },
            (Reason::RegistryHirzebruch | Reason::RegistryAn, Some(Certificate::Citation(c))) => {
                format!("boundary of the Milnor fiber of {c}")
            }
            (Reason::TraceWitnessExists, Some(Certificate::Witness(a))) => {
                format!("isometry {a} has trace -1; realizability is open")
            }
            (Reason::SearchCapped, _) => "isometry search stopped at the cap".to_string(),
            _ => "no obstruction applies".to_string(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.outcome.name(), self.reason.name())
    }
}

/// Coefficient patterns for the known-realizable families. Entries are
/// checked after the Chern gate, so `r = 0` is implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyPattern {
    /// `[2, ..., 2]`, i.e. `L(p, p-1)`.
    AllTwos,
    /// `[a]`, i.e. `L(a, 1)`.
    SingleCoefficient,
}

impl FamilyPattern {
    pub fn matches(&self, coeffs: &CFExpansion) -> bool {
        match self {
            FamilyPattern::AllTwos => coeffs.all_twos(),
            FamilyPattern::SingleCoefficient => coeffs.len() == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub pattern: FamilyPattern,
    pub reason: Reason,
    pub citation: &'static str,
}

/// Known-realizable families, matched in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    pub entries: Vec<RegistryEntry>,
}

impl Default for Registry {
    fn default() -> Self {
        // AllTwos must precede SingleCoefficient so that L(2,1) = [2] is
        // reported as the A_1 singularity.
        Registry {
            entries: vec![
                RegistryEntry {
                    pattern: FamilyPattern::AllTwos,
                    reason: Reason::RegistryAn,
                    citation: "z^p + 2xy = 0",
                },
                RegistryEntry {
                    pattern: FamilyPattern::SingleCoefficient,
                    reason: Reason::RegistryHirzebruch,
                    citation: "z^2 + x y^n = 0",
                },
            ],
        }
    }
}

impl Registry {
    pub fn lookup(&self, coeffs: &CFExpansion) -> Option<&RegistryEntry> {
        self.entries.iter().find(|e| e.pattern.matches(coeffs))
    }
}

#[derive(Debug, Clone)]
pub struct DecideOptions {
    /// Bounds the isometries examined, and the structures enumerated per lens.
    pub cap: u64,
    /// Theorem verdicts for `p` up to this bound are re-checked by enumeration.
    pub cross_validate_max_p: i64,
    pub registry: Registry,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            cap: DEFAULT_GROUP_CAP,
            cross_validate_max_p: 1000,
            registry: Registry::default(),
        }
    }
}

fn check_structure(lens: &LensSpace, r: &RotationVector) -> Result<()> {
    let coeffs = expand_lens(lens);
    if r.coeffs() != &coeffs {
        return Err(Error::invalid(format!(
            "rotation vector is for {}, but {lens} expands to {coeffs}",
            r.coeffs()
        )));
    }
    Ok(())
}

/// Chern gate, registry and theorem cases only.
pub fn decide_theorem(lens: &LensSpace, r: &RotationVector) -> Result<Verdict> {
    decide_theorem_with(lens, r, &Registry::default())
}

pub fn decide_theorem_with(
    lens: &LensSpace,
    r: &RotationVector,
    registry: &Registry,
) -> Result<Verdict> {
    check_structure(lens, r)?;
    let coeffs = r.coeffs();

    let residue = chern_residue(r)?;
    if !residue.is_zero() {
        let odd_coefficient = coeffs
            .coeffs()
            .iter()
            .position(|a| a % 2 == 1)
            .map(|i| i + 1);
        return Ok(Verdict::new(
            Reason::ChernNonzero,
            Some(Certificate::Chern {
                residue,
                odd_coefficient,
            }),
        ));
    }
    // c_1 = 0 forces r = 0, hence every a_i = r_i = 0 mod 2
    debug_assert!(r.is_zero() && coeffs.all_even());

    if let Some(entry) = registry.lookup(coeffs) {
        return Ok(Verdict::new(
            entry.reason,
            Some(Certificate::Citation(entry.citation)),
        ));
    }

    let x = coeffs.halves().expect("even after the Chern gate");
    let n = x.len();
    if n == 2 && x[0] * x[1] > 1 {
        return Ok(Verdict::new(Reason::TheoremB, None));
    }
    if n >= 3 && x.iter().all(|&xi| xi > 1) {
        let reason = if !lens_q_squared_is_one(lens) {
            Some(Reason::TheoremCi)
        } else if n.is_multiple_of(2) {
            Some(Reason::TheoremCii)
        } else {
            None
        };
        if let Some(reason) = reason {
            return Ok(Verdict::new(reason, None));
        }
    }
    Ok(Verdict::new(Reason::TheoremSilent, None))
}

/// Theorem layer followed by the isometry search.
pub fn decide_full(lens: &LensSpace, r: &RotationVector, opts: &DecideOptions) -> Result<Verdict> {
    let mut verdict = decide_theorem_with(lens, r, &opts.registry)?;
    match verdict.reason {
        Reason::TheoremSilent => {
            let lattice = gram(r.coeffs())?;
            verdict = match find_isometry_with_trace(&lattice, MONODROMY_TRACE, opts.cap) {
                TraceSearch::Found(w) => {
                    Verdict::new(Reason::TraceWitnessExists, Some(Certificate::Witness(w)))
                }
                TraceSearch::Absent { order, traces } => {
                    let mut v = Verdict::new(
                        Reason::ComputedNoTraceMinusOne,
                        Some(Certificate::Traces(traces)),
                    );
                    v.group_order = Some(order);
                    v
                }
                TraceSearch::Indeterminate { .. } => {
                    let mut v = Verdict::new(Reason::SearchCapped, None);
                    v.complete = false;
                    v
                }
            };
        }
        Reason::TheoremB | Reason::TheoremCi | Reason::TheoremCii
            if lens.p() <= opts.cross_validate_max_p =>
        {
            let lattice = gram(r.coeffs())?;
            match find_isometry_with_trace(&lattice, MONODROMY_TRACE, opts.cap) {
                TraceSearch::Found(w) => {
                    return Err(Error::CrossValidation(format!(
                        "{lens}: {} but {w} has trace -1",
                        verdict.reason.name()
                    )))
                }
                TraceSearch::Absent { order, .. } => verdict.group_order = Some(order),
                TraceSearch::Indeterminate { .. } => {}
            }
        }
        _ => {}
    }
    Ok(verdict)
}

/// One scanned structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub lens: LensSpace,
    pub coeffs: CFExpansion,
    /// `None` when the structures could not be enumerated.
    pub rotation: Option<RotationVector>,
    pub class: Option<TightClass>,
    pub chern: Option<ChernResidue>,
    pub verdict: Result<Verdict>,
}

impl Record {
    fn evaluate(
        lens: LensSpace,
        r: RotationVector,
        opts: &DecideOptions,
        theorem_only: bool,
    ) -> Self {
        let class = classify_structure(&r);
        let chern = chern_residue(&r);
        let verdict = if theorem_only {
            decide_theorem_with(&lens, &r, &opts.registry)
        } else {
            decide_full(&lens, &r, opts)
        };
        Record {
            lens,
            coeffs: r.coeffs().clone(),
            class: Some(class),
            chern: chern.as_ref().ok().copied(),
            verdict: chern.and(verdict),
            rotation: Some(r),
        }
    }

    fn failed(lens: LensSpace, coeffs: CFExpansion, err: Error) -> Self {
        Record {
            lens,
            coeffs,
            rotation: None,
            class: None,
            chern: None,
            verdict: Err(err),
        }
    }
}

/// Records for the structures on one lens space, in lexicographic `r` order.
/// With `rot_zero_only` only `r = 0` is kept (absent when some `a_i` is odd).
pub fn lens_records(
    lens: LensSpace,
    rot_zero_only: bool,
    opts: &DecideOptions,
    theorem_only: bool,
) -> Vec<Record> {
    let coeffs = expand_lens(&lens);
    let structures = if rot_zero_only {
        Ok(RotationVector::zero(coeffs.clone()).into_iter().collect())
    } else {
        enumerate_structures(&coeffs, opts.cap)
    };
    match structures {
        Ok(rs) => rs
            .into_iter()
            .map(|r| Record::evaluate(lens, r, opts, theorem_only))
            .collect(),
        Err(e) => vec![Record::failed(lens, coeffs, e)],
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub p_max: i64,
    pub rot_zero_only: bool,
    pub all_even_only: bool,
    pub theorem_only: bool,
    pub decide: DecideOptions,
    /// Worker threads; `None` runs on the calling thread.
    pub threads: Option<usize>,
}

impl ScanOptions {
    pub fn new(p_max: i64) -> Self {
        ScanOptions {
            p_max,
            rot_zero_only: false,
            all_even_only: false,
            theorem_only: false,
            decide: DecideOptions::default(),
            threads: None,
        }
    }
}

/// Every coprime `(p, q)` with `2 <= p <= p_max`, in order `(p, q, r)`.
pub fn scan(opts: &ScanOptions) -> Result<Vec<Record>> {
    if opts.p_max < 2 {
        return Err(Error::invalid(format!(
            "p_max must be at least 2, got {}",
            opts.p_max
        )));
    }
    let lenses: Vec<LensSpace> = (2..=opts.p_max)
        .flat_map(LensSpace::all_with_p)
        .filter(|l| !opts.all_even_only || expand_lens(l).all_even())
        .collect();
    let per_lens =
        |l: &LensSpace| lens_records(*l, opts.rot_zero_only, &opts.decide, opts.theorem_only);

    let nested: Vec<Vec<Record>> = match opts.threads {
        None | Some(0) | Some(1) => lenses.iter().map(per_lens).collect(),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| lenses.par_iter().map(per_lens).collect())
        }
    };
    Ok(nested.into_iter().flatten().collect())
}

/// Resolves a lens space from a `p/q` pair, an expansion, or both (which
/// must agree).
pub fn resolve(
    lens: Option<LensSpace>,
    coeffs: Option<CFExpansion>,
) -> Result<(LensSpace, CFExpansion)> {
    match (lens, coeffs) {
        (Some(l), Some(c)) => {
            let expected = expand_lens(&l);
            if expected != c {
                return Err(Error::invalid(format!(
                    "{}/{} expands to {expected}, not {c}",
                    l.p(),
                    l.q()
                )));
            }
            Ok((l, c))
        }
        (Some(l), None) => Ok((l, expand_lens(&l))),
        (None, Some(c)) => Ok((evaluate(&c)?, c)),
        (None, None) => Err(Error::invalid("expected p/q or a coefficient list")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::expand;

    fn lens(p: i64, q: i64) -> LensSpace {
        LensSpace::new(p, q).unwrap()
    }

    fn zero(p: i64, q: i64) -> RotationVector {
        RotationVector::zero(expand(p, q).unwrap()).unwrap()
    }

    fn full(p: i64, q: i64) -> Verdict {
        decide_full(&lens(p, q), &zero(p, q), &DecideOptions::default()).unwrap()
    }

    #[test]
    fn theorem_examples() {
        let r = RotationVector::new(expand(34, 7).unwrap(), vec![1, 1]).unwrap();
        let v = decide_theorem(&lens(34, 7), &r).unwrap();
        assert_eq!(v.reason, Reason::ChernNonzero);
        match v.certificate {
            Some(Certificate::Chern {
                residue,
                odd_coefficient,
            }) => {
                assert_eq!(residue.value, 6);
                assert_eq!(odd_coefficient, Some(1));
            }
            other => panic!("unexpected certificate {other:?}"),
        }

        let cases = [
            (15, 4, Reason::TheoremB),
            (209, 56, Reason::TheoremCii),
            (180, 47, Reason::TheoremCi),
            (12, 7, Reason::TheoremSilent),
            (8, 1, Reason::RegistryHirzebruch),
            (7, 6, Reason::RegistryAn),
            (2, 1, Reason::RegistryAn),
        ];
        for (p, q, reason) in cases {
            let v = decide_theorem(&lens(p, q), &zero(p, q)).unwrap();
            assert_eq!(v.reason, reason, "L({p},{q})");
            assert_eq!(v.outcome, reason.outcome());
        }
        assert_eq!(expand(209, 56).unwrap().coeffs(), &[4, 4, 4, 4]);
        assert_eq!(expand(180, 47).unwrap().coeffs(), &[4, 6, 8]);
    }

    #[test]
    fn full_examples() {
        let v = full(12, 7);
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert_eq!(v.reason, Reason::TraceWitnessExists);
        assert_eq!(
            v.witness().unwrap().entries(),
            &[0, 0, -1, 0, -1, 0, -1, 0, 0]
        );

        let v = full(56, 15);
        assert_eq!(v.reason, Reason::TraceWitnessExists);
        assert_eq!(v.witness().unwrap().trace(), -1);

        assert_eq!(full(8, 1).reason, Reason::RegistryHirzebruch);
        assert_eq!(full(7, 6).reason, Reason::RegistryAn);

        let v = full(15, 4);
        assert_eq!(v.reason, Reason::TheoremB);
        assert_eq!(v.group_order, Some(4));
    }

    #[test]
    fn computed_obstruction() {
        // silent (x_1 = 1, n = 4), yet no isometry has trace -1
        for (p, q) in [(73, 40), (73, 42)] {
            let v = full(p, q);
            assert_eq!(v.reason, Reason::ComputedNoTraceMinusOne, "{p}/{q}");
            assert_eq!(v.outcome, Outcome::Obstructed);
            let Some(Certificate::Traces(t)) = &v.certificate else {
                panic!("missing traces")
            };
            assert!(!t.contains_key(&-1));
            assert_eq!(t.values().sum::<u64>(), v.group_order.unwrap());
        }
        assert_eq!(expand(73, 40).unwrap().coeffs(), &[2, 6, 4, 2]);
    }

    #[test]
    fn capped_search_is_incomplete() {
        let opts = DecideOptions {
            cap: 0,
            ..DecideOptions::default()
        };
        let v = decide_full(&lens(10, 7), &zero(10, 7), &opts).unwrap();
        assert_eq!(v.reason, Reason::SearchCapped);
        assert!(!v.complete);
        assert_eq!(v.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn mismatched_structure_is_rejected() {
        let r = zero(15, 4);
        assert!(matches!(
            decide_theorem(&lens(12, 7), &r),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn registry_is_data() {
        let empty = Registry { entries: vec![] };
        let v = decide_theorem_with(&lens(8, 1), &zero(8, 1), &empty).unwrap();
        assert_eq!(v.reason, Reason::TheoremSilent);
        // with an empty registry, L(3,2) = [2,2] has x_1 x_2 = 1 and must not hit theorem B
        let v = decide_theorem_with(&lens(3, 2), &zero(3, 2), &empty).unwrap();
        assert_eq!(v.reason, Reason::TheoremSilent);
    }

    #[test]
    fn scan_small() {
        let recs = scan(&ScanOptions::new(3)).unwrap();
        let got: Vec<(i64, i64, Vec<i64>)> = recs
            .iter()
            .map(|r| {
                (
                    r.lens.p(),
                    r.lens.q(),
                    r.rotation.as_ref().unwrap().values().to_vec(),
                )
            })
            .collect();
        assert_eq!(
            got,
            vec![
                (2, 1, vec![0]),
                (3, 1, vec![-1]),
                (3, 1, vec![1]),
                (3, 2, vec![0, 0])
            ]
        );

        let recs = scan(&ScanOptions::new(2)).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(
            recs[0].verdict.as_ref().unwrap().outcome,
            Outcome::KnownRealizable
        );

        assert!(scan(&ScanOptions::new(1)).is_err());
    }

    #[test]
    fn scan_filters() {
        let mut opts = ScanOptions::new(30);
        opts.rot_zero_only = true;
        opts.all_even_only = true;
        let recs = scan(&opts).unwrap();
        assert!(!recs.is_empty());
        for r in &recs {
            assert!(r.coeffs.all_even());
            assert!(r.rotation.as_ref().unwrap().is_zero());
        }
    }

    #[test]
    fn resolve_forms() {
        let c = CFExpansion::new(vec![2, 4, 2]).unwrap();
        let (l, _) = resolve(None, Some(c.clone())).unwrap();
        assert_eq!((l.p(), l.q()), (12, 7));
        assert!(resolve(Some(lens(12, 7)), Some(c.clone())).is_ok());
        assert!(resolve(Some(lens(12, 5)), Some(c)).is_err());
        assert!(resolve(None, None).is_err());
    }
}
