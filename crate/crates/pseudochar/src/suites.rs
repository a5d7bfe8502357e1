//! Reproducible property suites behind the CLI `verify` subcommands. Each
//! suite samples seeded configurations, runs the relevant checkers, and
//! returns a report whose defect list decides the exit code, together with
//! suite-specific verdict JSON.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::json;

use crate::algebra::AlgebraElement;
use crate::correspond::{roundtrip_check, ConversionReport, RoundtripInput};
use crate::determinant::{check_multiplicative_homogeneous, is_gl_valued, Determinant};
use crate::error::Result;
use crate::group::{FiniteGroup, GroupHom, Word};
use crate::lafforgue::{
    invariance_pit, random_expression, DonkinExpression, InvarianceProbe, LafforguePC, ThetaTable,
};
use crate::rep::Representation;
use crate::ring::{Ring, Value};
use crate::sample::Sampler;
use crate::taylor::{auto_mode, is_taylor_pc, taylor_defect, taylor_from_rep, TaylorPC};

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub group: FiniteGroup,
    pub ring: Ring,
    pub d: usize,
    pub seed: u64,
    pub trials: usize,
    /// Taylor suite: claim this dimension instead of the representation's
    /// own (a planted failure when it differs).
    pub claimed_d: Option<usize>,
    /// Theta-table suites: add a unit-preserving perturbation at
    /// (row k, element g) before verifying (a planted failure).
    pub perturb: Option<(usize, usize)>,
}

impl SuiteConfig {
    pub fn fingerprint(&self) -> String {
        format!(
            "group={} ring={} d={} seed={} trials={} claimed_d={:?} perturb={:?}",
            self.group.name(),
            self.ring,
            self.d,
            self.seed,
            self.trials,
            self.claimed_d,
            self.perturb
        )
    }
}

pub struct SuiteOutcome {
    pub report: ConversionReport,
    pub extras: serde_json::Value,
}

fn bump(counts: &mut BTreeMap<String, u64>, key: &str) {
    *counts.entry(key.to_string()).or_insert(0) += 1;
}

fn sampled_reps(cfg: &SuiteConfig, how_many: usize) -> Result<Vec<Representation>> {
    let mut sampler = Sampler::new(cfg.seed);
    (0..how_many)
        .map(|_| sampler.representation(&cfg.group, &cfg.ring, cfg.d))
        .collect()
}

/// A unit-preserving perturbation of the theta table at (k, g): the first
/// delta that changes the entry while keeping the table constructible.
pub fn perturbed_table(table: &ThetaTable, k: usize, g: usize) -> Result<ThetaTable> {
    let ring = table.ring.clone();
    let mut deltas: Vec<Value> = vec![ring.one()];
    deltas.extend(ring.unit_constants());
    for delta in deltas {
        if delta.is_zero() {
            continue;
        }
        let new = table.theta(k, g).add(&delta)?;
        if new == *table.theta(k, g) {
            continue;
        }
        if let Ok(t) = table.with_entry(k, g, new) {
            return Ok(t);
        }
    }
    Err(crate::error::Error::Unsupported(
        "no unit-preserving perturbation exists at this entry".into(),
    ))
}

pub fn verify_taylor(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let mut counts = BTreeMap::new();
    let mut defects = Vec::new();
    let mut verdicts = Vec::new();
    let mut sampler = Sampler::new(cfg.seed ^ 0xd1ce);

    for rep in sampled_reps(cfg, 5)? {
        let base = taylor_from_rep(&rep);
        let t = match cfg.claimed_d {
            Some(claimed) if claimed != cfg.d => TaylorPC::new(
                rep.group().clone(),
                rep.ring().clone(),
                claimed,
                base.values().to_vec(),
            )?,
            _ => base,
        };
        let mode = auto_mode(&cfg.group, t.d, cfg.seed, cfg.trials);
        let verdict = is_taylor_pc(&t, mode)?;
        bump(&mut counts, "representations_checked");
        *counts.entry("tuples_checked".into()).or_insert(0) += verdict.tuples_checked;
        if !verdict.accepted {
            if let Some(w) = &verdict.witness {
                defects.push(format!("pseudocharacter identity fails at tuple {w:?}"));
            }
            for p in &verdict.precondition_failures {
                defects.push(format!("precondition: {p}"));
            }
        }
        verdicts.push(serde_json::to_value(&verdict)?);

        // the defect sum is symmetric under permuting the input tuple
        for _ in 0..20 {
            let tuple = sampler.group_tuple(&cfg.group, t.d + 1);
            let base_defect = taylor_defect(&t, &tuple)?;
            let mut permuted = tuple.clone();
            permuted.reverse();
            bump(&mut counts, "symmetry_samples");
            if taylor_defect(&t, &permuted)? != base_defect {
                defects.push(format!("defect not symmetric at {tuple:?}"));
            }
        }
    }

    Ok(SuiteOutcome {
        report: ConversionReport {
            direction: "verify-taylor".into(),
            fingerprint: cfg.fingerprint(),
            counts,
            defects,
            elapsed_ms: start.elapsed().as_millis() as u64,
        },
        extras: json!({ "verdicts": verdicts }),
    })
}

pub fn verify_det(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let mut counts = BTreeMap::new();
    let mut defects = Vec::new();
    let mut law_verdicts = Vec::new();
    let mut sampler = Sampler::new(cfg.seed ^ 0xdec0);

    for (i, rep) in sampled_reps(cfg, 4)?.into_iter().enumerate() {
        let det = match cfg.perturb {
            Some((k, g)) => {
                Determinant::from_theta(perturbed_table(&ThetaTable::from_rep(&rep), k, g)?)
            }
            None => Determinant::from_rep(&rep),
        };
        let verdict = check_multiplicative_homogeneous(&det, cfg.seed.wrapping_add(i as u64), cfg.trials.min(200))?;
        *counts.entry("law_checks".into()).or_insert(0) += verdict.checks as u64;
        if !verdict.accepted {
            defects.push(format!(
                "law verdict rejected: {}",
                verdict.witness.clone().unwrap_or_default()
            ));
        }
        law_verdicts.push(json!({
            "accepted": verdict.accepted,
            "checks": verdict.checks,
            "witness": verdict.witness,
        }));

        // Lambda_i at group elements agrees with the characteristic
        // polynomial of the image
        for g in cfg.group.elements() {
            let cp = rep.image(g).charpoly();
            for i in 0..=cfg.d {
                bump(&mut counts, "lambda_cross_checks");
                if cfg.perturb.is_none() && det.lambda_at_element(g, i)? != cp.lambdas[i] {
                    defects.push(format!("Lambda_{i} mismatch at element {g}"));
                }
            }
        }

        // group-domain laws satisfy the unit criterion
        let gl = is_gl_valued(&det)?;
        bump(&mut counts, "unit_criterion_checks");
        if !gl.gl_valued {
            defects.push(format!(
                "group-domain law not GL-valued: {}",
                gl.witness.unwrap_or_default()
            ));
        }
    }

    // product law equals the law of the direct sum
    if cfg.d <= 2 {
        let mut s2 = Sampler::new(cfg.seed ^ 0x0dd);
        let r1 = s2.representation(&cfg.group, &cfg.ring, 1)?;
        let r2 = s2.representation(&cfg.group, &cfg.ring, cfg.d.max(1))?;
        let prod = Determinant::from_rep(&r1).product(&Determinant::from_rep(&r2))?;
        let dsum = Determinant::from_rep(&r1.direct_sum(&r2)?);
        for _ in 0..50 {
            let x = AlgebraElement::Group(sampler.group_algebra(&cfg.ring, &cfg.group, 3));
            bump(&mut counts, "product_law_samples");
            if prod.evaluate(&x)? != dsum.evaluate(&x)? {
                defects.push(format!("product law disagrees with direct sum at {x:?}"));
            }
        }
    }

    // pullback along the identity is the identity
    let rep = sampled_reps(cfg, 1)?.remove(0);
    let det = Determinant::from_rep(&rep);
    let pulled = det.pullback(&GroupHom::identity(&cfg.group))?;
    for g in cfg.group.elements() {
        bump(&mut counts, "pullback_checks");
        if pulled.evaluate_at_element(g)? != det.evaluate_at_element(g)? {
            defects.push(format!("identity pullback changed the value at {g}"));
        }
    }

    Ok(SuiteOutcome {
        report: ConversionReport {
            direction: "verify-det".into(),
            fingerprint: cfg.fingerprint(),
            counts,
            defects,
            elapsed_ms: start.elapsed().as_millis() as u64,
        },
        extras: json!({ "law_verdicts": law_verdicts }),
    })
}

pub fn verify_lpc(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let mut counts = BTreeMap::new();
    let mut defects = Vec::new();
    let mut sampler = Sampler::new(cfg.seed ^ 0x1afc);
    let mut pit_verdicts = Vec::new();

    for rep in sampled_reps(cfg, 3)? {
        let harvested = ThetaTable::from_rep(&rep);
        let table = match cfg.perturb {
            Some((k, g)) => perturbed_table(&harvested, k, g)?,
            None => harvested,
        };
        let pcs = vec![LafforguePC::from_rep(&rep), LafforguePC::from_theta(table)];
        for (which, pc) in pcs.iter().enumerate() {
            let theta_backed = which == 1;
            for trial in 0..cfg.trials {
                let n = 1 + sampler.usize(3);
                // keep inverse-determinant generators in the last slot in
                // the mix: they carry the non-structural part of the
                // concatenation condition
                let f = if trial % 4 == 0 {
                    DonkinExpression::det_inv(n, cfg.d, n - 1)?
                } else {
                    random_expression(&mut sampler, n, cfg.d, true)
                };

                // relabeling
                let m = f.arity();
                let zeta: Vec<usize> = (0..m).map(|_| sampler.usize(n)).collect();
                let tuple = sampler.group_tuple(&cfg.group, n);
                bump(&mut counts, "lpc1_samples");
                // rep-backed data is a class function, so relabeling is
                // exact; perturbed tables are checked through lpc2 below
                if !theta_backed || cfg.perturb.is_none() {
                    let defect = pc.lpc1_defect(&f, &zeta, &tuple)?;
                    if !defect.is_zero() {
                        defects.push(format!(
                            "relabeling defect {defect} at f={f:?}, zeta={zeta:?}, tuple={tuple:?}"
                        ));
                    }
                }

                // concatenation
                let tuple = sampler.group_tuple(&cfg.group, n + 1);
                bump(&mut counts, "lpc2_samples");
                let defect = pc.lpc2_defect(&f, &tuple)?;
                if !defect.is_zero() {
                    defects.push(format!(
                        "concatenation defect {defect} at f={f:?}, tuple={tuple:?} ({})",
                        if theta_backed { "theta-backed" } else { "rep-backed" }
                    ));
                    break;
                }

                // the substitution is an algebra morphism
                if trial < 20 {
                    let g2 = random_expression(&mut sampler, n, cfg.d, true);
                    let tuple = sampler.group_tuple(&cfg.group, n);
                    bump(&mut counts, "morphism_samples");
                    let lhs = pc.evaluate(&f.mul(&g2)?, &tuple)?;
                    let rhs = pc.evaluate(&f, &tuple)?.mul(&pc.evaluate(&g2, &tuple)?)?;
                    if lhs != rhs {
                        defects.push("substitution failed to be multiplicative".into());
                    }
                }
            }
        }
    }

    // conjugation-invariance spot checks over a large prime field
    for i in 0..10 {
        let n = 1 + sampler.usize(2);
        let f = random_expression(&mut sampler, n, cfg.d, true);
        let v = invariance_pit(&InvarianceProbe::Expr(f), cfg.d, 101, 10, cfg.seed.wrapping_add(i))?;
        bump(&mut counts, "invariance_accept_probes");
        if !v.invariant {
            defects.push(format!("generator expression failed invariance: {:?}", v.witness));
        }
        pit_verdicts.push(json!({"invariant": v.invariant, "trials": v.trials}));
    }
    for slot in 0..2usize {
        for row in 0..cfg.d.min(2) {
            let probe = InvarianceProbe::Entry { slot, row, col: 0 };
            let v = invariance_pit(&probe, cfg.d, 101, 40, cfg.seed.wrapping_add(slot as u64))?;
            bump(&mut counts, "invariance_reject_probes");
            if v.invariant {
                defects.push(format!("raw entry probe ({slot},{row},0) passed invariance"));
            }
        }
    }

    Ok(SuiteOutcome {
        report: ConversionReport {
            direction: "verify-lpc".into(),
            fingerprint: cfg.fingerprint(),
            counts,
            defects,
            elapsed_ms: start.elapsed().as_millis() as u64,
        },
        extras: json!({ "invariance": pit_verdicts }),
    })
}

pub fn verify_roundtrip(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let mut counts = BTreeMap::new();
    let mut defects = Vec::new();
    let mut reports = Vec::new();

    for (i, rep) in sampled_reps(cfg, 3)?.into_iter().enumerate() {
        let input = match cfg.perturb {
            Some((k, g)) => {
                RoundtripInput::Theta(perturbed_table(&ThetaTable::from_rep(&rep), k, g)?)
            }
            None if i % 2 == 1 => RoundtripInput::Theta(ThetaTable::from_rep(&rep)),
            None => RoundtripInput::Rep(rep),
        };
        let report = roundtrip_check(input, cfg.seed.wrapping_add(i as u64))?;
        for (k, v) in &report.counts {
            *counts.entry(k.clone()).or_insert(0) += v;
        }
        bump(&mut counts, "roundtrips");
        defects.extend(report.defects.iter().cloned());
        reports.push(serde_json::to_value(&report)?);
    }

    Ok(SuiteOutcome {
        report: ConversionReport {
            direction: "verify-roundtrip".into(),
            fingerprint: cfg.fingerprint(),
            counts,
            defects,
            elapsed_ms: start.elapsed().as_millis() as u64,
        },
        extras: json!({ "roundtrips": reports }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;

    fn cfg(group: &str, ring: &str, d: usize, seed: u64) -> SuiteConfig {
        SuiteConfig {
            group: builtin_group(group).unwrap(),
            ring: crate::ring::parse_ring_name(ring).unwrap(),
            d,
            seed,
            trials: 60,
            claimed_d: None,
            perturb: None,
        }
    }

    #[test]
    fn all_suites_accept_honest_configs() {
        let c = cfg("S3", "F5", 2, 42);
        assert!(verify_taylor(&c).unwrap().report.accepted());
        assert!(verify_det(&c).unwrap().report.accepted());
        assert!(verify_lpc(&c).unwrap().report.accepted());
        assert!(verify_roundtrip(&c).unwrap().report.accepted());
    }

    #[test]
    fn claimed_dimension_plant_fails_taylor() {
        let mut c = cfg("C2", "F5", 2, 7);
        c.claimed_d = Some(1);
        let outcome = verify_taylor(&c).unwrap();
        assert!(!outcome.report.accepted());
    }

    #[test]
    fn perturbation_plant_fails_lpc_and_roundtrip() {
        let mut c = cfg("C3", "F4", 2, 9);
        c.perturb = Some((2, 1));
        c.trials = 500;
        let outcome = verify_lpc(&c).unwrap();
        assert!(!outcome.report.accepted());
        let outcome = verify_roundtrip(&c).unwrap();
        assert!(!outcome.report.accepted());
    }

    #[test]
    fn suite_reports_are_deterministic() {
        let c = cfg("C4", "Z/9", 2, 11);
        let a = verify_taylor(&c).unwrap();
        let b = verify_taylor(&c).unwrap();
        assert_eq!(
            serde_json::to_string(&json!({
                "counts": a.report.counts, "defects": a.report.defects
            }))
            .unwrap(),
            serde_json::to_string(&json!({
                "counts": b.report.counts, "defects": b.report.defects
            }))
            .unwrap()
        );
    }
}
