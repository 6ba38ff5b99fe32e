//! Comparison of an equivariant configuration modulo its group with a
//! second configuration: homology over several coefficient rings, the
//! abelianized fundamental group, and contractibility.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::action::{check_g_strict, quotient_complex, ComplexAction, GroupAction, StrictnessViolation};
use crate::complex::{build_dual_complex, collapse_attempt, DeltaComplex};
use crate::error::{Error, Result};
use crate::homology::{chain_complex, integral_homology, weight_complex_of, Coefficients, HomologyResult};
use crate::incidence::IncidenceStructure;
use crate::pi1::{abelianization, edge_path_presentation, triviality_status, TrivialityStatus};

/// Both sides of a comparison with the coefficient rings to use.
#[derive(Clone, Debug)]
pub struct McKayInput {
    pub equivariant: IncidenceStructure,
    pub group: GroupAction,
    pub quotient: IncidenceStructure,
    pub coefficients: Vec<Coefficients>,
    /// The equivariant side sits over a single point.
    pub isolated: bool,
    /// Exponential characteristic restricting `Z/n` coefficients.
    pub characteristic: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    equivariant: serde_json::Value,
    quotient: serde_json::Value,
    #[serde(default = "default_coefficients")]
    coefficients: Vec<String>,
    #[serde(default)]
    isolated: bool,
    #[serde(default, rename = "char")]
    characteristic: Option<u64>,
}

fn default_coefficients() -> Vec<String> {
    vec!["z".into()]
}

impl McKayInput {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_value(&serde_json::from_str(text)?)
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        let raw: RawInput = serde_json::from_value(value.clone())?;
        let characteristic = raw.characteristic.unwrap_or(1);
        let equivariant = IncidenceStructure::from_value(&raw.equivariant)?;
        let group = GroupAction::from_document(&raw.equivariant, &equivariant)?.unwrap_or_else(GroupAction::trivial);
        let quotient = IncidenceStructure::from_value(&raw.quotient)?;
        let coefficients =
            raw.coefficients.iter().map(|t| Coefficients::parse(t, characteristic)).collect::<Result<Vec<_>>>()?;
        Ok(Self { equivariant, group, quotient, coefficients, isolated: raw.isolated, characteristic })
    }
}

/// Outcome of one comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch { degree: usize, coefficients: Coefficients },
    Incomparable { reason: String },
}

impl Verdict {
    pub fn is_match(&self) -> bool {
        matches!(self, Verdict::Match)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Match => f.write_str("match"),
            Self::Mismatch { degree, coefficients } => write!(f, "mismatch in degree {degree} over {coefficients}"),
            Self::Incomparable { reason } => write!(f, "incomparable: {reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyComparison {
    pub coefficients: Coefficients,
    pub equivariant: HomologyResult,
    pub quotient: HomologyResult,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi1Side {
    pub abelianization: crate::homology::HomologyGroup,
    pub status: TrivialityStatus,
}

/// How far the fundamental groups were shown to agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Both groups are certified trivial, hence isomorphic.
    BothTrivial,
    /// Only the abelianizations are known to agree.
    Abelianization,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi1Comparison {
    pub equivariant: Option<Pi1Side>,
    pub quotient: Option<Pi1Side>,
    pub evidence: Evidence,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Contractibility {
    ContractibleCertified { witness: String },
    ContractibleConsistent,
    NotContractible { witness: String },
    Unknown,
}

impl Contractibility {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::ContractibleCertified { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct McKayReport {
    pub group_order: usize,
    pub strictness_violations: Vec<StrictnessViolation>,
    pub homology: Vec<HomologyComparison>,
    pub homology_verdict: Verdict,
    pub pi1: Pi1Comparison,
    pub contractibility_equivariant: Option<Contractibility>,
    pub contractibility_quotient: Option<Contractibility>,
    pub isolated: bool,
}

impl McKayReport {
    /// True when homology matches for every coefficient ring and the
    /// abelianized fundamental groups agree.
    pub fn all_match(&self) -> bool {
        self.homology_verdict.is_match() && self.pi1.verdict.is_match()
    }
}

/// Prepared sides: the enumerated action and the two complexes.
struct Sides {
    action: ComplexAction,
    orbit_complex: DeltaComplex,
    target: DeltaComplex,
}

fn prepare(input: &McKayInput) -> Result<Sides> {
    let action = ComplexAction::new(&input.equivariant, &input.group)?;
    let orbit_complex = quotient_complex(&action)?.complex;
    let target = build_dual_complex(&input.quotient)?;
    Ok(Sides { action, orbit_complex, target })
}

fn compare_homology_sides(sides: &Sides, coefficients: &[Coefficients]) -> Result<Vec<HomologyComparison>> {
    coefficients
        .iter()
        .map(|&m| {
            let equivariant = weight_complex_of(&sides.action, m)?.homology()?;
            let quotient = chain_complex(&sides.target).with_coefficients(m).homology()?;
            let verdict = match equivariant.first_difference(&quotient) {
                None => Verdict::Match,
                Some(degree) => Verdict::Mismatch { degree, coefficients: m },
            };
            Ok(HomologyComparison { coefficients: m, equivariant, quotient, verdict })
        })
        .collect()
}

/// Homology of the orbit complex against the second configuration, for
/// each requested coefficient ring.
pub fn compare_homology(input: &McKayInput) -> Result<Vec<HomologyComparison>> {
    compare_homology_sides(&prepare(input)?, &input.coefficients)
}

fn pi1_side(c: &DeltaComplex) -> Result<Pi1Side> {
    let p = edge_path_presentation(c, 0)?;
    Ok(Pi1Side { abelianization: abelianization(&p), status: triviality_status(&p) })
}

fn compare_pi1_sides(a: &DeltaComplex, b: &DeltaComplex) -> Result<Pi1Comparison> {
    let ea = pi1_side(a)?;
    let eb = pi1_side(b)?;
    let (evidence, verdict) = if !ea.abelianization.same_group(&eb.abelianization) {
        (Evidence::None, Verdict::Mismatch { degree: 1, coefficients: Coefficients::Integers })
    } else if ea.status == TrivialityStatus::Trivial && eb.status == TrivialityStatus::Trivial {
        (Evidence::BothTrivial, Verdict::Match)
    } else {
        (Evidence::Abelianization, Verdict::Match)
    };
    Ok(Pi1Comparison { equivariant: Some(ea), quotient: Some(eb), evidence, verdict })
}

/// Fundamental groups of both sides, compared through their
/// abelianizations and triviality certificates. Fails on a disconnected
/// side.
pub fn compare_pi1(input: &McKayInput) -> Result<Pi1Comparison> {
    let sides = prepare(input)?;
    compare_pi1_sides(&sides.orbit_complex, &sides.target)
}

/// Contractibility of a connected complex: certified by collapsing to a
/// point, or by vanishing reduced homology with a trivial fundamental
/// group; refuted by nonzero reduced homology.
pub fn contractibility_assessment(c: &DeltaComplex) -> Result<Contractibility> {
    let components = c.connected_components().len();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let collapse = collapse_attempt(c);
    if collapse.collapsed_to_point() {
        let n = collapse.pairs.len();
        let plural = if n == 1 { "" } else { "s" };
        return Ok(Contractibility::ContractibleCertified {
            witness: format!("collapses to a point by {n} elementary collapse{plural}"),
        });
    }
    let h = integral_homology(&chain_complex(c))?;
    for g in &h.groups {
        let reduced_zero = if g.degree == 0 { g.betti == 1 && g.torsion.is_empty() } else { g.is_zero() };
        if !reduced_zero {
            let shown = if g.degree == 0 {
                crate::homology::HomologyGroup { betti: g.betti - 1, ..g.clone() }
            } else {
                g.clone()
            };
            let reduced = if g.degree == 0 { "reduced " } else { "" };
            return Ok(Contractibility::NotContractible {
                witness: format!("{reduced}H_{} = {}", g.degree, shown.describe(Coefficients::Integers)),
            });
        }
    }
    match triviality_status(&edge_path_presentation(c, 0)?) {
        TrivialityStatus::Trivial => {
            Ok(Contractibility::ContractibleCertified { witness: "acyclic with trivial fundamental group".into() })
        }
        _ => Ok(Contractibility::ContractibleConsistent),
    }
}

fn contractibility_or_none(c: &DeltaComplex) -> Option<Contractibility> {
    contractibility_assessment(c).ok()
}

/// Runs every comparison. Disconnected sides make the fundamental group
/// comparison incomparable instead of failing.
pub fn run(input: &McKayInput) -> Result<McKayReport> {
    let sides = prepare(input)?;
    let homology = compare_homology_sides(&sides, &input.coefficients)?;
    let homology_verdict = homology.iter().map(|c| c.verdict.clone()).find(|v| !v.is_match()).unwrap_or(Verdict::Match);
    let pi1 = match compare_pi1_sides(&sides.orbit_complex, &sides.target) {
        Ok(p) => p,
        Err(Error::Disconnected { components }) => Pi1Comparison {
            equivariant: pi1_side(&sides.orbit_complex).ok(),
            quotient: pi1_side(&sides.target).ok(),
            evidence: Evidence::None,
            verdict: Verdict::Incomparable { reason: format!("a side is disconnected ({components} components)") },
        },
        Err(e) => return Err(e),
    };
    Ok(McKayReport {
        group_order: sides.action.order(),
        strictness_violations: check_g_strict(&input.equivariant, &sides.action),
        homology,
        homology_verdict,
        pi1,
        contractibility_equivariant: contractibility_or_none(&sides.orbit_complex),
        contractibility_quotient: contractibility_or_none(&sides.target),
        isolated: input.isolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::{cycle3, d_shape, tetrahedron};
    use crate::incidence::parse_incidence;

    fn input(equivariant: serde_json::Value, quotient: serde_json::Value, coefficients: &[&str]) -> McKayInput {
        McKayInput::from_value(&serde_json::json!({
            "equivariant": equivariant, "quotient": quotient, "coefficients": coefficients
        }))
        .unwrap()
    }

    fn a1() -> McKayInput {
        input(
            serde_json::json!({"components": ["C"], "group": {"generators": [{"name": "i"}]}}),
            serde_json::json!({"components": ["E"]}),
            &["z", "z2", "z3", "q"],
        )
    }

    #[test]
    fn a1_pair_matches() {
        let report = run(&a1()).unwrap();
        assert!(report.all_match());
        assert_eq!(report.homology.len(), 4);
        assert_eq!(report.pi1.evidence, Evidence::BothTrivial);
        assert!(report.contractibility_quotient.as_ref().unwrap().is_certified());
        assert!(report.contractibility_equivariant.as_ref().unwrap().is_certified());
    }

    #[test]
    fn tree_against_circle_mismatches() {
        let tree = d_shape().to_value();
        let circle = cycle3().to_value();
        let i = input(tree, circle, &["z"]);
        let h = compare_homology(&i).unwrap();
        assert_eq!(h[0].verdict, Verdict::Mismatch { degree: 1, coefficients: Coefficients::Integers });
        let p = compare_pi1(&i).unwrap();
        assert_eq!(p.verdict, Verdict::Mismatch { degree: 1, coefficients: Coefficients::Integers });
    }

    #[test]
    fn empty_sides_match_vacuously() {
        let empty = serde_json::json!({"components": []});
        let i = input(empty.clone(), empty, &["z", "q"]);
        let report = run(&i).unwrap();
        assert!(report.homology_verdict.is_match());
        assert!(matches!(report.pi1.verdict, Verdict::Incomparable { .. }));
    }

    #[test]
    fn two_circles_have_matching_abelianizations() {
        let square = parse_incidence(
            r#"{"components": ["A","B","C","D"], "strata": [
                {"components": ["A","B"], "pieces": ["p"]}, {"components": ["B","C"], "pieces": ["p"]},
                {"components": ["C","D"], "pieces": ["p"]}, {"components": ["A","D"], "pieces": ["p"]}]}"#,
        )
        .unwrap();
        let i = input(cycle3().to_value(), square.to_value(), &["z"]);
        let p = compare_pi1(&i).unwrap();
        assert_eq!(p.verdict, Verdict::Match);
        assert_eq!(p.evidence, Evidence::Abelianization);
    }

    #[test]
    fn contractibility_examples() {
        let tree = build_dual_complex(&d_shape()).unwrap();
        assert!(matches!(
            contractibility_assessment(&tree).unwrap(),
            Contractibility::ContractibleCertified { witness } if witness.contains("collapses")
        ));
        let circle = build_dual_complex(&cycle3()).unwrap();
        assert_eq!(
            contractibility_assessment(&circle).unwrap(),
            Contractibility::NotContractible { witness: "H_1 = Z".into() }
        );
        let sphere = build_dual_complex(&tetrahedron()).unwrap();
        assert_eq!(
            contractibility_assessment(&sphere).unwrap(),
            Contractibility::NotContractible { witness: "H_2 = Z".into() }
        );
        let two = build_dual_complex(&IncidenceStructure::new(["A", "B"]).unwrap()).unwrap();
        assert!(matches!(contractibility_assessment(&two), Err(Error::Disconnected { components: 2 })));
    }
}
