//! Whole-matrix analysis pipeline and the versioned JSON report.

use std::str::FromStr;
use std::time::Instant;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::decomp::{decompose, verify_decomposition};
use crate::equivalence::EquivalenceWitness;
use crate::group::{fingerprint, generate, GroupElement, GroupFingerprint, GENERATE_CAP};
use crate::hadamard::{dephase, ButsonLevel, HadamardMatrix};
use crate::magic::{
    commutation_profile, magic_basis, projection_grid, validate_magic_unitary, Commutativity,
};
use crate::phase::Phase;
use crate::square::extract_square;
use crate::{DEFAULT_MAX_ORDER, DEFAULT_TOL};

pub const SCHEMA: &str = "hadamaq-report/1";

/// Square-cell matching tolerance (see magic-square extraction).
pub const EXTRACT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub tol: f64,
    pub max_order: u64,
    /// Dense pipelines are sized for small matrices; larger inputs are
    /// rejected with a report-level error rather than ground through.
    pub max_size: usize,
    /// Wall-clock timings make the JSON non-reproducible, so they are opt-in.
    pub timings: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            tol: DEFAULT_TOL,
            max_order: DEFAULT_MAX_ORDER,
            max_size: 16,
            timings: false,
        }
    }
}

/// `f64` serialized as a JSON number with exactly 17 significant digits, so
/// reports are byte-for-byte reproducible.
#[derive(Clone, Copy, Debug)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite residual"));
        }
        let text = format!("{:.16e}", self.0);
        let number = serde_json::Number::from_str(&text)
            .map_err(|e| serde::ser::Error::custom(format!("bad number literal: {e}")))?;
        number.serialize(serializer)
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct InputSection {
    pub descriptor: String,
    pub n: usize,
    pub mode: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct HadamardSection {
    pub valid: bool,
    pub max_unit_modulus_dev: F17,
    pub max_row_residual: F17,
    pub max_col_residual: F17,
}

#[derive(Serialize, Clone, Debug)]
#[serde(untagged)]
pub enum ButsonSection {
    Finite(u64),
    Infinite(String),
}

#[derive(Serialize, Clone, Debug)]
pub struct MagicUnitarySection {
    pub valid: bool,
    pub max_projection_residual: F17,
    pub max_adjoint_residual: F17,
    pub max_sum_residual: F17,
}

#[derive(Serialize, Clone, Debug)]
pub struct CommutationSection {
    pub max_norm: F17,
    pub flag: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct GroupSection {
    pub order: usize,
    pub abelian: bool,
    /// Pairs `[element_order, multiplicity]`, sorted by order.
    pub element_orders: Vec<[u64; 2]>,
    pub center_order: usize,
    pub label: String,
}

impl GroupSection {
    fn from_fingerprint(fp: &GroupFingerprint) -> Self {
        GroupSection {
            order: fp.order,
            abelian: fp.abelian,
            element_orders: fp
                .element_orders
                .iter()
                .map(|(&o, &c)| [o, c as u64])
                .collect(),
            center_order: fp.center_order,
            label: fp.label.to_string(),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct PhaseJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re: Option<F17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<F17>,
}

impl PhaseJson {
    fn from_phase(p: &Phase) -> Self {
        match p {
            Phase::Exact(r) => PhaseJson {
                root: Some([r.num(), r.order()]),
                re: None,
                im: None,
            },
            Phase::Approx(z) => PhaseJson {
                root: None,
                re: Some(F17(z.re)),
                im: Some(F17(z.im)),
            },
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct WitnessJson {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub row_phases: Vec<PhaseJson>,
    pub col_phases: Vec<PhaseJson>,
}

impl WitnessJson {
    fn from_witness(w: &EquivalenceWitness) -> Self {
        WitnessJson {
            row_perm: w.row_perm.images().to_vec(),
            col_perm: w.col_perm.images().to_vec(),
            row_phases: w.row_phases.iter().map(PhaseJson::from_phase).collect(),
            col_phases: w.col_phases.iter().map(PhaseJson::from_phase).collect(),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct DecompositionSection {
    pub factor_sizes: Vec<u64>,
    pub witness: WitnessJson,
    pub verified: bool,
    pub residual: F17,
}

#[derive(Serialize, Clone, Debug)]
pub struct TimingsSection {
    pub validate_ms: F17,
    pub grid_ms: F17,
    pub commutation_ms: F17,
    pub structure_ms: F17,
    pub total_ms: F17,
}

#[derive(Serialize, Clone, Debug)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub input: InputSection,
    pub hadamard: HadamardSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub butson_level: Option<ButsonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_complete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magic_unitary: Option<MagicUnitarySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutation: Option<CommutationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magic_square: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSection>,
    /// Failures and skipped stages, in pipeline order.
    pub errors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsSection>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The invariant tying the sections together: a commutative profile comes
    /// with square, group and decomposition; anything else comes with none.
    pub fn is_internally_consistent(&self) -> bool {
        match self.commutation.as_ref().map(|c| c.flag.as_str()) {
            Some("commutative") => {
                self.magic_square.is_some() && self.group.is_some() && self.decomposition.is_some()
            }
            Some(_) => {
                self.magic_square.is_none() && self.group.is_none() && self.decomposition.is_none()
            }
            None => self.magic_square.is_none() && self.decomposition.is_none(),
        }
    }
}

/// Descriptor for file inputs: path plus content hash.
pub fn file_descriptor(path: &str, contents: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(contents);
    format!("{path} sha256:{:x}", hasher.finalize())
}

/// Runs the full pipeline: validate, dephase, Butson level, magic unitary,
/// commutation profile, then (when commutative) square extraction, group
/// closure and Fourier decomposition. Stage failures land in `errors`
/// instead of panicking.
pub fn analyze(h: &HadamardMatrix, descriptor: &str, options: &AnalyzeOptions) -> AnalysisReport {
    let start = Instant::now();
    let input = InputSection {
        descriptor: descriptor.to_string(),
        n: h.n(),
        mode: h.mode().to_string(),
    };
    let validation = h.validate(options.tol);
    let hadamard = HadamardSection {
        valid: validation.is_hadamard,
        max_unit_modulus_dev: F17(validation.max_unit_modulus_dev),
        max_row_residual: F17(validation.max_row_residual),
        max_col_residual: F17(validation.max_col_residual),
    };
    let mut report = AnalysisReport {
        schema: SCHEMA,
        input,
        hadamard,
        butson_level: None,
        diagonal_complete: None,
        magic_unitary: None,
        commutation: None,
        magic_square: None,
        group: None,
        decomposition: None,
        errors: Vec::new(),
        timings: None,
    };
    let validate_done = Instant::now();

    if !validation.is_hadamard {
        report.errors.push("input is not a Hadamard matrix".into());
        return report;
    }
    if h.n() > options.max_size {
        report.errors.push(format!(
            "matrix size {} exceeds max_size {}; pass a larger limit to analyze anyway",
            h.n(),
            options.max_size
        ));
        return report;
    }

    let dephased = dephase(h);
    report.diagonal_complete = Some(dephased.diagonal_complete);
    report.butson_level = Some(match h.butson_level(options.max_order) {
        ButsonLevel::Finite(l) => ButsonSection::Finite(l),
        ButsonLevel::Infinite => ButsonSection::Infinite("infinity".into()),
    });

    let grid = projection_grid(&magic_basis(&dephased.matrix));
    let mu = validate_magic_unitary(&grid, options.tol);
    report.magic_unitary = Some(MagicUnitarySection {
        valid: mu.is_magic_unitary,
        max_projection_residual: F17(mu.max_projection_residual()),
        max_adjoint_residual: F17(mu.max_adjoint_residual()),
        max_sum_residual: F17(mu.max_sum_residual()),
    });
    let grid_done = Instant::now();

    let profile = commutation_profile(&grid);
    report.commutation = Some(CommutationSection {
        max_norm: F17(profile.max_norm),
        flag: match profile.flag {
            Commutativity::Commutative => "commutative".into(),
            Commutativity::NonCommutative => "non_commutative".into(),
            Commutativity::Indeterminate => "indeterminate".into(),
        },
    });
    let commutation_done = Instant::now();

    match profile.flag {
        Commutativity::Commutative => {
            match extract_square(&grid, EXTRACT_TOL) {
                Ok(extracted) => {
                    report.magic_square = Some(extracted.square.cells().to_vec());
                    let gens: Vec<GroupElement> = extracted
                        .square
                        .rows_as_permutations()
                        .into_iter()
                        .map(GroupElement::Perm)
                        .collect();
                    match generate(&gens, GENERATE_CAP) {
                        Ok(closure) => {
                            report.group =
                                Some(GroupSection::from_fingerprint(&fingerprint(&closure)));
                        }
                        Err(e) => report.errors.push(format!("group closure failed: {e}")),
                    }
                }
                Err(e) => report.errors.push(format!("square extraction failed: {e}")),
            }
            match decompose(h, options.max_order) {
                Ok(d) => {
                    let outcome = verify_decomposition(h, &d);
                    report.decomposition = Some(DecompositionSection {
                        factor_sizes: d.factor_sizes.clone(),
                        witness: WitnessJson::from_witness(&d.witness),
                        verified: outcome.pass,
                        residual: F17(outcome.max_residual),
                    });
                }
                Err(e) => report.errors.push(format!("decomposition failed: {e}")),
            }
        }
        Commutativity::NonCommutative => {}
        Commutativity::Indeterminate => {
            report
                .errors
                .push("commutation profile is indeterminate; structure stages skipped".into());
        }
    }

    if options.timings {
        report.timings = Some(TimingsSection {
            validate_ms: F17(ms(validate_done - start)),
            grid_ms: F17(ms(grid_done - validate_done)),
            commutation_ms: F17(ms(commutation_done - grid_done)),
            structure_ms: F17(ms(commutation_done.elapsed())),
            total_ms: F17(ms(start.elapsed())),
        });
    }
    report
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::phase::Phase;

    #[test]
    fn fourier_five_report() {
        let h = catalogue::fourier(5);
        let report = analyze(&h, "fourier:5", &AnalyzeOptions::default());
        assert!(report.hadamard.valid);
        assert_eq!(report.commutation.as_ref().unwrap().flag, "commutative");
        assert_eq!(report.group.as_ref().unwrap().label, "cyclic(5)");
        let d = report.decomposition.as_ref().unwrap();
        assert_eq!(d.factor_sizes, vec![5]);
        assert!(d.verified);
        assert!(report.errors.is_empty());
        assert!(report.is_internally_consistent());
    }

    #[test]
    fn mq_at_i_report() {
        let h = catalogue::mq(Phase::i()).unwrap();
        let report = analyze(&h, "mq:1/4", &AnalyzeOptions::default());
        assert_eq!(report.group.as_ref().unwrap().label, "cyclic(4)");
        assert_eq!(report.decomposition.as_ref().unwrap().factor_sizes, vec![4]);
        assert!(report.is_internally_consistent());
    }

    #[test]
    fn haagerup_report_is_noncommutative() {
        let h = catalogue::haagerup();
        let report = analyze(&h, "haagerup", &AnalyzeOptions::default());
        assert_eq!(report.commutation.as_ref().unwrap().flag, "non_commutative");
        assert!(report.magic_square.is_none());
        assert!(report.decomposition.is_none());
        assert!(report.is_internally_consistent());
        match report.butson_level.as_ref().unwrap() {
            ButsonSection::Finite(l) => assert_eq!(*l, 4),
            ButsonSection::Infinite(_) => panic!("haagerup has level 4"),
        }
    }

    #[test]
    fn invalid_input_reports_cleanly() {
        let rows = vec![
            vec![Phase::one(), Phase::one()],
            vec![Phase::one(), Phase::one()],
        ];
        let h = HadamardMatrix::from_rows(rows).unwrap();
        let report = analyze(&h, "all-ones", &AnalyzeOptions::default());
        assert!(!report.hadamard.valid);
        assert!(!report.errors.is_empty());
        assert!(report.commutation.is_none());
        assert!(report.is_internally_consistent());
    }

    #[test]
    fn oversized_input_is_rejected() {
        let h = catalogue::fourier(6);
        let options = AnalyzeOptions {
            max_size: 4,
            ..Default::default()
        };
        let report = analyze(&h, "fourier:6", &options);
        assert!(report.hadamard.valid);
        assert!(report.errors[0].contains("max_size"));
        assert!(report.commutation.is_none());
    }

    #[test]
    fn json_is_deterministic_and_versioned() {
        let h = catalogue::fourier(5);
        let options = AnalyzeOptions::default();
        let a = analyze(&h, "fourier:5", &options).to_json();
        let b = analyze(&h, "fourier:5", &options).to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"schema\": \"hadamaq-report/1\""));
        // No timings by default.
        assert!(!a.contains("timings"));
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["group"]["order"], 5);
    }

    #[test]
    fn seventeen_digit_floats() {
        let json = serde_json::to_string(&F17(0.5)).unwrap();
        assert_eq!(json, "5.0000000000000000e-1");
        let json = serde_json::to_string(&F17(1.0 / 3.0)).unwrap();
        assert_eq!(json, "3.3333333333333331e-1");
    }

    #[test]
    fn file_descriptor_hashes_contents() {
        let d = file_descriptor("m.chm", b"chm v1 n=1 mode=exact order=1\n0\n");
        assert!(d.starts_with("m.chm sha256:"));
        assert_eq!(d.len(), "m.chm sha256:".len() + 64);
    }
}
