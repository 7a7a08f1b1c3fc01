//! Running the `check` directives of a resolved `.pd` file.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diagram::{evaluate, typecheck, CheckDecl, Diagnostic, EvalError, Program, Property};
use crate::groups::{covariance_residual, is_intertwiner, no_signalling, qpart_membership, OrientedPartition, Representation};
use crate::numerics::Tolerances;
use crate::par::Execution;
use crate::systems::{self, ProcessTensor};
use crate::theories::{membership, Theory, TheoryName};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TargetError {
    #[error("unknown diagram or box `{0}`")]
    Unknown(String),
    #[error("diagram `{0}` does not typecheck")]
    IllTyped(String, Vec<Diagnostic>),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error(transparent)]
    Target(#[from] TargetError),
}

/// The process a box or diagram denotes. Diagrams are typechecked against
/// `theory` first.
pub fn target_process(prog: &Program, name: &str, theory: TheoryName, exec: Execution) -> Result<ProcessTensor, TargetError> {
    if let Some(b) = prog.boxes.get(name) {
        return Ok(b.clone());
    }
    let d = prog.diagram(name).ok_or_else(|| TargetError::Unknown(name.to_string()))?;
    typecheck(d, Theory::of(theory).caps).map_err(|v| TargetError::IllTyped(name.to_string(), v))?;
    Ok(evaluate(d, &prog.boxes, exec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub property: String,
    pub target: String,
    pub theory: TheoryName,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} in {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.property,
            self.target,
            self.theory
        )?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

fn reps<'a>(prog: &'a Program, decl: &CheckDecl) -> Option<(&'a Representation, &'a Representation)> {
    let (a, b) = decl.reps.as_ref()?;
    Some((prog.reps.get(a)?, prog.reps.get(b)?))
}

pub fn run_check(prog: &Program, decl: &CheckDecl, tol: &Tolerances, exec: Execution) -> Result<CheckResult, CheckError> {
    if let Property::Unknown(p) = &decl.property {
        return Err(CheckError::UnknownProperty(p.clone()));
    }
    let f = target_process(prog, &decl.target, decl.theory, exec)?;
    let (passed, detail) = match &decl.property {
        Property::Causal => {
            let r = systems::causality_residual(&f);
            (systems::is_causal(&f, tol), format!("residual {r:.3e}"))
        }
        Property::Retrocausal => {
            let r = systems::identity_residual(&f);
            (systems::preserves_identity(&f, tol), format!("residual {r:.3e}"))
        }
        Property::Unital => {
            let r = systems::max_mixed_residual(&f);
            (systems::preserves_max_mixed(&f, tol), format!("residual {r:.3e}"))
        }
        Property::Member => {
            let v = match (decl.theory, reps(prog, decl)) {
                (TheoryName::QPart, Some((rin, rout))) => qpart_membership(&f, rin, rout, tol),
                (TheoryName::QRep, Some((rin, rout))) => {
                    let mut v = membership(TheoryName::QRep, &f, tol);
                    let ok = is_intertwiner(&f, rin, rout, tol);
                    v.checks.push(crate::theories::CheckOutcome::new(
                        "intertwiner",
                        ok.as_ref().copied().unwrap_or(false),
                        ok.err().map(|e| e.to_string()).unwrap_or_default(),
                    ));
                    v.member = v.checks.iter().all(|c| c.passed);
                    v
                }
                (t, _) => membership(t, &f, tol),
            };
            let detail = v
                .failures()
                .map(|c| if c.detail.is_empty() { c.name.clone() } else { format!("{} ({})", c.name, c.detail) })
                .collect::<Vec<_>>()
                .join("; ");
            (v.member, detail)
        }
        Property::Intertwiner => match reps(prog, decl) {
            Some((rin, rout)) => match covariance_residual(&f, rin, rout, exec) {
                Ok(r) => (r <= tol.eq_rel * 1f64.max(f.choi().max_norm()), format!("residual {r:.3e}")),
                Err(e) => (false, e.to_string()),
            },
            None => (false, "needs `using <rep> -> <rep>`".to_string()),
        },
        Property::NoSignalling => {
            let ns = no_signalling(&f, &OrientedPartition::from_orientations(&f), tol);
            let detail = [&ns.causal_to_retro, &ns.retro_to_causal]
                .iter()
                .filter(|d| !d.passed)
                .map(|d| d.detail.clone())
                .collect::<Vec<_>>()
                .join("; ");
            (ns.passed(), detail)
        }
        Property::Unknown(_) => unreachable!(),
    };
    Ok(CheckResult { property: decl.property.name().to_string(), target: decl.target.clone(), theory: decl.theory, passed, detail })
}
