use super::br::BrParams;
use super::Controller;
use crate::error::{ensure_finite, LabError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum BlueprintKind {
    /// `u = -alpha q`.
    ConstantGain { alpha: f64 },
    /// `u = -beta kappa(T - t, beta; a) q`; `beta` is an assumption, not the true `b`.
    OptimalKnownB { beta: f64, a: f64, horizon: f64 },
    Br(BrParams),
}

/// Immutable strategy description; controllers are instantiated per path.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyBlueprint {
    pub kind: BlueprintKind,
    /// Set when the strategy was built for `q0 < 0`.
    pub symmetric: bool,
}

pub fn make_constant_gain(alpha: f64) -> Result<StrategyBlueprint> {
    ensure_finite("alpha", alpha)?;
    Ok(StrategyBlueprint { kind: BlueprintKind::ConstantGain { alpha }, symmetric: false })
}

pub fn make_optimal_known(beta: f64, a: f64, horizon: f64) -> Result<StrategyBlueprint> {
    ensure_finite("beta", beta)?;
    ensure_finite("a", a)?;
    ensure_finite("T", horizon)?;
    if horizon <= 0.0 {
        return Err(LabError::Domain(format!("T must be > 0, got {horizon}")));
    }
    Ok(StrategyBlueprint {
        kind: BlueprintKind::OptimalKnownB { beta, a, horizon },
        symmetric: false,
    })
}

pub fn make_br(a: f64, horizon: f64, q0: f64) -> Result<StrategyBlueprint> {
    StrategyBlueprint::br(BrParams::new(a, horizon, q0)?)
}

impl StrategyBlueprint {
    pub fn br(params: BrParams) -> Result<Self> {
        params.validate()?;
        let symmetric = params.q0 < 0.0;
        Ok(StrategyBlueprint { kind: BlueprintKind::Br(params), symmetric })
    }

    pub fn br_params(&self) -> Option<&BrParams> {
        match &self.kind {
            BlueprintKind::Br(p) => Some(p),
            _ => None,
        }
    }

    /// Short identifier such as `cg(1)`, `opt(0.5)` or `br`.
    pub fn label(&self) -> String {
        match &self.kind {
            BlueprintKind::ConstantGain { alpha } => format!("cg({alpha})"),
            BlueprintKind::OptimalKnownB { beta, .. } => format!("opt({beta})"),
            BlueprintKind::Br(_) => "br".into(),
        }
    }

    /// Check the blueprint against the simulated problem and create a fresh controller.
    pub fn instantiate(&self, horizon: f64) -> Result<Controller> {
        match &self.kind {
            BlueprintKind::OptimalKnownB { horizon: h, .. } if *h != horizon => {
                return Err(LabError::Domain(format!(
                    "optimal-gain blueprint built for T={h}, simulated with T={horizon}"
                )))
            }
            BlueprintKind::Br(p) if p.horizon != horizon => {
                return Err(LabError::Domain(format!(
                    "epoch blueprint built for T={}, simulated with T={horizon}",
                    p.horizon
                )))
            }
            _ => {}
        }
        Ok(Controller::new(self, horizon))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BlueprintDoc::from(self)).expect("blueprint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BlueprintDoc =
            serde_json::from_str(text).map_err(|e| LabError::Config(format!("blueprint: {e}")))?;
        doc.into_blueprint()
    }
}

/// Flat JSON form shared with config files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BlueprintDoc {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub big_a: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_star: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
}

impl From<&StrategyBlueprint> for BlueprintDoc {
    fn from(bp: &StrategyBlueprint) -> Self {
        match &bp.kind {
            BlueprintKind::ConstantGain { alpha } => {
                BlueprintDoc { kind: "cg".into(), alpha: Some(*alpha), ..Default::default() }
            }
            BlueprintKind::OptimalKnownB { beta, a, horizon } => BlueprintDoc {
                kind: "opt".into(),
                beta: Some(*beta),
                a: Some(*a),
                horizon: Some(*horizon),
                ..Default::default()
            },
            BlueprintKind::Br(p) => BlueprintDoc {
                kind: "br".into(),
                big_a: Some(p.big_a),
                k_gain: Some(p.k_gain),
                tau: Some(p.tau),
                nu_star: Some(p.nu_star),
                a: Some(p.a),
                horizon: Some(p.horizon),
                q0: Some(p.q0),
                ..Default::default()
            },
        }
    }
}

fn need(x: Option<f64>, name: &str, kind: &str) -> Result<f64> {
    x.ok_or_else(|| LabError::Config(format!("{kind} blueprint needs \"{name}\"")))
}

impl BlueprintDoc {
    pub(crate) fn into_blueprint(self) -> Result<StrategyBlueprint> {
        let kind = self.kind.as_str();
        let stray = |fields: &[(&str, bool)]| -> Result<()> {
            for (name, present) in fields {
                if *present {
                    return Err(LabError::Config(format!("{kind} blueprint does not take \"{name}\"")));
                }
            }
            Ok(())
        };
        match kind {
            "cg" => {
                stray(&[
                    ("beta", self.beta.is_some()),
                    ("A", self.big_a.is_some()),
                    ("K", self.k_gain.is_some()),
                    ("tau", self.tau.is_some()),
                    ("nu_star", self.nu_star.is_some()),
                ])?;
                make_constant_gain(need(self.alpha, "alpha", kind)?)
            }
            "opt" => {
                stray(&[
                    ("alpha", self.alpha.is_some()),
                    ("A", self.big_a.is_some()),
                    ("K", self.k_gain.is_some()),
                    ("tau", self.tau.is_some()),
                    ("nu_star", self.nu_star.is_some()),
                ])?;
                make_optimal_known(
                    need(self.beta, "beta", kind)?,
                    need(self.a, "a", kind)?,
                    need(self.horizon, "T", kind)?,
                )
            }
            "br" => {
                stray(&[("alpha", self.alpha.is_some()), ("beta", self.beta.is_some())])?;
                let a = need(self.a, "a", kind)?;
                let p = BrParams::with_constants(
                    a,
                    need(self.horizon, "T", kind)?,
                    need(self.q0, "q0", kind)?,
                    self.big_a,
                    self.k_gain,
                    self.tau,
                )?;
                if let Some(n) = self.nu_star {
                    if n != p.nu_star {
                        return Err(LabError::Config(format!(
                            "nu_star={n} disagrees with floor(aT)={}",
                            p.nu_star
                        )));
                    }
                }
                StrategyBlueprint::br(p)
            }
            other => Err(LabError::Config(format!("unknown strategy kind \"{other}\""))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trips() {
        for bp in [
            make_constant_gain(-1.5).unwrap(),
            make_optimal_known(0.3, -2.0, 1.0).unwrap(),
            make_br(10.0, 1.0, -1.0).unwrap(),
            make_br(0.5, 2.0, 3.0).unwrap(),
        ] {
            let back = StrategyBlueprint::from_json(&bp.to_json()).unwrap();
            assert_eq!(back, bp);
        }
    }

    #[test]
    fn json_rejects_bad_documents() {
        assert!(StrategyBlueprint::from_json(r#"{"kind":"cg"}"#).is_err());
        assert!(StrategyBlueprint::from_json(r#"{"kind":"cg","alpha":1,"gamma":2}"#).is_err());
        assert!(StrategyBlueprint::from_json(r#"{"kind":"cg","alpha":1,"beta":2}"#).is_err());
        assert!(StrategyBlueprint::from_json(r#"{"kind":"br","a":10,"T":1,"q0":1,"nu_star":3}"#).is_err());
        assert!(StrategyBlueprint::from_json(r#"{"kind":"br","a":10,"T":1,"q0":1,"K":10}"#).is_err());
        assert!(StrategyBlueprint::from_json(r#"{"kind":"xx"}"#).is_err());
    }

    #[test]
    fn symmetry_flag_follows_start_sign() {
        assert!(make_br(10.0, 1.0, -2.0).unwrap().symmetric);
        assert!(!make_br(10.0, 1.0, 2.0).unwrap().symmetric);
    }
}
