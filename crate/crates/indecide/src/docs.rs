//! Key-value documents for rules, calibration reports and fitted models.

use indecide_core::calibration::{
    CalibrationReport, MlrRule, MlrSymmetricRule, MulticlassRule, NpRule, Rule, SelectiveBinaryRule,
};
use indecide_core::models::linalg::Matrix;
use indecide_core::models::{LdaModel, LogisticModel, ScoreModel};

use crate::format::{fmt_f64, KvDoc};
use crate::FormatError;

/// Writes the rule's kind and thresholds into `doc`.
fn put_rule(doc: &mut KvDoc, rule: &Rule) {
    match rule {
        Rule::Selective(r) => {
            doc.set("rule", "selective").set_f64("tau", r.tau);
        }
        Rule::Np(r) => {
            doc.set("rule", "np").set_f64("tau1", r.tau1).set_f64("tau2", r.tau2);
        }
        Rule::Multiclass(r) => {
            doc.set("rule", "multiclass").set_f64("threshold", r.threshold);
        }
        Rule::Mlr(r) => {
            doc.set("rule", "mlr").set_f64("tau1", r.tau1).set_f64("tau2", r.tau2);
        }
        Rule::MlrSymmetric(r) => {
            doc.set("rule", "mlr-symmetric").set_f64("tau", r.tau);
        }
    }
}

/// Rule document.
pub fn rule_doc(rule: &Rule) -> KvDoc {
    let mut doc = KvDoc::new("rule");
    put_rule(&mut doc, rule);
    doc
}

/// Parses a rule document.
pub fn parse_rule(text: &str) -> Result<Rule, FormatError> {
    let doc = KvDoc::parse(text, "rule")?;
    rule_from(&doc)
}

fn rule_from(doc: &KvDoc) -> Result<Rule, FormatError> {
    Ok(match doc.require("rule")? {
        "selective" => Rule::Selective(SelectiveBinaryRule {
            tau: doc.require_f64("tau")?,
        }),
        "np" => Rule::Np(NpRule {
            tau1: doc.require_f64("tau1")?,
            tau2: doc.require_f64("tau2")?,
        }),
        "multiclass" => Rule::Multiclass(MulticlassRule {
            threshold: doc.require_f64("threshold")?,
        }),
        "mlr" => Rule::Mlr(MlrRule {
            tau1: doc.require_f64("tau1")?,
            tau2: doc.require_f64("tau2")?,
        }),
        "mlr-symmetric" => Rule::MlrSymmetric(MlrSymmetricRule {
            tau: doc.require_f64("tau")?,
        }),
        other => return Err(FormatError::schema(0, format!("unknown rule kind `{other}`"))),
    })
}

/// Report document: the mode, the caller's targets, the rule and the
/// achieved errors. Missing estimates are omitted.
pub fn report_doc(mode: &str, targets: &[(&str, f64)], report: &CalibrationReport) -> KvDoc {
    let mut doc = KvDoc::new("report");
    doc.set("mode", mode).set("n", report.n.to_string());
    for (k, v) in targets {
        doc.set_f64(k, *v);
    }
    put_rule(&mut doc, &report.rule);
    doc.set_f64("gamma_hat", report.gamma_hat);
    if let Some(g) = report.gamma_grid {
        doc.set_f64("gamma_grid", g);
    }
    let a = report.achieved;
    for (k, v) in [
        ("conditional_error", a.conditional_error),
        ("type1", a.type1),
        ("type2", a.type2),
    ] {
        if let Some(v) = v {
            doc.set_f64(k, v);
        }
    }
    if let Some(p) = report.power {
        doc.set_f64("power_at_alpha1", p.power_at_alpha1)
            .set("needs_indecision", p.needs_indecision.to_string());
    }
    doc.set("feasible", report.feasible.to_string());
    doc
}

/// Extracts the rule embedded in a report document.
pub fn rule_from_report(text: &str) -> Result<Rule, FormatError> {
    rule_from(&KvDoc::parse(text, "report")?)
}

/// A fitted scorer that can be saved and reloaded.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    /// Linear discriminant analysis.
    Lda(LdaModel),
    /// Logistic regression.
    Logistic(LogisticModel),
}

impl SavedModel {
    /// The model as a scorer.
    pub fn scorer(&self) -> &dyn ScoreModel {
        match self {
            SavedModel::Lda(m) => m,
            SavedModel::Logistic(m) => m,
        }
    }
}

/// Model document.
pub fn model_doc(model: &SavedModel) -> KvDoc {
    let mut doc = KvDoc::new("model");
    match model {
        SavedModel::Lda(m) => {
            let d = m.dim();
            doc.set("model", "lda").set("dim", d.to_string());
            doc.set_f64("prior_1", m.priors[0]).set_f64("prior_2", m.priors[1]);
            for (c, mean) in m.class_means.iter().enumerate() {
                for (j, v) in mean.iter().enumerate() {
                    doc.set_f64(&format!("mean_{}_{}", c + 1, j + 1), *v);
                }
            }
            for i in 0..d {
                for j in 0..d {
                    doc.set_f64(&format!("cov_{}_{}", i + 1, j + 1), m.pooled_covariance.get(i, j));
                }
            }
            doc.set("regularized", m.regularized.to_string());
        }
        SavedModel::Logistic(m) => {
            doc.set("model", "logistic").set("dim", m.weights.len().to_string());
            for (j, v) in m.weights.iter().enumerate() {
                doc.set_f64(&format!("weight_{}", j + 1), *v);
            }
            doc.set_f64("bias", m.bias)
                .set("converged", m.converged.to_string())
                .set("iterations", m.iterations.to_string());
        }
    }
    doc
}

fn require_usize(doc: &KvDoc, key: &str) -> Result<usize, FormatError> {
    let raw = doc.require(key)?;
    raw.parse()
        .map_err(|_| FormatError::schema(0, format!("key `{key}`: `{raw}` is not a count")))
}

fn require_bool(doc: &KvDoc, key: &str) -> Result<bool, FormatError> {
    let raw = doc.require(key)?;
    raw.parse()
        .map_err(|_| FormatError::schema(0, format!("key `{key}`: `{raw}` is not true/false")))
}

/// Parses a model document.
pub fn parse_model(text: &str) -> Result<SavedModel, FormatError> {
    let doc = KvDoc::parse(text, "model")?;
    let d = require_usize(&doc, "dim")?;
    if d == 0 {
        return Err(FormatError::schema(0, "model dimension must be positive"));
    }
    match doc.require("model")? {
        "lda" => {
            let mut means = [vec![0.0; d], vec![0.0; d]];
            for (c, mean) in means.iter_mut().enumerate() {
                for (j, v) in mean.iter_mut().enumerate() {
                    *v = doc.require_f64(&format!("mean_{}_{}", c + 1, j + 1))?;
                }
            }
            let mut cov = Matrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    *cov.get_mut(i, j) = doc.require_f64(&format!("cov_{}_{}", i + 1, j + 1))?;
                }
            }
            let priors = [doc.require_f64("prior_1")?, doc.require_f64("prior_2")?];
            Ok(SavedModel::Lda(LdaModel::from_parts(means, cov, priors)?))
        }
        "logistic" => {
            let weights = (1..=d)
                .map(|j| doc.require_f64(&format!("weight_{j}")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SavedModel::Logistic(LogisticModel {
                weights,
                bias: doc.require_f64("bias")?,
                converged: require_bool(&doc, "converged")?,
                iterations: require_usize(&doc, "iterations")?,
            }))
        }
        other => Err(FormatError::schema(0, format!("unknown model kind `{other}`"))),
    }
}

/// Formats an optional float for tables.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use indecide_core::models::{fit_lda, fit_logistic};

    #[test]
    fn rules_round_trip() {
        let rules = [
            Rule::Selective(SelectiveBinaryRule { tau: f64::INFINITY }),
            Rule::Np(NpRule { tau1: 0.2, tau2: 0.6 }),
            Rule::Multiclass(MulticlassRule { threshold: 1.0 / 3.0 }),
            Rule::Mlr(MlrRule { tau1: 1.5, tau2: -0.25 }),
            Rule::MlrSymmetric(MlrSymmetricRule { tau: 0.1 }),
        ];
        for r in rules {
            assert_eq!(parse_rule(&rule_doc(&r).render()).unwrap(), r);
        }
    }

    #[test]
    fn models_round_trip() {
        let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 0.1, ((i * 7) % 5) as f64]).collect();
        let ys: Vec<u8> = (0..40).map(|i| if i % 3 == 0 { 1 } else { 2 }).collect();
        let lda = SavedModel::Lda(fit_lda(&xs, &ys).unwrap());
        let logit = SavedModel::Logistic(fit_logistic(&xs, &ys, 1e-10, 100).unwrap());
        for m in [lda, logit] {
            let back = parse_model(&model_doc(&m).render()).unwrap();
            for x in &xs {
                assert_eq!(back.scorer().predict_eta(x).unwrap(), m.scorer().predict_eta(x).unwrap());
            }
        }
    }
}
