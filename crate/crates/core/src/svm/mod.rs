//! Soft-margin binary SVM trained by SMO.

mod kernel;
mod scale;
mod smo;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use kernel::Kernel;
pub use scale::{standardize_apply, standardize_fit, Standardizer};
pub use smo::dual_objective;

use crate::error::{Error, Result};
use crate::types::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Box constraint.
    pub c: f64,
    pub kernel: Kernel,
    /// Maximal tolerated KKT violation.
    pub tol: f64,
    /// Iteration budget in units of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: Kernel::Linear,
            tol: 1e-4,
            max_passes: 10_000,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) || self.max_passes == 0 {
            return Err(Error::InvalidConfig("tol and max_passes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub config: SvmConfig,
    /// Training-row indices of the support vectors.
    pub support_indices: Vec<usize>,
    pub support_vectors: Vec<Vec<f64>>,
    /// α_i · y_i per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub n_features: usize,
    /// Applied to raw inputs before the kernel, when present.
    pub scaler: Option<Standardizer>,
    pub dual_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Trains on `x` as given (no scaling).
pub fn train_svm(x: &[Vec<f64>], y: &[Label], config: &SvmConfig) -> Result<SvmModel> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimMismatch(format!("{} rows, {} labels", x.len(), y.len())));
    }
    if !(y.contains(&Label::Mtbi) && y.contains(&Label::Control)) {
        return Err(Error::SingleClass);
    }
    let n_features = x[0].len();
    for (r, row) in x.iter().enumerate() {
        if row.len() != n_features {
            return Err(Error::DimMismatch(format!("row {r} has {} features", row.len())));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: r, col: c });
        }
    }

    let ys: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let gram = config.kernel.gram(x);
    let max_iter = config.max_passes.saturating_mul(x.len().max(1));
    let sol = smo::solve(&gram, &ys, config.c, config.tol, max_iter);
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} iterations without reaching tol {}",
            sol.iterations,
            config.tol
        );
    }
    let objective = dual_objective(&gram, &ys, &sol.alpha);

    let support_indices: Vec<usize> = (0..x.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(SvmModel {
        config: *config,
        support_vectors: support_indices.iter().map(|&i| x[i].clone()).collect(),
        dual_coef: support_indices.iter().map(|&i| sol.alpha[i] * ys[i]).collect(),
        support_indices,
        bias: sol.bias,
        n_features,
        scaler: None,
        dual_objective: objective,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// Imputes and standardizes with parameters fit on these rows, then trains.
/// The fitted scaler is stored in the model.
pub fn train_pipeline<R: AsRef<[Option<f64>]>>(rows: &[R], y: &[Label], config: &SvmConfig) -> Result<SvmModel> {
    let scaler = standardize_fit(rows);
    let x = standardize_apply(&scaler, rows);
    let mut model = train_svm(&x, y, config)?;
    model.scaler = Some(scaler);
    Ok(model)
}

impl SvmModel {
    /// Full-length α vector over `n_train` training rows.
    pub fn alphas(&self, n_train: usize) -> Vec<f64> {
        let mut a = vec![0.0; n_train];
        for (&i, &c) in self.support_indices.iter().zip(&self.dual_coef) {
            a[i] = c.abs();
        }
        a
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n_features {
            return Err(Error::DimMismatch(format!(
                "model expects {} features, got {len}",
                self.n_features
            )));
        }
        Ok(())
    }

    fn raw_decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &c)| c * self.config.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// f(x) = Σ α_i y_i K(x_i, x) + b, after the stored scaler if any.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(match &self.scaler {
            Some(s) => self.raw_decision(&s.apply_dense(x)),
            None => self.raw_decision(x),
        })
    }

    /// Like [`decision_value`](Self::decision_value); missing cells are
    /// imputed by the scaler's training means.
    pub fn decision_value_partial(&self, x: &[Option<f64>]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(match &self.scaler {
            Some(s) => self.raw_decision(&s.apply_row(x)),
            None => {
                let dense: Option<Vec<f64>> = x.iter().copied().collect();
                let dense =
                    dense.ok_or_else(|| Error::InvalidConfig("missing value without a fitted scaler".into()))?;
                self.raw_decision(&dense)
            }
        })
    }

    /// sign(f(x)), with f = 0 mapped to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.decision_value(x).map(Label::from_sign)
    }

    pub fn predict_partial(&self, x: &[Option<f64>]) -> Result<Label> {
        self.decision_value_partial(x).map(Label::from_sign)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    format: String,
    config: SvmConfig,
    n_features: usize,
    n_support: usize,
    support_indices: Vec<usize>,
    has_scaler: bool,
    iterations: usize,
    converged: bool,
}

/// One JSON header line, then little-endian f64 values: bias, dual
/// objective, dual coefficients, support vectors (row-major), and when
/// present the scaler means followed by its standard deviations.
pub fn encode_model(m: &SvmModel) -> Vec<u8> {
    let header = ModelHeader {
        format: "svm-f64le".into(),
        config: m.config,
        n_features: m.n_features,
        n_support: m.support_vectors.len(),
        support_indices: m.support_indices.clone(),
        has_scaler: m.scaler.is_some(),
        iterations: m.iterations,
        converged: m.converged,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    let mut put = |v: f64| out.extend_from_slice(&v.to_le_bytes());
    put(m.bias);
    put(m.dual_objective);
    m.dual_coef.iter().copied().for_each(&mut put);
    m.support_vectors.iter().flatten().copied().for_each(&mut put);
    if let Some(s) = &m.scaler {
        s.mean.iter().chain(&s.sd).copied().for_each(&mut put);
    }
    out
}

pub fn decode_model(path: &Path, bytes: &[u8]) -> Result<SvmModel> {
    let bad = |reason: String| Error::MalformedModel {
        path: path.to_path_buf(),
        reason,
    };
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("no header line".into()))?;
    let h: ModelHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(e.to_string()))?;
    let payload = &bytes[nl + 1..];
    let scaler_len = if h.has_scaler { 2 * h.n_features } else { 0 };
    let expect = 2 + h.n_support + h.n_support * h.n_features + scaler_len;
    if payload.len() != expect * 8 || h.support_indices.len() != h.n_support {
        return Err(bad(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            expect * 8
        )));
    }
    let vals: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let (head, rest) = vals.split_at(2);
    let (coef, rest) = rest.split_at(h.n_support);
    let (svs, rest) = rest.split_at(h.n_support * h.n_features);
    let support_vectors = if h.n_features == 0 {
        vec![Vec::new(); h.n_support]
    } else {
        svs.chunks(h.n_features).map(<[f64]>::to_vec).collect()
    };
    let scaler = h.has_scaler.then(|| {
        let (mean, sd) = rest.split_at(h.n_features);
        Standardizer {
            mean: mean.to_vec(),
            sd: sd.to_vec(),
        }
    });
    Ok(SvmModel {
        config: h.config,
        support_indices: h.support_indices,
        support_vectors,
        dual_coef: coef.to_vec(),
        bias: head[0],
        n_features: h.n_features,
        scaler,
        dual_objective: head[1],
        iterations: h.iterations,
        converged: h.converged,
    })
}

pub fn write_model(path: impl AsRef<Path>, m: &SvmModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(m)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<SvmModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(signs: &[f64]) -> Vec<Label> {
        signs.iter().map(|&s| Label::from_sign(s)).collect()
    }

    #[test]
    fn two_point_symmetric_problem() {
        let x = vec![vec![-1.0], vec![1.0]];
        let y = labels(&[-1.0, 1.0]);
        let cfg = SvmConfig {
            c: 100.0,
            ..Default::default()
        };
        let m = train_svm(&x, &y, &cfg).unwrap();
        assert_eq!(m.support_indices, vec![0, 1]);
        let a = m.alphas(2);
        assert!((a[0] - a[1]).abs() < 1e-12);
        assert!((a[0] - 0.5).abs() < 1e-9);
        assert!(m.bias.abs() < 1e-12);
        // Tie rule: f(0) = 0 → positive class.
        assert_eq!(m.decision_value(&[0.0]).unwrap(), 0.0);
        assert_eq!(m.predict(&[0.0]).unwrap(), Label::Mtbi);
        // Margin points sit at |f| = 1.
        assert!((m.decision_value(&[1.0]).unwrap() - 1.0).abs() < 1e-4);
        assert!((m.decision_value(&[-1.0]).unwrap() + 1.0).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            train_svm(&x, &labels(&[1.0, 1.0]), &SvmConfig::default()),
            Err(Error::SingleClass)
        ));
        let bad = vec![vec![0.0], vec![f64::NAN]];
        assert!(matches!(
            train_svm(&bad, &labels(&[1.0, -1.0]), &SvmConfig::default()),
            Err(Error::NonFiniteFeature { row: 1, col: 0 })
        ));
        let m = train_svm(&x, &labels(&[1.0, -1.0]), &SvmConfig::default()).unwrap();
        assert!(matches!(m.decision_value(&[0.0, 1.0]), Err(Error::DimMismatch(_))));
        let cfg = SvmConfig {
            c: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            train_svm(&x, &labels(&[1.0, -1.0]), &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn model_round_trip_is_bit_exact() {
        let rows: Vec<Vec<Option<f64>>> = (0..12)
            .map(|i| {
                vec![
                    Some((i as f64 * 0.9).sin()),
                    if i % 5 == 0 { None } else { Some(i as f64 / 7.0) },
                ]
            })
            .collect();
        let y: Vec<Label> = (0..12)
            .map(|i| if i % 2 == 0 { Label::Mtbi } else { Label::Control })
            .collect();
        let cfg = SvmConfig {
            kernel: Kernel::Rbf { gamma: 0.37 },
            ..Default::default()
        };
        let m = train_pipeline(&rows, &y, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.svm");
        write_model(&p, &m).unwrap();
        let r = read_model(&p).unwrap();
        assert_eq!(r, m);
        assert_eq!(encode_model(&r), encode_model(&m));
    }
}
